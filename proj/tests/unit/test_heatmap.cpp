#include <doctest.h>

#include <cmath>
#include <random>

#include "dfscan/error.hpp"
#include "dfscan/heatmap.hpp"
#include "support.hpp"

using namespace dfscan;

namespace {

Heatmap filled(int w, int h, double base, double slope_az, double slope_el, Interval az = {-45, 45},
               Interval el = {0, 30})
{
    Heatmap m(w, h, az, el, "test band");
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < w; ++i)
            m.set(i, j, base + slope_az * i + slope_el * j);
    return m;
}

Heatmap random_map(std::mt19937_64& rng, int w, int h)
{
    std::uniform_real_distribution<double> v(-100, -30);
    Heatmap m(w, h, {-90, 90}, {0, 80});
    for (int j = 0; j < h; ++j)
        for (int i = 0; i < w; ++i)
            m.set(i, j, v(rng));
    return m;
}

double luma(const Rgb& c)
{
    return 0.2126 * c.r + 0.7152 * c.g + 0.0722 * c.b;
}

} // namespace

TEST_CASE("pixel centers")
{
    CHECK(pixel_center({-90, 90}, 100, 0) == doctest::Approx(-89.1));
    CHECK(pixel_center({-90, 90}, 100, 99) == doctest::Approx(89.1));
    CHECK(pixel_center({0, 30}, 25, 8) == doctest::Approx(10.2));
    CHECK(pixel_center({-45, 45}, 50, 41) == doctest::Approx(29.7));
}

TEST_CASE("heatmap cells")
{
    Heatmap m(3, 2, {0, 3}, {0, 2});
    CHECK(m.invalid_count() == 6);
    m.set(1, 1, -40.0);
    CHECK(m.valid(1, 1));
    CHECK(m.at(1, 1) == -40.0);
    CHECK(m.values()[1 * 3 + 1] == -40.0);
    m.set(0, 0, std::nan(""));
    CHECK_FALSE(m.valid(0, 0));
    CHECK_THROWS_AS(m.set(3, 0, 1.0), RangeError);
    CHECK_THROWS_AS(Heatmap(0, 1, {0, 1}, {0, 1}), ConfigError);
    CHECK(m.value_range() == std::pair{-40.0, -40.0});
    CHECK_THROWS_AS(Heatmap(1, 1, {0, 1}, {0, 1}).value_range(), DomainError);
}

TEST_CASE("argmax prefers the left-topmost cell among ties")
{
    Heatmap m = filled(4, 3, 0.0, 0.0, 0.0);
    CHECK(argmax(m) == std::pair{0, 2});
    m.set(2, 1, 5.0);
    m.set(3, 1, 5.0);
    CHECK(argmax(m) == std::pair{2, 1});
    m.set(1, 0, 5.0);
    CHECK(argmax(m) == std::pair{2, 1});
    m.set_invalid(2, 1);
    CHECK(argmax(m) == std::pair{3, 1});
}

TEST_CASE("normalize and clip")
{
    const Heatmap ref = filled(5, 4, -80.0, 1.0, 4.0); // spans -80 .. -64
    auto out = normalize_clip({ref}, 0);
    CHECK(out[0].normalized());
    CHECK(out[0].value_range() == std::pair{0.0, 1.0});
    CHECK(out[0].at(0, 0) == 0.0);
    CHECK(out[0].at(4, 3) == 1.0);

    Heatmap hot = ref;
    hot.set(4, 3, -59.0);
    out = normalize_clip({ref, hot}, 0);
    CHECK(out[1].at(4, 3) == 1.0);

    // 20 dB reference span, sibling 10 dB colder everywhere.
    const Heatmap wide = filled(5, 1, -90.0, 5.0, 0.0); // -90 .. -70
    const Heatmap cold = filled(5, 1, -100.0, 5.0, 0.0);
    out = normalize_clip({wide, cold}, 0);
    for (int i = 0; i < 5; ++i)
        CHECK(out[1].at(i, 0) == doctest::Approx(std::max(0.0, out[0].at(i, 0) - 0.5)));

    std::vector<std::string> warnings;
    out = normalize_clip({filled(3, 3, -50, 0, 0)}, 0, &warnings);
    CHECK(warnings.size() == 1);
    CHECK(out[0].at(1, 1) == 0.5);

    CHECK_THROWS_AS(normalize_clip({ref, filled(4, 4, 0, 0, 0)}, 0), ConfigError);
    CHECK_THROWS_AS(normalize_clip({ref}, 1), ConfigError);
}

TEST_CASE("normalize_clip is idempotent and keeps the argmax")
{
    std::mt19937_64 rng(55);
    std::uniform_int_distribution<int> dim(1, 30);
    for (int i = 0; i < 200; ++i) {
        const int w = dim(rng), h = dim(rng);
        const auto m = random_map(rng, w, h);
        const auto once = normalize_clip({m}, 0);
        const auto twice = normalize_clip(once, 0);
        for (int j = 0; j < h; ++j)
            for (int k = 0; k < w; ++k)
                CHECK(twice[0].at(k, j) == doctest::Approx(once[0].at(k, j)).epsilon(1e-12));
        if (w * h > 1)
            CHECK(argmax(once[0]) == argmax(m));
    }
}

TEST_CASE("invalid cells stay invalid through normalization")
{
    Heatmap m = filled(3, 3, -60, 1, 1);
    m.set_invalid(1, 1);
    const auto n = normalize_clip({m}, 0)[0];
    CHECK_FALSE(n.valid(1, 1));
    CHECK(n.invalid_count() == 1);
}

TEST_CASE("PGM export")
{
    Heatmap one(1, 1, {0, 1}, {0, 1});
    one.set(0, 0, 1.0);
    CHECK_THROWS_AS(encode_pgm(one), DomainError);
    one.set_normalized(true);
    auto bytes = encode_pgm(one);
    CHECK(bytes.substr(bytes.size() - 2) == std::string("\xFF\xFF", 2));
    one.set(0, 0, 0.0);
    bytes = encode_pgm(one);
    CHECK(bytes.substr(bytes.size() - 2) == std::string("\x00\x00", 2));

    Heatmap two(2, 2, {0, 2}, {0, 2});
    two.set(0, 0, 0.0);
    two.set(1, 0, 0.25);
    two.set(0, 1, 0.5);
    two.set(1, 1, 1.0);
    two.set_normalized(true);
    const std::string golden = std::string("P5\n# az_deg 0 2 el_deg 0 2 row0=el_max col0=az_min\n2 2\n65535\n") +
                               std::string("\x80\x00\xFF\xFF\x00\x00\x40\x00", 8);
    CHECK(encode_pgm(two) == golden);

    testing::TempDir dir("pgm");
    export_pgm(two, dir / "m.pgm");
    CHECK(testing::slurp(dir / "m.pgm") == golden);
    CHECK_THROWS_AS(export_pgm(two, dir / "no/such/dir/m.pgm"), IoError);
}

TEST_CASE("PGM and CSV round trips")
{
    std::mt19937_64 rng(66);
    testing::TempDir dir("roundtrip");
    for (int t = 0; t < 20; ++t) {
        const auto m = normalize_clip({random_map(rng, 1 + t, 1 + (t * 7) % 13)}, 0)[0];
        export_pgm(m, dir / "m.pgm");
        const auto p = read_pgm(dir / "m.pgm");
        REQUIRE(p.same_shape(m));
        CHECK(p.az_range() == m.az_range());
        CHECK(p.el_range() == m.el_range());
        for (int j = 0; j < m.el_pixels(); ++j)
            for (int i = 0; i < m.az_pixels(); ++i)
                CHECK(std::abs(p.at(i, j) - m.at(i, j)) <= 0.5 / 65535 + 1e-12);

        export_csv(m, dir / "m.csv");
        const auto c = read_csv(dir / "m.csv");
        CHECK(c.same_shape(m));
        for (int j = 0; j < m.el_pixels(); ++j)
            for (int i = 0; i < m.az_pixels(); ++i)
                CHECK(c.at(i, j) == m.at(i, j));
    }
}

TEST_CASE("CSV layout")
{
    Heatmap m(2, 2, {-10, 10}, {0, 20}, "ISM 2.4");
    m.set(0, 0, -80.5);
    m.set(1, 0, -70.25);
    m.set(0, 1, -60.0);
    m.set_complete(false);
    const auto text = encode_csv(m);
    CHECK(text == "# dfscan-heatmap units=dBm az_range=-10:10 el_range=0:20 complete=0 rows=el_descending band=ISM_2.4\n"
                  "el_deg\\az_deg,-5,5\n"
                  "15,-60,nan\n"
                  "5,-80.5,-70.25\n");
    auto back = parse_csv(text);
    CHECK(back.band_label() == "ISM_2.4");
    back.set_band_label(m.band_label());
    CHECK(back == m);
    CHECK_FALSE(back.complete());

    try {
        parse_csv("# dfscan-heatmap units=dBm az_range=0:1 el_range=0:1\nh,0.5\n0.5,abc\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS(parse_csv("1,2\n"), ParseError);
    CHECK_THROWS_AS(parse_csv("# dfscan-heatmap units=dBm az_range=0:1 el_range=0:1\nh,0.5\n0.5,1,2\n"), ParseError);
}

TEST_CASE("colormap")
{
    const auto& cmap = default_colormap();
    CHECK(colormap_index(0.0) == 0);
    CHECK(colormap_index(1.0) == 255);
    CHECK(colormap_index(std::nan("")) == 0);
    CHECK(colormap_index(0.5) == 128);
    for (int i = 1; i < 256; ++i)
        CHECK(luma(cmap[i]) >= luma(cmap[i - 1]));
    CHECK(luma(cmap[255]) > luma(cmap[0]) + 150);
}

TEST_CASE("rendering")
{
    Heatmap ramp(256, 1, {0, 256}, {0, 1});
    for (int i = 0; i < 256; ++i)
        ramp.set(i, 0, i / 255.0);
    CHECK_THROWS_AS(render(ramp, default_colormap()), DomainError);
    ramp.set_normalized(true);
    const auto img = render(ramp, default_colormap());
    CHECK(img.width == 256);
    CHECK(img.height == 1);
    CHECK(img.at(0, 0) == default_colormap()[0]);
    CHECK(img.at(255, 0) == default_colormap()[255]);
    for (int x = 1; x < 256; ++x)
        CHECK(luma(img.at(x, 0)) >= luma(img.at(x - 1, 0)));

    const auto big = render(ramp, default_colormap(), 3, Upscale::bilinear);
    CHECK(big.width == 768);
    CHECK(big.height == 3);
    for (int x = 1; x < big.width; ++x)
        CHECK(luma(big.at(x, 1)) >= luma(big.at(x - 1, 1)));

    Heatmap two(1, 2, {0, 1}, {0, 2});
    two.set(0, 0, 0.0);
    two.set(0, 1, 1.0);
    two.set_normalized(true);
    const auto tall = render(two, default_colormap(), 2);
    CHECK(tall.at(0, 0) == default_colormap()[255]); // top row is the highest elevation
    CHECK(tall.at(1, 3) == default_colormap()[0]);

    Heatmap holes(2, 1, {0, 2}, {0, 1});
    holes.set(0, 0, 1.0);
    holes.set_normalized(true);
    CHECK(render(holes, default_colormap()).at(1, 0) == default_colormap()[0]);
    CHECK_THROWS_AS(render(two, default_colormap(), 0), ConfigError);
}

TEST_CASE("PNG files")
{
    testing::TempDir dir("png");
    Heatmap m = normalize_clip({filled(20, 10, -80, 1, 2)}, 0)[0];
    export_png(m, default_colormap(), dir / "m.png", 4, Upscale::nearest);
    const auto back = read_png(dir / "m.png");
    CHECK(back == render(m, default_colormap(), 4, Upscale::nearest));
    CHECK_THROWS_AS(read_png(dir / "absent.png"), IoError);
    testing::spit(dir / "junk.png", "not a png");
    CHECK_THROWS_AS(read_png(dir / "junk.png"), IoError);
}

TEST_CASE("overlay registration")
{
    OverlaySpec spec;
    spec.width = 900;
    spec.height = 300;
    auto [x, y] = project(spec, 45.0, 0.0);
    CHECK(x == doctest::Approx(900.0));
    CHECK(y == doctest::Approx(150.0));
    std::tie(x, y) = project(spec, 0.0, 0.0);
    CHECK(x == doctest::Approx(450.0));
    std::tie(x, y) = project(spec, -45.0, 15.0);
    CHECK(x == doctest::Approx(0.0));
    CHECK(y == doctest::Approx(0.0));
    // Affine: equal angle steps give equal pixel steps.
    for (double a = -40; a < 40; a += 7.5)
        CHECK(project(spec, a + 2.5, 3).first - project(spec, a, 3).first == doctest::Approx(25.0));
}

TEST_CASE("overlay with identical extents and alpha 1 reproduces the rendered map")
{
    Heatmap m = normalize_clip({filled(9, 3, -80, 1, 5)}, 0)[0];
    const RgbImage photo(90, 30, {10, 200, 30});
    OverlaySpec spec;
    spec.cam_el_deg = 15.0;
    spec.alpha = 1.0;
    const auto out = overlay(m, photo, spec);
    const auto ref = render(m, default_colormap(), 10, Upscale::bilinear);
    REQUIRE(out.width == ref.width);
    REQUIRE(out.height == ref.height);
    // Both paths sample the same continuous field; allow one colormap step
    // where a sample lands on a rounding boundary.
    int off_by_one = 0;
    for (std::size_t k = 0; k < out.pixels.size(); ++k) {
        if (out.pixels[k] == ref.pixels[k])
            continue;
        ++off_by_one;
        CHECK(std::abs(luma(out.pixels[k]) - luma(ref.pixels[k])) < 3.0);
    }
    CHECK(off_by_one < static_cast<int>(out.pixels.size()) / 20);

    spec.alpha = 0.0;
    CHECK(overlay(m, photo, spec) == photo);
}

TEST_CASE("overlay placement")
{
    // A single hot cell at the camera boresight lands at the image center.
    Heatmap m(31, 31, {-15.5, 15.5}, {-15.5, 15.5});
    for (int j = 0; j < 31; ++j)
        for (int i = 0; i < 31; ++i)
            m.set(i, j, (i == 15 && j == 15) ? 1.0 : 0.0);
    m.set_normalized(true);
    const RgbImage photo(181, 61);
    OverlaySpec spec;
    spec.alpha = 1.0;
    const auto out = overlay(m, photo, spec);
    int best_x = 0, best_y = 0;
    double best = -1;
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            if (luma(out.at(x, y)) > best) {
                best = luma(out.at(x, y));
                best_x = x;
                best_y = y;
            }
    CHECK(std::abs(best_x - 90) <= 1);
    CHECK(std::abs(best_y - 30) <= 1);
    // Outside the heatmap extent the photo shows through.
    CHECK(out.at(0, 0) == Rgb{});
    CHECK(out.at(180, 60) == Rgb{});
}

TEST_CASE("overlay rejects disjoint views")
{
    Heatmap m = normalize_clip({filled(4, 4, 0, 1, 1, {100, 140}, {0, 30})}, 0)[0];
    OverlaySpec spec;
    try {
        overlay(m, RgbImage(90, 30), spec);
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("[100, 140]") != std::string::npos);
        CHECK(what.find("[-45, 45]") != std::string::npos);
    }
    spec.hfov_deg = 0;
    CHECK_THROWS_AS(overlay(m, RgbImage(90, 30), spec), ConfigError);
    spec = {};
    spec.alpha = 1.5;
    CHECK_THROWS_AS(overlay(m, RgbImage(90, 30), spec), ConfigError);
    spec = {};
    spec.width = 10;
    CHECK_THROWS_AS(overlay(m, RgbImage(90, 30), spec), ConfigError);
}
