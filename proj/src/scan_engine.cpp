#include "dfscan/scan_engine.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "dfscan/error.hpp"
#include "dfscan/rng.hpp"

namespace dfscan {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string mhz(double hz)
{
    std::ostringstream s;
    s << hz / 1e6 << " MHz";
    return s.str();
}

/// Blocking FIFO with a fixed capacity.
template <class T>
class BoundedQueue {
public:
    explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

    void push(T item)
    {
        std::unique_lock lock(m_);
        not_full_.wait(lock, [&] { return items_.size() < capacity_; });
        items_.push_back(std::move(item));
        not_empty_.notify_one();
    }

    /// Empty optional once closed and drained.
    std::optional<T> pop()
    {
        std::unique_lock lock(m_);
        not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
        if (items_.empty())
            return std::nullopt;
        T item = std::move(items_.front());
        items_.pop_front();
        not_full_.notify_one();
        return item;
    }

    void close()
    {
        std::lock_guard lock(m_);
        closed_ = true;
        not_empty_.notify_all();
    }

private:
    std::size_t capacity_;
    std::deque<T> items_;
    bool closed_ = false;
    std::mutex m_;
    std::condition_variable not_full_;
    std::condition_variable not_empty_;
};

struct AcquiredPixel {
    PixelIndex index;
    AngularPose pose;
    double t_offset_s = 0.0;
    std::vector<std::optional<IqCapture>> captures; // by hop index
    bool failed = false;
};

} // namespace

std::vector<CaptureRequest> build_hop_plan(const Band& band, double hop_bandwidth_hz, double hop_duration_s)
{
    if (!(band.high_hz > band.low_hz))
        throw ConfigError("band high edge must exceed the low edge");
    if (!(hop_bandwidth_hz > 0.0) || hop_bandwidth_hz > kMaxCaptureBandwidthHz)
        throw ConfigError("hop bandwidth must be in (0, 20] MHz, got " + mhz(hop_bandwidth_hz));
    if (!(hop_duration_s > 0.0))
        throw ConfigError("hop duration must be positive");

    const double ratio = band.width() / hop_bandwidth_hz;
    const double nearest = std::round(ratio);
    if (nearest < 1.0 || std::abs(ratio - nearest) > 1e-9 * std::max(1.0, ratio)) {
        std::ostringstream msg;
        msg << "band width " << mhz(band.width()) << " is not a multiple of hop bandwidth " << mhz(hop_bandwidth_hz)
            << " (" << ratio << " hops); nearest valid hop bandwidths:";
        bool any = false;
        for (double n : {std::floor(ratio), std::ceil(ratio), std::ceil(ratio) + 1.0}) {
            if (n < 1.0)
                continue;
            const double bw = band.width() / n;
            if (bw <= kMaxCaptureBandwidthHz) {
                msg << ' ' << mhz(bw) << " (" << n << " hops)";
                any = true;
                if (n >= std::ceil(ratio))
                    break;
            }
        }
        if (!any)
            msg << " none";
        throw ConfigError(msg.str());
    }

    std::vector<CaptureRequest> hops;
    const auto count = static_cast<int>(nearest);
    for (int k = 0; k < count; ++k) {
        CaptureRequest r;
        r.center_hz = band.low_hz + (k + 0.5) * hop_bandwidth_hz;
        r.bandwidth_hz = hop_bandwidth_hz;
        r.duration_s = hop_duration_s;
        hops.push_back(r);
    }
    return hops;
}

void ScanPlan::validate() const
{
    if (az_pixels < 1 || el_pixels < 1)
        throw ConfigError("scan needs at least one pixel per axis");
    if (!(az_range.min <= az_range.max) || !(el_range.min <= el_range.max))
        throw ConfigError("scan ranges must satisfy min <= max");
    if (hops.empty())
        throw ConfigError("scan plan has no frequency hops");
    for (const auto& h : hops)
        h.validate();
    if (!(settle_s >= 0.0))
        throw ConfigError("settle time must be non-negative");
    if (settle_s < kMinSettleS && !unsafe_settle)
        throw ConfigError("settle time below 0.5 s requires --unsafe-settle");
}

std::vector<PixelIndex> pixel_order(const ScanPlan& plan)
{
    std::vector<PixelIndex> order;
    order.reserve(plan.pixel_count());
    for (int i_el = 0; i_el < plan.el_pixels; ++i_el) {
        const bool forward = i_el % 2 == 0;
        for (int k = 0; k < plan.az_pixels; ++k)
            order.push_back({forward ? k : plan.az_pixels - 1 - k, i_el});
    }
    return order;
}

std::vector<std::size_t> hop_order(const ScanPlan& plan, std::size_t pixel_index)
{
    std::vector<std::size_t> order(plan.hops.size());
    for (std::size_t h = 0; h < order.size(); ++h)
        order[h] = pixel_index % 2 == 0 ? h : order.size() - 1 - h;
    return order;
}

double pixel_duration(const ScanPlan& plan)
{
    double capture = 0.0;
    for (const auto& h : plan.hops)
        capture += h.duration_s;
    return std::max(plan.settle_s, capture);
}

double estimate_duration(const ScanPlan& plan)
{
    return static_cast<double>(plan.pixel_count()) * pixel_duration(plan);
}

double integrate_hops(std::span<const double> per_hop_dbm)
{
    if (per_hop_dbm.empty())
        throw DomainError("integrate_hops needs at least one hop");
    double total = 0.0;
    for (double p : per_hop_dbm)
        total += std::pow(10.0, p / 10.0);
    return 10.0 * std::log10(total);
}

std::uint64_t capture_seed(std::uint64_t run_seed, const PixelIndex& pixel, int az_pixels, std::size_t hop)
{
    const auto linear = static_cast<std::uint64_t>(pixel.i_el) * static_cast<std::uint64_t>(az_pixels) +
                        static_cast<std::uint64_t>(pixel.i_az);
    return mix_seed(mix_seed(run_seed, linear), hop);
}

ScanResult execute_scan(const ScanPlan& plan, RotorClient& rotor, SdrBackend& backend, const PixelSink& sink,
                        const ScanOptions& options)
{
    plan.validate();
    if (options.pipeline_depth < 1)
        throw ConfigError("pipeline depth must be >= 1");

    const RotorConfig& config = rotor.config();
    for (const auto& [range, axis] : {std::pair{plan.az_range, Axis::az}, std::pair{plan.el_range, Axis::el}})
        if (!config.travel(axis).contains(range.min) || !config.travel(axis).contains(range.max))
            throw ConfigError(std::string(to_string(axis)) + " scan range exceeds rotor travel");

    ScanResult result;
    result.heatmap = Heatmap(plan.az_pixels, plan.el_pixels, plan.az_range, plan.el_range, plan.band_label);
    result.records.reserve(plan.pixel_count());

    const double per_pixel = pixel_duration(plan);
    const double cal = backend.calibration_offset_db();
    const auto order = pixel_order(plan);

    BoundedQueue<AcquiredPixel> queue(options.pipeline_depth);
    std::string abort_reason;
    bool link_failure = false;
    std::exception_ptr crash;

    std::thread acquisition([&] {
        try {
            try {
                if (!rotor.query_homed())
                    rotor.home();
            } catch (const Error& e) {
                abort_reason = std::string("homing failed: ") + e.what();
                link_failure = dynamic_cast<const TransportError*>(&e) != nullptr;
                queue.close();
                return;
            }

            const RotorState homed_state{.homed = true, .phase = HomingPhase::zeroed};
            MotionHistory history;
            AngularPose current = rotor.pose();

            for (std::size_t k = 0; k < order.size(); ++k) {
                const auto idx = order[k];
                const auto target = plan.pixel_pose(idx.i_az, idx.i_el);
                try {
                    const auto mv = plan_move(config, homed_state, current, target, history);
                    const auto expect_az = rotor.az_steps() + mv.az_delta;
                    const auto expect_el = rotor.el_steps() + mv.el_delta;
                    if (mv.az_delta != 0 || mv.el_delta != 0) {
                        const auto reply = rotor.move(mv.az_delta, mv.el_delta);
                        if (const auto* err = std::get_if<protocol::Err>(&reply))
                            throw StateError("MOVE rejected: " + protocol::describe(err->code));
                    }
                    if (options.verify_position) {
                        const auto pos = rotor.position();
                        if (pos.az_steps != expect_az || pos.el_steps != expect_el)
                            throw StateError("position mismatch after move");
                    }
                    current = target;
                } catch (const Error& e) {
                    std::ostringstream msg;
                    msg << "rotor fault at pixel (" << idx.i_az << ", " << idx.i_el << "): " << e.what();
                    abort_reason = msg.str();
                    link_failure = dynamic_cast<const TransportError*>(&e) != nullptr;
                    break;
                }

                AcquiredPixel px;
                px.index = idx;
                px.pose = rotor.pose();
                px.t_offset_s = static_cast<double>(k) * per_pixel;
                px.captures.resize(plan.hops.size());
                for (const auto h : hop_order(plan, k)) {
                    CaptureRequest req = plan.hops[h];
                    req.seed = capture_seed(options.seed, idx, plan.az_pixels, h);
                    try {
                        px.captures[h] = backend.capture(req);
                    } catch (const Error&) {
                        px.failed = true;
                        break;
                    }
                }
                queue.push(std::move(px));
            }
        } catch (...) {
            crash = std::current_exception();
        }
        queue.close();
    });

    // Stage B: power estimation and heatmap update, strictly in order.
    try {
        while (auto px = queue.pop()) {
            PixelRecord rec;
            rec.i_az = px->index.i_az;
            rec.i_el = px->index.i_el;
            rec.pose = px->pose;
            rec.t_offset_s = px->t_offset_s;
            rec.per_hop_dbm.assign(plan.hops.size(), kNaN);
            rec.valid = !px->failed;
            if (rec.valid) {
                for (std::size_t h = 0; h < plan.hops.size(); ++h) {
                    const auto& cap = *px->captures[h];
                    rec.per_hop_dbm[h] = dbfs_to_dbm(capture_power(cap), cal);
                    rec.clipped = rec.clipped || cap.clipped;
                    result.clipped_captures += cap.clipped ? 1 : 0;
                }
                rec.integrated_dbm = integrate_hops(rec.per_hop_dbm);
                result.heatmap.set(rec.i_az, rec.i_el, rec.integrated_dbm);
            } else {
                rec.integrated_dbm = kNaN;
                result.heatmap.set_invalid(rec.i_az, rec.i_el);
                ++result.invalid_pixels;
            }
            if (sink)
                sink(rec);
            result.records.push_back(std::move(rec));
        }
    } catch (...) {
        // Drain so the acquisition thread can finish.
        while (queue.pop()) {
        }
        acquisition.join();
        throw;
    }
    acquisition.join();
    if (crash)
        std::rethrow_exception(crash);

    result.complete = abort_reason.empty() && result.records.size() == plan.pixel_count();
    result.abort_reason = abort_reason;
    result.link_failure = link_failure;
    result.heatmap.set_complete(result.complete);
    result.simulated_duration_s = static_cast<double>(result.records.size()) * per_pixel;
    return result;
}

SimulatedRig::SimulatedRig(Scene scene, RotorConfig config, std::uint64_t seed, double sample_rate_hz)
    : device_(SimulatedDevice::Options{.config = config}), transport_(device_), rotor_(transport_, config),
      sdr_(std::move(scene), [this] { return device_.physical_pose(); }, seed, sample_rate_hz)
{
}

ScanResult run_simulated_scan(const ScanPlan& plan, const Scene& scene, const ScanOptions& options,
                              const RotorConfig& config, double sample_rate_hz, const PixelSink& sink)
{
    SimulatedRig rig(scene, config, options.seed, sample_rate_hz);
    return execute_scan(plan, rig.rotor(), rig.sdr(), sink, options);
}

namespace {

std::string fmt(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

} // namespace

PixelLogWriter::PixelLogWriter(std::ostream& out, std::size_t hop_count) : out_(out), hops_(hop_count)
{
    out_ << "i_az,i_el,az_deg,el_deg,t_offset_s";
    for (std::size_t h = 0; h < hops_; ++h)
        out_ << ",hop" << h << "_dbm";
    out_ << ",integrated_dbm\n";
}

void PixelLogWriter::operator()(const PixelRecord& r)
{
    out_ << r.i_az << ',' << r.i_el << ',' << fmt(r.pose.az) << ',' << fmt(r.pose.el) << ',' << fmt(r.t_offset_s);
    for (std::size_t h = 0; h < hops_; ++h)
        out_ << ',' << (h < r.per_hop_dbm.size() ? fmt(r.per_hop_dbm[h]) : std::string("nan"));
    out_ << ',' << fmt(r.integrated_dbm) << '\n';
}

} // namespace dfscan
