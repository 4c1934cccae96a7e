#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace dfscan {

/// SplitMix64 finalizer; derives independent stream seeds from a base seed.
constexpr std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

constexpr std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b)
{
    return mix_seed(a ^ mix_seed(b));
}

/// Circular complex Gaussian source with E|z|^2 = 1. Built on mt19937_64
/// and Box-Muller so seeded output does not depend on the standard
/// library's distribution implementations.
class ComplexGaussian {
public:
    explicit ComplexGaussian(std::uint64_t seed) : engine_(seed) {}

    std::complex<double> operator()()
    {
        // u1 in (0, 1], u2 in [0, 1)
        const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        const double r = std::sqrt(-std::log(u1));
        const double phi = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(phi), r * std::sin(phi)};
    }

private:
    std::mt19937_64 engine_;
};

} // namespace dfscan
