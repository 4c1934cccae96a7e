#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace dfscan {

constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Closed interval [min, max].
struct Interval {
    double min = 0.0;
    double max = 0.0;

    double span() const { return max - min; }
    bool contains(double v, double tol = 1e-9) const { return v >= min - tol && v <= max + tol; }
    bool operator==(const Interval&) const = default;
};

/// Pointing direction in degrees. Azimuth is measured from the +x axis
/// toward +y (operator's right), elevation upward from the horizon.
struct AngularPose {
    double az = 0.0;
    double el = 0.0;

    bool operator==(const AngularPose&) const = default;
};

/// Cartesian vector in meters; receiver at origin, x forward, y right, z up.
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    bool operator==(const Vec3&) const = default;
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b)
{
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 unit_vector(const AngularPose& p)
{
    const double az = deg2rad(p.az);
    const double el = deg2rad(p.el);
    return {std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)};
}

/// Direction of a point as seen from the origin.
inline AngularPose direction_of(const Vec3& v)
{
    const double horiz = std::hypot(v.x, v.y);
    return {rad2deg(std::atan2(v.y, v.x)), rad2deg(std::atan2(v.z, horiz))};
}

} // namespace dfscan
