#pragma once

#include <cmath>
#include <vector>

#include "hals/common.hpp"

namespace hals {

// 3D point/vector in the sensor frame, meters. z is the vertical height.
struct Point3 {
  double x = 0, y = 0, z = 0;

  Point3 operator+(const Point3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Point3 operator-(const Point3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Point3 operator*(double s) const { return {x * s, y * s, z * s}; }

  double dot(const Point3& o) const { return x * o.x + y * o.y + z * o.z; }
  Point3 cross(const Point3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double squared_norm() const { return x * x + y * y + z * z; }
  double norm() const { return std::sqrt(squared_norm()); }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

struct PointCloud {
  std::vector<Point3> points;

  size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  void check_finite() const {
    for (const auto& p : points)
      HALS_CHECK(p.finite(), "point cloud contains NaN/Inf coordinates");
  }
};

constexpr double kPi = 3.141592653589793238462643383279502884;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

}  // namespace hals
