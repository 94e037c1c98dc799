#include <cmath>
#include <limits>

#include "hals/scene.hpp"

namespace hals {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Entry/exit parameter interval of a ray against an axis slab.
inline bool slab(double origin, double dir, double lo, double hi, double* t0,
                 double* t1) {
  if (dir == 0.0) return origin >= lo && origin <= hi;  // interval unchanged
  double a = (lo - origin) / dir;
  double b = (hi - origin) / dir;
  if (a > b) std::swap(a, b);
  if (a > *t0) *t0 = a;
  if (b < *t1) *t1 = b;
  return *t0 <= *t1;
}

// First boundary crossing with t > t_min for a solid interval [t0, t1].
inline double interval_hit(double t0, double t1, double t_min) {
  if (t0 > t_min) return t0;
  if (t1 > t_min) return t1;
  return kInf;
}

double hit_ground(const Point3& o, const Point3& dir, double ground_z,
                  double t_min) {
  if (dir.z == 0.0) return kInf;
  const double t = (ground_z - o.z) / dir.z;
  return t > t_min ? t : kInf;
}

double hit_box(const Point3& o, const Point3& dir, const Box& b, double t_min) {
  double t0 = -kInf, t1 = kInf;
  if (!slab(o.x, dir.x, b.center.x - b.half_extents.x,
            b.center.x + b.half_extents.x, &t0, &t1))
    return kInf;
  if (!slab(o.y, dir.y, b.center.y - b.half_extents.y,
            b.center.y + b.half_extents.y, &t0, &t1))
    return kInf;
  if (!slab(o.z, dir.z, b.center.z - b.half_extents.z,
            b.center.z + b.half_extents.z, &t0, &t1))
    return kInf;
  return interval_hit(t0, t1, t_min);
}

double hit_cylinder(const Point3& o, const Point3& dir, const Cylinder& c,
                    double t_min) {
  double t0 = -kInf, t1 = kInf;
  if (!slab(o.z, dir.z, c.center.z - c.height * 0.5, c.center.z + c.height * 0.5,
            &t0, &t1))
    return kInf;
  const double ox = o.x - c.center.x;
  const double oy = o.y - c.center.y;
  const double a = dir.x * dir.x + dir.y * dir.y;
  if (a == 0.0) {
    // Vertical ray: inside the circle or a miss.
    if (ox * ox + oy * oy > c.radius * c.radius) return kInf;
    return interval_hit(t0, t1, t_min);
  }
  const double bq = 2.0 * (ox * dir.x + oy * dir.y);
  const double cq = ox * ox + oy * oy - c.radius * c.radius;
  const double disc = bq * bq - 4.0 * a * cq;
  if (disc < 0.0) return kInf;
  const double sq = std::sqrt(disc);
  const double ca = (-bq - sq) / (2.0 * a);
  const double cb = (-bq + sq) / (2.0 * a);
  if (ca > t0) t0 = ca;
  if (cb < t1) t1 = cb;
  if (t0 > t1) return kInf;
  return interval_hit(t0, t1, t_min);
}

}  // namespace

RangeImage raycast_scan(const ScanJob& job, ChannelMode mode) {
  job.validate();
  const SensorModel& sensor = job.sensor;
  RangeImage img(sensor.height, sensor.width, mode);

  const int H = sensor.height, W = sensor.width;
#pragma omp parallel for schedule(static)
  for (int bin = 0; bin < H * W; ++bin) {
    const int v = bin / W;
    const int u = bin % W;
    const double theta = sensor.elevation_of_row(v);
    const double phi = sensor.azimuth_of_col(u);
    const double ct = std::cos(theta);
    const Point3 dir{ct * std::cos(phi), ct * std::sin(phi), std::sin(theta)};

    // Nearest hit; ties resolved toward the earlier primitive (strict <).
    double best = hit_ground(job.sensor_origin, dir, job.scene.ground_z,
                             sensor.min_range);
    for (const auto& b : job.scene.boxes) {
      double t = hit_box(job.sensor_origin, dir, b, sensor.min_range);
      if (t < best) best = t;
    }
    for (const auto& c : job.scene.cylinders) {
      double t = hit_cylinder(job.sensor_origin, dir, c, sensor.min_range);
      if (t < best) best = t;
    }
    if (!(best <= sensor.max_range)) continue;

    // Hit point in the sensor frame.
    const Point3 p = dir * best;
    switch (mode) {
      case ChannelMode::Spherical: {
        img.at(0, v, u) = float(best);
        break;
      }
      case ChannelMode::Polar: {
        img.at(0, v, u) = float(best * ct);
        img.at(1, v, u) = float(p.z);
        break;
      }
      case ChannelMode::Cartesian: {
        img.at(0, v, u) = float(p.x);
        img.at(1, v, u) = float(p.y);
        img.at(2, v, u) = float(p.z);
        break;
      }
    }
    img.occupancy[img.bin_index(v, u)] = 1;
  }
  return img;
}

}  // namespace hals
