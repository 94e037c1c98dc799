#pragma once

#include "hals/geometry.hpp"
#include "hals/range_image.hpp"
#include "hals/sensor.hpp"

namespace hals {

// Where every input point went during projection. Conservation law:
// surviving + occluded + dropped_fov + dropped_range == N.
struct ProjectionStats {
  long long surviving = 0;
  long long occluded = 0;
  long long dropped_fov = 0;
  long long dropped_range = 0;
};

// Spherical projection of a point cloud onto the sensor grid.
// u = floor(0.5 * (1 - atan2(y,x)/pi) * W) wrapped modulo W; the row comes
// from the elevation angle (uniform discretization or nearest table beam),
// clamped to [0, H-1]. When several points land in one bin the smallest
// spherical range wins; the others are counted as occluded. Points with
// r <= min_range or r > max_range, or outside the vertical FOV, are dropped
// and counted.
RangeImage project(const PointCloud& cloud, const SensorModel& sensor,
                   ChannelMode mode, ProjectionStats* stats = nullptr);

// Inverse projection: one point per occupied bin, angles evaluated at bin
// centers. In polar mode z is taken verbatim from the z channel. Bins whose
// leading range value falls below drop_threshold produce no point (generated
// images encode "no return" as near-zero values).
PointCloud unproject(const RangeImage& image, const SensorModel& sensor,
                     double drop_threshold = 0.3);

// Keeps rows {0, rate, 2*rate, ...}; channels and occupancy copied bitwise.
RangeImage downsample_rows(const RangeImage& image, int rate);

// Per-bin channel conversion through the bin's reconstructed 3D point.
// Occupancy is preserved; empty bins stay all-zero.
RangeImage convert_mode(const RangeImage& image, const SensorModel& sensor,
                        ChannelMode target);

// Bin index of a point under the sensor model, or false when the point is
// dropped (range or FOV). Exposed so tests can re-evaluate the projection
// equation on winning points.
bool bin_of_point(const Point3& p, const SensorModel& sensor, int* v, int* u,
                  double* range = nullptr);

}  // namespace hals
