#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hals/geometry.hpp"
#include "hals/range_image.hpp"
#include "hals/sensor.hpp"

namespace hals {

// Axis-aligned box, half extents per axis.
struct Box {
  Point3 center;
  Point3 half_extents;
};

// Vertical cylinder; z spans [center.z - height/2, center.z + height/2].
struct Cylinder {
  Point3 center;
  double radius = 0;
  double height = 0;
};

// Desk-scale synthetic scene: flat ground plane plus a handful of solid
// primitives. Immutable after construction.
struct Scene {
  double ground_z = 0.0;
  std::vector<Box> boxes;
  std::vector<Cylinder> cylinders;
  uint64_t rng_seed = 0;

  void validate() const;
};

struct ScanJob {
  Scene scene;
  SensorModel sensor;
  Point3 sensor_origin{0, 0, 1.73};

  void validate() const;
};

// Casts one ray per bin from the bin-center azimuth/elevation and keeps the
// nearest intersection within (min_range, max_range]. Deterministic given
// the job; bins with no hit stay empty.
RangeImage raycast_scan(const ScanJob& job, ChannelMode mode = ChannelMode::Polar);

// Reproducible random scene. difficulty in [0, 1]: 0 = ground plane only,
// larger values add more boxes (3-20) and cylinders (0-10) inside a 60 m
// disc with a clear area around the origin.
Scene random_scene(uint64_t seed, double difficulty = 0.5);

// Plain-text key=value scene files (repeated `box =` / `cylinder =` lines).
void save_scene(const std::string& path, const Scene& scene);
Scene load_scene(const std::string& path);

}  // namespace hals
