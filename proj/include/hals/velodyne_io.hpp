#pragma once

#include <string>

#include "hals/geometry.hpp"

namespace hals {

// Velodyne-style `.bin` scans: consecutive little-endian float32
// (x, y, z, reflectance) records. Reflectance is discarded on read and
// written as zero. NaN/Inf points are dropped with a count.
PointCloud read_velodyne_bin(const std::string& path, long long* dropped_non_finite = nullptr);
void write_velodyne_bin(const std::string& path, const PointCloud& cloud);

}  // namespace hals
