#include "hals/velodyne_io.hpp"

#include <cmath>
#include <fstream>

#include "hals/binary_io.hpp"

namespace hals {

PointCloud read_velodyne_bin(const std::string& path, long long* dropped_non_finite) {
  std::ifstream is(path, std::ios::binary | std::ios::ate);
  HALS_CHECK(is.good(), "cannot open " + path);
  const std::streamoff size = is.tellg();
  HALS_CHECK(size % 16 == 0,
             "truncated velodyne file (size not divisible by 16): " + path);
  is.seekg(0);
  const long long n = size / 16;
  PointCloud cloud;
  cloud.points.reserve(size_t(n));
  long long dropped = 0;
  for (long long i = 0; i < n; ++i) {
    float rec[4];
    read_f32_array(is, rec, 4);
    Point3 p{rec[0], rec[1], rec[2]};
    if (!p.finite()) {
      ++dropped;
      continue;
    }
    cloud.points.push_back(p);
  }
  if (dropped_non_finite) *dropped_non_finite = dropped;
  return cloud;
}

void write_velodyne_bin(const std::string& path, const PointCloud& cloud) {
  std::ofstream os(path, std::ios::binary);
  HALS_CHECK(os.good(), "cannot write " + path);
  for (const auto& p : cloud.points) {
    float rec[4] = {float(p.x), float(p.y), float(p.z), 0.0f};
    write_f32_array(os, rec, 4);
  }
  HALS_CHECK(os.good(), "write failed: " + path);
}

}  // namespace hals
