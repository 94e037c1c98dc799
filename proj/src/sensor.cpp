#include "hals/sensor.hpp"

#include <algorithm>
#include <sstream>

#include "hals/kv_config.hpp"

namespace hals {

void SensorModel::validate() const {
  HALS_CHECK(height >= 2, "sensor: height must be >= 2");
  HALS_CHECK(width >= 4, "sensor: width must be >= 4");
  HALS_CHECK(fov_up_deg >= 0 && fov_down_deg >= 0,
             "sensor: fov_up/fov_down must be >= 0");
  HALS_CHECK(fov_up_deg + fov_down_deg > 0, "sensor: total FOV must be > 0");
  HALS_CHECK(max_range > 0, "sensor: max_range must be > 0");
  HALS_CHECK(min_range >= 0, "sensor: min_range must be >= 0");
  HALS_CHECK(min_range < max_range, "sensor: min_range must be < max_range");
  if (!elevation_table_deg.empty()) {
    HALS_CHECK((int)elevation_table_deg.size() == height,
               "sensor: elevation table length must equal height");
    for (size_t i = 0; i < elevation_table_deg.size(); ++i) {
      double e = elevation_table_deg[i];
      HALS_CHECK(e <= fov_up_deg + 1e-9 && e >= -fov_down_deg - 1e-9,
                 "sensor: elevation table entry outside FOV");
      if (i > 0)
        HALS_CHECK(elevation_table_deg[i] < elevation_table_deg[i - 1],
                   "sensor: elevation table must be strictly decreasing");
    }
  }
}

double SensorModel::elevation_of_row(int v) const {
  if (!elevation_table_deg.empty()) return deg2rad(elevation_table_deg[v]);
  return fov_up_rad() - (v + 0.5) * fov_rad() / height;
}

int SensorModel::row_of_elevation(double elevation_rad) const {
  if (elevation_rad > fov_up_rad() || elevation_rad < -fov_down_rad())
    return -1;
  if (elevation_table_deg.empty()) {
    int v = (int)std::floor((fov_up_rad() - elevation_rad) * height / fov_rad());
    return std::clamp(v, 0, height - 1);
  }
  // Nearest beam in the (strictly decreasing) table.
  int lo = 0, hi = height - 1;
  while (lo < hi) {
    int mid = (lo + hi) / 2;
    if (deg2rad(elevation_table_deg[mid]) >= elevation_rad)
      lo = mid + 1;
    else
      hi = mid;
  }
  // lo = first row below the angle; candidate rows are lo-1 and lo.
  int best = lo;
  if (lo > 0) {
    double d_above = std::abs(deg2rad(elevation_table_deg[lo - 1]) - elevation_rad);
    double d_below = std::abs(deg2rad(elevation_table_deg[lo]) - elevation_rad);
    if (d_above <= d_below) best = lo - 1;
  }
  return best;
}

SensorModel SensorModel::downsampled(int rate) const {
  HALS_CHECK(rate >= 2, "downsampled: rate must be >= 2");
  HALS_CHECK(height % rate == 0, "downsampled: height not divisible by rate");
  SensorModel out = *this;
  out.height = height / rate;
  out.elevation_table_deg.resize(out.height);
  for (int v = 0; v < out.height; ++v)
    out.elevation_table_deg[v] = rad2deg(elevation_of_row(v * rate));
  out.validate();
  return out;
}

SensorModel default_synthetic_sensor() {
  SensorModel s;
  s.height = 32;
  s.width = 256;
  s.fov_up_deg = 2.0;
  s.fov_down_deg = 24.8;
  s.max_range = 80.0;
  s.min_range = 0.0;
  return s;
}

SensorModel load_sensor(const std::string& path) {
  KvFile kv = KvFile::load(path);
  SensorModel s;
  s.height = (int)kv.get_int("height");
  s.width = (int)kv.get_int("width");
  s.fov_up_deg = kv.get_double("fov_up_deg");
  s.fov_down_deg = kv.get_double("fov_down_deg");
  s.max_range = kv.get_double_or("max_range", s.max_range);
  s.min_range = kv.get_double_or("min_range", s.min_range);
  if (kv.has("elevation_table_deg")) {
    std::istringstream is(kv.get("elevation_table_deg"));
    double e;
    while (is >> e) s.elevation_table_deg.push_back(e);
  }
  s.validate();
  return s;
}

void save_sensor(const std::string& path, const SensorModel& sensor) {
  KvFile kv;
  kv.add("height", sensor.height);
  kv.add("width", sensor.width);
  kv.add("fov_up_deg", sensor.fov_up_deg);
  kv.add("fov_down_deg", sensor.fov_down_deg);
  kv.add("max_range", sensor.max_range);
  kv.add("min_range", sensor.min_range);
  if (!sensor.elevation_table_deg.empty()) {
    std::ostringstream os;
    os.precision(17);
    for (size_t i = 0; i < sensor.elevation_table_deg.size(); ++i) {
      if (i) os << ' ';
      os << sensor.elevation_table_deg[i];
    }
    kv.add("elevation_table_deg", os.str());
  }
  kv.save(path);
}

}  // namespace hals
