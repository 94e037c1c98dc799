#pragma once

#include <string>
#include <vector>

#include "hals/geometry.hpp"

namespace hals {

// Rotating lidar model: `height` vertical beams (row 0 = highest), `width`
// azimuth bins. Vertical field of view is fov_up_deg above the horizontal
// plus fov_down_deg below it. An optional per-beam elevation table (degrees,
// strictly decreasing, bin centers) overrides the uniform spacing.
struct SensorModel {
  int height = 64;
  int width = 1024;
  double fov_up_deg = 2.0;
  double fov_down_deg = 24.8;
  std::vector<double> elevation_table_deg;  // empty = uniform spacing
  double max_range = 80.0;
  double min_range = 0.0;

  void validate() const;

  double fov_rad() const { return deg2rad(fov_up_deg + fov_down_deg); }
  double fov_up_rad() const { return deg2rad(fov_up_deg); }
  double fov_down_rad() const { return deg2rad(fov_down_deg); }

  // Bin-center angles (radians).
  double azimuth_of_col(int u) const {
    return kPi * (1.0 - 2.0 * (u + 0.5) / width);
  }
  double elevation_of_row(int v) const;

  // Row assignment for an elevation angle (radians). Returns -1 when the
  // angle falls outside the vertical field of view.
  int row_of_elevation(double elevation_rad) const;

  // Sensor seen by a row-downsampled image: keeps rows {0, s, 2s, ...} and
  // pins their bin-center elevations in an explicit table.
  SensorModel downsampled(int rate) const;
};

// Scaled-down HDL-64E-like default used by the synthetic data generator:
// asymmetric field of view, 32 beams, 256 azimuth bins.
SensorModel default_synthetic_sensor();

// Key=value sensor description (height=, width=, fov_up_deg=, ...).
SensorModel load_sensor(const std::string& path);
void save_sensor(const std::string& path, const SensorModel& sensor);

}  // namespace hals
