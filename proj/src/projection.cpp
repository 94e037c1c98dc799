#include "hals/projection.hpp"

#include <cmath>
#include <limits>

namespace hals {

bool bin_of_point(const Point3& p, const SensorModel& sensor, int* v, int* u,
                  double* range) {
  const double r = p.norm();
  if (range) *range = r;
  if (!(r > sensor.min_range && r <= sensor.max_range)) return false;
  const double elevation = std::asin(p.z / r);
  const int row = sensor.row_of_elevation(elevation);
  if (row < 0) return false;
  const double u_real =
      0.5 * (1.0 - std::atan2(p.y, p.x) / kPi) * sensor.width;
  int col = (int)std::floor(u_real);
  col %= sensor.width;               // azimuth is circular
  if (col < 0) col += sensor.width;
  *v = row;
  *u = col;
  return true;
}

namespace {

void fill_bin_channels(RangeImage& img, int v, int u, const Point3& p, double r) {
  switch (img.mode) {
    case ChannelMode::Spherical: {
      float vals[1] = {float(r)};
      img.set_bin(v, u, vals);
      break;
    }
    case ChannelMode::Polar: {
      float vals[2] = {float(std::sqrt(p.x * p.x + p.y * p.y)), float(p.z)};
      img.set_bin(v, u, vals);
      break;
    }
    case ChannelMode::Cartesian: {
      float vals[3] = {float(p.x), float(p.y), float(p.z)};
      img.set_bin(v, u, vals);
      break;
    }
  }
}

// Reconstructs the 3D point of an occupied bin at bin-center angles.
Point3 bin_point(const RangeImage& img, const SensorModel& sensor, int v, int u) {
  const double phi = sensor.azimuth_of_col(u);
  switch (img.mode) {
    case ChannelMode::Spherical: {
      const double r = img.at(0, v, u);
      const double theta = sensor.elevation_of_row(v);
      const double c = std::cos(theta);
      return {r * c * std::cos(phi), r * c * std::sin(phi), r * std::sin(theta)};
    }
    case ChannelMode::Polar: {
      const double d = img.at(0, v, u);
      return {d * std::cos(phi), d * std::sin(phi), double(img.at(1, v, u))};
    }
    case ChannelMode::Cartesian:
      return {double(img.at(0, v, u)), double(img.at(1, v, u)),
              double(img.at(2, v, u))};
  }
  fail("invalid channel mode");
}

}  // namespace

RangeImage project(const PointCloud& cloud, const SensorModel& sensor,
                   ChannelMode mode, ProjectionStats* stats) {
  sensor.validate();
  HALS_CHECK(!cloud.empty(), "project: empty point cloud");
  cloud.check_finite();

  RangeImage img(sensor.height, sensor.width, mode);
  std::vector<double> best_r(size_t(sensor.height) * sensor.width,
                             std::numeric_limits<double>::infinity());
  std::vector<int> winner(best_r.size(), -1);

  ProjectionStats local;
  for (size_t i = 0; i < cloud.points.size(); ++i) {
    const Point3& p = cloud.points[i];
    int v, u;
    double r;
    const double rr = p.norm();
    if (!(rr > sensor.min_range && rr <= sensor.max_range)) {
      ++local.dropped_range;
      continue;
    }
    if (!bin_of_point(p, sensor, &v, &u, &r)) {
      ++local.dropped_fov;
      continue;
    }
    const size_t bin = img.bin_index(v, u);
    if (r < best_r[bin]) {
      best_r[bin] = r;
      winner[bin] = int(i);
    }
  }

  for (int v = 0; v < sensor.height; ++v) {
    for (int u = 0; u < sensor.width; ++u) {
      const size_t bin = img.bin_index(v, u);
      if (winner[bin] >= 0) {
        fill_bin_channels(img, v, u, cloud.points[winner[bin]], best_r[bin]);
        ++local.surviving;
      }
    }
  }
  local.occluded = (long long)cloud.points.size() - local.surviving -
                   local.dropped_fov - local.dropped_range;
  if (stats) *stats = local;
  return img;
}

PointCloud unproject(const RangeImage& image, const SensorModel& sensor,
                     double drop_threshold) {
  sensor.validate();
  HALS_CHECK(image.height == sensor.height && image.width == sensor.width,
             "unproject: image dimensions do not match sensor");
  PointCloud cloud;
  cloud.points.reserve(size_t(image.occupied_count()));
  for (int v = 0; v < image.height; ++v) {
    for (int u = 0; u < image.width; ++u) {
      if (!image.occupied(v, u)) continue;
      double leading = image.at(0, v, u);
      if (image.mode == ChannelMode::Cartesian)
        leading = std::hypot(image.at(0, v, u), image.at(1, v, u));
      if (leading < drop_threshold) continue;
      cloud.points.push_back(bin_point(image, sensor, v, u));
    }
  }
  return cloud;
}

RangeImage downsample_rows(const RangeImage& image, int rate) {
  HALS_CHECK(rate >= 2, "downsample_rows: rate must be >= 2");
  HALS_CHECK(image.height % rate == 0,
             "downsample_rows: height not divisible by rate");
  RangeImage out(image.height / rate, image.width, image.mode);
  const int C = image.channel_countv();
  for (int c = 0; c < C; ++c)
    for (int v = 0; v < out.height; ++v)
      for (int u = 0; u < out.width; ++u)
        out.at(c, v, u) = image.at(c, v * rate, u);
  for (int v = 0; v < out.height; ++v)
    for (int u = 0; u < out.width; ++u)
      out.occupancy[out.bin_index(v, u)] = image.occupancy[image.bin_index(v * rate, u)];
  return out;
}

RangeImage convert_mode(const RangeImage& image, const SensorModel& sensor,
                        ChannelMode target) {
  sensor.validate();
  HALS_CHECK(image.height == sensor.height && image.width == sensor.width,
             "convert_mode: image dimensions do not match sensor");
  if (target == image.mode) return image;
  RangeImage out(image.height, image.width, target);
  for (int v = 0; v < image.height; ++v) {
    for (int u = 0; u < image.width; ++u) {
      if (!image.occupied(v, u)) continue;
      if (image.mode == ChannelMode::Polar && target == ChannelMode::Spherical) {
        // r = sqrt(d^2 + z^2); no azimuth needed.
        const double d = image.at(0, v, u);
        const double z = image.at(1, v, u);
        float vals[1] = {float(std::sqrt(d * d + z * z))};
        out.set_bin(v, u, vals);
        continue;
      }
      const Point3 p = bin_point(image, sensor, v, u);
      fill_bin_channels(out, v, u, p, p.norm());
    }
  }
  return out;
}

}  // namespace hals
