#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "hals/projection.hpp"
#include "hals/range_image.hpp"
#include "hals/sensor.hpp"

using namespace hals;

namespace {

SensorModel small_sensor() {
  SensorModel s;
  s.height = 4;
  s.width = 8;
  s.fov_up_deg = 15.0;
  s.fov_down_deg = 15.0;
  s.max_range = 100.0;
  return s;
}

// Polar image whose z channel is consistent with the row elevation, so the
// reconstructed points land back in their bins.
RangeImage self_consistent_polar(const SensorModel& sensor, uint64_t seed,
                                 double occupancy = 0.7) {
  Rng rng(seed);
  RangeImage img(sensor.height, sensor.width, ChannelMode::Polar);
  for (int v = 0; v < sensor.height; ++v) {
    const double tan_theta = std::tan(sensor.elevation_of_row(v));
    for (int u = 0; u < sensor.width; ++u) {
      if (rng.uniform() > occupancy) continue;
      const double d = rng.uniform(1.0, 60.0);
      float vals[2] = {float(d), float(d * tan_theta)};
      img.set_bin(v, u, vals);
    }
  }
  return img;
}

}  // namespace

TEST_CASE("project places the zero-angle point at the grid center") {
  const SensorModel sensor = small_sensor();
  PointCloud cloud;
  cloud.points.push_back({10, 0, 0});
  const RangeImage img = project(cloud, sensor, ChannelMode::Spherical);
  CHECK(img.occupied(2, 4));
  CHECK(img.at(0, 2, 4) == doctest::Approx(10.0));
  CHECK(img.occupied_count() == 1);
}

TEST_CASE("project quarter-turn azimuth") {
  const SensorModel sensor = small_sensor();
  PointCloud cloud;
  cloud.points.push_back({0, 10, 0});
  const RangeImage img = project(cloud, sensor, ChannelMode::Spherical);
  CHECK(img.occupied(2, 2));
}

TEST_CASE("occlusion keeps the smallest range") {
  const SensorModel sensor = small_sensor();
  PointCloud cloud;
  cloud.points.push_back({20, 0, 0});
  cloud.points.push_back({10, 0, 0});
  ProjectionStats stats;
  const RangeImage img = project(cloud, sensor, ChannelMode::Spherical, &stats);
  CHECK(img.at(0, 2, 4) == doctest::Approx(10.0));
  CHECK(stats.surviving == 1);
  CHECK(stats.occluded == 1);
}

TEST_CASE("project rejects empty clouds and bad sensors") {
  const SensorModel sensor = small_sensor();
  PointCloud empty;
  CHECK_THROWS(project(empty, sensor, ChannelMode::Spherical));

  SensorModel bad = sensor;
  bad.height = 1;
  PointCloud cloud;
  cloud.points.push_back({10, 0, 0});
  CHECK_THROWS(project(cloud, bad, ChannelMode::Spherical));

  PointCloud nan_cloud;
  nan_cloud.points.push_back({std::nan(""), 0, 0});
  CHECK_THROWS(project(nan_cloud, sensor, ChannelMode::Spherical));
}

TEST_CASE("out-of-FOV and out-of-range points are dropped and counted") {
  const SensorModel sensor = small_sensor();
  PointCloud cloud;
  cloud.points.push_back({10, 0, 0});    // kept
  cloud.points.push_back({10, 0, 20});   // far above the FOV
  cloud.points.push_back({200, 0, 0});   // beyond max_range
  ProjectionStats stats;
  project(cloud, sensor, ChannelMode::Spherical, &stats);
  CHECK(stats.surviving == 1);
  CHECK(stats.dropped_fov == 1);
  CHECK(stats.dropped_range == 1);
}

TEST_CASE("min_range boundary drops, max_range boundary keeps") {
  SensorModel sensor = small_sensor();
  sensor.min_range = 1.0;
  sensor.max_range = 10.0;
  PointCloud cloud;
  cloud.points.push_back({1, 0, 0});   // exactly min_range: dropped
  cloud.points.push_back({10, 0, 0});  // exactly max_range: kept
  ProjectionStats stats;
  const RangeImage img = project(cloud, sensor, ChannelMode::Spherical, &stats);
  CHECK(stats.dropped_range == 1);
  CHECK(stats.surviving == 1);
  CHECK(img.at(0, 2, 4) == doctest::Approx(10.0));
}

TEST_CASE("per-point bin assignment is reproducible on winners") {
  const SensorModel sensor = small_sensor();
  Rng rng(99);
  PointCloud cloud;
  for (int i = 0; i < 500; ++i) {
    const double r = rng.uniform(2.0, 90.0);
    const double phi = rng.uniform(-kPi, kPi);
    const double theta = rng.uniform(-sensor.fov_down_rad(), sensor.fov_up_rad());
    cloud.points.push_back({r * std::cos(theta) * std::cos(phi),
                            r * std::cos(theta) * std::sin(phi),
                            r * std::sin(theta)});
  }
  ProjectionStats stats;
  const RangeImage img = project(cloud, sensor, ChannelMode::Spherical, &stats);

  // Conservation: every input point is accounted for exactly once.
  CHECK(stats.surviving + stats.occluded + stats.dropped_fov +
            stats.dropped_range == (long long)cloud.size());
  CHECK(stats.surviving == img.occupied_count());
  const long long empty =
      (long long)sensor.height * sensor.width - img.occupied_count();
  CHECK(empty + stats.surviving == (long long)sensor.height * sensor.width);

  // Re-evaluating the projection equation on each point lands in an occupied
  // bin whose stored range is the bin minimum.
  std::vector<double> best(size_t(sensor.height) * sensor.width, 1e300);
  for (const auto& p : cloud.points) {
    int v, u;
    double r;
    if (!bin_of_point(p, sensor, &v, &u, &r)) continue;
    CHECK(img.occupied(v, u));
    best[img.bin_index(v, u)] = std::min(best[img.bin_index(v, u)], r);
  }
  for (int v = 0; v < sensor.height; ++v)
    for (int u = 0; u < sensor.width; ++u)
      if (img.occupied(v, u))
        CHECK(img.at(0, v, u) == float(best[img.bin_index(v, u)]));
}

TEST_CASE("unproject inverts a zero-azimuth polar bin exactly") {
  SensorModel sensor = small_sensor();
  sensor.width = 5;  // odd width: column 2 sits at azimuth exactly 0
  RangeImage img(4, 5, ChannelMode::Polar);
  float vals[2] = {10.0f, -1.0f};
  img.set_bin(2, 2, vals);
  const PointCloud cloud = unproject(img, sensor);
  REQUIRE(cloud.size() == 1);
  CHECK(cloud.points[0].x == doctest::Approx(10.0));
  CHECK(cloud.points[0].y == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(cloud.points[0].z == doctest::Approx(-1.0));
}

TEST_CASE("unproject drops bins below the threshold and checks dimensions") {
  const SensorModel sensor = small_sensor();
  RangeImage img(4, 8, ChannelMode::Polar);
  float near_bin[2] = {0.1f, 0.0f};
  float far_bin[2] = {5.0f, 0.0f};
  img.set_bin(0, 0, near_bin);
  img.set_bin(1, 1, far_bin);
  CHECK(unproject(img, sensor, 0.3).size() == 1);
  CHECK(unproject(img, sensor, 0.05).size() == 2);

  RangeImage wrong(3, 8, ChannelMode::Polar);
  CHECK_THROWS(unproject(wrong, sensor));
}

TEST_CASE("project-unproject-project is the identity on consistent polar images") {
  const SensorModel sensor = small_sensor();
  for (uint64_t seed = 0; seed < 5; ++seed) {
    const RangeImage img = self_consistent_polar(sensor, seed);
    const PointCloud cloud = unproject(img, sensor, 0.3);
    REQUIRE((long long)cloud.size() == img.occupied_count());
    const RangeImage back = project(cloud, sensor, ChannelMode::Polar);
    CHECK(back.channels == img.channels);
    CHECK(back.occupancy == img.occupancy);
  }
}

TEST_CASE("unproject-project recovers random points within quantization bounds") {
  SensorModel sensor = small_sensor();
  sensor.width = 64;
  Rng rng(7);
  PointCloud cloud;
  for (int i = 0; i < 2000; ++i) {
    const double r = rng.uniform(1.0, 90.0);
    const double phi = rng.uniform(-kPi, kPi);
    const double theta =
        rng.uniform(-sensor.fov_down_rad() * 0.999, sensor.fov_up_rad() * 0.999);
    cloud.points.push_back({r * std::cos(theta) * std::cos(phi),
                            r * std::cos(theta) * std::sin(phi),
                            r * std::sin(theta)});
  }
  const RangeImage img = project(cloud, sensor, ChannelMode::Polar);
  const PointCloud out = unproject(img, sensor, 0.3);

  // Map each output point back to its bin and compare with the winner.
  std::vector<const Point3*> winner(size_t(sensor.height) * sensor.width, nullptr);
  std::vector<double> best(winner.size(), 1e300);
  for (const auto& p : cloud.points) {
    int v, u;
    double r;
    if (!bin_of_point(p, sensor, &v, &u, &r)) continue;
    if (r < best[size_t(v) * sensor.width + u]) {
      best[size_t(v) * sensor.width + u] = r;
      winner[size_t(v) * sensor.width + u] = &p;
    }
  }
  for (const auto& q : out.points) {
    int v, u;
    REQUIRE(bin_of_point(q, sensor, &v, &u));
    const Point3* w = winner[size_t(v) * sensor.width + u];
    REQUIRE(w != nullptr);
    const double r = w->norm();
    const double dx = q.x - w->x, dy = q.y - w->y;
    CHECK(std::sqrt(dx * dx + dy * dy) <= r * kPi / sensor.width + 1e-4);
    CHECK(q.z == double(float(w->z)));  // z exact in polar mode
  }
}

TEST_CASE("downsample_rows keeps every rate-th row bitwise") {
  RangeImage img(8, 4, ChannelMode::Polar);
  Rng rng(3);
  for (int v = 0; v < 8; ++v)
    for (int u = 0; u < 4; ++u) {
      float vals[2] = {float(rng.uniform(1, 50)), float(rng.uniform(-2, 2))};
      if (rng.uniform() < 0.8) img.set_bin(v, u, vals);
    }
  const RangeImage down = downsample_rows(img, 4);
  CHECK(down.height == 2);
  for (int v = 0; v < 2; ++v)
    for (int u = 0; u < 4; ++u) {
      for (int c = 0; c < 2; ++c) CHECK(down.at(c, v, u) == img.at(c, 4 * v, u));
      CHECK(down.occupied(v, u) == img.occupied(4 * v, u));
    }

  const RangeImage half = downsample_rows(RangeImage(4, 4, ChannelMode::Polar), 2);
  CHECK(half.height == 2);

  CHECK_THROWS(downsample_rows(img, 1));
  CHECK_THROWS(downsample_rows(img, 3));  // 8 % 3 != 0
}

TEST_CASE("convert_mode pythagoras and empty-bin preservation") {
  const SensorModel sensor = small_sensor();
  RangeImage img(4, 8, ChannelMode::Polar);
  float vals[2] = {3.0f, 4.0f};
  img.set_bin(1, 3, vals);
  const RangeImage sph = convert_mode(img, sensor, ChannelMode::Spherical);
  CHECK(sph.at(0, 1, 3) == doctest::Approx(5.0));
  CHECK(sph.occupied(1, 3));
  // every other bin stays all-zero
  for (int v = 0; v < 4; ++v)
    for (int u = 0; u < 8; ++u)
      if (!(v == 1 && u == 3)) {
        CHECK(sph.at(0, v, u) == 0.0f);
        CHECK(!sph.occupied(v, u));
      }
}

TEST_CASE("cartesian-polar-cartesian round trip within azimuth re-quantization") {
  const SensorModel sensor = small_sensor();
  Rng rng(5);
  RangeImage img(4, 8, ChannelMode::Cartesian);
  for (int v = 0; v < 4; ++v)
    for (int u = 0; u < 8; ++u) {
      // Build each bin from its own azimuth so the point is bin-consistent.
      const double phi = sensor.azimuth_of_col(u) + rng.uniform(-0.3, 0.3) / 8;
      const double d = rng.uniform(2.0, 50.0);
      float vals[3] = {float(d * std::cos(phi)), float(d * std::sin(phi)),
                       float(rng.uniform(-3, 3))};
      img.set_bin(v, u, vals);
    }
  const RangeImage polar = convert_mode(img, sensor, ChannelMode::Polar);
  const RangeImage back = convert_mode(polar, sensor, ChannelMode::Cartesian);
  for (int v = 0; v < 4; ++v)
    for (int u = 0; u < 8; ++u) {
      const double r = std::hypot(img.at(0, v, u), img.at(1, v, u));
      const double dx = back.at(0, v, u) - img.at(0, v, u);
      const double dy = back.at(1, v, u) - img.at(1, v, u);
      CHECK(std::sqrt(dx * dx + dy * dy) <= r * kPi / sensor.width + 1e-5);
      CHECK(back.at(2, v, u) == img.at(2, v, u));
    }
}

TEST_CASE("downsample_rows commutes with convert_mode") {
  const SensorModel sensor = small_sensor();
  const RangeImage img = self_consistent_polar(sensor, 42);
  const SensorModel lr_sensor = sensor.downsampled(2);
  const RangeImage a =
      downsample_rows(convert_mode(img, sensor, ChannelMode::Spherical), 2);
  const RangeImage b =
      convert_mode(downsample_rows(img, 2), lr_sensor, ChannelMode::Spherical);
  CHECK(a.channels == b.channels);
  CHECK(a.occupancy == b.occupancy);
}

TEST_CASE("downsampled sensor pins bin-center elevations") {
  const SensorModel sensor = small_sensor();
  const SensorModel lr = sensor.downsampled(2);
  CHECK(lr.height == 2);
  CHECK(lr.elevation_of_row(0) == doctest::Approx(sensor.elevation_of_row(0)));
  CHECK(lr.elevation_of_row(1) == doctest::Approx(sensor.elevation_of_row(2)));
}

TEST_CASE("elevation table projection uses the nearest beam") {
  SensorModel sensor = small_sensor();
  sensor.elevation_table_deg = {10.0, 2.0, -3.0, -12.0};
  sensor.validate();
  CHECK(sensor.row_of_elevation(deg2rad(9.0)) == 0);
  CHECK(sensor.row_of_elevation(deg2rad(0.0)) == 1);
  CHECK(sensor.row_of_elevation(deg2rad(-5.0)) == 2);
  CHECK(sensor.row_of_elevation(deg2rad(-14.0)) == 3);
  CHECK(sensor.row_of_elevation(deg2rad(20.0)) == -1);

  // Round trip through the table rows.
  RangeImage img(4, 8, ChannelMode::Polar);
  for (int v = 0; v < 4; ++v) {
    const double tan_theta = std::tan(sensor.elevation_of_row(v));
    float vals[2] = {20.0f, float(20.0 * tan_theta)};
    img.set_bin(v, 1, vals);
  }
  const RangeImage back = project(unproject(img, sensor), sensor, ChannelMode::Polar);
  CHECK(back.channels == img.channels);
  CHECK(back.occupancy == img.occupancy);
}

TEST_CASE("sensor validation rejects bad tables") {
  SensorModel s = small_sensor();
  s.elevation_table_deg = {10.0, 2.0, -3.0};  // wrong length
  CHECK_THROWS(s.validate());
  s.elevation_table_deg = {10.0, 2.0, 2.0, -12.0};  // not strictly decreasing
  CHECK_THROWS(s.validate());
  s.elevation_table_deg = {40.0, 2.0, -3.0, -12.0};  // above fov_up
  CHECK_THROWS(s.validate());
}

TEST_CASE("container file round trip is bit exact") {
  const SensorModel sensor = small_sensor();
  const RangeImage img = self_consistent_polar(sensor, 11);
  const std::string path = "/tmp/hals_test_container.hals";
  save_range_image(path, img);
  const RangeImage loaded = load_range_image(path);
  CHECK(loaded.height == img.height);
  CHECK(loaded.width == img.width);
  CHECK(loaded.mode == img.mode);
  CHECK(loaded.channels == img.channels);
  CHECK(loaded.occupancy == img.occupancy);

  // Byte-level round trip.
  save_range_image(path + ".2", loaded);
  std::ifstream a(path, std::ios::binary), b(path + ".2", std::ios::binary);
  std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  CHECK(sa == sb);
  std::filesystem::remove(path);
  std::filesystem::remove(path + ".2");
}

TEST_CASE("container loader rejects corrupt files") {
  const std::string path = "/tmp/hals_test_corrupt.hals";
  {
    std::ofstream os(path, std::ios::binary);
    os << "JUNKJUNKJUNK";
  }
  CHECK_THROWS(load_range_image(path));

  const SensorModel sensor = small_sensor();
  save_range_image(path, self_consistent_polar(sensor, 1));
  std::filesystem::resize_file(path, 40);  // truncate
  CHECK_THROWS(load_range_image(path));
  std::filesystem::remove(path);
}

TEST_CASE("range image validate enforces the empty-bin invariant") {
  RangeImage img(2, 4, ChannelMode::Polar);
  float vals[2] = {5.0f, 1.0f};
  img.set_bin(0, 0, vals);
  CHECK_NOTHROW(img.validate());
  img.channels[img.channel_index(0, 1, 1)] = 3.0f;  // non-zero in empty bin
  CHECK_THROWS(img.validate());
}
