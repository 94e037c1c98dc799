#include "hals/scene.hpp"

#include <cmath>
#include <sstream>

#include "hals/kv_config.hpp"

namespace hals {

void Scene::validate() const {
  HALS_CHECK(std::isfinite(ground_z), "scene: ground_z must be finite");
  for (const auto& b : boxes) {
    HALS_CHECK(b.center.finite() && b.half_extents.finite(),
               "scene: box with non-finite parameters");
    HALS_CHECK(b.half_extents.x > 0 && b.half_extents.y > 0 && b.half_extents.z > 0,
               "scene: box extents must be positive");
  }
  for (const auto& c : cylinders) {
    HALS_CHECK(c.center.finite() && std::isfinite(c.radius) && std::isfinite(c.height),
               "scene: cylinder with non-finite parameters");
    HALS_CHECK(c.radius > 0 && c.height > 0,
               "scene: cylinder radius/height must be positive");
  }
}

void ScanJob::validate() const {
  scene.validate();
  sensor.validate();
  HALS_CHECK(sensor_origin.finite(), "scan job: non-finite sensor origin");
  HALS_CHECK(sensor_origin.z > scene.ground_z,
             "scan job: sensor origin must be above the ground plane");
}

Scene random_scene(uint64_t seed, double difficulty) {
  Rng rng(seed);
  Scene scene;
  scene.ground_z = 0.0;
  scene.rng_seed = seed;
  double diff = std::min(std::max(difficulty, 0.0), 1.0);
  if (diff <= 0.0) return scene;  // ground plane only

  const int max_boxes = 3 + (int)std::lround(17.0 * diff);
  const int max_cyls = (int)std::lround(10.0 * diff);
  const int n_boxes = rng.uniform_int(3, max_boxes);
  const int n_cyls = rng.uniform_int(0, max_cyls);

  // 3 m clearance around the origin keeps the sensor outside every solid.
  for (int i = 0; i < n_boxes; ++i) {
    Box b;
    const double rho = rng.uniform(4.0, 55.0);
    const double ang = rng.uniform(-kPi, kPi);
    b.half_extents = {rng.uniform(0.4, 2.5), rng.uniform(0.4, 2.5),
                      rng.uniform(0.4, 2.2)};
    b.center = {rho * std::cos(ang), rho * std::sin(ang),
                scene.ground_z + b.half_extents.z};
    scene.boxes.push_back(b);
  }
  for (int i = 0; i < n_cyls; ++i) {
    Cylinder c;
    const double rho = rng.uniform(4.0, 55.0);
    const double ang = rng.uniform(-kPi, kPi);
    c.radius = rng.uniform(0.15, 1.2);
    c.height = rng.uniform(1.0, 6.0);
    c.center = {rho * std::cos(ang), rho * std::sin(ang),
                scene.ground_z + c.height * 0.5};
    scene.cylinders.push_back(c);
  }
  scene.validate();
  return scene;
}

void save_scene(const std::string& path, const Scene& scene) {
  KvFile kv;
  kv.add("ground_z", scene.ground_z);
  kv.add("seed", (unsigned long long)scene.rng_seed);
  auto vec = [](const Point3& p) {
    std::ostringstream os;
    os.precision(17);
    os << p.x << ' ' << p.y << ' ' << p.z;
    return os.str();
  };
  for (const auto& b : scene.boxes)
    kv.add("box", vec(b.center) + " " + vec(b.half_extents));
  for (const auto& c : scene.cylinders) {
    std::ostringstream os;
    os.precision(17);
    os << c.center.x << ' ' << c.center.y << ' ' << c.center.z << ' '
       << c.radius << ' ' << c.height;
    kv.add("cylinder", os.str());
  }
  kv.save(path);
}

Scene load_scene(const std::string& path) {
  KvFile kv = KvFile::load(path);
  Scene scene;
  scene.ground_z = kv.get_double_or("ground_z", 0.0);
  scene.rng_seed = (uint64_t)kv.get_int_or("seed", 0);
  for (const auto& line : kv.get_all("box")) {
    std::istringstream is(line);
    Box b;
    is >> b.center.x >> b.center.y >> b.center.z >> b.half_extents.x >>
        b.half_extents.y >> b.half_extents.z;
    HALS_CHECK(!is.fail(), "malformed box line in " + path);
    scene.boxes.push_back(b);
  }
  for (const auto& line : kv.get_all("cylinder")) {
    std::istringstream is(line);
    Cylinder c;
    is >> c.center.x >> c.center.y >> c.center.z >> c.radius >> c.height;
    HALS_CHECK(!is.fail(), "malformed cylinder line in " + path);
    scene.cylinders.push_back(c);
  }
  scene.validate();
  return scene;
}

}  // namespace hals
