// Benchmark comparing the OpenMP kernels against the serial reference
// implementations: dilated convolution, chamfer nearest-neighbour search and
// per-bin ray casting.

#include <chrono>
#include <cmath>
#include <cstdio>

#include "hals/conv_kernels.hpp"
#include "hals/metrics.hpp"
#include "hals/ref_kernels.hpp"
#include "hals/scene.hpp"
#include "hals/threading.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double time_of(const std::function<void()>& fn, int repeats) {
  // One warmup, then best-of-N.
  fn();
  double best = 1e300;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = Clock::now();
    fn();
    const double dt = std::chrono::duration<double>(Clock::now() - t0).count();
    if (dt < best) best = dt;
  }
  return best;
}

void report(const char* name, double serial_s, double parallel_s, double max_diff) {
  std::printf("%-28s reference %9.4f s   openmp %9.4f s   speedup %5.2fx   max|diff| %.3g\n",
              name, serial_s, parallel_s, serial_s / parallel_s, max_diff);
}

}  // namespace

int main() {
  hals::apply_thread_limit();
  std::printf("threads: %d\n", hals::max_threads());

  {  // dilated convolution
    hals::Rng rng(7);
    hals::Tensor4 x(4, 16, 32, 256), w(16, 16, 3, 3), b(1, 16, 1, 1);
    for (auto& v : x.data) v = float(rng.uniform(-1, 1));
    for (auto& v : w.data) v = float(rng.uniform(-0.2, 0.2));
    for (auto& v : b.data) v = float(rng.uniform(-0.1, 0.1));

    hals::Tensor4 y_ref, y_omp;
    const double t_ref = time_of([&] { y_ref = hals::ref::conv2d_naive(x, w, b, 2); }, 2);
    const double t_omp = time_of([&] { hals::conv2d_forward(x, w, b, 2, y_omp); }, 5);
    double max_diff = 0;
    for (size_t i = 0; i < y_ref.size(); ++i)
      max_diff = std::max(max_diff, std::abs(double(y_ref.data[i]) - double(y_omp.data[i])));
    report("conv2d 4x16x32x256 d=2", t_ref, t_omp, max_diff);
  }

  {  // chamfer distance
    hals::Rng rng(11);
    hals::PointCloud a, b;
    for (int i = 0; i < 4000; ++i) {
      a.points.push_back({rng.uniform(-40, 40), rng.uniform(-40, 40), rng.uniform(-2, 2)});
      b.points.push_back({rng.uniform(-40, 40), rng.uniform(-40, 40), rng.uniform(-2, 2)});
    }
    double cd_ref = 0, cd_fast = 0;
    const double t_ref = time_of([&] { cd_ref = hals::ref::chamfer_bruteforce(a, b); }, 2);
    const double t_fast = time_of([&] { cd_fast = hals::chamfer(a, b); }, 5);
    report("chamfer n=4000", t_ref, t_fast, std::abs(cd_ref - cd_fast));
  }

  {  // ray casting
    hals::ScanJob job;
    job.scene = hals::random_scene(3, 1.0);
    job.sensor = hals::default_synthetic_sensor();
    job.sensor.height = 64;
    job.sensor.width = 1024;
    hals::RangeImage serial_img, parallel_img;
    const double t_serial = time_of(
        [&] {
          hals::ThreadLimit one(1);
          serial_img = hals::raycast_scan(job);
        },
        3);
    const double t_parallel = time_of([&] { parallel_img = hals::raycast_scan(job); }, 5);
    double max_diff = 0;
    for (size_t i = 0; i < serial_img.channels.size(); ++i)
      max_diff = std::max(max_diff, std::abs(double(serial_img.channels[i]) -
                                             double(parallel_img.channels[i])));
    report("raycast 64x1024", t_serial, t_parallel, max_diff);
  }

  return 0;
}
