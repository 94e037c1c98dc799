#include "hals/ref_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hals::ref {

double chamfer_bruteforce(const PointCloud& a, const PointCloud& b) {
  HALS_CHECK(!a.empty() && !b.empty(), "chamfer: empty point cloud");
  double sum_ab = 0;
  for (const auto& p : a.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : b.points) {
      const double d = (p - q).squared_norm();
      if (d < best) best = d;
    }
    sum_ab += best;
  }
  double sum_ba = 0;
  for (const auto& q : b.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : a.points) {
      const double d = (q - p).squared_norm();
      if (d < best) best = d;
    }
    sum_ba += best;
  }
  return sum_ab / double(a.size()) + sum_ba / double(b.size());
}

double emd_bruteforce(const PointCloud& a, const PointCloud& b) {
  HALS_CHECK(a.size() == b.size(), "emd_bruteforce: clouds must be equal size");
  HALS_CHECK(!a.empty(), "emd_bruteforce: empty point cloud");
  HALS_CHECK(a.size() <= 9, "emd_bruteforce: too many points to enumerate");
  std::vector<int> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0;
    for (size_t i = 0; i < a.size(); ++i)
      total += (a.points[i] - b.points[perm[i]]).norm();
    if (total < best) best = total;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / double(a.size());
}

void row_stats_two_pass(const std::vector<RangeImage>& images,
                        std::vector<double>* mean, std::vector<double>* stddev) {
  HALS_CHECK(!images.empty(), "row_stats_two_pass: empty dataset");
  const int rows = images[0].height;
  std::vector<double> sum(rows, 0.0);
  std::vector<long long> count(rows, 0);
  for (const auto& img : images) {
    HALS_CHECK(img.mode == ChannelMode::Spherical,
               "row_stats_two_pass: expects spherical images");
    for (int v = 0; v < rows; ++v)
      for (int u = 0; u < img.width; ++u)
        if (img.occupied(v, u)) {
          sum[v] += img.at(0, v, u);
          ++count[v];
        }
  }
  mean->assign(rows, 0.0);
  stddev->assign(rows, 0.0);
  for (int v = 0; v < rows; ++v)
    if (count[v] > 0) (*mean)[v] = sum[v] / double(count[v]);
  std::vector<double> sq(rows, 0.0);
  for (const auto& img : images)
    for (int v = 0; v < rows; ++v)
      for (int u = 0; u < img.width; ++u)
        if (img.occupied(v, u)) {
          const double d = img.at(0, v, u) - (*mean)[v];
          sq[v] += d * d;
        }
  for (int v = 0; v < rows; ++v)
    if (count[v] > 0) (*stddev)[v] = std::sqrt(sq[v] / double(count[v]));
}

}  // namespace hals::ref
