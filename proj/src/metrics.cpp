#include "hals/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "hals/hungarian.hpp"
#include "hals/kdtree.hpp"
#include "hals/projection.hpp"

namespace hals {

namespace {

// Seeded uniform subsample without replacement (partial Fisher-Yates).
std::vector<Point3> subsample(const std::vector<Point3>& points, size_t target,
                              uint64_t seed) {
  if (points.size() <= target) return points;
  std::vector<Point3> pool = points;
  Rng rng(seed);
  for (size_t i = 0; i < target; ++i) {
    const size_t j = i + rng.index(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(target);
  return pool;
}

EmdResult emd_exact(const std::vector<Point3>& a, const std::vector<Point3>& b) {
  const int n = int(a.size());
  std::vector<float> cost(size_t(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      cost[size_t(i) * n + j] = float((a[i] - b[j]).norm());
  const std::vector<int> match = solve_assignment(cost, n);
  EmdResult out;
  for (int i = 0; i < n; ++i) out.sum += (a[i] - b[match[i]]).norm();
  out.mean = out.sum / double(n);
  out.matched = n;
  return out;
}

}  // namespace

EmdResult emd(const PointCloud& a, const PointCloud& b, uint64_t seed,
              int exact_limit) {
  HALS_CHECK(!a.empty() && !b.empty(), "emd: empty point cloud");
  HALS_CHECK(exact_limit >= 1, "emd: exact_limit must be >= 1");
  const size_t n = std::min(a.size(), b.size());
  if (n <= size_t(exact_limit)) {
    const auto pa = subsample(a.points, n, mix_seed(seed, 1));
    const auto pb = subsample(b.points, n, mix_seed(seed, 2));
    return emd_exact(pa, pb);
  }

  // Blocked approximation: equal-angle azimuth sectors small enough that
  // every sector stays within the exact limit on both clouds.
  int sectors = int((std::max(a.size(), b.size()) + exact_limit - 1) / exact_limit);
  std::vector<std::vector<Point3>> bins_a, bins_b;
  for (;; ++sectors) {
    HALS_CHECK(sectors <= 4096, "emd: azimuth blocking failed to converge");
    bins_a.assign(sectors, {});
    bins_b.assign(sectors, {});
    auto scatter = [&](const std::vector<Point3>& pts,
                       std::vector<std::vector<Point3>>& bins) {
      for (const auto& p : pts) {
        const double phi = std::atan2(p.y, p.x);  // (-pi, pi]
        int s = int((phi + kPi) / (2.0 * kPi) * sectors);
        s = std::clamp(s, 0, sectors - 1);
        bins[s].push_back(p);
      }
    };
    scatter(a.points, bins_a);
    scatter(b.points, bins_b);
    bool ok = true;
    for (int s = 0; s < sectors && ok; ++s)
      ok = bins_a[s].size() <= size_t(exact_limit) &&
           bins_b[s].size() <= size_t(exact_limit);
    if (ok) break;
  }

  EmdResult out;
  out.approx = true;
  for (int s = 0; s < sectors; ++s) {
    if (bins_a[s].empty() || bins_b[s].empty()) continue;
    const size_t m = std::min(bins_a[s].size(), bins_b[s].size());
    const auto pa = subsample(bins_a[s], m, mix_seed(seed, 3, s));
    const auto pb = subsample(bins_b[s], m, mix_seed(seed, 4, s));
    const EmdResult block = emd_exact(pa, pb);
    out.sum += block.sum;
    out.matched += block.matched;
  }
  HALS_CHECK(out.matched > 0, "emd: no overlapping azimuth sectors");
  out.mean = out.sum / double(out.matched);
  return out;
}

double chamfer(const PointCloud& a, const PointCloud& b) {
  HALS_CHECK(!a.empty() && !b.empty(), "chamfer: empty point cloud");
  const KdTree3 tree_b(b.points);
  const KdTree3 tree_a(a.points);

  const int na = int(a.size()), nb = int(b.size());
  std::vector<double> d2a(na), d2b(nb);
#pragma omp parallel for schedule(static) if (na > 256)
  for (int i = 0; i < na; ++i) d2a[i] = tree_b.nearest(a.points[i]).second;
#pragma omp parallel for schedule(static) if (nb > 256)
  for (int i = 0; i < nb; ++i) d2b[i] = tree_a.nearest(b.points[i]).second;

  double sum_a = 0, sum_b = 0;  // fixed-order reduction
  for (double d : d2a) sum_a += d;
  for (double d : d2b) sum_b += d;
  return sum_a / double(na) + sum_b / double(nb);
}

std::pair<double, double> mae_rmse(const RangeImage& pred, const RangeImage& gt,
                                   bool mask_empty) {
  HALS_CHECK(pred.same_shape(gt), "mae_rmse: shape mismatch");
  auto spherical_r = [](const RangeImage& img, int v, int u) -> double {
    if (!img.occupied(v, u)) return 0.0;
    switch (img.mode) {
      case ChannelMode::Spherical:
        return img.at(0, v, u);
      case ChannelMode::Polar: {
        const double d = img.at(0, v, u);
        const double z = img.at(1, v, u);
        return std::sqrt(d * d + z * z);
      }
      case ChannelMode::Cartesian: {
        const double x = img.at(0, v, u);
        const double y = img.at(1, v, u);
        const double z = img.at(2, v, u);
        return std::sqrt(x * x + y * y + z * z);
      }
    }
    fail("invalid channel mode");
  };

  double abs_sum = 0, sq_sum = 0;
  long long count = 0;
  for (int v = 0; v < pred.height; ++v)
    for (int u = 0; u < pred.width; ++u) {
      if (mask_empty && !pred.occupied(v, u) && !gt.occupied(v, u)) continue;
      const double diff = spherical_r(pred, v, u) - spherical_r(gt, v, u);
      abs_sum += std::abs(diff);
      sq_sum += diff * diff;
      ++count;
    }
  HALS_CHECK(count > 0, "mae_rmse: no bins to compare");
  return {abs_sum / double(count), std::sqrt(sq_sum / double(count))};
}

namespace {

// Voxel key packing: 21 bits per axis with a fixed offset, covering
// +-1048575 cells (+-100 km at 0.1 m).
inline uint64_t voxel_key(long long cx, long long cy, long long cz) {
  constexpr long long kOffset = 1ll << 20;
  constexpr long long kLimit = (1ll << 21) - 1;
  cx += kOffset;
  cy += kOffset;
  cz += kOffset;
  HALS_CHECK(cx >= 0 && cx <= kLimit && cy >= 0 && cy <= kLimit && cz >= 0 &&
                 cz <= kLimit,
             "voxel_scores: point too far from the grid anchor");
  return (uint64_t(cx) << 42) | (uint64_t(cy) << 21) | uint64_t(cz);
}

std::vector<uint64_t> voxel_set(const std::vector<Point3>& points,
                                const Point3& anchor, double voxel_size) {
  std::vector<uint64_t> keys(points.size());
  const int n = int(points.size());
#pragma omp parallel for schedule(static) if (n > 4096)
  for (int i = 0; i < n; ++i) {
    const Point3& p = points[i];
    keys[i] = voxel_key((long long)std::floor((p.x - anchor.x) / voxel_size),
                        (long long)std::floor((p.y - anchor.y) / voxel_size),
                        (long long)std::floor((p.z - anchor.z) / voxel_size));
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  return keys;
}

}  // namespace

VoxelScores voxel_scores(const PointCloud& pred, const PointCloud& gt,
                         double voxel_size) {
  HALS_CHECK(voxel_size > 0, "voxel_scores: voxel size must be positive");
  HALS_CHECK(!gt.empty(), "voxel_scores: empty ground truth");
  // Grid anchored at the ground-truth bounding box.
  Point3 anchor = gt.points[0];
  for (const auto& p : gt.points) {
    anchor.x = std::min(anchor.x, p.x);
    anchor.y = std::min(anchor.y, p.y);
    anchor.z = std::min(anchor.z, p.z);
  }

  const auto gt_vox = voxel_set(gt.points, anchor, voxel_size);
  std::vector<uint64_t> pred_vox;
  if (!pred.empty()) pred_vox = voxel_set(pred.points, anchor, voxel_size);

  std::vector<uint64_t> inter;
  std::set_intersection(pred_vox.begin(), pred_vox.end(), gt_vox.begin(),
                        gt_vox.end(), std::back_inserter(inter));

  VoxelScores out;
  out.voxels_pred = (long long)pred_vox.size();
  out.voxels_gt = (long long)gt_vox.size();
  out.voxels_intersection = (long long)inter.size();
  out.voxels_union = out.voxels_pred + out.voxels_gt - out.voxels_intersection;
  if (out.voxels_union > 0)
    out.iou = double(out.voxels_intersection) / double(out.voxels_union);
  if (out.voxels_pred > 0)
    out.precision = double(out.voxels_intersection) / double(out.voxels_pred);
  if (out.voxels_gt > 0)
    out.recall = double(out.voxels_intersection) / double(out.voxels_gt);
  if (out.precision + out.recall > 0)
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

MetricReport evaluate_pair(const RangeImage& pred, const RangeImage& gt,
                           const SensorModel& sensor, double drop_threshold,
                           uint64_t seed) {
  MetricReport report;
  std::tie(report.mae, report.rmse) = mae_rmse(pred, gt);

  const PointCloud cloud_pred = unproject(pred, sensor, drop_threshold);
  const PointCloud cloud_gt = unproject(gt, sensor, drop_threshold);
  report.n_pred = (long long)cloud_pred.size();
  report.n_gt = (long long)cloud_gt.size();
  HALS_CHECK(!cloud_gt.empty(), "evaluate_pair: ground truth produced no points");

  if (!cloud_pred.empty()) {
    const EmdResult e = emd(cloud_pred, cloud_gt, seed);
    report.emd = e.mean;
    report.emd_sum = e.sum;
    report.emd_approx = e.approx;
    report.cd = chamfer(cloud_pred, cloud_gt);
    const VoxelScores v = voxel_scores(cloud_pred, cloud_gt);
    report.iou = v.iou;
    report.precision = v.precision;
    report.recall = v.recall;
    report.f1 = v.f1;
    report.voxels_pred = v.voxels_pred;
    report.voxels_gt = v.voxels_gt;
    report.voxels_intersection = v.voxels_intersection;
  }
  return report;
}

}  // namespace hals
