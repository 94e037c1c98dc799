#pragma once

#include <cstdint>
#include <utility>

#include "hals/geometry.hpp"
#include "hals/range_image.hpp"
#include "hals/sensor.hpp"

namespace hals {

struct EmdResult {
  double mean = 0;    // mean matched distance, meters
  double sum = 0;     // total matched distance, meters
  bool approx = false;
  long long matched = 0;
};

struct VoxelScores {
  double iou = 0, precision = 0, recall = 0, f1 = 0;
  long long voxels_pred = 0, voxels_gt = 0, voxels_intersection = 0,
            voxels_union = 0;
};

struct MetricReport {
  double emd = 0;      // mean matched distance, meters
  double emd_sum = 0;
  bool emd_approx = false;
  double cd = 0;       // square meters
  double mae = 0, rmse = 0;  // meters, on the spherical range per bin
  double iou = 0, precision = 0, recall = 0, f1 = 0;
  long long n_pred = 0, n_gt = 0;
  long long voxels_pred = 0, voxels_gt = 0, voxels_intersection = 0;
};

// Earth mover's distance: exact min-cost perfect matching on Euclidean
// costs. Unequal cardinalities are equalized by seeded uniform subsampling
// of the larger cloud. Above exact_limit points the clouds are partitioned
// into azimuth sectors of at most exact_limit points and the sector EMDs are
// combined (approx flag set).
EmdResult emd(const PointCloud& a, const PointCloud& b, uint64_t seed = 0,
              int exact_limit = 4096);

// Symmetric sum of mean squared nearest-neighbour distances, exact
// (kd-tree accelerated).
double chamfer(const PointCloud& a, const PointCloud& b);

// MAE / RMSE on the per-bin spherical range over all bins (empty bins
// compare against zero unless mask_empty is set, which restricts the mean
// to bins occupied in either image).
std::pair<double, double> mae_rmse(const RangeImage& pred, const RangeImage& gt,
                                   bool mask_empty = false);

// Occupancy-voxel overlap scores on a grid anchored at the ground-truth
// bounding-box minimum corner. Predicted points outside the ground-truth
// box still occupy (penalized) predicted voxels.
VoxelScores voxel_scores(const PointCloud& pred, const PointCloud& gt,
                         double voxel_size = 0.1);

// All metrics for one prediction/ground-truth pair of polar range images.
MetricReport evaluate_pair(const RangeImage& pred, const RangeImage& gt,
                           const SensorModel& sensor, double drop_threshold = 0.3,
                           uint64_t seed = 0);

}  // namespace hals
