#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "hals/autodiff.hpp"
#include "hals/generator.hpp"
#include "hals/range_image.hpp"
#include "hals/sensor.hpp"

namespace hals {

// Index triples over occupied ground-truth bins, rejection-sampled until the
// three reference points span a triangle (area above colinear_area_eps).
struct TripletSet {
  std::vector<std::array<int, 3>> triples;  // flattened bin indices v*W+u
  double colinear_area_eps = 1e-4;
  uint64_t seed = 0;
};

// Default triple count: min(3000, 10% of occupied bins), at least 1.
int default_triplet_count(long long occupied_bins);

// Draws K triples uniformly (without replacement inside a triple),
// re-sampling colinear ones. Fails after 100*K draws without K valid
// triples. Requires a polar ground-truth image with >= 3 occupied bins.
TripletSet sample_triplets(const RangeImage& gt, int K, uint64_t seed,
                           double colinear_area_eps = 1e-4);

// Mean absolute difference over every bin and channel (empty bins included,
// targets zero).
double l1_range(const RangeImage& pred, const RangeImage& gt);

// Virtual-normal loss: both images are inverted at the triple bins (polar
// inversion), per-triple unit normals are compared with an L1 norm, averaged
// over triples. Degenerate predicted triangles contribute the clamped
// maximum of 2 per axis.
double vnl(const RangeImage& pred, const RangeImage& gt, const TripletSet& triplets,
           const SensorModel& sensor);

// l1_range + vnl with freshly sampled triplets.
double total_loss(const RangeImage& pred, const RangeImage& gt,
                  const SensorModel& sensor, int K, uint64_t seed);

// Unit normal of the plane spanned by an ordered point triple. Returns
// false when the triangle area is below area_eps.
bool triple_unit_normal(const Point3& p0, const Point3& p1, const Point3& p2,
                        double area_eps, Point3* normal);

// Builds the differentiable loss-op context from ground-truth images:
// reference normals come from the raw polar channels, predicted points are
// de-normalized inside the op. One context may cover a whole batch.
std::shared_ptr<TripletNormalContext> make_normal_loss_context(
    const std::vector<const RangeImage*>& gt_frames,
    const std::vector<TripletSet>& triplets, const SensorModel& sensor,
    const NormConfig& norm, double degenerate_area = 1e-8);

// Tape composition used by the trainer: L1 on normalized channels plus the
// normal loss on de-normalized 3D triples.
struct LossNodes {
  int l1 = -1;
  int vnl = -1;
  int total = -1;
};

template <typename T>
LossNodes total_loss_nodes(Tape<T>& tape, int pred_node,
                           const std::vector<const RangeImage*>& gt_frames,
                           const SensorModel& sensor, const NormConfig& norm,
                           int K, uint64_t seed, bool mask_empty_bins = false);

}  // namespace hals
