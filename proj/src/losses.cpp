#include "hals/losses.hpp"

#include <cmath>

namespace hals {

int default_triplet_count(long long occupied_bins) {
  const long long tenth = occupied_bins / 10;
  return int(std::max(1ll, std::min(3000ll, tenth)));
}

namespace {

Point3 polar_bin_point(const RangeImage& img, const SensorModel& sensor, int bin) {
  const int v = bin / img.width;
  const int u = bin % img.width;
  const double phi = sensor.azimuth_of_col(u);
  const double d = img.at(0, v, u);
  return {d * std::cos(phi), d * std::sin(phi), double(img.at(1, v, u))};
}

}  // namespace

bool triple_unit_normal(const Point3& p0, const Point3& p1, const Point3& p2,
                        double area_eps, Point3* normal) {
  const Point3 c = (p1 - p0).cross(p2 - p0);
  const double n = c.norm();
  if (0.5 * n < area_eps) return false;
  *normal = c * (1.0 / n);
  return true;
}

TripletSet sample_triplets(const RangeImage& gt, int K, uint64_t seed,
                           double colinear_area_eps) {
  HALS_CHECK(gt.mode == ChannelMode::Polar, "sample_triplets: expects polar image");
  HALS_CHECK(K >= 1, "sample_triplets: K must be >= 1");
  std::vector<int> occupied;
  for (int v = 0; v < gt.height; ++v)
    for (int u = 0; u < gt.width; ++u)
      if (gt.occupied(v, u)) occupied.push_back(v * gt.width + u);
  HALS_CHECK(occupied.size() >= 3, "sample_triplets: fewer than 3 occupied bins");

  // Sensor width is all the inversion needs for azimuth; a throwaway model
  // with matching dimensions serves here.
  SensorModel geom;
  geom.height = std::max(gt.height, 2);
  geom.width = gt.width;

  TripletSet set;
  set.colinear_area_eps = colinear_area_eps;
  set.seed = seed;
  Rng rng(seed);
  const long long max_draws = 100ll * K;
  long long draws = 0;
  while ((int)set.triples.size() < K) {
    HALS_CHECK(draws < max_draws,
               "sample_triplets: could not find enough non-colinear triples");
    ++draws;
    int a = int(rng.index(occupied.size()));
    int b = int(rng.index(occupied.size()));
    int c = int(rng.index(occupied.size()));
    if (a == b || a == c || b == c) continue;
    const int ba = occupied[a], bb = occupied[b], bc = occupied[c];
    Point3 n;
    if (!triple_unit_normal(polar_bin_point(gt, geom, ba),
                            polar_bin_point(gt, geom, bb),
                            polar_bin_point(gt, geom, bc), colinear_area_eps, &n))
      continue;
    set.triples.push_back({ba, bb, bc});
  }
  return set;
}

double l1_range(const RangeImage& pred, const RangeImage& gt) {
  HALS_CHECK(pred.same_shape(gt), "l1_range: shape mismatch");
  double acc = 0;
  for (size_t i = 0; i < pred.channels.size(); ++i)
    acc += std::abs(double(pred.channels[i]) - double(gt.channels[i]));
  return acc / double(pred.channels.size());
}

double vnl(const RangeImage& pred, const RangeImage& gt, const TripletSet& triplets,
           const SensorModel& sensor) {
  HALS_CHECK(pred.same_shape(gt), "vnl: shape mismatch");
  HALS_CHECK(pred.mode == ChannelMode::Polar, "vnl: expects polar images");
  HALS_CHECK(!triplets.triples.empty(), "vnl: empty triplet set");
  HALS_CHECK(gt.width == sensor.width, "vnl: sensor width mismatch");
  // Normalization is singular at zero area; clamp instead.
  const double degenerate_area = 1e-8;

  double acc = 0;
  for (const auto& tr : triplets.triples) {
    Point3 gt_pts[3], pr_pts[3];
    for (int m = 0; m < 3; ++m) {
      const int v = tr[m] / gt.width;
      const int u = tr[m] % gt.width;
      HALS_CHECK(gt.occupied(v, u), "vnl: triple references an empty gt bin");
      gt_pts[m] = polar_bin_point(gt, sensor, tr[m]);
      pr_pts[m] = polar_bin_point(pred, sensor, tr[m]);
    }
    Point3 n_gt;
    HALS_CHECK(triple_unit_normal(gt_pts[0], gt_pts[1], gt_pts[2],
                                  triplets.colinear_area_eps, &n_gt),
               "vnl: colinear ground-truth triple");
    Point3 n_pred;
    if (!triple_unit_normal(pr_pts[0], pr_pts[1], pr_pts[2], degenerate_area,
                            &n_pred)) {
      acc += 6.0;  // 2 per axis
      continue;
    }
    acc += std::abs(n_pred.x - n_gt.x) + std::abs(n_pred.y - n_gt.y) +
           std::abs(n_pred.z - n_gt.z);
  }
  return acc / double(triplets.triples.size());
}

double total_loss(const RangeImage& pred, const RangeImage& gt,
                  const SensorModel& sensor, int K, uint64_t seed) {
  const TripletSet triplets = sample_triplets(gt, K, seed);
  return l1_range(pred, gt) + vnl(pred, gt, triplets, sensor);
}

std::shared_ptr<TripletNormalContext> make_normal_loss_context(
    const std::vector<const RangeImage*>& gt_frames,
    const std::vector<TripletSet>& triplets, const SensorModel& sensor,
    const NormConfig& norm, double degenerate_area) {
  HALS_CHECK(gt_frames.size() == triplets.size(),
             "normal loss context: frame/triplet count mismatch");
  auto ctx = std::make_shared<TripletNormalContext>();
  ctx->d_scale = norm.max_range;
  ctx->z_scale = norm.z_scale();
  ctx->z_offset = norm.z_min;
  ctx->degenerate_area = degenerate_area;
  for (size_t f = 0; f < gt_frames.size(); ++f) {
    const RangeImage& gt = *gt_frames[f];
    for (const auto& tr : triplets[f].triples) {
      TripletNormalContext::Triple out;
      out.frame = int(f);
      Point3 pts[3];
      for (int m = 0; m < 3; ++m) {
        out.bin[m] = tr[m];
        out.phi[m] = sensor.azimuth_of_col(tr[m] % gt.width);
        pts[m] = polar_bin_point(gt, sensor, tr[m]);
      }
      Point3 n;
      HALS_CHECK(triple_unit_normal(pts[0], pts[1], pts[2],
                                    triplets[f].colinear_area_eps, &n),
                 "normal loss context: colinear ground-truth triple");
      out.gt_normal[0] = n.x;
      out.gt_normal[1] = n.y;
      out.gt_normal[2] = n.z;
      ctx->triples.push_back(out);
    }
  }
  return ctx;
}

template <typename T>
LossNodes total_loss_nodes(Tape<T>& tape, int pred_node,
                           const std::vector<const RangeImage*>& gt_frames,
                           const SensorModel& sensor, const NormConfig& norm,
                           int K, uint64_t seed, bool mask_empty_bins) {
  const auto& pred = tape.value(pred_node);
  HALS_CHECK(!gt_frames.empty() && pred.b == (int)gt_frames.size(),
             "total_loss_nodes: batch size mismatch");

  // The L1 term compares de-normalized predictions against the raw polar
  // channels (meters), with empty bins at (0, 0). Keeping this term in
  // sensor units matches the per-bin loss scale to the normal term; in
  // normalized units its gradient is smaller by the d scale and training
  // stalls under the unit-weight sum.
  Tensor4T<T> target(pred.b, pred.c, pred.h, pred.w);
  std::vector<T> weights;
  if (mask_empty_bins) weights.assign(target.size(), T(0));
  std::vector<TripletSet> triplets;
  for (size_t f = 0; f < gt_frames.size(); ++f) {
    const RangeImage& gt = *gt_frames[f];
    HALS_CHECK(gt.mode == ChannelMode::Polar, "total_loss_nodes: expects polar gt");
    HALS_CHECK(gt.height == pred.h && gt.width == pred.w,
               "total_loss_nodes: gt/prediction shape mismatch");
    for (int v = 0; v < gt.height; ++v)
      for (int u = 0; u < gt.width; ++u) {
        if (!gt.occupied(v, u)) continue;
        target.at(int(f), 0, v, u) = T(gt.at(0, v, u));
        target.at(int(f), 1, v, u) = T(gt.at(1, v, u));
        if (mask_empty_bins) {
          weights[target.idx(int(f), 0, v, u)] = T(1);
          weights[target.idx(int(f), 1, v, u)] = T(1);
        }
      }
    const int k = K > 0 ? K : default_triplet_count(gt.occupied_count());
    triplets.push_back(sample_triplets(gt, k, mix_seed(seed, f)));
  }

  // De-normalize the prediction on the tape: d = d_hat * max_range,
  // z = z_hat * z_scale + z_min.
  const int d_raw = tape.affine(tape.slice_channels(pred_node, 0, 1),
                                T(norm.max_range), T(0));
  const int z_raw = tape.affine(tape.slice_channels(pred_node, 1, 2),
                                T(norm.z_scale()), T(norm.z_min));
  const int pred_raw = tape.concat_channels({d_raw, z_raw});

  LossNodes out;
  out.l1 = tape.masked_mean_abs_diff(pred_raw, std::move(target), std::move(weights));
  auto ctx = make_normal_loss_context(gt_frames, triplets, sensor, norm);
  out.vnl = tape.triplet_normal_loss(pred_node, ctx);
  out.total = tape.add(out.l1, out.vnl);
  return out;
}

template LossNodes total_loss_nodes<float>(Tape<float>&, int,
                                           const std::vector<const RangeImage*>&,
                                           const SensorModel&, const NormConfig&,
                                           int, uint64_t, bool);
template LossNodes total_loss_nodes<double>(Tape<double>&, int,
                                            const std::vector<const RangeImage*>&,
                                            const SensorModel&, const NormConfig&,
                                            int, uint64_t, bool);

}  // namespace hals
