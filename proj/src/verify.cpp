#include "hals/verify.hpp"

#include <functional>

#include "hals/grad_check.hpp"
#include "hals/losses.hpp"
#include "hals/projection.hpp"

namespace hals {

namespace {

using TapeD = Tape<double>;
using TensorD = Tensor4T<double>;
using StoreD = ParamStoreT<double>;

TensorD random_tensor(Rng& rng, int b, int c, int h, int w, double lo, double hi) {
  TensorD t(b, c, h, w);
  for (auto& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

// Values bounded away from zero so finite differences never straddle the
// leaky_relu kink.
TensorD random_signed_tensor(Rng& rng, int b, int c, int h, int w) {
  TensorD t(b, c, h, w);
  for (auto& v : t.data) {
    const double mag = rng.uniform(0.1, 1.0);
    v = rng.uniform() < 0.5 ? -mag : mag;
  }
  return t;
}

void fold(GradCheckSummary* summary, const GradCheckResult& result) {
  summary->max_err = std::max(summary->max_err, result.max_rel_err);
  summary->elements_checked += result.checked;
  summary->elements_skipped += result.skipped_kinks;
  ++summary->checks;
}

// Builds a loss from the registered parameters, runs grad_check, folds the
// result into the summary.
void run_check(GradCheckSummary* summary, StoreD& params,
               const std::function<int(TapeD&, const std::vector<int>&)>& build,
               uint64_t seed, int subset = 0, double eps = 1e-3) {
  auto fn = [&](StoreD& ps, bool with_grad) -> GradEval {
    TapeD tape;
    std::vector<int> ids;
    ids.reserve(ps.size());
    for (auto& p : ps.items) ids.push_back(tape.input(p.value, true));
    const int loss = build(tape, ids);
    GradEval eval{tape.value(loss).data[0], tape.branch_signature()};
    if (with_grad) {
      tape.backward(loss);
      for (size_t i = 0; i < ps.items.size(); ++i) {
        const auto& g = tape.grad(ids[i]);
        for (size_t j = 0; j < g.size(); ++j) ps.items[i].grad.data[j] += g.data[j];
      }
    }
    return eval;
  };
  fold(summary, grad_check(fn, params, eps, subset, seed));
}

}  // namespace

GradCheckSummary gradcheck_ops(int seeds) {
  GradCheckSummary summary;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(mix_seed(0x09e5, s));
    const int B = rng.uniform_int(1, 2);
    const int H = rng.uniform_int(3, 5);
    const int W = rng.uniform_int(3, 6);

    {  // conv2d, k=3, random dilation
      const int cin = rng.uniform_int(1, 3), cout = rng.uniform_int(1, 3);
      const int dil = rng.uniform_int(1, 2);
      StoreD params;
      params.add("x", random_signed_tensor(rng, B, cin, H, W));
      params.add("w", random_signed_tensor(rng, cout, cin, 3, 3));
      params.add("b", random_signed_tensor(rng, 1, cout, 1, 1));
      TensorD head = random_tensor(rng, B, cout, H, W, -1, 1);
      run_check(&summary, params,
                [&, dil](TapeD& t, const std::vector<int>& ids) {
                  return t.weighted_sum(t.conv2d(ids[0], ids[1], ids[2], dil), head);
                },
                mix_seed(1, s));
    }
    {  // pointwise conv (k=1) + leaky_relu
      const int cin = rng.uniform_int(1, 3), cout = rng.uniform_int(2, 4);
      StoreD params;
      params.add("x", random_signed_tensor(rng, B, cin, H, W));
      params.add("w", random_signed_tensor(rng, cout, cin, 1, 1));
      params.add("b", random_signed_tensor(rng, 1, cout, 1, 1));
      TensorD head = random_tensor(rng, B, cout, H, W, -1, 1);
      run_check(&summary, params,
                [&](TapeD& t, const std::vector<int>& ids) {
                  const int c = t.conv2d(ids[0], ids[1], ids[2], 1);
                  return t.weighted_sum(t.leaky_relu(c, 0.2), head);
                },
                mix_seed(2, s));
    }
    {  // softmax_pair (sub + sigmoid), both masks in the head
      StoreD params;
      params.add("a", random_signed_tensor(rng, B, 1, H, W));
      params.add("b", random_signed_tensor(rng, B, 1, H, W));
      TensorD head1 = random_tensor(rng, B, 1, H, W, -1, 1);
      TensorD head2 = random_tensor(rng, B, 1, H, W, -1, 1);
      run_check(&summary, params,
                [&](TapeD& t, const std::vector<int>& ids) {
                  auto [ma, mb] = softmax_pair(t, ids[0], ids[1]);
                  return t.add(t.weighted_sum(ma, head1), t.weighted_sum(mb, head2));
                },
                mix_seed(3, s));
    }
    {  // add / sub / mul / affine chain
      StoreD params;
      params.add("a", random_signed_tensor(rng, B, 2, H, W));
      params.add("b", random_signed_tensor(rng, B, 2, H, W));
      TensorD head = random_tensor(rng, B, 2, H, W, -1, 1);
      run_check(&summary, params,
                [&](TapeD& t, const std::vector<int>& ids) {
                  const int sum = t.add(ids[0], ids[1]);
                  const int diff = t.sub(ids[0], ids[1]);
                  const int prod = t.mul(sum, diff);
                  return t.weighted_sum(t.affine(prod, 0.5, 0.25), head);
                },
                mix_seed(4, s));
    }
    {  // mul_mask
      StoreD params;
      params.add("x", random_signed_tensor(rng, B, 3, H, W));
      params.add("m", random_signed_tensor(rng, B, 1, H, W));
      TensorD head = random_tensor(rng, B, 3, H, W, -1, 1);
      run_check(&summary, params,
                [&](TapeD& t, const std::vector<int>& ids) {
                  return t.weighted_sum(t.mul_mask(ids[0], ids[1]), head);
                },
                mix_seed(5, s));
    }
    {  // concat + slice
      StoreD params;
      params.add("a", random_signed_tensor(rng, B, 2, H, W));
      params.add("b", random_signed_tensor(rng, B, 1, H, W));
      TensorD head = random_tensor(rng, B, 2, H, W, -1, 1);
      run_check(&summary, params,
                [&](TapeD& t, const std::vector<int>& ids) {
                  const int cat = t.concat_channels({ids[0], ids[1]});
                  return t.weighted_sum(t.slice_channels(cat, 1, 3), head);
                },
                mix_seed(6, s));
    }
    {  // vertical sub-pixel shuffle
      const int rate = 2;
      StoreD params;
      params.add("x", random_signed_tensor(rng, B, 4, H, W));
      TensorD head = random_tensor(rng, B, 2, H * rate, W, -1, 1);
      run_check(&summary, params,
                [&](TapeD& t, const std::vector<int>& ids) {
                  return t.weighted_sum(t.vertical_shuffle(ids[0], rate), head);
                },
                mix_seed(7, s));
    }
    {  // mean absolute difference, target offset away from the kink
      StoreD params;
      TensorD x = random_signed_tensor(rng, B, 2, H, W);
      TensorD target = x;
      for (auto& v : target.data) {
        const double off = rng.uniform(0.05, 0.5);
        v += rng.uniform() < 0.5 ? -off : off;
      }
      params.add("x", x);
      run_check(&summary, params,
                [&](TapeD& t, const std::vector<int>& ids) {
                  return t.mean_abs_diff(ids[0], target);
                },
                mix_seed(8, s));
    }
  }
  return summary;
}

namespace {

GeneratorConfig toy_generator_config() {
  GeneratorConfig cfg;
  cfg.input_channels = 2;
  cfg.feature_width = 8;
  cfg.total_blocks = 4;
  cfg.split_index = 2;
  cfg.upsample_rate = 2;
  return cfg;
}

}  // namespace

GradCheckSummary gradcheck_generator(int seeds, bool full_first_seed,
                                     int subset_elements) {
  GradCheckSummary summary;
  const GeneratorConfig cfg = toy_generator_config();
  const int H = 4, W = 8;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(mix_seed(0x93e7, s));
    StoreD params = init_generator_params<double>(cfg, mix_seed(11, s));
    TensorD input = random_tensor(rng, 1, cfg.input_channels, H, W, 0.05, 0.9);
    TensorD head = random_tensor(rng, 1, cfg.input_channels, H * cfg.upsample_rate,
                                 W, -1, 1);
    auto fn = [&](StoreD& ps, bool with_grad) -> GradEval {
      TapeD tape;
      GeneratorNodes nodes = generator_forward(tape, cfg, ps, input);
      const int loss = tape.weighted_sum(nodes.q_fused, head);
      GradEval eval{tape.value(loss).data[0], tape.branch_signature()};
      if (with_grad) {
        tape.backward(loss);
        pull_param_grads(tape, nodes, ps);
      }
      return eval;
    };
    const int subset = (s == 0 && full_first_seed) ? 0 : subset_elements;
    fold(&summary, grad_check(fn, params, 1e-3, subset, mix_seed(21, s)));
  }
  return summary;
}

GradCheckSummary gradcheck_loss(int seeds) {
  GradCheckSummary summary;
  const GeneratorConfig cfg = toy_generator_config();
  SensorModel sensor = default_synthetic_sensor();
  sensor.height = 8;
  sensor.width = 8;

  for (int s = 0; s < seeds; ++s) {
    Rng rng(mix_seed(0x1055, s));
    // Fully occupied polar ground truth with jittered height, so triples are
    // generically non-colinear and sampled normals vary.
    RangeImage gt(sensor.height, sensor.width, ChannelMode::Polar);
    for (int v = 0; v < gt.height; ++v)
      for (int u = 0; u < gt.width; ++u) {
        float vals[2] = {float(rng.uniform(5.0, 30.0)),
                         float(rng.uniform(-2.0, 2.0))};
        gt.set_bin(v, u, vals);
      }
    NormConfig norm;
    norm.max_range = 40.0;
    norm.z_min = -3.0;
    norm.z_max = 3.0;

    {  // direct prediction tensor through the combined loss
      StoreD params;
      TensorD pred(1, 2, sensor.height, sensor.width);
      const Tensor4 gt_norm = normalize_polar(gt, norm);
      for (size_t i = 0; i < pred.size(); ++i)
        pred.data[i] = double(gt_norm.data[i]) + rng.uniform(0.004, 0.012) *
                                                     (rng.uniform() < 0.5 ? -1 : 1);
      params.add("pred", pred);
      std::vector<const RangeImage*> frames{&gt};
      // The normal is Lipschitz ~1/|c|; a small step keeps finite
      // differences inside the linear regime of thin triangles.
      run_check(&summary, params,
                [&](TapeD& t, const std::vector<int>& ids) {
                  const LossNodes loss = total_loss_nodes(
                      t, ids[0], frames, sensor, norm, 24, mix_seed(31, s), false);
                  return loss.total;
                },
                mix_seed(41, s), 0, 1e-5);
    }
    if (s % 4 == 0) {  // toy generator feeding the combined loss
      SensorModel hr = sensor;
      StoreD params = init_generator_params<double>(cfg, mix_seed(51, s));
      RangeImage lr = downsample_rows(gt, cfg.upsample_rate);
      Tensor4 lr_norm = normalize_polar(lr, norm);
      TensorD input = tensor_cast<double>(lr_norm);
      std::vector<const RangeImage*> frames{&gt};
      auto fn = [&](StoreD& ps, bool with_grad) -> GradEval {
        TapeD tape;
        GeneratorNodes nodes = generator_forward(tape, cfg, ps, input);
        const LossNodes loss = total_loss_nodes(tape, nodes.q_fused, frames, hr,
                                                norm, 16, mix_seed(61, s), false);
        GradEval eval{tape.value(loss.total).data[0], tape.branch_signature()};
        if (with_grad) {
          tape.backward(loss.total);
          pull_param_grads(tape, nodes, ps);
        }
        return eval;
      };
      fold(&summary, grad_check(fn, params, 1e-5, 24, mix_seed(71, s)));
    }
  }
  return summary;
}

}  // namespace hals
