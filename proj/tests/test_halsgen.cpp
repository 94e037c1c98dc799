#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "hals/generator.hpp"
#include "hals/grad_check.hpp"
#include "hals/verify.hpp"

using namespace hals;

namespace {

Tensor4 random_tensor(Rng& rng, int b, int c, int h, int w, double lo = -1,
                      double hi = 1) {
  Tensor4 t(b, c, h, w);
  for (auto& v : t.data) v = float(rng.uniform(lo, hi));
  return t;
}

GeneratorConfig toy_config(int feature_width = 8, int blocks = 4, int split = 2,
                           int rate = 2) {
  GeneratorConfig cfg;
  cfg.input_channels = 2;
  cfg.feature_width = feature_width;
  cfg.total_blocks = blocks;
  cfg.split_index = split;
  cfg.upsample_rate = rate;
  return cfg;
}

// Registers one DRB's worth of parameters on a tape.
struct DrbParams {
  std::vector<int> weights, biases;
};

DrbParams make_drb_params(Tape<float>& tape, int F,
                          const std::vector<int>& dilations, bool zero,
                          uint64_t seed) {
  Rng rng(seed);
  DrbParams out;
  for (size_t i = 0; i < dilations.size(); ++i) {
    Tensor4 w(F, F, 3, 3);
    if (!zero)
      for (auto& v : w.data) v = float(rng.uniform(-0.2, 0.2));
    out.weights.push_back(tape.input(w, true));
    out.biases.push_back(tape.input(Tensor4(1, F, 1, 1), true));
  }
  Tensor4 wf(F, F * int(dilations.size()), 1, 1);
  if (!zero)
    for (auto& v : wf.data) v = float(rng.uniform(-0.2, 0.2));
  out.weights.push_back(tape.input(wf, true));
  out.biases.push_back(tape.input(Tensor4(1, F, 1, 1), true));
  return out;
}

}  // namespace

TEST_CASE("zero-initialized DRB is a pure residual identity") {
  Tape<float> tape;
  Rng rng(1);
  const int F = 8;
  const Tensor4 f = random_tensor(rng, 1, F, 4, 6);
  const int fid = tape.input(f);
  const DrbParams p = make_drb_params(tape, F, {1, 2, 3}, /*zero=*/true, 0);
  const int out = drb_forward(tape, fid, p.weights, p.biases, {1, 2, 3}, 0.2f);
  CHECK(tape.value(out).data == f.data);
}

TEST_CASE("DRB preserves the feature shape") {
  Tape<float> tape;
  Rng rng(2);
  const Tensor4 f = random_tensor(rng, 1, 64, 8, 16);
  const int fid = tape.input(f);
  const DrbParams p = make_drb_params(tape, 64, {1, 2, 3}, false, 3);
  const int out = drb_forward(tape, fid, p.weights, p.biases, {1, 2, 3}, 0.2f);
  CHECK(tape.value(out).b == 1);
  CHECK(tape.value(out).c == 64);
  CHECK(tape.value(out).h == 8);
  CHECK(tape.value(out).w == 16);
}

TEST_CASE("stacked DRB receptive field matches 1 + 6n (gradient footprint)") {
  const int F = 4;
  const int W = 201;
  auto footprint = [&](int blocks) {
    Tape<float> tape;
    Rng rng(77);
    Tensor4 x = random_tensor(rng, 1, F, 1, W, 0.1, 0.9);
    const int xid = tape.input(x, /*requires_grad=*/true);
    int f = xid;
    for (int bk = 0; bk < blocks; ++bk) {
      const DrbParams p = make_drb_params(tape, F, {1, 2, 3}, false, 100 + bk);
      f = drb_forward(tape, f, p.weights, p.biases, {1, 2, 3}, 0.2f);
    }
    // Probe: loss reads the center pixel of channel 0.
    Tensor4 head(1, F, 1, W);
    head.at(0, 0, 0, W / 2) = 1.0f;
    tape.backward(tape.weighted_sum(f, head));
    const Tensor4& g = tape.grad(xid);
    int lo = W, hi = -1;
    for (int c = 0; c < F; ++c)
      for (int j = 0; j < W; ++j)
        if (g.at(0, c, 0, j) != 0.0f) {
          lo = std::min(lo, j);
          hi = std::max(hi, j);
        }
    return hi - lo + 1;
  };
  CHECK(footprint(4) == 25);   // 1 + 4 * 2 * 3
  CHECK(footprint(16) == 97);  // 1 + 16 * 2 * 3
}

TEST_CASE("generator output shapes follow (sH, W)") {
  const GeneratorConfig cfg = toy_config(8, 4, 2, 4);
  ParamStore params = init_generator_params<float>(cfg, 5);
  Rng rng(6);
  const Tensor4 input = random_tensor(rng, 2, 2, 4, 8, 0.0, 1.0);
  const GeneratorOutput out = run_generator(cfg, params, input);
  CHECK(out.q_fused.b == 2);
  CHECK(out.q_fused.c == 2);
  CHECK(out.q_fused.h == 16);  // 4 rows upsampled x4
  CHECK(out.q_fused.w == 8);   // width unchanged
  CHECK(out.m_shallow.c == 1);
  CHECK(out.m_shallow.h == 16);
}

TEST_CASE("mask normalization and fusion identity on random inputs") {
  const GeneratorConfig cfg = toy_config();
  ParamStore params = init_generator_params<float>(cfg, 11);
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor4 input = random_tensor(rng, 1, 2, 4, 8, 0.0, 1.0);
    const GeneratorOutput out = run_generator(cfg, params, input);
    for (size_t i = 0; i < out.m_shallow.size(); ++i) {
      const double sum = double(out.m_shallow.data[i]) + double(out.m_deep.data[i]);
      CHECK(std::abs(sum - 1.0) < 1e-6);
      CHECK(out.m_shallow.data[i] > 0.0f);
      CHECK(out.m_shallow.data[i] < 1.0f);
    }
    // Recompute the weighted average from the published fields.
    for (int c = 0; c < out.q_fused.c; ++c)
      for (int i = 0; i < out.q_fused.h; ++i)
        for (int j = 0; j < out.q_fused.w; ++j) {
          const double expectv =
              double(out.q_shallow.at(0, c, i, j)) * out.m_shallow.at(0, 0, i, j) +
              double(out.q_deep.at(0, c, i, j)) * out.m_deep.at(0, 0, i, j);
          CHECK(std::abs(out.q_fused.at(0, c, i, j) - expectv) < 1e-6);
        }
  }
}

TEST_CASE("logit difference of 50 forces the fused output onto one branch") {
  Tape<float> tape;
  Rng rng(13);
  const Tensor4 qs = random_tensor(rng, 1, 2, 4, 8);
  const Tensor4 qd = random_tensor(rng, 1, 2, 4, 8);
  const Tensor4 logit_d = random_tensor(rng, 1, 1, 4, 8);
  const int qs_id = tape.input(qs);
  const int qd_id = tape.input(qd);
  const int ld_id = tape.input(logit_d);
  const int ls_id = tape.affine(ld_id, 1.0f, 50.0f);  // logit_s = logit_d + 50
  auto [ms, md] = softmax_pair(tape, ls_id, ld_id);
  const int fused = tape.add(tape.mul_mask(qs_id, ms), tape.mul_mask(qd_id, md));
  for (size_t i = 0; i < qs.size(); ++i)
    CHECK(std::abs(tape.value(fused).data[i] - qs.data[i]) < 1e-6);
}

TEST_CASE("equal masks average the branches") {
  Tape<float> tape;
  Tensor4 qs(1, 1, 2, 2), qd(1, 1, 2, 2), logits(1, 1, 2, 2);
  qs.fill(2.0f);
  qd.fill(4.0f);
  const int ls = tape.input(logits);
  const int ld = tape.input(logits);
  auto [ms, md] = softmax_pair(tape, ls, ld);
  const int fused =
      tape.add(tape.mul_mask(tape.input(qs), ms), tape.mul_mask(tape.input(qd), md));
  for (float v : tape.value(fused).data) CHECK(v == doctest::Approx(3.0));
}

TEST_CASE("initialization is deterministic with the documented bound") {
  const GeneratorConfig cfg = toy_config(64, 4, 2, 2);
  const ParamStore a = init_generator_params<float>(cfg, 42);
  const ParamStore b = init_generator_params<float>(cfg, 42);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a.items[i].name == b.items[i].name);
    CHECK(a.items[i].value.data == b.items[i].value.data);
  }
  const ParamStore c = init_generator_params<float>(cfg, 43);
  CHECK(c.items[0].value.data != a.items[0].value.data);

  // 3x3 conv with 64 input channels: fan_in 576, bound sqrt(6/576).
  const double bound = std::sqrt(6.0 / 576.0);
  const ParameterT<float>* w = a.find("blk0.d1.w");
  REQUIRE(w != nullptr);
  double max_abs = 0;
  for (float v : w->value.data) {
    CHECK(std::abs(v) <= bound);
    max_abs = std::max(max_abs, std::abs(double(v)));
  }
  CHECK(max_abs > 0.9 * bound);

  // biases zero; head convolutions scaled down by 0.1
  const ParameterT<float>* bias = a.find("blk0.d1.b");
  for (float v : bias->value.data) CHECK(v == 0.0f);
  const ParameterT<float>* head = a.find("shallow.head2.w");
  const double head_bound = 0.1 * std::sqrt(6.0 / 64.0);
  for (float v : head->value.data) CHECK(std::abs(v) <= head_bound);
}

TEST_CASE("fresh generator produces small finite outputs") {
  const GeneratorConfig cfg = toy_config(16, 8, 2, 2);
  ParamStore params = init_generator_params<float>(cfg, 3);
  Rng rng(4);
  const Tensor4 input = random_tensor(rng, 1, 2, 8, 16, 0.0, 1.0);
  const GeneratorOutput out = run_generator(cfg, params, input);
  for (float v : out.q_fused.data) {
    CHECK(std::isfinite(v));
    CHECK(std::abs(v) < 10.0f);
  }
}

TEST_CASE("gradient flow: shallow blocks feed both branches, deep blocks only one") {
  const GeneratorConfig cfg = toy_config(8, 4, 2, 2);
  Rng rng(9);
  const Tensor4 input = random_tensor(rng, 1, 2, 4, 8, 0.0, 1.0);

  auto grads_from = [&](bool shallow_head) {
    ParamStore params = init_generator_params<float>(cfg, 21);
    Tape<float> tape;
    GeneratorNodes nodes = generator_forward(tape, cfg, params, input);
    const int target = shallow_head ? nodes.q_shallow : nodes.q_deep;
    const Tensor4& tv = tape.value(target);
    tape.backward(tape.mean_abs_diff(target, tv.zeros_like()));
    params.zero_grad();
    pull_param_grads(tape, nodes, params);
    return params;
  };

  const ParamStore from_shallow = grads_from(true);
  const ParamStore from_deep = grads_from(false);
  auto grad_norm = [](const ParamStore& ps, const std::string& name) {
    const ParameterT<float>* p = ps.find(name);
    REQUIRE(p != nullptr);
    double n = 0;
    for (float g : p->grad.data) n += double(g) * g;
    return n;
  };

  // Blocks 1..split receive gradient from both heads.
  CHECK(grad_norm(from_shallow, "blk0.d1.w") > 0);
  CHECK(grad_norm(from_shallow, "blk1.fuse.w") > 0);
  CHECK(grad_norm(from_deep, "blk0.d1.w") > 0);
  CHECK(grad_norm(from_deep, "blk1.fuse.w") > 0);
  // Blocks past the split are invisible to the shallow head.
  CHECK(grad_norm(from_shallow, "blk2.d1.w") == 0);
  CHECK(grad_norm(from_shallow, "blk3.fuse.w") == 0);
  CHECK(grad_norm(from_deep, "blk2.d1.w") > 0);
  CHECK(grad_norm(from_deep, "blk3.fuse.w") > 0);
  // The shallow head parameters receive nothing from the deep head.
  CHECK(grad_norm(from_deep, "shallow.head2.w") == 0);
  CHECK(grad_norm(from_shallow, "shallow.head2.w") > 0);
}

TEST_CASE("tape reachability mirrors the branch structure") {
  const GeneratorConfig cfg = toy_config(8, 4, 2, 2);
  ParamStore params = init_generator_params<float>(cfg, 31);
  Rng rng(32);
  Tape<float> tape;
  GeneratorNodes nodes =
      generator_forward(tape, cfg, params, random_tensor(rng, 1, 2, 4, 8, 0, 1));
  const std::vector<char> from_fused = tape.reachable_inputs(nodes.q_fused);
  for (int id : nodes.param_nodes) CHECK(from_fused[id] == 1);
  const std::vector<char> from_shallow = tape.reachable_inputs(nodes.q_shallow);
  // Parameter nodes are created in store order; deep-branch blocks come after
  // the split and must be unreachable from the shallow prediction.
  size_t idx = 0;
  for (const auto& p : params.items) {
    const bool reach = from_shallow[nodes.param_nodes[idx]] != 0;
    const bool deep_block = p.name.starts_with("blk2") || p.name.starts_with("blk3") ||
                            p.name.starts_with("deep.");
    CHECK(reach == !deep_block);
    ++idx;
  }
}

TEST_CASE("toy generator end-to-end gradient check") {
  const GradCheckSummary summary = gradcheck_generator(1, true, 0);
  CHECK(summary.max_err < 1e-4);
  CHECK(summary.elements_checked > 10000);
}

TEST_CASE("generator config sidecar round trip") {
  const GeneratorConfig cfg = toy_config(16, 8, 3, 4);
  NormConfig norm;
  norm.max_range = 55.0;
  norm.z_min = -2.5;
  norm.z_max = 4.5;
  const std::string path = "/tmp/hals_test_genconfig.txt";
  save_generator_config(path, cfg, norm);
  GeneratorConfig cfg2;
  NormConfig norm2;
  load_generator_config(path, &cfg2, &norm2);
  CHECK(cfg2.feature_width == 16);
  CHECK(cfg2.total_blocks == 8);
  CHECK(cfg2.split_index == 3);
  CHECK(cfg2.upsample_rate == 4);
  CHECK(norm2.max_range == doctest::Approx(55.0));
  CHECK(norm2.z_min == doctest::Approx(-2.5));
  std::filesystem::remove(path);
}

TEST_CASE("config validation") {
  GeneratorConfig cfg = toy_config();
  cfg.split_index = cfg.total_blocks;  // split must be < total
  CHECK_THROWS(cfg.validate());
  cfg = toy_config();
  cfg.upsample_rate = 1;
  CHECK_THROWS(cfg.validate());
  cfg = toy_config(6, 4, 2, 4);  // feature width not divisible by rate
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("normalize/denormalize polar round trip") {
  NormConfig norm;
  norm.max_range = 50.0;
  norm.z_min = -2.0;
  norm.z_max = 6.0;
  RangeImage img(2, 4, ChannelMode::Polar);
  float vals[2] = {10.0f, 1.5f};
  img.set_bin(0, 1, vals);
  const Tensor4 t = normalize_polar(img, norm);
  CHECK(t.at(0, 0, 0, 1) == doctest::Approx(0.2));
  CHECK(t.at(0, 1, 0, 1) == doctest::Approx((1.5 + 2.0) / 8.0));
  CHECK(t.at(0, 0, 1, 2) == 0.0f);  // empty bins stay zero

  const RangeImage back = denormalize_polar(t, 0, norm, 0.3);
  CHECK(back.occupied(0, 1));
  CHECK(!back.occupied(1, 2));
  CHECK(back.at(0, 0, 1) == doctest::Approx(10.0));
  CHECK(back.at(1, 0, 1) == doctest::Approx(1.5));
}
