#pragma once

#include <string>
#include <vector>

#include "hals/autodiff.hpp"
#include "hals/range_image.hpp"
#include "hals/tensor.hpp"

namespace hals {

// Dual-branch range-image generator: shared 1x1 point encoder, a backbone
// of dilated residual blocks split into a shallow and a deep section, one
// vertical sub-pixel upsampling branch after each section, and confidence-
// mask fusion of the two branch predictions.
struct GeneratorConfig {
  int input_channels = 2;   // polar (d, z)
  int feature_width = 64;
  int total_blocks = 16;
  int split_index = 4;      // blocks 1..split feed the shallow branch
  int upsample_rate = 2;
  double leaky_slope = 0.2;
  std::vector<int> drb_dilations{1, 2, 3};

  void validate() const;
};

// Input/target normalization recorded with every checkpoint: d is divided
// by max_range, z is affinely mapped by the dataset height range. Empty
// bins stay (0, 0) in normalized space.
struct NormConfig {
  double max_range = 80.0;
  double z_min = -3.0;
  double z_max = 5.0;

  double z_scale() const { return z_max - z_min; }
};

// Node ids of one recorded forward pass.
struct GeneratorNodes {
  int input = -1;
  int q_shallow = -1, q_deep = -1;
  int logit_shallow = -1, logit_deep = -1;
  int m_shallow = -1, m_deep = -1;
  int q_fused = -1;
  std::vector<int> param_nodes;  // aligned with the parameter store order
};

// Value snapshot of the generator outputs.
struct GeneratorOutput {
  Tensor4 q_shallow, q_deep;
  Tensor4 m_shallow, m_deep;
  Tensor4 q_fused;
};

// Deterministic initialization: weights uniform in +-sqrt(6 / fan_in),
// biases zero, regression-head convolutions scaled by 0.1.
template <typename T>
ParamStoreT<T> init_generator_params(const GeneratorConfig& config, uint64_t seed);

// Records the full forward pass on the tape. Parameters become tape inputs
// with requires_grad; pull_param_grads copies their gradients back after
// backward().
template <typename T>
GeneratorNodes generator_forward(Tape<T>& tape, const GeneratorConfig& config,
                                 ParamStoreT<T>& params, Tensor4T<T> input);

template <typename T>
void pull_param_grads(const Tape<T>& tape, const GeneratorNodes& nodes,
                      ParamStoreT<T>& params);

// Inference convenience on a float store.
GeneratorOutput run_generator(const GeneratorConfig& config, ParamStore& params,
                              const Tensor4& input);

// RangeImage (polar) <-> normalized tensor conversion.
Tensor4 normalize_polar(const RangeImage& img, const NormConfig& norm);
RangeImage denormalize_polar(const Tensor4& tensor, int batch_index,
                             const NormConfig& norm, double occupancy_threshold);

// Key=value sidecar capturing GeneratorConfig + NormConfig.
void save_generator_config(const std::string& path, const GeneratorConfig& config,
                           const NormConfig& norm);
void load_generator_config(const std::string& path, GeneratorConfig* config,
                           NormConfig* norm);

// ---------------------------------------------------------------------------
// Template implementations
// ---------------------------------------------------------------------------

namespace detail {

// Parameter shapes in creation order; shared by init and forward.
struct ParamSpec {
  std::string name;
  int out_c, in_c, k;
  bool is_head;
};

std::vector<ParamSpec> generator_param_specs(const GeneratorConfig& config);

}  // namespace detail

template <typename T>
ParamStoreT<T> init_generator_params(const GeneratorConfig& config, uint64_t seed) {
  config.validate();
  ParamStoreT<T> store;
  Rng rng(seed);
  for (const auto& spec : detail::generator_param_specs(config)) {
    Tensor4T<T> w(spec.out_c, spec.in_c, spec.k, spec.k);
    const double fan_in = double(spec.in_c) * spec.k * spec.k;
    double bound = std::sqrt(6.0 / fan_in);
    if (spec.is_head) bound *= 0.1;
    for (auto& v : w.data) v = T(rng.uniform(-bound, bound));
    store.add(spec.name + ".w", std::move(w));
    store.add(spec.name + ".b", Tensor4T<T>(1, spec.out_c, 1, 1));
  }
  return store;
}

// One dilated residual block: parallel 3x3 convolutions at the configured
// dilations, each through leaky_relu, channel-concatenated, fused back to
// the feature width by a 1x1 convolution, plus the identity residual.
// Node ids in `weights`/`biases` are ordered as the dilations, with the
// fuse convolution last.
template <typename T>
int drb_forward(Tape<T>& tape, int features, const std::vector<int>& weights,
                const std::vector<int>& biases, const std::vector<int>& dilations,
                T leaky_slope) {
  HALS_CHECK(weights.size() == dilations.size() + 1 &&
                 biases.size() == weights.size(),
             "drb_forward: expects one conv per dilation plus the fuse conv");
  std::vector<int> arms;
  arms.reserve(dilations.size());
  for (size_t di = 0; di < dilations.size(); ++di)
    arms.push_back(tape.leaky_relu(
        tape.conv2d(features, weights[di], biases[di], dilations[di]), leaky_slope));
  const int cat = tape.concat_channels(arms);
  const int fused = tape.conv2d(cat, weights.back(), biases.back(), 1);
  return tape.add(fused, features);
}

template <typename T>
GeneratorNodes generator_forward(Tape<T>& tape, const GeneratorConfig& config,
                                 ParamStoreT<T>& params, Tensor4T<T> input) {
  config.validate();
  HALS_CHECK(input.c == config.input_channels,
             "generator: input channel count does not match config");
  GeneratorNodes nodes;

  // Parameters enter the tape in store order.
  nodes.param_nodes.reserve(params.size());
  for (auto& p : params.items)
    nodes.param_nodes.push_back(tape.input(p.value, /*requires_grad=*/true));
  size_t cursor = 0;
  auto next_param = [&](const std::string& name) {
    HALS_CHECK(cursor < params.size() && params.items[cursor].name == name,
               "generator: parameter order mismatch at " + name);
    return nodes.param_nodes[cursor++];
  };

  const T slope = T(config.leaky_slope);
  nodes.input = tape.input(std::move(input), /*requires_grad=*/false);

  auto conv = [&](int x, const std::string& name, int dilation) {
    const int w = next_param(name + ".w");
    const int b = next_param(name + ".b");
    return tape.conv2d(x, w, b, dilation);
  };

  int f = tape.leaky_relu(conv(nodes.input, "enc", 1), slope);

  int shallow_feat = -1;
  for (int blk = 0; blk < config.total_blocks; ++blk) {
    const std::string prefix = "blk" + std::to_string(blk);
    std::vector<int> weights, biases;
    for (size_t di = 0; di < config.drb_dilations.size(); ++di) {
      weights.push_back(next_param(prefix + ".d" + std::to_string(di + 1) + ".w"));
      biases.push_back(next_param(prefix + ".d" + std::to_string(di + 1) + ".b"));
    }
    weights.push_back(next_param(prefix + ".fuse.w"));
    biases.push_back(next_param(prefix + ".fuse.b"));
    f = drb_forward(tape, f, weights, biases, config.drb_dilations, slope);
    if (blk == config.split_index - 1) shallow_feat = f;
  }
  const int deep_feat = f;

  auto branch = [&](int feat, const std::string& prefix, int* q, int* logit) {
    int u = conv(feat, prefix + ".up", 1);
    u = tape.vertical_shuffle(u, config.upsample_rate);
    u = tape.leaky_relu(u, slope);
    const int h = tape.leaky_relu(conv(u, prefix + ".head1", 1), slope);
    const int o = conv(h, prefix + ".head2", 1);
    *q = tape.slice_channels(o, 0, config.input_channels);
    *logit = tape.slice_channels(o, config.input_channels, config.input_channels + 1);
  };

  branch(shallow_feat, "shallow", &nodes.q_shallow, &nodes.logit_shallow);
  branch(deep_feat, "deep", &nodes.q_deep, &nodes.logit_deep);

  auto [ms, md] = softmax_pair(tape, nodes.logit_shallow, nodes.logit_deep);
  nodes.m_shallow = ms;
  nodes.m_deep = md;
  nodes.q_fused = tape.add(tape.mul_mask(nodes.q_shallow, ms),
                           tape.mul_mask(nodes.q_deep, md));
  HALS_CHECK(cursor == params.size(), "generator: unused parameters in store");
  return nodes;
}

template <typename T>
void pull_param_grads(const Tape<T>& tape, const GeneratorNodes& nodes,
                      ParamStoreT<T>& params) {
  HALS_CHECK(nodes.param_nodes.size() == params.size(),
             "pull_param_grads: store size mismatch");
  for (size_t i = 0; i < params.size(); ++i) {
    const auto& g = tape.grad(nodes.param_nodes[i]);
    auto& dst = params.items[i].grad;
    HALS_CHECK(g.same_shape(dst), "pull_param_grads: gradient shape mismatch");
    for (size_t j = 0; j < g.size(); ++j) dst.data[j] += g.data[j];
  }
}

}  // namespace hals
