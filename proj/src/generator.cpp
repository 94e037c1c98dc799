#include "hals/generator.hpp"

#include <cmath>
#include <sstream>

#include "hals/kv_config.hpp"

namespace hals {

void GeneratorConfig::validate() const {
  HALS_CHECK(input_channels >= 1, "generator config: input_channels must be >= 1");
  HALS_CHECK(feature_width >= 1, "generator config: feature_width must be >= 1");
  HALS_CHECK(total_blocks >= 2, "generator config: total_blocks must be >= 2");
  HALS_CHECK(split_index >= 1 && split_index < total_blocks,
             "generator config: split_index must satisfy 1 <= split < total");
  HALS_CHECK(upsample_rate >= 2, "generator config: upsample_rate must be >= 2");
  HALS_CHECK(feature_width % upsample_rate == 0,
             "generator config: feature_width must be divisible by upsample_rate");
  HALS_CHECK(!drb_dilations.empty(), "generator config: empty dilation set");
  for (int d : drb_dilations)
    HALS_CHECK(d >= 1, "generator config: dilations must be >= 1");
}

namespace detail {

std::vector<ParamSpec> generator_param_specs(const GeneratorConfig& config) {
  std::vector<ParamSpec> specs;
  const int F = config.feature_width;
  const int C = config.input_channels;
  specs.push_back({"enc", F, C, 1, false});
  for (int blk = 0; blk < config.total_blocks; ++blk) {
    const std::string prefix = "blk" + std::to_string(blk);
    for (size_t di = 0; di < config.drb_dilations.size(); ++di)
      specs.push_back({prefix + ".d" + std::to_string(di + 1), F, F, 3, false});
    specs.push_back({prefix + ".fuse", F, F * int(config.drb_dilations.size()), 1, false});
  }
  for (const char* prefix : {"shallow", "deep"}) {
    const std::string p = prefix;
    specs.push_back({p + ".up", F * config.upsample_rate, F, 3, false});
    specs.push_back({p + ".head1", F, F, 3, true});
    specs.push_back({p + ".head2", C + 1, F, 1, true});
  }
  return specs;
}

}  // namespace detail

GeneratorOutput run_generator(const GeneratorConfig& config, ParamStore& params,
                              const Tensor4& input) {
  Tape<float> tape;
  // Inference only: parameters still enter the tape, gradients are ignored.
  GeneratorNodes nodes = generator_forward(tape, config, params, input);
  GeneratorOutput out;
  out.q_shallow = tape.value(nodes.q_shallow);
  out.q_deep = tape.value(nodes.q_deep);
  out.m_shallow = tape.value(nodes.m_shallow);
  out.m_deep = tape.value(nodes.m_deep);
  out.q_fused = tape.value(nodes.q_fused);
  return out;
}

Tensor4 normalize_polar(const RangeImage& img, const NormConfig& norm) {
  HALS_CHECK(img.mode == ChannelMode::Polar, "normalize_polar: expects polar image");
  HALS_CHECK(norm.max_range > 0 && norm.z_scale() > 0,
             "normalize_polar: invalid normalization constants");
  Tensor4 t(1, 2, img.height, img.width);
  for (int v = 0; v < img.height; ++v)
    for (int u = 0; u < img.width; ++u) {
      if (!img.occupied(v, u)) continue;  // empty bins stay (0, 0)
      t.at(0, 0, v, u) = float(img.at(0, v, u) / norm.max_range);
      t.at(0, 1, v, u) = float((img.at(1, v, u) - norm.z_min) / norm.z_scale());
    }
  return t;
}

RangeImage denormalize_polar(const Tensor4& tensor, int batch_index,
                             const NormConfig& norm, double occupancy_threshold) {
  HALS_CHECK(tensor.c == 2, "denormalize_polar: expects (d, z) channels");
  HALS_CHECK(batch_index >= 0 && batch_index < tensor.b,
             "denormalize_polar: batch index out of range");
  RangeImage img(tensor.h, tensor.w, ChannelMode::Polar);
  for (int v = 0; v < tensor.h; ++v)
    for (int u = 0; u < tensor.w; ++u) {
      const double d = double(tensor.at(batch_index, 0, v, u)) * norm.max_range;
      if (!(d >= occupancy_threshold) || d <= 0) continue;
      const double z =
          double(tensor.at(batch_index, 1, v, u)) * norm.z_scale() + norm.z_min;
      float vals[2] = {float(d), float(z)};
      img.set_bin(v, u, vals);
    }
  return img;
}

void save_generator_config(const std::string& path, const GeneratorConfig& config,
                           const NormConfig& norm) {
  KvFile kv;
  kv.add("gen.input_channels", config.input_channels);
  kv.add("gen.feature_width", config.feature_width);
  kv.add("gen.total_blocks", config.total_blocks);
  kv.add("gen.split_index", config.split_index);
  kv.add("gen.upsample_rate", config.upsample_rate);
  kv.add("gen.leaky_slope", config.leaky_slope);
  std::string dil;
  for (size_t i = 0; i < config.drb_dilations.size(); ++i)
    dil += (i ? " " : "") + std::to_string(config.drb_dilations[i]);
  kv.add("gen.drb_dilations", dil);
  kv.add("norm.max_range", norm.max_range);
  kv.add("norm.z_min", norm.z_min);
  kv.add("norm.z_max", norm.z_max);
  kv.save(path);
}

void load_generator_config(const std::string& path, GeneratorConfig* config,
                           NormConfig* norm) {
  KvFile kv = KvFile::load(path);
  config->input_channels = (int)kv.get_int("gen.input_channels");
  config->feature_width = (int)kv.get_int("gen.feature_width");
  config->total_blocks = (int)kv.get_int("gen.total_blocks");
  config->split_index = (int)kv.get_int("gen.split_index");
  config->upsample_rate = (int)kv.get_int("gen.upsample_rate");
  config->leaky_slope = kv.get_double("gen.leaky_slope");
  config->drb_dilations.clear();
  {
    std::istringstream is(kv.get("gen.drb_dilations"));
    int d;
    while (is >> d) config->drb_dilations.push_back(d);
  }
  config->validate();
  norm->max_range = kv.get_double("norm.max_range");
  norm->z_min = kv.get_double("norm.z_min");
  norm->z_max = kv.get_double("norm.z_max");
}

}  // namespace hals
