#include "hals/trainer.hpp"

#include <cmath>
#include <fstream>

#include "hals/checkpoint.hpp"
#include "hals/fs_util.hpp"
#include "hals/kv_config.hpp"
#include "hals/losses.hpp"
#include "hals/projection.hpp"

namespace hals {

void TrainConfig::validate() const {
  gen.validate();
  sensor.validate();
  HALS_CHECK(batch_size >= 1, "train config: batch_size must be >= 1");
  HALS_CHECK(lr > 0, "train config: learning rate must be > 0");
  HALS_CHECK(decay_factor > 0 && decay_factor <= 1,
             "train config: decay factor must be in (0, 1]");
  HALS_CHECK(decay_period >= 1, "train config: decay period must be >= 1");
  HALS_CHECK(epochs >= 1, "train config: epochs must be >= 1");
  HALS_CHECK(sensor.height % gen.upsample_rate == 0,
             "train config: sensor height not divisible by upsample rate");
}

TrainConfig load_train_config(const std::string& path) {
  KvFile kv = KvFile::load(path);
  TrainConfig c;
  c.gen.input_channels = (int)kv.get_int_or("gen.input_channels", c.gen.input_channels);
  c.gen.feature_width = (int)kv.get_int_or("gen.feature_width", c.gen.feature_width);
  c.gen.total_blocks = (int)kv.get_int_or("gen.total_blocks", c.gen.total_blocks);
  c.gen.split_index = (int)kv.get_int_or("gen.split_index", c.gen.split_index);
  c.gen.upsample_rate = (int)kv.get_int_or("gen.upsample_rate", c.gen.upsample_rate);
  c.gen.leaky_slope = kv.get_double_or("gen.leaky_slope", c.gen.leaky_slope);
  c.sensor.height = (int)kv.get_int_or("sensor.height", c.sensor.height);
  c.sensor.width = (int)kv.get_int_or("sensor.width", c.sensor.width);
  c.sensor.fov_up_deg = kv.get_double_or("sensor.fov_up_deg", c.sensor.fov_up_deg);
  c.sensor.fov_down_deg = kv.get_double_or("sensor.fov_down_deg", c.sensor.fov_down_deg);
  c.sensor.max_range = kv.get_double_or("sensor.max_range", c.sensor.max_range);
  c.sensor.min_range = kv.get_double_or("sensor.min_range", c.sensor.min_range);
  c.norm_auto = kv.get_int_or("norm.auto", 1) != 0;
  c.norm.max_range = kv.get_double_or("norm.max_range", c.sensor.max_range);
  c.norm.z_min = kv.get_double_or("norm.z_min", c.norm.z_min);
  c.norm.z_max = kv.get_double_or("norm.z_max", c.norm.z_max);
  c.batch_size = (int)kv.get_int_or("batch_size", c.batch_size);
  c.lr = kv.get_double_or("lr", c.lr);
  c.decay_factor = kv.get_double_or("decay_factor", c.decay_factor);
  c.decay_period = (int)kv.get_int_or("decay_period", c.decay_period);
  c.epochs = (int)kv.get_int_or("epochs", c.epochs);
  c.seed = (uint64_t)kv.get_int_or("seed", 0);
  c.vnl_k = (int)kv.get_int_or("vnl_k", c.vnl_k);
  c.mask_empty_l1 = kv.get_int_or("mask_empty_l1", 0) != 0;
  c.grad_clip = kv.get_double_or("grad_clip", c.grad_clip);
  c.adam_beta1 = kv.get_double_or("adam_beta1", c.adam_beta1);
  c.adam_beta2 = kv.get_double_or("adam_beta2", c.adam_beta2);
  c.data_dir = kv.get_or("data_dir", c.data_dir);
  c.out_dir = kv.get_or("out_dir", c.out_dir);
  return c;
}

namespace {

KvFile train_config_kv(const TrainConfig& c) {
  KvFile kv;
  kv.add("gen.input_channels", c.gen.input_channels);
  kv.add("gen.feature_width", c.gen.feature_width);
  kv.add("gen.total_blocks", c.gen.total_blocks);
  kv.add("gen.split_index", c.gen.split_index);
  kv.add("gen.upsample_rate", c.gen.upsample_rate);
  kv.add("gen.leaky_slope", c.gen.leaky_slope);
  kv.add("sensor.height", c.sensor.height);
  kv.add("sensor.width", c.sensor.width);
  kv.add("sensor.fov_up_deg", c.sensor.fov_up_deg);
  kv.add("sensor.fov_down_deg", c.sensor.fov_down_deg);
  kv.add("sensor.max_range", c.sensor.max_range);
  kv.add("sensor.min_range", c.sensor.min_range);
  kv.add("norm.auto", c.norm_auto ? 1 : 0);
  kv.add("norm.max_range", c.norm.max_range);
  kv.add("norm.z_min", c.norm.z_min);
  kv.add("norm.z_max", c.norm.z_max);
  kv.add("batch_size", c.batch_size);
  kv.add("lr", c.lr);
  kv.add("decay_factor", c.decay_factor);
  kv.add("decay_period", c.decay_period);
  kv.add("epochs", c.epochs);
  kv.add("seed", (unsigned long long)c.seed);
  kv.add("vnl_k", c.vnl_k);
  kv.add("mask_empty_l1", c.mask_empty_l1 ? 1 : 0);
  kv.add("grad_clip", c.grad_clip);
  kv.add("adam_beta1", c.adam_beta1);
  kv.add("adam_beta2", c.adam_beta2);
  kv.add("data_dir", c.data_dir);
  kv.add("out_dir", c.out_dir);
  return kv;
}

}  // namespace

void save_train_config(const std::string& path, const TrainConfig& c) {
  train_config_kv(c).save(path);
}

std::string train_config_to_string(const TrainConfig& c) {
  return train_config_kv(c).to_string();
}

namespace {

// Deterministic Fisher-Yates shuffle of frame indices for one epoch.
std::vector<int> epoch_order(int n, uint64_t seed, int epoch) {
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  Rng rng(mix_seed(seed, uint64_t(epoch), 0xe70c));
  for (int i = n - 1; i > 0; --i) {
    const int j = int(rng.index(size_t(i) + 1));
    std::swap(order[i], order[j]);
  }
  return order;
}

}  // namespace

TrainResult train(const TrainConfig& config, const std::string& resume_dir) {
  config.validate();
  const int rate = config.gen.upsample_rate;

  // Dataset: high-resolution polar scans.
  const auto files = list_files(config.data_dir, ".hals");
  HALS_CHECK(!files.empty(), "train: no .hals files in " + config.data_dir);
  std::vector<RangeImage> dataset;
  dataset.reserve(files.size());
  for (const auto& f : files) {
    RangeImage img = load_range_image(f);
    HALS_CHECK(img.mode == ChannelMode::Polar,
               "train: dataset must contain polar images (" + f + ")");
    HALS_CHECK(img.height == config.sensor.height && img.width == config.sensor.width,
               "train: image dimensions do not match sensor (" + f + ")");
    dataset.push_back(std::move(img));
  }
  const int n_frames = int(dataset.size());
  const int steps_per_epoch = n_frames / config.batch_size;  // drop partial batch
  HALS_CHECK(steps_per_epoch >= 1,
             "train: dataset smaller than one batch");

  NormConfig norm = config.norm;
  norm.max_range = config.sensor.max_range;
  if (config.norm_auto) {
    double z_lo = 1e30, z_hi = -1e30;
    for (const auto& img : dataset)
      for (int v = 0; v < img.height; ++v)
        for (int u = 0; u < img.width; ++u)
          if (img.occupied(v, u)) {
            z_lo = std::min(z_lo, double(img.at(1, v, u)));
            z_hi = std::max(z_hi, double(img.at(1, v, u)));
          }
    HALS_CHECK(z_lo < z_hi + 1, "train: dataset holds no occupied bins");
    if (z_hi - z_lo < 1e-6) z_hi = z_lo + 1.0;
    norm.z_min = z_lo;
    norm.z_max = z_hi;
  }

  ensure_dir(config.out_dir);
  const std::string ckpt_dir = config.out_dir + "/checkpoint";
  ensure_dir(ckpt_dir);
  const std::string curve_path = config.out_dir + "/loss_curve.csv";

  ParamStore params = init_generator_params<float>(config.gen, config.seed);
  Adam adam(config.adam_beta1, config.adam_beta2);
  int start_epoch = 0;
  long long global_step = 0;
  if (!resume_dir.empty()) {
    load_parameters(resume_dir + "/params.bin", &params);
    adam.load(resume_dir + "/optim.bin", params);
    KvFile state = KvFile::load(resume_dir + "/state.txt");
    start_epoch = (int)state.get_int("epochs_completed");
    global_step = state.get_int("global_step");
    NormConfig saved_norm;
    GeneratorConfig saved_gen;
    load_generator_config(resume_dir + "/gen_config.txt", &saved_gen, &saved_norm);
    norm = saved_norm;  // constants must not drift across a resume
  }

  std::ofstream curve(curve_path, resume_dir.empty() ? std::ios::trunc : std::ios::app);
  HALS_CHECK(curve.good(), "train: cannot write " + curve_path);
  if (resume_dir.empty()) curve << "step,l1,vnl,total,lr\n";
  curve.precision(10);

  auto write_checkpoint = [&](int epochs_completed) {
    save_parameters_atomic(ckpt_dir + "/params.bin", params);
    adam.save(ckpt_dir + "/optim.bin");
    save_generator_config(ckpt_dir + "/gen_config.txt", config.gen, norm);
    KvFile state;
    state.add("epochs_completed", epochs_completed);
    state.add("global_step", global_step);
    state.add("seed", (unsigned long long)config.seed);
    state.add("adam_beta1", config.adam_beta1);
    state.add("adam_beta2", config.adam_beta2);
    state.save(ckpt_dir + "/state.txt");
  };

  TrainResult result;
  result.norm = norm;
  result.checkpoint_dir = ckpt_dir;
  result.loss_curve_path = curve_path;

  bool first_recorded = global_step > 0;
  for (int epoch = start_epoch; epoch < config.epochs; ++epoch) {
    const double lr = lr_at(epoch, config.lr, config.decay_factor, config.decay_period);
    const std::vector<int> order = epoch_order(n_frames, config.seed, epoch);
    for (int step = 0; step < steps_per_epoch; ++step) {
      // Assemble the batch: LR input tensor + HR targets.
      std::vector<const RangeImage*> gt_frames;
      Tensor4 input(config.batch_size, config.gen.input_channels,
                    config.sensor.height / rate, config.sensor.width);
      for (int bi = 0; bi < config.batch_size; ++bi) {
        const RangeImage& hr = dataset[order[step * config.batch_size + bi]];
        gt_frames.push_back(&hr);
        const RangeImage lr_img = downsample_rows(hr, rate);
        const Tensor4 norm_in = normalize_polar(lr_img, norm);
        std::copy(norm_in.data.begin(), norm_in.data.end(),
                  input.data.begin() + size_t(bi) * norm_in.size());
      }

      Tape<float> tape;
      GeneratorNodes nodes = generator_forward(tape, config.gen, params, std::move(input));
      const LossNodes loss =
          total_loss_nodes(tape, nodes.q_fused, gt_frames, config.sensor, norm,
                           config.vnl_k, mix_seed(config.seed, uint64_t(global_step), 0x7a1),
                           config.mask_empty_l1);
      const double l1_val = tape.value(loss.l1).data[0];
      const double vnl_val = tape.value(loss.vnl).data[0];
      const double total_val = tape.value(loss.total).data[0];
      HALS_CHECK(std::isfinite(total_val),
                 "train: non-finite loss at step " + std::to_string(global_step));

      params.zero_grad();
      tape.backward(loss.total);
      pull_param_grads(tape, nodes, params);
      if (config.grad_clip > 0) clip_gradients(params, config.grad_clip);
      adam.step(params, lr);

      ++global_step;
      curve << global_step << ',' << l1_val << ',' << vnl_val << ',' << total_val
            << ',' << lr << "\n";
      if (!first_recorded) {
        result.first_l1 = l1_val;
        result.first_vnl = vnl_val;
        first_recorded = true;
      }
      result.final_l1 = l1_val;
      result.final_vnl = vnl_val;
    }
    curve.flush();
    write_checkpoint(epoch + 1);
  }
  result.steps = global_step;
  return result;
}

}  // namespace hals
