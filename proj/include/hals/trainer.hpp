#pragma once

#include <string>

#include "hals/generator.hpp"
#include "hals/optimizer.hpp"
#include "hals/sensor.hpp"

namespace hals {

// Self-supervised training: each step loads a batch of high-resolution
// polar scans, row-downsamples them by the upsample rate, reconstructs the
// originals, and applies the combined L1 + surface-normal objective.
struct TrainConfig {
  GeneratorConfig gen;
  SensorModel sensor;        // high-resolution sensor
  NormConfig norm;
  bool norm_auto = true;     // derive z_min/z_max from the dataset
  int batch_size = 32;
  double lr = 1e-4;
  double decay_factor = 0.5;
  int decay_period = 40;     // epochs
  int epochs = 1;
  uint64_t seed = 0;
  int vnl_k = 0;             // 0 = min(3000, 10% of occupied bins)
  bool mask_empty_l1 = false;
  double grad_clip = 0.0;    // global norm; 0 = off
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  std::string data_dir;
  std::string out_dir;

  void validate() const;
};

TrainConfig load_train_config(const std::string& path);
void save_train_config(const std::string& path, const TrainConfig& config);
std::string train_config_to_string(const TrainConfig& config);

struct TrainResult {
  long long steps = 0;
  double first_l1 = 0, first_vnl = 0;
  double final_l1 = 0, final_vnl = 0;
  NormConfig norm;                 // constants actually used
  std::string checkpoint_dir;      // written checkpoint (params/optim/state)
  std::string loss_curve_path;
};

// Runs the loop; writes a rolling checkpoint per epoch plus the loss curve
// CSV (step, l1, vnl, total, lr). `resume_dir` continues bit-exactly from a
// previous checkpoint of the same config.
TrainResult train(const TrainConfig& config, const std::string& resume_dir = "");

}  // namespace hals
