#pragma once

#include <string>
#include <vector>

#include "hals/autodiff.hpp"

namespace hals {

// Bias-corrected Adam over a float parameter store. Moment accumulators are
// created lazily on the first step and match parameter shapes; the full
// optimizer state round-trips through a parameter file for bit-exact
// resume.
class Adam {
 public:
  Adam(double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // Applies one update from the accumulated gradients. Throws on NaN/Inf
  // gradients, naming the parameter.
  void step(ParamStore& params, double lr);

  long long step_count() const { return step_count_; }

  void save(const std::string& path) const;
  void load(const std::string& path, const ParamStore& params);

  double beta1() const { return beta1_; }
  double beta2() const { return beta2_; }
  double eps() const { return eps_; }

 private:
  void ensure_state(const ParamStore& params);

  double beta1_, beta2_, eps_;
  long long step_count_ = 0;
  ParamStore moments_;  // "<name>.m" and "<name>.v" tensors
};

// Step-decay schedule: lr0 * factor^floor(epoch / period).
double lr_at(int epoch, double lr0, double factor, int period_epochs);

// Global gradient clipping by L2 norm; returns the pre-clip norm.
double clip_gradients(ParamStore& params, double max_norm);

}  // namespace hals
