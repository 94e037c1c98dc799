#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "hals/autodiff.hpp"
#include "hals/common.hpp"

namespace hals {

// One loss evaluation: value plus the branch signature of the recorded
// forward pass (Tape::branch_signature).
struct GradEval {
  double value = 0;
  uint64_t branch_signature = 0;
};

// Evaluates the loss for the current parameter values; when with_grad is set
// it must also accumulate parameter gradients (zeroed by the checker).
using GradCheckFn = std::function<GradEval(ParamStoreT<double>&, bool with_grad)>;

struct GradCheckResult {
  double max_rel_err = 0;
  long long checked = 0;
  // Elements whose +-eps evaluations took different non-smooth branches
  // (leaky_relu / L1 / normal-loss kinks). Central differences do not
  // estimate the derivative across a kink, so these are not compared.
  long long skipped_kinks = 0;
};

// Central finite-difference verification of reverse-mode gradients in double
// precision. Relative error per element:
// |g_analytic - g_fd| / max(1, |g_analytic|, |g_fd|).
// max_elements_per_param > 0 checks a seeded random subset per parameter.
inline GradCheckResult grad_check(const GradCheckFn& fn, ParamStoreT<double>& params,
                                  double eps = 1e-3, int max_elements_per_param = 0,
                                  uint64_t seed = 0) {
  params.zero_grad();
  fn(params, true);
  // Snapshot analytic gradients; fn runs many more times below.
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params.items) analytic.push_back(p.grad.data);

  Rng rng(mix_seed(seed, 0x6743c8ecULL));
  GradCheckResult result;
  for (size_t pi = 0; pi < params.items.size(); ++pi) {
    auto& value = params.items[pi].value.data;
    std::vector<size_t> elems;
    if (max_elements_per_param <= 0 ||
        (size_t)max_elements_per_param >= value.size()) {
      elems.resize(value.size());
      for (size_t i = 0; i < value.size(); ++i) elems[i] = i;
    } else {
      for (int i = 0; i < max_elements_per_param; ++i)
        elems.push_back(rng.index(value.size()));
    }
    for (size_t ei : elems) {
      const double orig = value[ei];
      value[ei] = orig + eps;
      const GradEval plus = fn(params, false);
      value[ei] = orig - eps;
      const GradEval minus = fn(params, false);
      value[ei] = orig;
      if (plus.branch_signature != minus.branch_signature) {
        ++result.skipped_kinks;
        continue;
      }
      const double fd = (plus.value - minus.value) / (2.0 * eps);
      const double ga = analytic[pi][ei];
      const double err =
          std::abs(ga - fd) / std::max({1.0, std::abs(ga), std::abs(fd)});
      if (err > result.max_rel_err) result.max_rel_err = err;
      ++result.checked;
    }
  }
  return result;
}

}  // namespace hals
