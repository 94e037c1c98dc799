#include "hals/optimizer.hpp"

#include <cmath>

#include "hals/checkpoint.hpp"

namespace hals {

void Adam::ensure_state(const ParamStore& params) {
  if (!moments_.items.empty()) return;
  for (const auto& p : params.items) {
    moments_.add(p.name + ".m", p.value.zeros_like());
    moments_.add(p.name + ".v", p.value.zeros_like());
  }
}

void Adam::step(ParamStore& params, double lr) {
  ensure_state(params);
  HALS_CHECK(moments_.size() == 2 * params.size(),
             "adam: state does not match parameter store");
  ++step_count_;
  const double bc1 = 1.0 - std::pow(beta1_, double(step_count_));
  const double bc2 = 1.0 - std::pow(beta2_, double(step_count_));

  for (size_t pi = 0; pi < params.items.size(); ++pi) {
    auto& p = params.items[pi];
    auto& m = moments_.items[2 * pi].value;
    auto& v = moments_.items[2 * pi + 1].value;
    for (size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad.data[i];
      HALS_CHECK(std::isfinite(g),
                 "adam: non-finite gradient in parameter " + p.name);
      const double mi = beta1_ * m.data[i] + (1.0 - beta1_) * g;
      const double vi = beta2_ * v.data[i] + (1.0 - beta2_) * g * g;
      m.data[i] = float(mi);
      v.data[i] = float(vi);
      const double m_hat = mi / bc1;
      const double v_hat = vi / bc2;
      p.value.data[i] = float(p.value.data[i] - lr * m_hat / (std::sqrt(v_hat) + eps_));
    }
  }
}

void Adam::save(const std::string& path) const {
  ParamStore state = moments_;
  Tensor4 counter(1, 1, 1, 1);
  counter.data[0] = float(step_count_);
  state.add("__step_count", counter);
  save_parameters_atomic(path, state);
}

void Adam::load(const std::string& path, const ParamStore& params) {
  ParamStore state;
  load_parameters(path, &state);
  ParameterT<float>* counter = state.find("__step_count");
  HALS_CHECK(counter != nullptr, "adam state missing step counter");
  step_count_ = (long long)std::llround(counter->value.data[0]);

  moments_ = ParamStore();
  for (const auto& p : params.items) {
    for (const char* suffix : {".m", ".v"}) {
      ParameterT<float>* src = state.find(p.name + suffix);
      HALS_CHECK(src != nullptr, "adam state missing moments for " + p.name);
      HALS_CHECK(src->value.same_shape(p.value),
                 "adam state shape mismatch for " + p.name);
      moments_.add(p.name + suffix, src->value);
    }
  }
}

double lr_at(int epoch, double lr0, double factor, int period_epochs) {
  HALS_CHECK(period_epochs >= 1, "lr_at: period must be >= 1");
  HALS_CHECK(epoch >= 0, "lr_at: epoch must be >= 0");
  return lr0 * std::pow(factor, double(epoch / period_epochs));
}

double clip_gradients(ParamStore& params, double max_norm) {
  double sq = 0;
  for (const auto& p : params.items)
    for (float g : p.grad.data) sq += double(g) * double(g);
  const double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    const float scale = float(max_norm / norm);
    for (auto& p : params.items)
      for (float& g : p.grad.data) g *= scale;
  }
  return norm;
}

}  // namespace hals
