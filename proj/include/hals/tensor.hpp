#pragma once

#include <cstddef>
#include <vector>

#include "hals/common.hpp"

namespace hals {

// Dense row-major [batch, channels, height, width] tensor. Float storage in
// the training path; double instantiation backs the gradient checker.
template <typename T>
struct Tensor4T {
  int b = 1, c = 1, h = 1, w = 1;
  std::vector<T> data;

  Tensor4T() : data(1, T(0)) {}
  Tensor4T(int b_, int c_, int h_, int w_)
      : b(b_), c(c_), h(h_), w(w_), data(size_t(b_) * c_ * h_ * w_, T(0)) {
    HALS_CHECK(b_ >= 1 && c_ >= 1 && h_ >= 1 && w_ >= 1,
               "tensor: shape components must be >= 1");
  }

  static Tensor4T scalar(T v) {
    Tensor4T t;
    t.data[0] = v;
    return t;
  }

  size_t size() const { return data.size(); }
  bool is_scalar() const { return b == 1 && c == 1 && h == 1 && w == 1; }

  size_t idx(int bi, int ci, int yi, int xi) const {
    return ((size_t(bi) * c + ci) * h + yi) * w + xi;
  }
  T at(int bi, int ci, int yi, int xi) const { return data[idx(bi, ci, yi, xi)]; }
  T& at(int bi, int ci, int yi, int xi) { return data[idx(bi, ci, yi, xi)]; }

  const T* row(int bi, int ci, int yi) const { return data.data() + idx(bi, ci, yi, 0); }
  T* row(int bi, int ci, int yi) { return data.data() + idx(bi, ci, yi, 0); }

  bool same_shape(const Tensor4T& o) const {
    return b == o.b && c == o.c && h == o.h && w == o.w;
  }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }

  Tensor4T zeros_like() const { return Tensor4T(b, c, h, w); }
};

using Tensor4 = Tensor4T<float>;
using Tensor4d = Tensor4T<double>;

template <typename To, typename From>
Tensor4T<To> tensor_cast(const Tensor4T<From>& src) {
  Tensor4T<To> out(src.b, src.c, src.h, src.w);
  for (size_t i = 0; i < src.data.size(); ++i) out.data[i] = To(src.data[i]);
  return out;
}

}  // namespace hals
