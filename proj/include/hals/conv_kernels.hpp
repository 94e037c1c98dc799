#pragma once

#include <algorithm>

#include "hals/tensor.hpp"

// Dilated 2D convolution kernels, same-size output via zero padding of
// dilation*(k-1)/2 per side (odd k). Each output element accumulates in a
// fixed row-major order, so results are bit-identical regardless of the
// OpenMP thread count. Weight layout: (C_out, C_in, k, k); bias: (1, C_out,
// 1, 1).

namespace hals {

template <typename T>
void conv2d_forward(const Tensor4T<T>& x, const Tensor4T<T>& w,
                    const Tensor4T<T>& bias, int dilation, Tensor4T<T>& y) {
  const int k = w.h;
  HALS_CHECK(k == w.w && k % 2 == 1, "conv2d: kernel must be square and odd");
  HALS_CHECK(w.c == x.c, "conv2d: input channels do not match weight");
  HALS_CHECK(bias.c == w.b && bias.b == 1 && bias.h == 1 && bias.w == 1,
             "conv2d: bias shape must be (1, C_out, 1, 1)");
  HALS_CHECK(dilation >= 1, "conv2d: dilation must be >= 1");
  y = Tensor4T<T>(x.b, w.b, x.h, x.w);

  const int k2 = k / 2;
  const int H = x.h, W = x.w, Cin = x.c, Cout = w.b, B = x.b;
  const long long work = (long long)B * Cout * H * W * Cin * k * k;

#pragma omp parallel for collapse(2) schedule(static) if (work > 1 << 14)
  for (int bi = 0; bi < B; ++bi) {
    for (int oc = 0; oc < Cout; ++oc) {
      const T bval = bias.data[oc];
      for (int i = 0; i < H; ++i) {
        T* out = y.row(bi, oc, i);
        for (int j = 0; j < W; ++j) out[j] = bval;
        for (int ci = 0; ci < Cin; ++ci) {
          for (int a = 0; a < k; ++a) {
            const int ii = i + dilation * (a - k2);
            if (ii < 0 || ii >= H) continue;
            const T* xr = x.row(bi, ci, ii);
            const T* wr = w.row(oc, ci, a);
            for (int q = 0; q < k; ++q) {
              const T wv = wr[q];
              const int off = dilation * (q - k2);
              const int jlo = std::max(0, -off);
              const int jhi = std::min(W, W - off);
              for (int j = jlo; j < jhi; ++j) out[j] += wv * xr[j + off];
            }
          }
        }
      }
    }
  }
}

// Accumulates (+=) into gx.
template <typename T>
void conv2d_backward_input(const Tensor4T<T>& w, const Tensor4T<T>& gy,
                           int dilation, Tensor4T<T>& gx) {
  const int k = w.h;
  const int k2 = k / 2;
  const int H = gx.h, W = gx.w, Cin = gx.c, Cout = w.b, B = gx.b;
  const long long work = (long long)B * Cin * H * W * Cout * k * k;

#pragma omp parallel for collapse(2) schedule(static) if (work > 1 << 14)
  for (int bi = 0; bi < B; ++bi) {
    for (int ci = 0; ci < Cin; ++ci) {
      for (int i = 0; i < H; ++i) {
        T* gxr = gx.row(bi, ci, i);
        for (int oc = 0; oc < Cout; ++oc) {
          for (int a = 0; a < k; ++a) {
            const int ii = i - dilation * (a - k2);
            if (ii < 0 || ii >= H) continue;
            const T* gyr = gy.row(bi, oc, ii);
            const T* wr = w.row(oc, ci, a);
            for (int q = 0; q < k; ++q) {
              const T wv = wr[q];
              const int off = dilation * (q - k2);
              // gx[j] += w * gy[j - off]
              const int jlo = std::max(0, off);
              const int jhi = std::min(W, W + off);
              for (int j = jlo; j < jhi; ++j) gxr[j] += wv * gyr[j - off];
            }
          }
        }
      }
    }
  }
}

// Accumulates (+=) into gw.
template <typename T>
void conv2d_backward_weight(const Tensor4T<T>& x, const Tensor4T<T>& gy,
                            int dilation, Tensor4T<T>& gw) {
  const int k = gw.h;
  const int k2 = k / 2;
  const int H = x.h, W = x.w, Cin = x.c, Cout = gw.b, B = x.b;
  const long long work = (long long)B * Cout * H * W * Cin * k * k;

#pragma omp parallel for collapse(2) schedule(static) if (work > 1 << 14)
  for (int oc = 0; oc < Cout; ++oc) {
    for (int ci = 0; ci < Cin; ++ci) {
      for (int a = 0; a < k; ++a) {
        for (int q = 0; q < k; ++q) {
          T acc = 0;
          const int ioff = dilation * (a - k2);
          const int joff = dilation * (q - k2);
          for (int bi = 0; bi < B; ++bi) {
            for (int i = 0; i < H; ++i) {
              const int ii = i + ioff;
              if (ii < 0 || ii >= H) continue;
              const T* gyr = gy.row(bi, oc, i);
              const T* xr = x.row(bi, ci, ii);
              const int jlo = std::max(0, -joff);
              const int jhi = std::min(W, W - joff);
              for (int j = jlo; j < jhi; ++j) acc += gyr[j] * xr[j + joff];
            }
          }
          gw.at(oc, ci, a, q) += acc;
        }
      }
    }
  }
}

// Accumulates (+=) into gb (shape (1, C_out, 1, 1)).
template <typename T>
void conv2d_backward_bias(const Tensor4T<T>& gy, Tensor4T<T>& gb) {
  const int Cout = gy.c;
#pragma omp parallel for schedule(static) if (gy.size() > 1 << 14)
  for (int oc = 0; oc < Cout; ++oc) {
    T acc = 0;
    for (int bi = 0; bi < gy.b; ++bi)
      for (int i = 0; i < gy.h; ++i) {
        const T* r = gy.row(bi, oc, i);
        for (int j = 0; j < gy.w; ++j) acc += r[j];
      }
    gb.data[oc] += acc;
  }
}

}  // namespace hals
