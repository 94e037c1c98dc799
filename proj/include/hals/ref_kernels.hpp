#pragma once

#include <vector>

#include "hals/geometry.hpp"
#include "hals/range_image.hpp"
#include "hals/tensor.hpp"

// Serial reference implementations. Deliberately written as plain direct
// loops, independent of the OpenMP kernels and spatial indexes they are used
// to verify. The benchmark tool also times the two paths against each other.

namespace hals::ref {

// Direct-summation dilated convolution (quadruple loop per output element).
template <typename T>
Tensor4T<T> conv2d_naive(const Tensor4T<T>& x, const Tensor4T<T>& w,
                         const Tensor4T<T>& bias, int dilation) {
  const int k = w.h;
  const int k2 = k / 2;
  Tensor4T<T> y(x.b, w.b, x.h, x.w);
  for (int bi = 0; bi < x.b; ++bi)
    for (int oc = 0; oc < w.b; ++oc)
      for (int i = 0; i < x.h; ++i)
        for (int j = 0; j < x.w; ++j) {
          T acc = bias.data[oc];
          for (int ci = 0; ci < x.c; ++ci)
            for (int a = 0; a < k; ++a)
              for (int q = 0; q < k; ++q) {
                const int ii = i + dilation * (a - k2);
                const int jj = j + dilation * (q - k2);
                if (ii < 0 || ii >= x.h || jj < 0 || jj >= x.w) continue;
                acc += w.at(oc, ci, a, q) * x.at(bi, ci, ii, jj);
              }
          y.at(bi, oc, i, j) = acc;
        }
  return y;
}

// O(n^2) symmetric chamfer distance (sum of mean squared nearest distances).
double chamfer_bruteforce(const PointCloud& a, const PointCloud& b);

// Exact earth mover's distance by enumerating all |a|! assignments.
// Feasible for n <= ~8; returns the mean matched Euclidean distance.
double emd_bruteforce(const PointCloud& a, const PointCloud& b);

// Two-pass per-row mean / population std over occupied bins of a spherical
// range-image dataset.
void row_stats_two_pass(const std::vector<RangeImage>& images,
                        std::vector<double>* mean, std::vector<double>* stddev);

// Plain mean absolute difference over every tensor entry.
template <typename T>
double l1_mean_naive(const Tensor4T<T>& a, const Tensor4T<T>& b) {
  double acc = 0;
  for (size_t i = 0; i < a.size(); ++i)
    acc += std::abs(double(a.data[i]) - double(b.data[i]));
  return acc / double(a.size());
}

}  // namespace hals::ref
