#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hals/conv_kernels.hpp"
#include "hals/tensor.hpp"

namespace hals {

inline double sgn(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

// Context for the triplet surface-normal loss: point triples reconstructed
// from polar (d, z) channels at fixed bin azimuths, compared against
// precomputed unit normals of the reference triples. Channel values are
// de-normalized inside the op (d = d_hat * d_scale, z = z_hat * z_scale +
// z_offset) so gradients flow through the de-normalization.
struct TripletNormalContext {
  struct Triple {
    int frame = 0;
    int bin[3] = {0, 0, 0};  // flattened v * W + u
    double phi[3] = {0, 0, 0};
    double gt_normal[3] = {0, 0, 0};
  };
  std::vector<Triple> triples;
  double d_scale = 1.0;
  double z_scale = 1.0;
  double z_offset = 0.0;
  // Predicted triangles with area below this contribute the clamped maximum
  // (2 per axis) with zero gradient; the normalization is singular there.
  double degenerate_area = 1e-8;
};

// Named trainable tensor with a gradient accumulator of identical shape.
template <typename T>
struct ParameterT {
  std::string name;
  Tensor4T<T> value;
  Tensor4T<T> grad;

  ParameterT(std::string n, Tensor4T<T> v)
      : name(std::move(n)), value(std::move(v)),
        grad(value.b, value.c, value.h, value.w) {}
};

template <typename T>
class ParamStoreT {
 public:
  ParameterT<T>& add(const std::string& name, Tensor4T<T> value) {
    HALS_CHECK(find(name) == nullptr, "duplicate parameter name: " + name);
    items.emplace_back(name, std::move(value));
    return items.back();
  }
  ParameterT<T>* find(const std::string& name) {
    for (auto& p : items)
      if (p.name == name) return &p;
    return nullptr;
  }
  const ParameterT<T>* find(const std::string& name) const {
    for (const auto& p : items)
      if (p.name == name) return &p;
    return nullptr;
  }
  void zero_grad() {
    for (auto& p : items) p.grad.fill(T(0));
  }
  size_t size() const { return items.size(); }

  std::vector<ParameterT<T>> items;
};

using ParamStore = ParamStoreT<float>;

// Reverse-mode tape over Tensor4 values. Nodes are appended after their
// inputs, so reverse creation order is a valid reverse topological order and
// backward() visits each node exactly once. A fresh tape is built per
// forward pass.
template <typename T>
class Tape {
 public:
  using TensorT = Tensor4T<T>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  int input(TensorT v, bool requires_grad = false) {
    return push(std::move(v), {}, requires_grad, nullptr);
  }

  // Hash over every non-smooth branch taken during the forward pass
  // (leaky_relu sign, L1 sign, normal-loss signs and clamps). The gradient
  // checker compares signatures of the two finite-difference evaluations and
  // skips elements whose perturbation crosses a kink, where central
  // differences do not estimate the derivative.
  uint64_t branch_signature() const { return branch_sig_; }

  int conv2d(int x, int w, int b, int dilation = 1) {
    const TensorT& xv = value(x);
    const TensorT& wv = value(w);
    const TensorT& bv = value(b);
    TensorT y;
    conv2d_forward(xv, wv, bv, dilation, y);
    return push(std::move(y), {x, w, b}, any_grad({x, w, b}),
                [x, w, b, dilation](Tape& t, int self) {
                  const TensorT& g = t.gradv(self);
                  if (t.needs(x))
                    conv2d_backward_input(t.value(w), g, dilation, t.gradv(x));
                  if (t.needs(w))
                    conv2d_backward_weight(t.value(x), g, dilation, t.gradv(w));
                  if (t.needs(b)) conv2d_backward_bias(g, t.gradv(b));
                });
  }

  int leaky_relu(int x, T slope) {
    const TensorT& xv = value(x);
    TensorT y = xv;
    for (auto& v : y.data) {
      sig_bit(v > T(0));
      if (v <= T(0)) v *= slope;
    }
    return push(std::move(y), {x}, any_grad({x}),
                [x, slope](Tape& t, int self) {
                  if (!t.needs(x)) return;
                  const TensorT& g = t.gradv(self);
                  const TensorT& xv = t.value(x);
                  TensorT& gx = t.gradv(x);
                  for (size_t i = 0; i < g.size(); ++i)
                    gx.data[i] += xv.data[i] > T(0) ? g.data[i] : g.data[i] * slope;
                });
  }

  int sigmoid(int x) {
    const TensorT& xv = value(x);
    TensorT y = xv;
    for (auto& v : y.data) v = stable_sigmoid(v);
    return push(std::move(y), {x}, any_grad({x}), [x](Tape& t, int self) {
      if (!t.needs(x)) return;
      const TensorT& g = t.gradv(self);
      const TensorT& yv = t.value(self);
      TensorT& gx = t.gradv(x);
      for (size_t i = 0; i < g.size(); ++i)
        gx.data[i] += g.data[i] * yv.data[i] * (T(1) - yv.data[i]);
    });
  }

  int add(int a, int b) {
    const TensorT& av = value(a);
    const TensorT& bv = value(b);
    HALS_CHECK(av.same_shape(bv), "add: shape mismatch");
    TensorT y = av;
    for (size_t i = 0; i < y.size(); ++i) y.data[i] += bv.data[i];
    return push(std::move(y), {a, b}, any_grad({a, b}),
                [a, b](Tape& t, int self) {
                  const TensorT& g = t.gradv(self);
                  if (t.needs(a)) accumulate(t.gradv(a), g, T(1));
                  if (t.needs(b)) accumulate(t.gradv(b), g, T(1));
                });
  }

  int sub(int a, int b) {
    const TensorT& av = value(a);
    const TensorT& bv = value(b);
    HALS_CHECK(av.same_shape(bv), "sub: shape mismatch");
    TensorT y = av;
    for (size_t i = 0; i < y.size(); ++i) y.data[i] -= bv.data[i];
    return push(std::move(y), {a, b}, any_grad({a, b}),
                [a, b](Tape& t, int self) {
                  const TensorT& g = t.gradv(self);
                  if (t.needs(a)) accumulate(t.gradv(a), g, T(1));
                  if (t.needs(b)) accumulate(t.gradv(b), g, T(-1));
                });
  }

  int mul(int a, int b) {
    const TensorT& av = value(a);
    const TensorT& bv = value(b);
    HALS_CHECK(av.same_shape(bv), "mul: shape mismatch");
    TensorT y = av;
    for (size_t i = 0; i < y.size(); ++i) y.data[i] *= bv.data[i];
    return push(std::move(y), {a, b}, any_grad({a, b}),
                [a, b](Tape& t, int self) {
                  const TensorT& g = t.gradv(self);
                  if (t.needs(a)) {
                    const TensorT& bv2 = t.value(b);
                    TensorT& ga = t.gradv(a);
                    for (size_t i = 0; i < g.size(); ++i)
                      ga.data[i] += g.data[i] * bv2.data[i];
                  }
                  if (t.needs(b)) {
                    const TensorT& av2 = t.value(a);
                    TensorT& gb = t.gradv(b);
                    for (size_t i = 0; i < g.size(); ++i)
                      gb.data[i] += g.data[i] * av2.data[i];
                  }
                });
  }

  // Elementwise product against a single-channel mask (B, 1, H, W).
  int mul_mask(int x, int mask) {
    const TensorT& xv = value(x);
    const TensorT& mv = value(mask);
    HALS_CHECK(mv.c == 1 && mv.b == xv.b && mv.h == xv.h && mv.w == xv.w,
               "mul_mask: mask must be (B, 1, H, W) matching input");
    TensorT y = xv;
    for (int bi = 0; bi < xv.b; ++bi)
      for (int ci = 0; ci < xv.c; ++ci)
        for (int i = 0; i < xv.h; ++i) {
          T* yr = y.row(bi, ci, i);
          const T* mr = mv.row(bi, 0, i);
          for (int j = 0; j < xv.w; ++j) yr[j] *= mr[j];
        }
    return push(std::move(y), {x, mask}, any_grad({x, mask}),
                [x, mask](Tape& t, int self) {
                  const TensorT& g = t.gradv(self);
                  const TensorT& xv2 = t.value(x);
                  const TensorT& mv2 = t.value(mask);
                  if (t.needs(x)) {
                    TensorT& gx = t.gradv(x);
                    for (int bi = 0; bi < xv2.b; ++bi)
                      for (int ci = 0; ci < xv2.c; ++ci)
                        for (int i = 0; i < xv2.h; ++i) {
                          T* gxr = gx.row(bi, ci, i);
                          const T* gr = g.row(bi, ci, i);
                          const T* mr = mv2.row(bi, 0, i);
                          for (int j = 0; j < xv2.w; ++j) gxr[j] += gr[j] * mr[j];
                        }
                  }
                  if (t.needs(mask)) {
                    TensorT& gm = t.gradv(mask);
                    for (int bi = 0; bi < xv2.b; ++bi)
                      for (int ci = 0; ci < xv2.c; ++ci)
                        for (int i = 0; i < xv2.h; ++i) {
                          T* gmr = gm.row(bi, 0, i);
                          const T* gr = g.row(bi, ci, i);
                          const T* xr = xv2.row(bi, ci, i);
                          for (int j = 0; j < xv2.w; ++j) gmr[j] += gr[j] * xr[j];
                        }
                  }
                });
  }

  int concat_channels(const std::vector<int>& xs) {
    HALS_CHECK(!xs.empty(), "concat_channels: no inputs");
    const TensorT& first = value(xs[0]);
    int ctotal = 0;
    for (int id : xs) {
      const TensorT& v = value(id);
      HALS_CHECK(v.b == first.b && v.h == first.h && v.w == first.w,
                 "concat_channels: spatial/batch shape mismatch");
      ctotal += v.c;
    }
    TensorT y(first.b, ctotal, first.h, first.w);
    int coff = 0;
    for (int id : xs) {
      const TensorT& v = value(id);
      for (int bi = 0; bi < v.b; ++bi)
        for (int ci = 0; ci < v.c; ++ci)
          for (int i = 0; i < v.h; ++i)
            std::copy(v.row(bi, ci, i), v.row(bi, ci, i) + v.w,
                      y.row(bi, coff + ci, i));
      coff += v.c;
    }
    return push(std::move(y), xs, any_grad(xs), [xs](Tape& t, int self) {
      const TensorT& g = t.gradv(self);
      int coff2 = 0;
      for (int id : xs) {
        const TensorT& v = t.value(id);
        if (t.needs(id)) {
          TensorT& gx = t.gradv(id);
          for (int bi = 0; bi < v.b; ++bi)
            for (int ci = 0; ci < v.c; ++ci)
              for (int i = 0; i < v.h; ++i) {
                T* gxr = gx.row(bi, ci, i);
                const T* gr = g.row(bi, coff2 + ci, i);
                for (int j = 0; j < v.w; ++j) gxr[j] += gr[j];
              }
        }
        coff2 += v.c;
      }
    });
  }

  int slice_channels(int x, int c0, int c1) {
    const TensorT& xv = value(x);
    HALS_CHECK(0 <= c0 && c0 < c1 && c1 <= xv.c, "slice_channels: bad range");
    TensorT y(xv.b, c1 - c0, xv.h, xv.w);
    for (int bi = 0; bi < xv.b; ++bi)
      for (int ci = c0; ci < c1; ++ci)
        for (int i = 0; i < xv.h; ++i)
          std::copy(xv.row(bi, ci, i), xv.row(bi, ci, i) + xv.w,
                    y.row(bi, ci - c0, i));
    return push(std::move(y), {x}, any_grad({x}),
                [x, c0, c1](Tape& t, int self) {
                  if (!t.needs(x)) return;
                  const TensorT& g = t.gradv(self);
                  TensorT& gx = t.gradv(x);
                  for (int bi = 0; bi < g.b; ++bi)
                    for (int ci = c0; ci < c1; ++ci)
                      for (int i = 0; i < g.h; ++i) {
                        T* gxr = gx.row(bi, ci, i);
                        const T* gr = g.row(bi, ci - c0, i);
                        for (int j = 0; j < g.w; ++j) gxr[j] += gr[j];
                      }
                });
  }

  // Sub-pixel shuffle along the vertical axis:
  // out[b, c, s*i + p, j] = in[b, c*s + p, i, j].
  int vertical_shuffle(int x, int s) {
    const TensorT& xv = value(x);
    HALS_CHECK(s >= 1, "vertical_shuffle: rate must be >= 1");
    HALS_CHECK(xv.c % s == 0, "vertical_shuffle: channels not divisible by rate");
    TensorT y(xv.b, xv.c / s, xv.h * s, xv.w);
    for (int bi = 0; bi < xv.b; ++bi)
      for (int ci = 0; ci < y.c; ++ci)
        for (int i = 0; i < xv.h; ++i)
          for (int p = 0; p < s; ++p)
            std::copy(xv.row(bi, ci * s + p, i), xv.row(bi, ci * s + p, i) + xv.w,
                      y.row(bi, ci, s * i + p));
    return push(std::move(y), {x}, any_grad({x}), [x, s](Tape& t, int self) {
      if (!t.needs(x)) return;
      const TensorT& g = t.gradv(self);
      TensorT& gx = t.gradv(x);
      for (int bi = 0; bi < gx.b; ++bi)
        for (int ci = 0; ci < g.c; ++ci)
          for (int i = 0; i < gx.h; ++i)
            for (int p = 0; p < s; ++p) {
              T* gxr = gx.row(bi, ci * s + p, i);
              const T* gr = g.row(bi, ci, s * i + p);
              for (int j = 0; j < g.w; ++j) gxr[j] += gr[j];
            }
    });
  }

  int affine(int x, T scale, T shift) {
    const TensorT& xv = value(x);
    TensorT y = xv;
    for (auto& v : y.data) v = v * scale + shift;
    return push(std::move(y), {x}, any_grad({x}),
                [x, scale](Tape& t, int self) {
                  if (!t.needs(x)) return;
                  accumulate(t.gradv(x), t.gradv(self), scale);
                });
  }

  // Weighted mean absolute difference against a constant target:
  // sum_i w_i |x_i - t_i| / sum_i w_i. Empty weights = uniform (plain mean
  // over every entry).
  int masked_mean_abs_diff(int x, TensorT target, std::vector<T> weights) {
    const TensorT& xv = value(x);
    HALS_CHECK(xv.same_shape(target), "mean_abs_diff: shape mismatch");
    HALS_CHECK(weights.empty() || weights.size() == xv.size(),
               "mean_abs_diff: weight size mismatch");
    double wsum = 0, acc = 0;
    if (weights.empty()) {
      wsum = double(xv.size());
      for (size_t i = 0; i < xv.size(); ++i) {
        const double diff = double(xv.data[i]) - double(target.data[i]);
        sig_bit(diff > 0);
        acc += std::abs(diff);
      }
    } else {
      for (size_t i = 0; i < xv.size(); ++i) {
        if (weights[i] == T(0)) continue;
        const double diff = double(xv.data[i]) - double(target.data[i]);
        sig_bit(diff > 0);
        wsum += double(weights[i]);
        acc += double(weights[i]) * std::abs(diff);
      }
    }
    HALS_CHECK(wsum > 0, "mean_abs_diff: zero total weight");
    TensorT y = TensorT::scalar(T(acc / wsum));
    auto tgt = std::make_shared<TensorT>(std::move(target));
    auto wts = std::make_shared<std::vector<T>>(std::move(weights));
    return push(std::move(y), {x}, any_grad({x}),
                [x, tgt, wts, wsum](Tape& t, int self) {
                  if (!t.needs(x)) return;
                  const T g = t.gradv(self).data[0];
                  const TensorT& xv2 = t.value(x);
                  TensorT& gx = t.gradv(x);
                  for (size_t i = 0; i < xv2.size(); ++i) {
                    const double diff = double(xv2.data[i]) - double(tgt->data[i]);
                    const double s = diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0);
                    const double wi = wts->empty() ? 1.0 : double((*wts)[i]);
                    gx.data[i] += T(double(g) * s * wi / wsum);
                  }
                });
  }

  int mean_abs_diff(int x, TensorT target) {
    return masked_mean_abs_diff(x, std::move(target), {});
  }

  // sum_i w_i * x_i; smooth scalar head used by the gradient checker.
  int weighted_sum(int x, TensorT weights) {
    const TensorT& xv = value(x);
    HALS_CHECK(xv.same_shape(weights), "weighted_sum: shape mismatch");
    double acc = 0;
    for (size_t i = 0; i < xv.size(); ++i)
      acc += double(xv.data[i]) * double(weights.data[i]);
    TensorT y = TensorT::scalar(T(acc));
    auto wts = std::make_shared<TensorT>(std::move(weights));
    return push(std::move(y), {x}, any_grad({x}),
                [x, wts](Tape& t, int self) {
                  if (!t.needs(x)) return;
                  const T g = t.gradv(self).data[0];
                  accumulate_scaled(t.gradv(x), *wts, g);
                });
  }

  int triplet_normal_loss(int pred, std::shared_ptr<const TripletNormalContext> ctx);

  void backward(int loss) {
    HALS_CHECK(loss >= 0 && loss < (int)nodes_.size(), "backward: bad node id");
    HALS_CHECK(value(loss).is_scalar(), "backward: loss must be a scalar node");
    if (!nodes_[loss].needs_grad) return;  // nothing trainable feeds the loss
    nodes_[loss].grad.data[0] = T(1);
    for (int i = loss; i >= 0; --i) {
      Node& n = nodes_[i];
      if (n.needs_grad && n.back) n.back(*this, i);
    }
  }

  const TensorT& value(int id) const { return nodes_[id].val; }
  const TensorT& grad(int id) const { return nodes_[id].grad; }
  bool requires_grad(int id) const { return nodes_[id].needs_grad; }
  size_t node_count() const { return nodes_.size(); }

  // Marks every node that feeds into `id` (inclusive); used to test branch
  // reachability of parameters.
  std::vector<char> reachable_inputs(int id) const {
    std::vector<char> mark(nodes_.size(), 0);
    mark[id] = 1;
    for (int i = id; i >= 0; --i)
      if (mark[i])
        for (int p : nodes_[i].parents) mark[p] = 1;
    return mark;
  }

 private:
  struct Node {
    TensorT val;
    TensorT grad;
    std::vector<int> parents;
    std::function<void(Tape&, int)> back;
    bool needs_grad = false;
  };

  bool needs(int id) const { return nodes_[id].needs_grad; }
  TensorT& gradv(int id) { return nodes_[id].grad; }

  bool any_grad(const std::vector<int>& ids) const {
    for (int id : ids)
      if (nodes_[id].needs_grad) return true;
    return false;
  }

  static void accumulate(TensorT& dst, const TensorT& src, T scale) {
    for (size_t i = 0; i < dst.size(); ++i) dst.data[i] += src.data[i] * scale;
  }
  static void accumulate_scaled(TensorT& dst, const TensorT& w, T g) {
    for (size_t i = 0; i < dst.size(); ++i) dst.data[i] += w.data[i] * g;
  }

  static T stable_sigmoid(T x) {
    if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
    const T e = std::exp(x);
    return e / (T(1) + e);
  }

  void sig_bit(bool b) {
    branch_sig_ = (branch_sig_ * 1099511628211ULL) ^ (b ? 0x9eULL : 0x31ULL);
  }

  int push(TensorT val, std::vector<int> parents, bool needs_grad,
           std::function<void(Tape&, int)> back) {
    Node n;
    n.grad = needs_grad ? val.zeros_like() : TensorT();
    n.val = std::move(val);
    n.parents = std::move(parents);
    n.back = std::move(back);
    n.needs_grad = needs_grad;
    nodes_.push_back(std::move(n));
    return int(nodes_.size()) - 1;
  }

  std::vector<Node> nodes_;
  uint64_t branch_sig_ = 0xcbf29ce484222325ULL;
};

// Overflow-safe pairwise softmax: m_a = sigmoid(a - b), m_b = sigmoid(b - a).
// Equivalent to the max-shifted two-way softmax; the masks sum to 1 up to
// float rounding.
template <typename T>
std::pair<int, int> softmax_pair(Tape<T>& tape, int a, int b) {
  const int d1 = tape.sub(a, b);
  const int d2 = tape.sub(b, a);
  return {tape.sigmoid(d1), tape.sigmoid(d2)};
}

template <typename T>
int Tape<T>::triplet_normal_loss(int pred,
                                 std::shared_ptr<const TripletNormalContext> ctx) {
  const TensorT& p = value(pred);
  HALS_CHECK(p.c == 2, "triplet_normal_loss: prediction must have (d, z) channels");
  HALS_CHECK(!ctx->triples.empty(), "triplet_normal_loss: no triples");
  const size_t plane = size_t(p.h) * p.w;
  const size_t frame_stride = size_t(p.c) * plane;

  double acc = 0;
  for (const auto& tr : ctx->triples) {
    double px[3], py[3], pz[3];
    for (int m = 0; m < 3; ++m) {
      const size_t base = size_t(tr.frame) * frame_stride + size_t(tr.bin[m]);
      const double d = double(p.data[base]) * ctx->d_scale;
      const double z = double(p.data[base + plane]) * ctx->z_scale + ctx->z_offset;
      px[m] = d * std::cos(tr.phi[m]);
      py[m] = d * std::sin(tr.phi[m]);
      pz[m] = z;
    }
    const double ax = px[1] - px[0], ay = py[1] - py[0], az = pz[1] - pz[0];
    const double bx = px[2] - px[0], by = py[2] - py[0], bz = pz[2] - pz[0];
    const double cx = ay * bz - az * by;
    const double cy = az * bx - ax * bz;
    const double cz = ax * by - ay * bx;
    const double cn = std::sqrt(cx * cx + cy * cy + cz * cz);
    const bool degenerate = 0.5 * cn < ctx->degenerate_area;
    sig_bit(degenerate);
    if (degenerate) {
      acc += 6.0;  // clamped contribution, 2 per axis
      continue;
    }
    const double dx = cx / cn - tr.gt_normal[0];
    const double dy = cy / cn - tr.gt_normal[1];
    const double dz = cz / cn - tr.gt_normal[2];
    sig_bit(dx > 0);
    sig_bit(dy > 0);
    sig_bit(dz > 0);
    acc += std::abs(dx) + std::abs(dy) + std::abs(dz);
  }
  TensorT y = TensorT::scalar(T(acc / double(ctx->triples.size())));

  return push(std::move(y), {pred}, any_grad({pred}),
              [pred, ctx](Tape& t, int self) {
    if (!t.needs(pred)) return;
    const double gup = double(t.gradv(self).data[0]);
    const TensorT& p2 = t.value(pred);
    TensorT& gp = t.gradv(pred);
    const size_t plane2 = size_t(p2.h) * p2.w;
    const size_t frame_stride2 = size_t(p2.c) * plane2;
    const double inv_k = 1.0 / double(ctx->triples.size());

    for (const auto& tr : ctx->triples) {
      double px[3], py[3], pz[3];
      size_t base[3];
      for (int m = 0; m < 3; ++m) {
        base[m] = size_t(tr.frame) * frame_stride2 + size_t(tr.bin[m]);
        const double d = double(p2.data[base[m]]) * ctx->d_scale;
        const double z = double(p2.data[base[m] + plane2]) * ctx->z_scale + ctx->z_offset;
        px[m] = d * std::cos(tr.phi[m]);
        py[m] = d * std::sin(tr.phi[m]);
        pz[m] = z;
      }
      const double ax = px[1] - px[0], ay = py[1] - py[0], az = pz[1] - pz[0];
      const double bx = px[2] - px[0], by = py[2] - py[0], bz = pz[2] - pz[0];
      const double cx = ay * bz - az * by;
      const double cy = az * bx - ax * bz;
      const double cz = ax * by - ay * bx;
      const double cn = std::sqrt(cx * cx + cy * cy + cz * cz);
      if (0.5 * cn < ctx->degenerate_area) continue;  // clamped, no gradient

      const double nx = cx / cn, ny = cy / cn, nz = cz / cn;
      const double sx = sgn(nx - tr.gt_normal[0]);
      const double sy = sgn(ny - tr.gt_normal[1]);
      const double sz = sgn(nz - tr.gt_normal[2]);
      // d(loss)/d(c) = (I - n n^T) s / |c|
      const double ndots = nx * sx + ny * sy + nz * sz;
      const double gcx = (sx - nx * ndots) / cn * gup * inv_k;
      const double gcy = (sy - ny * ndots) / cn * gup * inv_k;
      const double gcz = (sz - nz * ndots) / cn * gup * inv_k;
      // c = a x b: g_a = b x g_c, g_b = g_c x a
      const double gax = by * gcz - bz * gcy;
      const double gay = bz * gcx - bx * gcz;
      const double gaz = bx * gcy - by * gcx;
      const double gbx = gcy * az - gcz * ay;
      const double gby = gcz * ax - gcx * az;
      const double gbz = gcx * ay - gcy * ax;
      const double gpx[3] = {-gax - gbx, gax, gbx};
      const double gpy[3] = {-gay - gby, gay, gby};
      const double gpz[3] = {-gaz - gbz, gaz, gbz};
      for (int m = 0; m < 3; ++m) {
        const double gd = gpx[m] * std::cos(tr.phi[m]) + gpy[m] * std::sin(tr.phi[m]);
        gp.data[base[m]] += T(gd * ctx->d_scale);
        gp.data[base[m] + plane2] += T(gpz[m] * ctx->z_scale);
      }
    }
  });
}

}  // namespace hals
