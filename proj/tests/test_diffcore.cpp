#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hals/autodiff.hpp"
#include "hals/grad_check.hpp"
#include "hals/ref_kernels.hpp"
#include "hals/threading.hpp"
#include "hals/verify.hpp"

using namespace hals;

namespace {

Tensor4 random_tensor(Rng& rng, int b, int c, int h, int w, double lo = -1,
                      double hi = 1) {
  Tensor4 t(b, c, h, w);
  for (auto& v : t.data) v = float(rng.uniform(lo, hi));
  return t;
}

}  // namespace

TEST_CASE("1x1 identity convolution reproduces the input") {
  Tape<float> tape;
  Rng rng(1);
  const int x = tape.input(random_tensor(rng, 2, 2, 3, 4));
  Tensor4 w(2, 2, 1, 1);
  w.at(0, 0, 0, 0) = 1.0f;
  w.at(1, 1, 0, 0) = 1.0f;
  const int wid = tape.input(w);
  const int bid = tape.input(Tensor4(1, 2, 1, 1));
  const int y = tape.conv2d(x, wid, bid, 1);
  CHECK(tape.value(y).data == tape.value(x).data);
}

TEST_CASE("3x3 all-ones kernel sums the neighbourhood") {
  Tape<float> tape;
  Tensor4 xv(1, 1, 5, 5);
  xv.fill(1.0f);
  Tensor4 wv(1, 1, 3, 3);
  wv.fill(1.0f);
  const int y = tape.conv2d(tape.input(xv), tape.input(wv),
                            tape.input(Tensor4(1, 1, 1, 1)), 1);
  CHECK(tape.value(y).at(0, 0, 2, 2) == doctest::Approx(9.0));   // interior
  CHECK(tape.value(y).at(0, 0, 0, 0) == doctest::Approx(4.0));   // corner
}

TEST_CASE("dilated convolution matches the direct-summation reference") {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const int b = rng.uniform_int(1, 2), cin = rng.uniform_int(1, 3);
    const int cout = rng.uniform_int(1, 3), h = rng.uniform_int(3, 7);
    const int w = rng.uniform_int(3, 8), dil = rng.uniform_int(1, 2);
    const Tensor4 x = random_tensor(rng, b, cin, h, w);
    const Tensor4 wt = random_tensor(rng, cout, cin, 3, 3);
    const Tensor4 bias = random_tensor(rng, 1, cout, 1, 1);
    Tensor4 y;
    conv2d_forward(x, wt, bias, dil, y);
    const Tensor4 ref = ref::conv2d_naive(x, wt, bias, dil);
    for (size_t i = 0; i < y.size(); ++i)
      CHECK(std::abs(y.data[i] - ref.data[i]) < 1e-6);
  }
  // the documented oracle shape: 1x2x5x6, k=3, dilation 2
  Rng rng2(11);
  const Tensor4 x = random_tensor(rng2, 1, 2, 5, 6);
  const Tensor4 wt = random_tensor(rng2, 3, 2, 3, 3);
  const Tensor4 bias = random_tensor(rng2, 1, 3, 1, 1);
  Tensor4 y;
  conv2d_forward(x, wt, bias, 2, y);
  const Tensor4 ref = ref::conv2d_naive(x, wt, bias, 2);
  for (size_t i = 0; i < y.size(); ++i)
    CHECK(std::abs(y.data[i] - ref.data[i]) < 1e-6);
}

TEST_CASE("convolution rejects even kernels and channel mismatches") {
  Tape<float> tape;
  Rng rng(3);
  const int x = tape.input(random_tensor(rng, 1, 2, 4, 4));
  const int w_even = tape.input(random_tensor(rng, 1, 2, 2, 2));
  const int w_badc = tape.input(random_tensor(rng, 1, 3, 3, 3));
  const int b1 = tape.input(Tensor4(1, 1, 1, 1));
  CHECK_THROWS(tape.conv2d(x, w_even, b1, 1));
  CHECK_THROWS(tape.conv2d(x, w_badc, b1, 1));
}

TEST_CASE("pointwise layer is conv2d with k=1, bit for bit") {
  Rng rng(5);
  const Tensor4 x = random_tensor(rng, 1, 2, 4, 6);
  const Tensor4 w = random_tensor(rng, 64, 2, 1, 1);
  const Tensor4 b = random_tensor(rng, 1, 64, 1, 1);
  Tensor4 y;
  conv2d_forward(x, w, b, 1, y);
  CHECK(y.c == 64);  // 2 -> 64 feature expansion
  // manual shared-MLP evaluation per pixel
  for (int i = 0; i < x.h; ++i)
    for (int j = 0; j < x.w; ++j)
      for (int oc = 0; oc < 64; ++oc) {
        float acc = b.data[oc];
        for (int ci = 0; ci < 2; ++ci)
          acc += w.at(oc, ci, 0, 0) * x.at(0, ci, i, j);
        CHECK(y.at(0, oc, i, j) == acc);
      }

  // zero weight, bias -> constant output
  Tensor4 wz(3, 2, 1, 1);
  Tensor4 bz(1, 3, 1, 1);
  bz.data = {0.5f, -1.0f, 2.0f};
  Tensor4 yz;
  conv2d_forward(x, wz, bz, 1, yz);
  for (int oc = 0; oc < 3; ++oc)
    for (int i = 0; i < x.h; ++i)
      for (int j = 0; j < x.w; ++j)
        CHECK(yz.at(0, oc, i, j) == bz.data[oc]);
}

TEST_CASE("softmax pair: symmetry, saturation and normalization") {
  Tape<float> tape;
  {  // equal logits -> 0.5 everywhere
    Tensor4 a(1, 1, 2, 2), b(1, 1, 2, 2);
    a.fill(3.25f);
    b.fill(3.25f);
    auto [ma, mb] = softmax_pair(tape, tape.input(a), tape.input(b));
    for (float v : tape.value(ma).data) CHECK(v == doctest::Approx(0.5));
    for (float v : tape.value(mb).data) CHECK(v == doctest::Approx(0.5));
  }
  {  // large magnitudes do not overflow; difference 20 saturates
    Tensor4 a(1, 1, 1, 2), b(1, 1, 1, 2);
    a.data = {1e4f, 20.0f};
    b.data = {1e4f - 20.0f, 0.0f};
    auto [ma, mb] = softmax_pair(tape, tape.input(a), tape.input(b));
    for (float v : tape.value(ma).data) {
      CHECK(std::isfinite(v));
      CHECK(std::abs(v - 1.0f) < 1e-8);
    }
    for (float v : tape.value(mb).data) CHECK(std::abs(v) < 1e-8);
  }
  {  // random logits: masks sum to 1 within 1e-6 and stay in (0,1)
    Rng rng(17);
    const Tensor4 a = random_tensor(rng, 2, 1, 4, 8, -8, 8);
    const Tensor4 b = random_tensor(rng, 2, 1, 4, 8, -8, 8);
    auto [ma, mb] = softmax_pair(tape, tape.input(a), tape.input(b));
    for (size_t i = 0; i < a.size(); ++i) {
      const float sum = tape.value(ma).data[i] + tape.value(mb).data[i];
      CHECK(std::abs(sum - 1.0f) < 1e-6);
      CHECK(tape.value(ma).data[i] > 0.0f);
      CHECK(tape.value(ma).data[i] < 1.0f);
    }
  }
}

TEST_CASE("vertical pixel shuffle layout and bijection") {
  Tape<float> tape;
  {  // s=1 is the identity
    Rng rng(2);
    const Tensor4 x = random_tensor(rng, 1, 3, 2, 2);
    const int y = tape.vertical_shuffle(tape.input(x), 1);
    CHECK(tape.value(y).data == x.data);
  }
  {  // documented 2-channel example: values (10, 20) become a column
    Tensor4 x(1, 2, 1, 1);
    x.data = {10.0f, 20.0f};
    const int y = tape.vertical_shuffle(tape.input(x), 2);
    CHECK(tape.value(y).c == 1);
    CHECK(tape.value(y).h == 2);
    CHECK(tape.value(y).at(0, 0, 0, 0) == 10.0f);
    CHECK(tape.value(y).at(0, 0, 1, 0) == 20.0f);
  }
  {  // shuffle then inverse-shuffle is the identity
    Rng rng(9);
    const Tensor4 x = random_tensor(rng, 2, 6, 3, 4);
    const int y = tape.vertical_shuffle(tape.input(x), 3);
    const Tensor4& yv = tape.value(y);
    Tensor4 back(x.b, x.c, x.h, x.w);
    for (int bi = 0; bi < x.b; ++bi)
      for (int ci = 0; ci < yv.c; ++ci)
        for (int i = 0; i < x.h; ++i)
          for (int p = 0; p < 3; ++p)
            for (int j = 0; j < x.w; ++j)
              back.at(bi, ci * 3 + p, i, j) = yv.at(bi, ci, 3 * i + p, j);
    CHECK(back.data == x.data);
  }
  {  // channel count must divide
    Rng rng(4);
    const int x = tape.input(random_tensor(rng, 1, 3, 2, 2));
    CHECK_THROWS(tape.vertical_shuffle(x, 2));
  }
}

TEST_CASE("backward computes d(x^2)/dx = 2x and zero for unused parameters") {
  Tape<float> tape;
  Tensor4 xv = Tensor4::scalar(3.0f);
  const int x = tape.input(xv, true);
  const int unused = tape.input(Tensor4::scalar(5.0f), true);
  const int sq = tape.mul(x, x);
  const int loss = tape.weighted_sum(sq, Tensor4::scalar(1.0f));
  tape.backward(loss);
  CHECK(tape.grad(x).data[0] == doctest::Approx(6.0));
  CHECK(tape.grad(unused).data[0] == 0.0f);
}

TEST_CASE("forward results are identical across thread counts") {
  Rng rng(21);
  const Tensor4 x = random_tensor(rng, 2, 8, 16, 32);
  const Tensor4 w = random_tensor(rng, 8, 8, 3, 3);
  const Tensor4 b = random_tensor(rng, 1, 8, 1, 1);
  Tensor4 y_multi;
  conv2d_forward(x, w, b, 2, y_multi);
  Tensor4 y_single;
  {
    ThreadLimit one(1);
    conv2d_forward(x, w, b, 2, y_single);
  }
  CHECK(y_multi.data == y_single.data);
}

TEST_CASE("every operator passes finite-difference checks over 20 seeds") {
  const GradCheckSummary summary = gradcheck_ops(20);
  CHECK(summary.max_err < 1e-4);
  CHECK(summary.elements_checked > 1000);
}

TEST_CASE("gradient accumulates when a node is used twice") {
  Tape<double> tape;
  const int x = tape.input(Tensor4d::scalar(2.0), true);
  const int y = tape.add(x, x);  // dy/dx = 2
  const int loss = tape.weighted_sum(y, Tensor4d::scalar(1.5));
  tape.backward(loss);
  CHECK(tape.grad(x).data[0] == doctest::Approx(3.0));
}

TEST_CASE("mean_abs_diff averages over every entry including masked variant") {
  Tape<float> tape;
  Tensor4 x(1, 2, 1, 2);
  x.data = {1.0f, 2.0f, 3.0f, 4.0f};
  Tensor4 t(1, 2, 1, 2);
  t.data = {0.0f, 0.0f, 0.0f, 0.0f};
  const int id = tape.input(x);
  CHECK(tape.value(tape.mean_abs_diff(id, t)).data[0] == doctest::Approx(2.5));
  std::vector<float> weights = {1.0f, 0.0f, 0.0f, 1.0f};
  CHECK(tape.value(tape.masked_mean_abs_diff(id, t, weights)).data[0] ==
        doctest::Approx(2.5));  // (1 + 4) / 2
}
