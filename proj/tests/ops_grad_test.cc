// Copyright 2026 The dvmaf Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>

#include "doctest.h"
#include "dvmaf/ops.h"
#include "dvmaf/tensor.h"
#include "testutil.h"

using namespace dvmaf;
using testutil::MaxRelDiff;
using testutil::NumericGradient;
using testutil::RandomTensor;
using testutil::TapedGradient;

namespace {

// Finite-difference sweep for a scalar-valued function of one tensor.
void CheckGradient(const std::function<Tensor(Tape&, const Tensor&)>& build,
                   const Tensor& x, double step = 1e-6, double tol = 1e-5) {
  const Tensor analytic = TapedGradient(build, x);
  const Tensor numeric = NumericGradient(
      [&](const Tensor& v) {
        Tape tape;
        const Tensor p = tape.Parameter(v);
        return build(tape, p).ScalarValue();
      },
      x, step);
  CHECK(MaxRelDiff(analytic, numeric, 1e-6) < tol);
}

}  // namespace

TEST_CASE("conv2d with a 1x1 identity kernel is the identity") {
  std::mt19937_64 rng(1);
  const Tensor x = RandomTensor(5, 7, rng, 0.0, 255.0);
  const Tensor k = Tensor::FromVector(1, 1, {1.0});
  const Tensor y = Conv2D(x, k, Padding::kReflect);
  CHECK(testutil::MaxAbsDiff(x, y) == 0.0);

  // Kernel gradient of sum(conv(x, k)) equals sum(x).
  Tape tape;
  const Tensor p = tape.Parameter(k);
  tape.Backward(ReduceSum(Conv2D(x, p, Padding::kReflect)));
  CHECK(tape.Grad(p).ScalarValue() ==
        doctest::Approx(ReduceSum(x).ScalarValue()).epsilon(1e-12));
}

TEST_CASE("constant plane is a fixed point of any sum-to-one kernel") {
  const Tensor x = Tensor::Full(3, 3, 1.0);
  const Tensor k = Tensor::Full(3, 3, 1.0 / 9.0);
  const Tensor y = Conv2D(x, k, Padding::kReflect);
  for (std::size_t i = 0; i < y.size(); ++i) {
    CHECK(y.ValueAt(i) == doctest::Approx(1.0).epsilon(1e-15));
  }

  // Larger constant plane, Gaussian kernel, border rows included.
  const Tensor c = Tensor::Full(8, 8, 57.25);
  const Tensor g = GaussianKernel2D(5, 1.3);
  const Tensor z = Conv2D(c, g, Padding::kReflect);
  for (std::size_t i = 0; i < z.size(); ++i) {
    CHECK(z.ValueAt(i) == doctest::Approx(57.25).epsilon(1e-14));
  }
}

TEST_CASE("conv2d kernel gradient matches finite differences") {
  std::mt19937_64 rng(2);
  const Tensor x = RandomTensor(8, 8, rng, 0.0, 1.0);
  const Tensor k = RandomTensor(3, 3, rng, -0.5, 0.5);
  for (Padding pad : {Padding::kReflect, Padding::kZero}) {
    CheckGradient(
        [&, pad](Tape&, const Tensor& p) { return ReduceSum(Conv2D(x, p, pad)); }, k,
        1e-6, 1e-6);
  }
}

TEST_CASE("conv2d input gradient matches finite differences") {
  std::mt19937_64 rng(3);
  const Tensor x = RandomTensor(7, 6, rng, 0.0, 1.0);
  const Tensor k = RandomTensor(3, 5, rng, -0.5, 0.5);
  for (Padding pad : {Padding::kReflect, Padding::kZero}) {
    CheckGradient(
        [&, pad](Tape&, const Tensor& p) {
          const Tensor y = Conv2D(p, k, pad);
          return ReduceSum(Mul(y, y));  // nonlinear head so input grads vary
        },
        x, 1e-6, 1e-5);
  }
}

TEST_CASE("conv2d rejects invalid kernels") {
  const Tensor x = Tensor::Full(4, 4, 1.0);
  CHECK_THROWS_AS(Conv2D(x, Tensor::Full(2, 3, 1.0), Padding::kReflect),
                  std::invalid_argument);
  CHECK_THROWS_AS(Conv2D(x, Tensor::Full(3, 4, 1.0), Padding::kZero),
                  std::invalid_argument);
  // 9x9 reflect padding needs at least 5 rows/cols.
  CHECK_THROWS_AS(Conv2D(x, Tensor::Full(9, 9, 1.0 / 81), Padding::kReflect),
                  std::invalid_argument);
  CHECK_NOTHROW(Conv2D(x, Tensor::Full(9, 9, 1.0 / 81), Padding::kZero));
}

TEST_CASE("zero and reflect padding differ only near the border") {
  std::mt19937_64 rng(4);
  const Tensor x = RandomTensor(8, 8, rng, 1.0, 2.0);
  const Tensor k = GaussianKernel2D(3, 0.8);
  const Tensor a = Conv2D(x, k, Padding::kReflect);
  const Tensor b = Conv2D(x, k, Padding::kZero);
  CHECK(a.At(4, 4) == doctest::Approx(b.At(4, 4)).epsilon(1e-15));
  CHECK(std::fabs(a.At(0, 0) - b.At(0, 0)) > 1e-3);
}

TEST_CASE("downsample2x mean semantics") {
  const Tensor c = Tensor::Full(4, 4, 3.25);
  const Tensor d = Downsample2x(c);
  CHECK(d.rows() == 2);
  CHECK(d.cols() == 2);
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(d.ValueAt(i) == 3.25);

  const Tensor q = Tensor::FromVector(2, 2, {1.0, 2.0, 3.0, 4.0});
  CHECK(Downsample2x(q).ScalarValue() == doctest::Approx(2.5));

  Tape tape;
  const Tensor p = tape.Parameter(q);
  tape.Backward(ReduceSum(Downsample2x(p)));
  const Tensor g = tape.Grad(p);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(g.ValueAt(i) == 0.25);

  CHECK_THROWS_AS(Downsample2x(Tensor::Full(1, 4, 1.0)), std::invalid_argument);
}

TEST_CASE("downsample2x with blur kernel routes gradients through both stages") {
  std::mt19937_64 rng(5);
  const Tensor x = RandomTensor(8, 8, rng, 0.0, 1.0);
  const Tensor taps = GaussianKernel2D(3, 0.9);
  CheckGradient(
      [&](Tape&, const Tensor& p) {
        const Tensor y = Downsample2x(p, taps, Padding::kReflect);
        return ReduceSum(Mul(y, y));
      },
      x);
}

TEST_CASE("elementwise forward semantics") {
  const Tensor a = Tensor::FromVector(1, 4, {1.0, -2.0, 0.0, 3.0});
  const Tensor b = Tensor::FromVector(1, 4, {2.0, 1.0, 5.0, -1.0});
  CHECK(Add(a, b).ValueAt(1) == -1.0);
  CHECK(Sub(a, b).ValueAt(0) == -1.0);
  CHECK(Mul(a, b).ValueAt(3) == -3.0);
  CHECK(Div(a, b).ValueAt(0) == 0.5);
  CHECK(Relu(a).ValueAt(1) == 0.0);
  CHECK(Abs(a).ValueAt(1) == 2.0);
  CHECK(Cube(a).ValueAt(3) == 27.0);
  CHECK(Cbrt(Tensor::Scalar(8.0)).ScalarValue() == doctest::Approx(2.0));
  CHECK(Min(a, b).ValueAt(0) == 1.0);
  CHECK(Max(a, b).ValueAt(0) == 2.0);
  CHECK(Clip(a, 0.0, 1.0).ValueAt(3) == 1.0);
  CHECK_THROWS_AS(Add(a, Tensor::Full(2, 2, 1.0)), std::invalid_argument);
}

TEST_CASE("division by exact zero without stabilization raises") {
  const Tensor a = Tensor::Scalar(1.0);
  const Tensor z = Tensor::Scalar(0.0);
  CHECK_THROWS_AS(Div(a, z), NumericError);
  // Stabilized division is defined and finite.
  CHECK(Div(a, z, 1e-10).ScalarValue() == doctest::Approx(1e10));
  // Sign preservation.
  CHECK(Div(a, Tensor::Scalar(-1.0), 0.5).ScalarValue() == doctest::Approx(-1.0 / 1.5));
}

TEST_CASE("elementwise gradients match finite differences away from kinks") {
  std::mt19937_64 rng(6);
  const Tensor x = RandomTensor(4, 5, rng, 0.4, 2.0);
  const Tensor y = RandomTensor(4, 5, rng, 0.4, 2.0);

  CheckGradient([&](Tape&, const Tensor& p) { return ReduceSum(Mul(Add(p, y), p)); }, x);
  CheckGradient([&](Tape&, const Tensor& p) { return ReduceSum(Mul(Sub(p, y), p)); }, x);
  CheckGradient([&](Tape&, const Tensor& p) { return ReduceSum(Div(p, y)); }, x);
  CheckGradient([&](Tape&, const Tensor& p) { return ReduceSum(Div(y, p, 1e-12)); }, x);
  CheckGradient([&](Tape&, const Tensor& p) { return ReduceSum(Log2OnePlusRatio(p, y)); },
                x);
  CheckGradient(
      [&](Tape&, const Tensor& p) { return ReduceSum(Log2OnePlusRatio(y, p)); }, x);
  CheckGradient([&](Tape&, const Tensor& p) { return ReduceSum(Log2OnePlusRatio(p, 2.0)); },
                x);
  CheckGradient([&](Tape&, const Tensor& p) { return ReduceSum(Relu(AddScalar(p, -1.0))); },
                x);
  CheckGradient([&](Tape&, const Tensor& p) { return ReduceSum(Abs(AddScalar(p, -1.0))); },
                x);
  CheckGradient([&](Tape&, const Tensor& p) { return ReduceSum(Cube(p)); }, x);
  CheckGradient([&](Tape&, const Tensor& p) { return ReduceSum(Cbrt(p)); }, x);
  CheckGradient([&](Tape&, const Tensor& p) { return ReduceSum(Min(p, y)); }, x);
  CheckGradient([&](Tape&, const Tensor& p) { return ReduceSum(Max(p, y)); }, x);
  CheckGradient([&](Tape&, const Tensor& p) { return ReduceSum(Min(p, 1.1)); }, x);
  CheckGradient([&](Tape&, const Tensor& p) { return ReduceSum(Max(p, 1.1)); }, x);
  CheckGradient([&](Tape&, const Tensor& p) { return ReduceSum(Clip(p, 0.6, 1.5)); }, x,
                1e-7, 1e-4);
  CheckGradient([&](Tape&, const Tensor& p) { return ReduceSum(MulScalar(p, -2.5)); }, x);
}

TEST_CASE("relu subgradient convention at and around zero") {
  auto grad_at = [](double v) {
    Tape tape;
    const Tensor p = tape.Parameter(Tensor::Scalar(v));
    tape.Backward(ReduceSum(Relu(p)));
    return tape.Grad(p).ScalarValue();
  };
  CHECK(grad_at(-1.0) == 0.0);
  CHECK(grad_at(1.0) == 1.0);
  CHECK(grad_at(0.0) == 0.0);
}

TEST_CASE("log2(1+x) derivative at x=0 is 1/ln 2") {
  Tape tape;
  const Tensor p = tape.Parameter(Tensor::Scalar(0.0));
  tape.Backward(Log2OnePlusRatio(p, 1.0));
  CHECK(tape.Grad(p).ScalarValue() == doctest::Approx(1.4426950408889634).epsilon(1e-12));
}

TEST_CASE("clip saturates with zero gradient outside the range") {
  Tape tape;
  const Tensor p = tape.Parameter(Tensor::Scalar(105.0));
  const Tensor c = Clip(p, 0.0, 100.0);
  CHECK(c.ScalarValue() == 100.0);
  tape.Backward(c);
  CHECK(tape.Grad(p).ScalarValue() == 0.0);

  // Boundary takes the interior one-sided value.
  Tape tape2;
  const Tensor q = tape2.Parameter(Tensor::Scalar(100.0));
  tape2.Backward(Clip(q, 0.0, 100.0));
  CHECK(tape2.Grad(q).ScalarValue() == 1.0);
}

TEST_CASE("min/max ties route the gradient to the first operand") {
  const Tensor v = Tensor::Scalar(2.0);
  {
    Tape tape;
    const Tensor p = tape.Parameter(v);
    tape.Backward(Min(p, Tensor::Scalar(2.0)));
    CHECK(tape.Grad(p).ScalarValue() == 1.0);
  }
  {
    Tape tape;
    const Tensor p = tape.Parameter(v);
    tape.Backward(Max(Tensor::Scalar(2.0), p));
    CHECK(tape.Grad(p).ScalarValue() == 0.0);
  }
}

TEST_CASE("reduce_sum over regions") {
  const Tensor ones = Tensor::Full(2, 2, 1.0);
  CHECK(ReduceSum(ones).ScalarValue() == 4.0);

  const Tensor big = Tensor::Full(4, 4, 1.0);
  const RectRegion central{1, 1, 2, 2};
  CHECK(ReduceSum(big, central).ScalarValue() == 4.0);

  Tape tape;
  const Tensor p = tape.Parameter(big);
  tape.Backward(ReduceSum(p, central));
  const Tensor g = tape.Grad(p);
  int zeros = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const bool inside = i >= 1 && i <= 2 && j >= 1 && j <= 2;
      CHECK(g.At(i, j) == (inside ? 1.0 : 0.0));
      if (g.At(i, j) == 0.0) ++zeros;
    }
  }
  CHECK(zeros == 12);

  CHECK_THROWS_AS(ReduceSum(big, RectRegion{3, 3, 4, 4}), std::invalid_argument);
  CHECK_THROWS_AS(ReduceSum(big, RectRegion{0, 0, 0, 2}), std::invalid_argument);
}

TEST_CASE("reduce_sum equals a naive loop on random data") {
  std::mt19937_64 rng(8);
  const Tensor x = RandomTensor(9, 13, rng, -5.0, 5.0);
  double expect = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) expect += x.ValueAt(i);
  CHECK(ReduceSum(x).ScalarValue() == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("where routes values and gradients by mask") {
  const Tensor mask = Tensor::FromVector(1, 3, {1.0, 0.0, 1.0});
  const Tensor a = Tensor::FromVector(1, 3, {10.0, 20.0, 30.0});
  const Tensor b = Tensor::FromVector(1, 3, {-1.0, -2.0, -3.0});
  const Tensor w = Where(mask, a, b);
  CHECK(w.ValueAt(0) == 10.0);
  CHECK(w.ValueAt(1) == -2.0);
  CHECK(w.ValueAt(2) == 30.0);

  Tape tape;
  const Tensor pa = tape.Parameter(a);
  const Tensor pb = tape.Parameter(b);
  tape.Backward(ReduceSum(Where(mask, pa, pb)));
  const Tensor ga = tape.Grad(pa);
  const Tensor gb = tape.Grad(pb);
  CHECK(ga.ValueAt(0) == 1.0);
  CHECK(ga.ValueAt(1) == 0.0);
  CHECK(gb.ValueAt(1) == 1.0);
  CHECK(gb.ValueAt(2) == 0.0);
}

TEST_CASE("decimate2 picks even indices") {
  const Tensor x = Tensor::FromVector(3, 3, {0, 1, 2, 3, 4, 5, 6, 7, 8});
  const Tensor d = Decimate2(x);
  CHECK(d.rows() == 1);
  CHECK(d.cols() == 1);
  CHECK(d.ScalarValue() == 0.0);
}

TEST_CASE("round-clamp emulation reports clamped pixels") {
  const Tensor x = Tensor::FromVector(1, 4, {-2.4, 0.5, 254.6, 300.0});
  int clamped = 0;
  const Tensor y = RoundClamp(x, 0.0, 255.0, &clamped);
  CHECK(y.ValueAt(0) == 0.0);
  CHECK(y.ValueAt(1) == 0.0);  // ties-to-even
  CHECK(y.ValueAt(2) == 255.0);
  CHECK(y.ValueAt(3) == 255.0);
  CHECK(clamped == 2);
  CHECK_FALSE(y.on_tape());
}

TEST_CASE("gaussian taps are normalized and symmetric") {
  for (int size : {3, 5, 9, 17}) {
    const Tensor taps = GaussianTaps1D(size, size / 5.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < taps.size(); ++i) sum += taps.ValueAt(i);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    for (int i = 0; i < size / 2; ++i) {
      CHECK(taps.ValueAt(i) == taps.ValueAt(size - 1 - i));
    }
  }
  const Tensor k = GaussianKernel2D(5, 1.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i) sum += k.ValueAt(i);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("separable blur equals full-kernel convolution") {
  std::mt19937_64 rng(9);
  const Tensor x = RandomTensor(12, 10, rng, 0.0, 255.0);
  const Tensor taps = GaussianTaps1D(5, 1.0);
  const Tensor full = GaussianKernel2D(5, 1.0);
  const Tensor a = SeparableBlur(x, taps, Padding::kReflect);
  const Tensor b = Conv2D(x, full, Padding::kReflect);
  CHECK(MaxRelDiff(a, b) < 1e-12);
}
