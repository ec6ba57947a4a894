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

#include "dvmaf/tensor.h"

#include <vector>

#include "doctest.h"
#include "dvmaf/ops.h"
#include "testutil.h"

using namespace dvmaf;

TEST_CASE("tensor construction and invariants") {
  const Tensor t = Tensor::FromVector(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK(t.size() == 6);
  CHECK(t.At(1, 2) == 6.0);
  CHECK_THROWS_AS(Tensor::FromVector(2, 2, {1, 2, 3}), std::invalid_argument);
  CHECK_THROWS_AS(Tensor::Full(0, 3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(t.ScalarValue(), std::invalid_argument);
  CHECK(Tensor::Scalar(4.5).ScalarValue() == 4.5);
}

TEST_CASE("mutable data detaches shared storage") {
  Tensor a = Tensor::Full(2, 2, 1.0);
  Tensor b = a;
  a.MutableData()[0] = 9.0;
  CHECK(a.At(0, 0) == 9.0);
  CHECK(b.At(0, 0) == 1.0);
}

TEST_CASE("gradient of a parameter w.r.t. itself is one") {
  Tape tape;
  const Tensor p = tape.Parameter(Tensor::Scalar(3.0));
  tape.Backward(p);
  CHECK(tape.Grad(p).ScalarValue() == 1.0);
}

TEST_CASE("unreachable parameter keeps zero gradient") {
  Tape tape;
  const Tensor a = tape.Parameter(Tensor::Scalar(2.0));
  const Tensor b = tape.Parameter(Tensor::Scalar(5.0));
  const Tensor root = MulScalar(a, 3.0);
  tape.Backward(root);
  CHECK(tape.Grad(a).ScalarValue() == 3.0);
  CHECK(tape.Grad(b).ScalarValue() == 0.0);
}

TEST_CASE("backward rejects bad roots") {
  Tape tape;
  const Tensor p = tape.Parameter(Tensor::Full(2, 2, 1.0));
  CHECK_THROWS_AS(tape.Backward(p), std::invalid_argument);  // non-scalar
  const Tensor off_tape = Tensor::Scalar(1.0);
  CHECK_THROWS_AS(tape.Backward(off_tape), std::logic_error);  // not on tape
  Tape other;
  const Tensor q = other.Parameter(Tensor::Scalar(1.0));
  CHECK_THROWS_AS(tape.Backward(q), std::logic_error);
  CHECK_THROWS_AS(Add(p, q), std::invalid_argument);  // mixed tapes
}

TEST_CASE("on-tape tensors cannot be mutated") {
  Tape tape;
  Tensor p = tape.Parameter(Tensor::Scalar(1.0));
  CHECK_THROWS_AS(p.MutableData(), std::logic_error);
}

TEST_CASE("backward linearity over scalar combinations") {
  std::mt19937_64 rng(7);
  const Tensor x = testutil::RandomTensor(4, 4, rng, 0.5, 2.0);
  const double ca = 2.25, cb = -0.75;

  auto grad_of = [&](auto builder) {
    return testutil::TapedGradient(builder, x);
  };
  const Tensor gf = grad_of([](Tape&, const Tensor& p) { return ReduceSum(Mul(p, p)); });
  const Tensor gg = grad_of([](Tape&, const Tensor& p) { return ReduceSum(Cube(p)); });
  const Tensor gfg = grad_of([&](Tape&, const Tensor& p) {
    return Add(MulScalar(ReduceSum(Mul(p, p)), ca), MulScalar(ReduceSum(Cube(p)), cb));
  });

  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(gfg.ValueAt(i) ==
          doctest::Approx(ca * gf.ValueAt(i) + cb * gg.ValueAt(i)).epsilon(1e-12));
  }
}

TEST_CASE("forward and backward are bit-identical across runs") {
  std::mt19937_64 rng(11);
  const Tensor x = testutil::RandomTensor(6, 6, rng, 0.0, 10.0);
  const Tensor k = testutil::RandomTensor(3, 3, rng, -0.2, 0.2);

  auto run = [&](std::vector<double>* grad_out) {
    Tape tape;
    const Tensor p = tape.Parameter(k);
    const Tensor y = Conv2D(x, p, Padding::kReflect);
    const Tensor root = ReduceSum(Mul(y, y));
    tape.Backward(root);
    *grad_out = tape.Grad(p).data();
    return root.ScalarValue();
  };

  std::vector<double> g1, g2;
  const double v1 = run(&g1);
  const double v2 = run(&g2);
  CHECK(v1 == v2);
  REQUIRE(g1.size() == g2.size());
  for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g1[i] == g2[i]);
}

TEST_CASE("grad query before backward returns zeros") {
  Tape tape;
  const Tensor p = tape.Parameter(Tensor::Full(2, 2, 3.0));
  const Tensor g = tape.Grad(p);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(g.ValueAt(i) == 0.0);
}
