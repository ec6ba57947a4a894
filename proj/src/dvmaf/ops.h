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

#ifndef DVMAF_OPS_H_
#define DVMAF_OPS_H_

#include <array>

#include "dvmaf/tensor.h"

namespace dvmaf {

// Border handling for convolution and the wavelet transform. Reflect
// mirrors edge-adjacent samples without repeating the border sample
// (index -1 maps to 1).
enum class Padding { kReflect, kZero };

struct RectRegion {
  int row0 = 0;
  int col0 = 0;
  int rows = -1;  // -1: to the end
  int cols = -1;
};

// Reflect-without-border-repeat index mapping into [0, n).
int ReflectIndex(int i, int n);

// Cross-correlation of `input` with `kernel`, same spatial size as the
// input. Kernel sides must be odd; reflect padding additionally requires
// input dims >= (kernel+1)/2. Gradients flow to both input and kernel.
Tensor Conv2D(const Tensor& input, const Tensor& kernel, Padding padding);

// 2x2 mean then decimate-by-2 (floor sizes). Equivalent to average
// pooling with non-overlapping windows anchored at even indices.
Tensor Downsample2x(const Tensor& input);
// Blur with an odd kernel, then decimate-by-2.
Tensor Downsample2x(const Tensor& input, const Tensor& blur_kernel, Padding padding);
// Keep even-index rows/cols; output sizes are floor(n/2).
Tensor Decimate2(const Tensor& input);

// Pointwise arithmetic. Tensor-tensor forms require equal shapes.
Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);
// a / (b + eps*sign(b)), with sign(0) treated as +1. eps = 0 means no
// stabilization and raises NumericError on an exact zero denominator.
Tensor Div(const Tensor& a, const Tensor& b, double denom_eps = 0.0);

Tensor AddScalar(const Tensor& a, double s);
Tensor MulScalar(const Tensor& a, double s);

// log2(1 + num/den) computed as log2((den+num)/den). Requires den > 0
// and den+num > 0.
Tensor Log2OnePlusRatio(const Tensor& num, const Tensor& den);
Tensor Log2OnePlusRatio(const Tensor& num, double den);

// Subgradient conventions: relu'(0) = 0; clip' is 1 on [lo, hi]
// (boundaries take the interior one-sided value) and 0 outside; min/max
// route the gradient to the selected operand, ties to the first; |x|'
// at 0 is 0; cbrt'(0) is 0 (nonnegative domain).
Tensor Relu(const Tensor& a);
Tensor Clip(const Tensor& a, double lo, double hi);
Tensor Min(const Tensor& a, const Tensor& b);
Tensor Max(const Tensor& a, const Tensor& b);
Tensor Min(const Tensor& a, double s);
Tensor Max(const Tensor& a, double s);
Tensor Abs(const Tensor& a);
Tensor Cube(const Tensor& a);
Tensor Cbrt(const Tensor& a);

// Sum over a rectangular region (defaults to the full plane) into a 1x1
// tensor. Backward writes 1 into covered cells, 0 elsewhere.
Tensor ReduceSum(const Tensor& a, RectRegion region = RectRegion{});

// Per-element branch select: mask != 0 picks `a`, else `b`. The mask is
// a plain value plane (selector); gradients flow only through the
// selected operand.
Tensor Where(const Tensor& mask, const Tensor& a, const Tensor& b);

// Forward-only quantization utility: round to nearest integer and clamp
// to [lo, hi]. Returns a detached constant; used to emulate the integer
// pipeline. `clamped_count`, when given, receives the number of entries
// that hit the clamp.
Tensor RoundClamp(const Tensor& a, double lo, double hi, int* clamped_count = nullptr);

// Normalized Gaussian taps (sum to one). `Taps1D` is a 1 x size row.
Tensor GaussianTaps1D(int size, double sigma);
Tensor GaussianKernel2D(int size, double sigma);

// Separable blur: row taps (1 x k) applied along both axes.
Tensor SeparableBlur(const Tensor& input, const Tensor& taps, Padding padding);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return Add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return Sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return Mul(a, b); }
inline Tensor operator+(const Tensor& a, double s) { return AddScalar(a, s); }
inline Tensor operator-(const Tensor& a, double s) { return AddScalar(a, -s); }
inline Tensor operator*(const Tensor& a, double s) { return MulScalar(a, s); }
inline Tensor operator*(double s, const Tensor& a) { return MulScalar(a, s); }

}  // namespace dvmaf

#endif  // DVMAF_OPS_H_
