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

#include "dvmaf/ops.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <utility>

namespace dvmaf {
namespace {

constexpr double kInvLn2 = 1.4426950408889634;  // 1/ln(2)

Tape* JoinTapes(const Tensor& a, const Tensor& b, const char* op) {
  Tape* t = a.on_tape() ? a.tape() : nullptr;
  if (b.on_tape()) {
    if (t != nullptr && t != b.tape()) {
      throw std::invalid_argument(std::string(op) + ": operands live on different tapes");
    }
    t = b.tape();
  }
  return t;
}

void CheckSameShape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.SameShape(b)) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.ShapeString() +
                                " vs " + b.ShapeString());
  }
}

// out_i = fwd(a_i); backward ga_i += mult(a_i) * g_i.
template <class F, class M>
Tensor PointwiseUnary(const Tensor& a, F fwd, M mult) {
  const auto& av = a.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = fwd(av[i]);
  if (!a.on_tape()) return Tensor::FromVector(a.rows(), a.cols(), std::move(out));
  Tape* tape = a.tape();
  const int pa = a.node();
  Tensor a_cap = a;
  return tape->Emit(a.rows(), a.cols(), std::move(out),
                    [a_cap, pa, mult](const std::vector<double>& g, Tape& t) {
                      auto& ga = t.GradBuffer(pa);
                      const auto& av = a_cap.data();
                      for (std::size_t i = 0; i < g.size(); ++i) {
                        ga[i] += mult(av[i]) * g[i];
                      }
                    });
}

// out_i = fwd(a_i, b_i); backward uses multiplier pair (da, db).
template <class F, class M>
Tensor PointwiseBinary(const Tensor& a, const Tensor& b, const char* op, F fwd, M mult) {
  CheckSameShape(a, b, op);
  Tape* tape = JoinTapes(a, b, op);
  const auto& av = a.data();
  const auto& bv = b.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = fwd(av[i], bv[i]);
  if (!tape) return Tensor::FromVector(a.rows(), a.cols(), std::move(out));
  const int pa = a.on_tape() ? a.node() : -1;
  const int pb = b.on_tape() ? b.node() : -1;
  Tensor a_cap = a;
  Tensor b_cap = b;
  return tape->Emit(a.rows(), a.cols(), std::move(out),
                    [a_cap, b_cap, pa, pb, mult](const std::vector<double>& g, Tape& t) {
                      const auto& av = a_cap.data();
                      const auto& bv = b_cap.data();
                      if (pa >= 0) {
                        auto& ga = t.GradBuffer(pa);
                        for (std::size_t i = 0; i < g.size(); ++i) {
                          ga[i] += mult(av[i], bv[i]).first * g[i];
                        }
                      }
                      if (pb >= 0) {
                        auto& gb = t.GradBuffer(pb);
                        for (std::size_t i = 0; i < g.size(); ++i) {
                          gb[i] += mult(av[i], bv[i]).second * g[i];
                        }
                      }
                    });
}

double StabilizedDenom(double b, double eps) {
  return b + (b < 0.0 ? -eps : eps);
}

}  // namespace

int ReflectIndex(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
  }
  return i;
}

Tensor Conv2D(const Tensor& input, const Tensor& kernel, Padding padding) {
  const int rows = input.rows(), cols = input.cols();
  const int kh = kernel.rows(), kw = kernel.cols();
  if (kh % 2 == 0 || kw % 2 == 0) {
    throw std::invalid_argument("conv2d: kernel dimensions must be odd, got " +
                                kernel.ShapeString());
  }
  const int ch = kh / 2, cw = kw / 2;
  if (padding == Padding::kReflect && (rows < ch + 1 || cols < cw + 1)) {
    throw std::invalid_argument("conv2d: kernel " + kernel.ShapeString() +
                                " larger than reflect-padded input " + input.ShapeString());
  }

  // Index maps over the padded range [-ch, rows+ch); -1 marks zero padding.
  std::vector<int> rmap(rows + kh - 1), cmap(cols + kw - 1);
  for (int p = -ch; p < rows + ch; ++p) {
    rmap[p + ch] = (padding == Padding::kReflect) ? ReflectIndex(p, rows)
                                                  : (p >= 0 && p < rows ? p : -1);
  }
  for (int p = -cw; p < cols + cw; ++p) {
    cmap[p + cw] = (padding == Padding::kReflect) ? ReflectIndex(p, cols)
                                                  : (p >= 0 && p < cols ? p : -1);
  }

  const auto& x = input.data();
  const auto& k = kernel.data();
  std::vector<double> out(x.size(), 0.0);
  for (int i = 0; i < rows; ++i) {
    for (int u = 0; u < kh; ++u) {
      const int sr = rmap[i + u];
      if (sr < 0) continue;
      const double* xrow = x.data() + static_cast<std::size_t>(sr) * cols;
      const double* krow = k.data() + static_cast<std::size_t>(u) * kw;
      double* orow = out.data() + static_cast<std::size_t>(i) * cols;
      for (int j = 0; j < cols; ++j) {
        double acc = 0.0;
        for (int v = 0; v < kw; ++v) {
          const int sc = cmap[j + v];
          if (sc < 0) continue;
          acc += krow[v] * xrow[sc];
        }
        orow[j] += acc;
      }
    }
  }

  Tape* tape = JoinTapes(input, kernel, "conv2d");
  if (!tape) return Tensor::FromVector(rows, cols, std::move(out));
  const int px = input.on_tape() ? input.node() : -1;
  const int pk = kernel.on_tape() ? kernel.node() : -1;
  Tensor x_cap = input;
  Tensor k_cap = kernel;
  auto backward = [x_cap, k_cap, px, pk, rmap, cmap, rows, cols, kh, kw](
                      const std::vector<double>& g, Tape& t) {
    const auto& x = x_cap.data();
    const auto& k = k_cap.data();
    if (px >= 0) {
      auto& gx = t.GradBuffer(px);
      for (int i = 0; i < rows; ++i) {
        const double* grow = g.data() + static_cast<std::size_t>(i) * cols;
        for (int u = 0; u < kh; ++u) {
          const int sr = rmap[i + u];
          if (sr < 0) continue;
          double* gxrow = gx.data() + static_cast<std::size_t>(sr) * cols;
          const double* krow = k.data() + static_cast<std::size_t>(u) * kw;
          for (int j = 0; j < cols; ++j) {
            const double gij = grow[j];
            for (int v = 0; v < kw; ++v) {
              const int sc = cmap[j + v];
              if (sc < 0) continue;
              gxrow[sc] += krow[v] * gij;
            }
          }
        }
      }
    }
    if (pk >= 0) {
      auto& gk = t.GradBuffer(pk);
      for (int u = 0; u < kh; ++u) {
        for (int v = 0; v < kw; ++v) {
          double acc = 0.0;
          for (int i = 0; i < rows; ++i) {
            const int sr = rmap[i + u];
            if (sr < 0) continue;
            const double* xrow = x.data() + static_cast<std::size_t>(sr) * cols;
            const double* grow = g.data() + static_cast<std::size_t>(i) * cols;
            for (int j = 0; j < cols; ++j) {
              const int sc = cmap[j + v];
              if (sc < 0) continue;
              acc += xrow[sc] * grow[j];
            }
          }
          gk[static_cast<std::size_t>(u) * kw + v] += acc;
        }
      }
    }
  };
  return tape->Emit(rows, cols, std::move(out), std::move(backward));
}

Tensor Downsample2x(const Tensor& input) {
  const int rows = input.rows(), cols = input.cols();
  if (rows < 2 || cols < 2) {
    throw std::invalid_argument("downsample2x: input must be at least 2x2, got " +
                                input.ShapeString());
  }
  const int r2 = rows / 2, c2 = cols / 2;
  const auto& x = input.data();
  std::vector<double> out(static_cast<std::size_t>(r2) * c2);
  for (int i = 0; i < r2; ++i) {
    for (int j = 0; j < c2; ++j) {
      const std::size_t p = static_cast<std::size_t>(2 * i) * cols + 2 * j;
      out[static_cast<std::size_t>(i) * c2 + j] =
          0.25 * (x[p] + x[p + 1] + x[p + cols] + x[p + cols + 1]);
    }
  }
  if (!input.on_tape()) return Tensor::FromVector(r2, c2, std::move(out));
  Tape* tape = input.tape();
  const int px = input.node();
  return tape->Emit(r2, c2, std::move(out),
                    [px, r2, c2, cols](const std::vector<double>& g, Tape& t) {
                      auto& gx = t.GradBuffer(px);
                      for (int i = 0; i < r2; ++i) {
                        for (int j = 0; j < c2; ++j) {
                          const double gv = 0.25 * g[static_cast<std::size_t>(i) * c2 + j];
                          const std::size_t p = static_cast<std::size_t>(2 * i) * cols + 2 * j;
                          gx[p] += gv;
                          gx[p + 1] += gv;
                          gx[p + cols] += gv;
                          gx[p + cols + 1] += gv;
                        }
                      }
                    });
}

Tensor Downsample2x(const Tensor& input, const Tensor& blur_kernel, Padding padding) {
  if (input.rows() < 2 || input.cols() < 2) {
    throw std::invalid_argument("downsample2x: input must be at least 2x2, got " +
                                input.ShapeString());
  }
  return Decimate2(Conv2D(input, blur_kernel, padding));
}

Tensor Decimate2(const Tensor& input) {
  const int rows = input.rows(), cols = input.cols();
  if (rows < 2 || cols < 2) {
    throw std::invalid_argument("decimate2: input must be at least 2x2, got " +
                                input.ShapeString());
  }
  const int r2 = rows / 2, c2 = cols / 2;
  const auto& x = input.data();
  std::vector<double> out(static_cast<std::size_t>(r2) * c2);
  for (int i = 0; i < r2; ++i) {
    for (int j = 0; j < c2; ++j) {
      out[static_cast<std::size_t>(i) * c2 + j] = x[static_cast<std::size_t>(2 * i) * cols + 2 * j];
    }
  }
  if (!input.on_tape()) return Tensor::FromVector(r2, c2, std::move(out));
  Tape* tape = input.tape();
  const int px = input.node();
  return tape->Emit(r2, c2, std::move(out),
                    [px, r2, c2, cols](const std::vector<double>& g, Tape& t) {
                      auto& gx = t.GradBuffer(px);
                      for (int i = 0; i < r2; ++i) {
                        for (int j = 0; j < c2; ++j) {
                          gx[static_cast<std::size_t>(2 * i) * cols + 2 * j] +=
                              g[static_cast<std::size_t>(i) * c2 + j];
                        }
                      }
                    });
}

Tensor Add(const Tensor& a, const Tensor& b) {
  return PointwiseBinary(
      a, b, "add", [](double x, double y) { return x + y; },
      [](double, double) { return std::pair<double, double>(1.0, 1.0); });
}

Tensor Sub(const Tensor& a, const Tensor& b) {
  return PointwiseBinary(
      a, b, "sub", [](double x, double y) { return x - y; },
      [](double, double) { return std::pair<double, double>(1.0, -1.0); });
}

Tensor Mul(const Tensor& a, const Tensor& b) {
  return PointwiseBinary(
      a, b, "mul", [](double x, double y) { return x * y; },
      [](double x, double y) { return std::pair<double, double>(y, x); });
}

Tensor Div(const Tensor& a, const Tensor& b, double denom_eps) {
  if (denom_eps == 0.0) {
    for (double v : b.data()) {
      if (v == 0.0) {
        throw NumericError("div: exact zero denominator without stabilization");
      }
    }
  }
  return PointwiseBinary(
      a, b, "div",
      [denom_eps](double x, double y) { return x / StabilizedDenom(y, denom_eps); },
      [denom_eps](double x, double y) {
        const double d = StabilizedDenom(y, denom_eps);
        return std::pair<double, double>(1.0 / d, -x / (d * d));
      });
}

Tensor AddScalar(const Tensor& a, double s) {
  return PointwiseUnary(a, [s](double v) { return v + s; }, [](double) { return 1.0; });
}

Tensor MulScalar(const Tensor& a, double s) {
  return PointwiseUnary(a, [s](double v) { return v * s; }, [s](double) { return s; });
}

Tensor Log2OnePlusRatio(const Tensor& num, const Tensor& den) {
  const auto& dv = den.data();
  const auto& nv = num.data();
  for (std::size_t i = 0; i < dv.size() && i < nv.size(); ++i) {
    if (!(dv[i] > 0.0) || !(dv[i] + nv[i] > 0.0)) {
      throw NumericError("log2_1p_ratio: requires den > 0 and den + num > 0");
    }
  }
  return PointwiseBinary(
      num, den, "log2_1p_ratio",
      [](double n, double d) { return std::log2(1.0 + n / d); },
      [](double n, double d) {
        const double s = d + n;
        return std::pair<double, double>(kInvLn2 / s, -n * kInvLn2 / (d * s));
      });
}

Tensor Log2OnePlusRatio(const Tensor& num, double den) {
  if (!(den > 0.0)) {
    throw NumericError("log2_1p_ratio: requires den > 0");
  }
  for (double n : num.data()) {
    if (!(den + n > 0.0)) {
      throw NumericError("log2_1p_ratio: requires den + num > 0");
    }
  }
  return PointwiseUnary(
      num, [den](double n) { return std::log2(1.0 + n / den); },
      [den](double n) { return kInvLn2 / (den + n); });
}

Tensor Relu(const Tensor& a) {
  return PointwiseUnary(
      a, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double v) { return v > 0.0 ? 1.0 : 0.0; });
}

Tensor Clip(const Tensor& a, double lo, double hi) {
  if (!(lo <= hi)) {
    throw std::invalid_argument("clip: lo must be <= hi");
  }
  return PointwiseUnary(
      a, [lo, hi](double v) { return std::clamp(v, lo, hi); },
      [lo, hi](double v) { return (v >= lo && v <= hi) ? 1.0 : 0.0; });
}

Tensor Min(const Tensor& a, const Tensor& b) {
  return PointwiseBinary(
      a, b, "min", [](double x, double y) { return x <= y ? x : y; },
      [](double x, double y) {
        return x <= y ? std::pair<double, double>(1.0, 0.0)
                      : std::pair<double, double>(0.0, 1.0);
      });
}

Tensor Max(const Tensor& a, const Tensor& b) {
  return PointwiseBinary(
      a, b, "max", [](double x, double y) { return x >= y ? x : y; },
      [](double x, double y) {
        return x >= y ? std::pair<double, double>(1.0, 0.0)
                      : std::pair<double, double>(0.0, 1.0);
      });
}

Tensor Min(const Tensor& a, double s) {
  return PointwiseUnary(
      a, [s](double v) { return v <= s ? v : s; },
      [s](double v) { return v <= s ? 1.0 : 0.0; });
}

Tensor Max(const Tensor& a, double s) {
  return PointwiseUnary(
      a, [s](double v) { return v >= s ? v : s; },
      [s](double v) { return v >= s ? 1.0 : 0.0; });
}

Tensor Abs(const Tensor& a) {
  return PointwiseUnary(
      a, [](double v) { return std::fabs(v); },
      [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
}

Tensor Cube(const Tensor& a) {
  return PointwiseUnary(
      a, [](double v) { return v * v * v; },
      [](double v) { return 3.0 * v * v; });
}

Tensor Cbrt(const Tensor& a) {
  for (double v : a.data()) {
    if (v < 0.0) {
      throw NumericError("cbrt: negative operand outside the supported domain");
    }
  }
  return PointwiseUnary(
      a, [](double v) { return std::cbrt(v); },
      [](double v) {
        if (v <= 0.0) return 0.0;
        const double c = std::cbrt(v);
        return 1.0 / (3.0 * c * c);
      });
}

Tensor ReduceSum(const Tensor& a, RectRegion region) {
  const int rows = a.rows(), cols = a.cols();
  const int r0 = region.row0, c0 = region.col0;
  const int nr = region.rows < 0 ? rows - r0 : region.rows;
  const int nc = region.cols < 0 ? cols - c0 : region.cols;
  if (r0 < 0 || c0 < 0 || nr <= 0 || nc <= 0 || r0 + nr > rows || c0 + nc > cols) {
    throw std::invalid_argument("reduce_sum: region out of bounds or empty");
  }
  const auto& x = a.data();
  double acc = 0.0;
  for (int i = r0; i < r0 + nr; ++i) {
    const double* row = x.data() + static_cast<std::size_t>(i) * cols;
    for (int j = c0; j < c0 + nc; ++j) acc += row[j];
  }
  if (!a.on_tape()) return Tensor::Scalar(acc);
  Tape* tape = a.tape();
  const int pa = a.node();
  return tape->Emit(1, 1, {acc},
                    [pa, r0, c0, nr, nc, cols](const std::vector<double>& g, Tape& t) {
                      auto& ga = t.GradBuffer(pa);
                      const double gv = g[0];
                      for (int i = r0; i < r0 + nr; ++i) {
                        double* row = ga.data() + static_cast<std::size_t>(i) * cols;
                        for (int j = c0; j < c0 + nc; ++j) row[j] += gv;
                      }
                    });
}

Tensor Where(const Tensor& mask, const Tensor& a, const Tensor& b) {
  if (mask.on_tape()) {
    throw std::invalid_argument("where: mask must be a plain value plane, not on-tape");
  }
  CheckSameShape(mask, a, "where");
  CheckSameShape(a, b, "where");
  Tape* tape = JoinTapes(a, b, "where");
  const auto& mv = mask.data();
  const auto& av = a.data();
  const auto& bv = b.data();
  std::vector<double> out(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = mv[i] != 0.0 ? av[i] : bv[i];
  if (!tape) return Tensor::FromVector(a.rows(), a.cols(), std::move(out));
  const int pa = a.on_tape() ? a.node() : -1;
  const int pb = b.on_tape() ? b.node() : -1;
  Tensor m_cap = mask;
  return tape->Emit(a.rows(), a.cols(), std::move(out),
                    [m_cap, pa, pb](const std::vector<double>& g, Tape& t) {
                      const auto& mv = m_cap.data();
                      if (pa >= 0) {
                        auto& ga = t.GradBuffer(pa);
                        for (std::size_t i = 0; i < g.size(); ++i) {
                          if (mv[i] != 0.0) ga[i] += g[i];
                        }
                      }
                      if (pb >= 0) {
                        auto& gb = t.GradBuffer(pb);
                        for (std::size_t i = 0; i < g.size(); ++i) {
                          if (mv[i] == 0.0) gb[i] += g[i];
                        }
                      }
                    });
}

Tensor RoundClamp(const Tensor& a, double lo, double hi, int* clamped_count) {
  const auto& av = a.data();
  std::vector<double> out(av.size());
  int clamped = 0;
  for (std::size_t i = 0; i < av.size(); ++i) {
    double v = std::nearbyint(av[i]);
    if (v < lo || v > hi) {
      ++clamped;
      v = std::clamp(v, lo, hi);
    }
    out[i] = v;
  }
  if (clamped_count) *clamped_count = clamped;
  return Tensor::FromVector(a.rows(), a.cols(), std::move(out));
}

Tensor GaussianTaps1D(int size, double sigma) {
  if (size < 1 || size % 2 == 0) {
    throw std::invalid_argument("gaussian taps: size must be odd and positive");
  }
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("gaussian taps: sigma must be positive");
  }
  const int c = size / 2;
  std::vector<double> w(size);
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    const double d = i - c;
    w[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return Tensor::FromVector(1, size, std::move(w));
}

Tensor GaussianKernel2D(int size, double sigma) {
  const Tensor taps = GaussianTaps1D(size, sigma);
  std::vector<double> k(static_cast<std::size_t>(size) * size);
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      k[static_cast<std::size_t>(i) * size + j] = taps.ValueAt(i) * taps.ValueAt(j);
    }
  }
  return Tensor::FromVector(size, size, std::move(k));
}

Tensor SeparableBlur(const Tensor& input, const Tensor& taps, Padding padding) {
  if (taps.rows() != 1) {
    throw std::invalid_argument("separable blur: taps must be a 1 x k row");
  }
  const Tensor col_taps = Tensor::FromVector(taps.cols(), 1, taps.data());
  return Conv2D(Conv2D(input, taps, padding), col_taps, padding);
}

}  // namespace dvmaf
