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

#include "dvmaf/adm.h"

#include <cmath>
#include <string>

namespace dvmaf {
namespace {

constexpr double kPi = 3.14159265358979323846;

int WrapIndex(int i, int n) {
  i %= n;
  return i < 0 ? i + n : i;
}

double SignedGuard(double v, double eps) { return v + (v < 0.0 ? -eps : eps); }

// Angle (degrees) of the local (vert, horiz) coefficient pair, defined
// through the guarded ratio; range (-90, 90].
Tensor PsiDegrees(const Tensor& vert, const Tensor& horiz, double eps) {
  std::vector<double> out(vert.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::atan(vert.ValueAt(i) / SignedGuard(horiz.ValueAt(i), eps)) * 180.0 / kPi;
  }
  return Tensor::FromVector(vert.rows(), vert.cols(), std::move(out));
}

Tensor AngleCloseMask(const Tensor& psi_ref, const Tensor& psi_dist, double threshold_deg) {
  std::vector<double> m(psi_ref.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = std::fabs(psi_ref.ValueAt(i) - psi_dist.ValueAt(i)) <= threshold_deg ? 1.0 : 0.0;
  }
  return Tensor::FromVector(psi_ref.rows(), psi_ref.cols(), std::move(m));
}

// Restores one detail band. The angle mask is a constant selector:
// gradients flow through the selected branch only.
Tensor RestoreBand(const Tensor& o, const Tensor& t, const Tensor& close_mask,
                   const AdmConfig& cfg) {
  const Tensor ratio = Clip(Div(t, o, cfg.ratio_eps), 0.0, 1.0);
  const Tensor restored_far = Mul(ratio, o);
  if (!cfg.neg_mode) {
    return Where(close_mask, t, restored_far);
  }
  // NEG: inside the close-angle region the enhancement credit is capped
  // at EGL times the decoupled value instead of passing T through.
  const Tensor capped_pos = Min(MulScalar(restored_far, cfg.egl_dlm), t);
  const Tensor capped_neg = Max(MulScalar(restored_far, cfg.egl_dlm), t);
  const auto& rf = restored_far.data();
  const auto& cm = close_mask.data();
  std::vector<double> pos_mask(rf.size(), 0.0), neg_mask(rf.size(), 0.0),
      zero_mask(rf.size(), 0.0);
  for (std::size_t i = 0; i < rf.size(); ++i) {
    if (cm[i] == 0.0) continue;
    if (rf[i] > 0.0) {
      pos_mask[i] = 1.0;
    } else if (rf[i] < 0.0) {
      neg_mask[i] = 1.0;
    } else {
      zero_mask[i] = 1.0;  // degenerate decoupling; keep the base rule
    }
  }
  Tensor r = restored_far;
  r = Where(Tensor::FromVector(o.rows(), o.cols(), std::move(pos_mask)), capped_pos, r);
  r = Where(Tensor::FromVector(o.rows(), o.cols(), std::move(neg_mask)), capped_neg, r);
  r = Where(Tensor::FromVector(o.rows(), o.cols(), std::move(zero_mask)), t, r);
  return r;
}

}  // namespace

std::array<double, 4> Db2LowpassTaps() {
  const double s3 = std::sqrt(3.0);
  const double d = 4.0 * std::sqrt(2.0);
  return {(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d};
}

std::array<double, 4> Db2HighpassTaps() {
  const auto lo = Db2LowpassTaps();
  return {lo[3], -lo[2], lo[1], -lo[0]};
}

Tensor Dwt1D(const Tensor& x, DwtAxis axis, const std::array<double, 4>& taps,
             WaveletBoundary boundary) {
  const int rows = x.rows(), cols = x.cols();
  const int n = axis == DwtAxis::kVertical ? rows : cols;
  if (n < 2) {
    throw std::invalid_argument("dwt1d: filtered axis must have at least 2 samples");
  }
  if (boundary == WaveletBoundary::kPeriodic && n % 2 != 0) {
    throw std::invalid_argument("dwt1d: periodic extension requires an even length");
  }
  const int half = (n + 1) / 2;

  // Source index per (output position, tap): idx = 2n - 1 + k folded back
  // into range by the boundary rule.
  std::vector<int> src(static_cast<std::size_t>(half) * 4);
  for (int m = 0; m < half; ++m) {
    for (int k = 0; k < 4; ++k) {
      const int raw = 2 * m - 1 + k;
      src[static_cast<std::size_t>(m) * 4 + k] =
          boundary == WaveletBoundary::kPeriodic ? WrapIndex(raw, n) : ReflectIndex(raw, n);
    }
  }

  const auto& xv = x.data();
  const int out_rows = axis == DwtAxis::kVertical ? half : rows;
  const int out_cols = axis == DwtAxis::kVertical ? cols : half;
  std::vector<double> out(static_cast<std::size_t>(out_rows) * out_cols, 0.0);
  if (axis == DwtAxis::kVertical) {
    for (int m = 0; m < half; ++m) {
      for (int k = 0; k < 4; ++k) {
        const int sr = src[static_cast<std::size_t>(m) * 4 + k];
        const double w = taps[k];
        const double* xrow = xv.data() + static_cast<std::size_t>(sr) * cols;
        double* orow = out.data() + static_cast<std::size_t>(m) * cols;
        for (int j = 0; j < cols; ++j) orow[j] += w * xrow[j];
      }
    }
  } else {
    for (int i = 0; i < rows; ++i) {
      const double* xrow = xv.data() + static_cast<std::size_t>(i) * cols;
      double* orow = out.data() + static_cast<std::size_t>(i) * half;
      for (int m = 0; m < half; ++m) {
        double acc = 0.0;
        for (int k = 0; k < 4; ++k) {
          acc += taps[k] * xrow[src[static_cast<std::size_t>(m) * 4 + k]];
        }
        orow[m] = acc;
      }
    }
  }

  if (!x.on_tape()) return Tensor::FromVector(out_rows, out_cols, std::move(out));
  Tape* tape = x.tape();
  const int px = x.node();
  auto backward = [px, axis, taps, src, half, rows, cols](const std::vector<double>& g,
                                                          Tape& t) {
    auto& gx = t.GradBuffer(px);
    if (axis == DwtAxis::kVertical) {
      for (int m = 0; m < half; ++m) {
        const double* grow = g.data() + static_cast<std::size_t>(m) * cols;
        for (int k = 0; k < 4; ++k) {
          const int sr = src[static_cast<std::size_t>(m) * 4 + k];
          const double w = taps[k];
          double* gxrow = gx.data() + static_cast<std::size_t>(sr) * cols;
          for (int j = 0; j < cols; ++j) gxrow[j] += w * grow[j];
        }
      }
    } else {
      for (int i = 0; i < rows; ++i) {
        const double* grow = g.data() + static_cast<std::size_t>(i) * half;
        double* gxrow = gx.data() + static_cast<std::size_t>(i) * cols;
        for (int m = 0; m < half; ++m) {
          for (int k = 0; k < 4; ++k) {
            gxrow[src[static_cast<std::size_t>(m) * 4 + k]] += taps[k] * grow[m];
          }
        }
      }
    }
  };
  return tape->Emit(out_rows, out_cols, std::move(out), std::move(backward));
}

WaveletPyramid Dwt2D(const Tensor& image, int levels, WaveletBoundary boundary) {
  if (levels < 1) throw std::invalid_argument("dwt2d: levels must be >= 1");
  const int min_dim = 1 << levels;
  if (image.rows() < min_dim || image.cols() < min_dim) {
    throw std::invalid_argument("dwt2d: image " + image.ShapeString() +
                                " too small for " + std::to_string(levels) + " levels");
  }
  const auto lo = Db2LowpassTaps();
  const auto hi = Db2HighpassTaps();
  WaveletPyramid pyr;
  pyr.reserve(levels);
  Tensor cur = image;
  for (int l = 0; l < levels; ++l) {
    const Tensor lo_v = Dwt1D(cur, DwtAxis::kVertical, lo, boundary);
    const Tensor hi_v = Dwt1D(cur, DwtAxis::kVertical, hi, boundary);
    WaveletLevel level;
    level.approx = Dwt1D(lo_v, DwtAxis::kHorizontal, lo, boundary);
    level.horiz = Dwt1D(lo_v, DwtAxis::kHorizontal, hi, boundary);
    level.vert = Dwt1D(hi_v, DwtAxis::kHorizontal, lo, boundary);
    level.diag = Dwt1D(hi_v, DwtAxis::kHorizontal, hi, boundary);
    cur = level.approx;
    pyr.push_back(std::move(level));
  }
  return pyr;
}

std::array<CsfLevelWeights, 4> WatsonCsfWeights(double norm_view_dist,
                                                int ref_display_height) {
  // Visual resolution in pixels per degree, then the quantization step
  // of the model; the weight is its reciprocal. Orientation g-factors:
  // 1.0 for vert/horiz, 0.534 for diagonal.
  const double a = 0.495, k = 0.466, f0 = 0.401;
  const double r = norm_view_dist * ref_display_height * kPi / 180.0;
  auto quant_step = [&](int lambda, double g) {
    const double temp = std::log10(std::pow(2.0, lambda + 1) * f0 * g / r);
    return 2.0 * a * std::pow(10.0, k * temp * temp) / (f0 * g);
  };
  std::array<CsfLevelWeights, 4> w;
  for (int l = 0; l < 4; ++l) {
    const double hv = 1.0 / quant_step(l, 1.0);
    const double d = 1.0 / quant_step(l, 0.534);
    w[l] = CsfLevelWeights{hv, d, hv};
  }
  return w;
}

Tensor AdmConfig::EffectiveCmKernel() const {
  if (!cm_kernel.empty()) return cm_kernel;
  std::vector<double> k{1, 1, 1, 1, 2, 1, 1, 1, 1};
  for (double& v : k) v /= 30.0;
  return Tensor::FromVector(3, 3, std::move(k));
}

void AdmConfig::Validate() const {
  if (border_exclusion_fraction < 0.0 || border_exclusion_fraction >= 0.5) {
    throw std::invalid_argument("adm config: border_exclusion_fraction must be in [0, 0.5)");
  }
  if (neg_mode && egl_dlm < 1.0) {
    throw std::invalid_argument(
        "adm config: egl_dlm must be >= 1 in NEG mode (limits enhancement only)");
  }
  for (const auto& lw : csf_weights) {
    if (!(lw.vert > 0.0) || !(lw.diag > 0.0) || !(lw.horiz > 0.0)) {
      throw std::invalid_argument("adm config: csf weights must be positive");
    }
  }
  if (!(cm_threshold_factor >= 0.0)) {
    throw std::invalid_argument("adm config: cm_threshold_factor must be nonnegative");
  }
  if (levels < 1 || levels > 4) {
    throw std::invalid_argument("adm config: levels must be in [1, 4]");
  }
}

AdmDecomposition Decouple(const WaveletPyramid& ref_pyr, const WaveletPyramid& dist_pyr,
                          const AdmConfig& cfg) {
  cfg.Validate();
  if (ref_pyr.size() != dist_pyr.size()) {
    throw std::invalid_argument("decouple: pyramid depth mismatch");
  }
  AdmDecomposition dec;
  dec.restored.resize(ref_pyr.size());
  dec.additive.resize(ref_pyr.size());
  for (std::size_t l = 0; l < ref_pyr.size(); ++l) {
    const WaveletLevel& o = ref_pyr[l];
    const WaveletLevel& t = dist_pyr[l];
    if (!o.vert.SameShape(t.vert)) {
      throw std::invalid_argument("decouple: level shape mismatch");
    }
    const Tensor psi_o = PsiDegrees(o.vert, o.horiz, cfg.ratio_eps);
    const Tensor psi_t = PsiDegrees(t.vert, t.horiz, cfg.ratio_eps);
    const Tensor close = AngleCloseMask(psi_o, psi_t, cfg.angle_threshold_deg);

    WaveletLevel r;
    r.approx = t.approx;
    r.vert = RestoreBand(o.vert, t.vert, close, cfg);
    r.diag = RestoreBand(o.diag, t.diag, close, cfg);
    r.horiz = RestoreBand(o.horiz, t.horiz, close, cfg);

    WaveletLevel a;
    a.approx = Sub(t.approx, r.approx);
    a.vert = Sub(t.vert, r.vert);
    a.diag = Sub(t.diag, r.diag);
    a.horiz = Sub(t.horiz, r.horiz);

    dec.psi_ref.push_back(psi_o);
    dec.psi_dist.push_back(psi_t);
    dec.restored[l] = std::move(r);
    dec.additive[l] = std::move(a);
  }
  return dec;
}

RectRegion CentralRegion(int rows, int cols, double fraction) {
  auto border = [fraction](int n) {
    int b = static_cast<int>(std::floor(n * fraction - 0.5));
    if (b < 0) b = 0;
    if (n - 2 * b < 1) b = (n - 1) / 2;
    return b;
  };
  const int br = border(rows), bc = border(cols);
  return RectRegion{br, bc, rows - 2 * br, cols - 2 * bc};
}

Tensor AdmScore(const Tensor& ref, const Tensor& dist, const AdmConfig& cfg) {
  cfg.Validate();
  if (!ref.SameShape(dist)) {
    throw std::invalid_argument("adm: ref/dist shape mismatch " + ref.ShapeString() +
                                " vs " + dist.ShapeString());
  }
  const int min_dim = 1 << (cfg.levels + 1);  // deepest level must fit the CM kernel
  if (ref.rows() < min_dim || ref.cols() < min_dim) {
    throw std::invalid_argument("adm: image " + ref.ShapeString() + " smaller than " +
                                std::to_string(min_dim) + "x" + std::to_string(min_dim));
  }

  const WaveletPyramid pyr_o = Dwt2D(ref, cfg.levels, cfg.boundary);
  const WaveletPyramid pyr_t = Dwt2D(dist, cfg.levels, cfg.boundary);
  const AdmDecomposition dec = Decouple(pyr_o, pyr_t, cfg);
  const Tensor cm_kernel = cfg.EffectiveCmKernel();

  Tensor num, den;
  for (int l = 0; l < cfg.levels; ++l) {
    const CsfLevelWeights& w = cfg.csf_weights[l];
    const WaveletLevel& o = pyr_o[l];
    const WaveletLevel& r = dec.restored[l];
    const WaveletLevel& a = dec.additive[l];

    const Tensor csf_r[3] = {MulScalar(r.vert, w.vert), MulScalar(r.diag, w.diag),
                             MulScalar(r.horiz, w.horiz)};
    const Tensor csf_o[3] = {MulScalar(o.vert, w.vert), MulScalar(o.diag, w.diag),
                             MulScalar(o.horiz, w.horiz)};
    const Tensor csf_a_sum = Add(Add(Abs(MulScalar(a.vert, w.vert)),
                                     Abs(MulScalar(a.diag, w.diag))),
                                 Abs(MulScalar(a.horiz, w.horiz)));
    const Tensor thresh = MulScalar(Conv2D(csf_a_sum, cm_kernel, Padding::kReflect),
                                    cfg.cm_threshold_factor);

    const RectRegion region =
        CentralRegion(o.vert.rows(), o.vert.cols(), cfg.border_exclusion_fraction);
    for (int b = 0; b < 3; ++b) {
      const Tensor masked = Relu(Sub(Abs(csf_r[b]), thresh));
      const Tensor num_term = Cbrt(ReduceSum(Cube(masked), region));
      const Tensor den_term = Cbrt(ReduceSum(Cube(Abs(csf_o[b])), region));
      num = num.empty() ? num_term : Add(num, num_term);
      den = den.empty() ? den_term : Add(den, den_term);
    }
  }

  if (den.ScalarValue() < 1e-9) {
    throw NumericError(
        "adm: degenerate denominator (blank reference has no detail energy)");
  }
  return Div(num, den);
}

}  // namespace dvmaf
