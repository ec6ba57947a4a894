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

#include "dvmaf/vif.h"

#include <string>

namespace dvmaf {
namespace {

// K*X with a separable (1 x k) or full (k x k) window.
Tensor WindowFilter(const Tensor& x, const Tensor& kernel) {
  if (kernel.rows() == 1 && kernel.cols() > 1) {
    return SeparableBlur(x, kernel, Padding::kReflect);
  }
  return Conv2D(x, kernel, Padding::kReflect);
}

}  // namespace

void VifConfig::Validate() const {
  if (!(sigma_n_sq > 0.0)) {
    throw std::invalid_argument("vif config: sigma_n_sq must be positive");
  }
  if (neg_mode && egl_vif < 1.0) {
    throw std::invalid_argument(
        "vif config: egl_vif must be >= 1 in NEG mode (limits enhancement only)");
  }
  if (eps_var < 0.0 || eps_v < 0.0) {
    throw std::invalid_argument("vif config: variance floors must be nonnegative");
  }
  for (int s = 0; s < 4; ++s) {
    if (kernel_sizes[s] < 1 || kernel_sizes[s] % 2 == 0) {
      throw std::invalid_argument("vif config: scale kernel sizes must be odd");
    }
    if (!(kernel_sigmas[s] > 0.0)) {
      throw std::invalid_argument("vif config: scale kernel sigmas must be positive");
    }
  }
}

Tensor VifScale(const Tensor& ref, const Tensor& dist, const Tensor& kernel,
                const VifConfig& cfg, VifScaleStats* stats_out) {
  cfg.Validate();
  if (!ref.SameShape(dist)) {
    throw std::invalid_argument("vif: ref/dist shape mismatch " + ref.ShapeString() +
                                " vs " + dist.ShapeString());
  }

  const Tensor mu_ref = WindowFilter(ref, kernel);
  const Tensor mu_dist = WindowFilter(dist, kernel);

  // E[X^2] - E[X]^2, floored at zero against round-off on flat patches.
  const Tensor sigma_ref_sq = Relu(Sub(WindowFilter(Mul(ref, ref), kernel), Mul(mu_ref, mu_ref)));
  const Tensor sigma_dist_sq =
      Relu(Sub(WindowFilter(Mul(dist, dist), kernel), Mul(mu_dist, mu_dist)));
  const Tensor sigma_cross =
      Sub(WindowFilter(Mul(ref, dist), kernel), Mul(mu_ref, mu_dist));

  // Channel gain; negative correlation carries no fidelity, so the gain
  // floors at zero (which also leaves sigma_v_sq = sigma_dist_sq there).
  const Tensor g = Relu(Div(sigma_cross, sigma_ref_sq, cfg.eps_var));
  Tensor sigma_v_sq = Sub(sigma_dist_sq, Mul(g, sigma_cross));
  sigma_v_sq = cfg.eps_v > 0.0 ? Max(sigma_v_sq, cfg.eps_v) : Relu(sigma_v_sq);

  const Tensor g_num = cfg.neg_mode ? Min(g, cfg.egl_vif) : g;

  const Tensor num_map = Log2OnePlusRatio(Mul(Mul(g_num, g_num), sigma_ref_sq),
                                          AddScalar(sigma_v_sq, cfg.sigma_n_sq));
  const Tensor den_map = Log2OnePlusRatio(sigma_ref_sq, cfg.sigma_n_sq);

  if (stats_out) {
    *stats_out = VifScaleStats{mu_ref,      mu_dist, sigma_ref_sq, sigma_dist_sq,
                               sigma_cross, g,       sigma_v_sq};
  }
  return Div(ReduceSum(num_map), ReduceSum(den_map));
}

std::array<Tensor, 4> VifFeatures(const Tensor& ref, const Tensor& dist,
                                  const VifConfig& cfg) {
  cfg.Validate();
  // Reflect filtering at scale s needs dims >= (k_s+1)/2 at that scale's
  // resolution; checked upfront for a clearer message.
  for (int s = 0; s < 4; ++s) {
    const int need = ((cfg.kernel_sizes[s] + 1) / 2) << s;
    if (ref.rows() < need || ref.cols() < need) {
      throw std::invalid_argument("vif: frame " + ref.ShapeString() +
                                  " too small for scale " + std::to_string(s) +
                                  " window " + std::to_string(cfg.kernel_sizes[s]));
    }
  }

  std::array<Tensor, 4> features;
  Tensor r = ref;
  Tensor d = dist;
  for (int s = 0; s < 4; ++s) {
    const Tensor taps = GaussianTaps1D(cfg.kernel_sizes[s], cfg.kernel_sigmas[s]);
    if (s > 0) {
      r = Decimate2(SeparableBlur(r, taps, Padding::kReflect));
      d = Decimate2(SeparableBlur(d, taps, Padding::kReflect));
    }
    features[s] = VifScale(r, d, taps, cfg);
  }
  return features;
}

}  // namespace dvmaf
