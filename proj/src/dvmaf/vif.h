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

#ifndef DVMAF_VIF_H_
#define DVMAF_VIF_H_

#include <array>

#include "dvmaf/ops.h"
#include "dvmaf/tensor.h"

namespace dvmaf {

// Pixel-domain visual information fidelity over four scales. Local
// moments are Gaussian-weighted and computed by convolution, so the
// whole feature is a composition of tape primitives.
struct VifConfig {
  double sigma_n_sq = 2.0;  // HVS noise variance
  double egl_vif = 1.0;     // enhancement gain limit (NEG mode)
  bool neg_mode = false;
  double eps_var = 1e-10;  // reference-variance denominator stabilizer
  double eps_v = 0.0;      // extra floor on sigma_v_sq (0: clamp negatives only)
  std::array<int, 4> kernel_sizes{17, 9, 5, 3};
  std::array<double, 4> kernel_sigmas{17.0 / 5.0, 9.0 / 5.0, 5.0 / 5.0, 3.0 / 5.0};

  void Validate() const;
};

// Windowed second-order statistics of one scale, kept for inspection
// and testing. All planes share the input shape.
struct VifScaleStats {
  Tensor mu_ref;
  Tensor mu_dist;
  Tensor sigma_ref_sq;   // >= 0 after flooring
  Tensor sigma_dist_sq;  // >= 0 after flooring
  Tensor sigma_cross;
  Tensor g;           // nonnegative channel gain (pre NEG clip)
  Tensor sigma_v_sq;  // >= 0
};

// Single-scale VIF value on-tape. `kernel` is either a 1 x k row of
// separable window taps or a full k x k window. `stats_out`, when
// given, receives the intermediate moment planes.
Tensor VifScale(const Tensor& ref, const Tensor& dist, const Tensor& kernel,
                const VifConfig& cfg, VifScaleStats* stats_out = nullptr);

// Four features: scale 0 on full resolution, then blur+decimate with
// each scale's window before computing that scale's value.
std::array<Tensor, 4> VifFeatures(const Tensor& ref, const Tensor& dist,
                                  const VifConfig& cfg);

}  // namespace dvmaf

#endif  // DVMAF_VIF_H_
