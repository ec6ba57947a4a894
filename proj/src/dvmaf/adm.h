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

#ifndef DVMAF_ADM_H_
#define DVMAF_ADM_H_

#include <array>
#include <vector>

#include "dvmaf/ops.h"
#include "dvmaf/tensor.h"

namespace dvmaf {

enum class WaveletBoundary { kReflect, kPeriodic };
enum class DwtAxis { kVertical, kHorizontal };

// Daubechies-2 analysis taps (orthonormal; lowpass sums to sqrt(2)).
std::array<double, 4> Db2LowpassTaps();
std::array<double, 4> Db2HighpassTaps();

// One separable analysis pass along an axis: out[n] = sum_k taps[k] *
// x[2n-1+k], output length ceil(n/2). Periodic extension requires an
// even length along the filtered axis.
Tensor Dwt1D(const Tensor& x, DwtAxis axis, const std::array<double, 4>& taps,
             WaveletBoundary boundary);

// Subband naming follows the detail orientation in frequency: `vert`
// is highpass along the row index (responds to horizontal edges),
// `horiz` is highpass along the column index, `diag` both.
struct WaveletLevel {
  Tensor approx;
  Tensor vert;
  Tensor diag;
  Tensor horiz;
};
using WaveletPyramid = std::vector<WaveletLevel>;

// Analysis-only multilevel transform; each level halves (ceil) the
// previous approximation. Requires dims >= 2^levels.
WaveletPyramid Dwt2D(const Tensor& image, int levels,
                     WaveletBoundary boundary = WaveletBoundary::kReflect);

struct CsfLevelWeights {
  double vert = 1.0;
  double diag = 1.0;
  double horiz = 1.0;
};

// Per-(level, orientation) contrast sensitivity weights derived from
// the Watson DWT quantization-step model for the luma channel
// (a = 0.495, k = 0.466, f0 = 0.401, g = {1.501, 1, 0.534, 1}) at the
// given normalized view distance and display height.
std::array<CsfLevelWeights, 4> WatsonCsfWeights(double norm_view_dist = 3.0,
                                                int ref_display_height = 1080);

struct AdmConfig {
  double egl_dlm = 1.0;
  bool neg_mode = false;
  double border_exclusion_fraction = 0.1;  // central region C, per side
  std::array<CsfLevelWeights, 4> csf_weights = WatsonCsfWeights();
  Tensor cm_kernel;                  // defaults to [[1,1,1],[1,2,1],[1,1,1]]/30
  double cm_threshold_factor = 1.0;  // scales the masking threshold
  double ratio_eps = 1e-15;          // sign-preserving guard on T/O
  double angle_threshold_deg = 1.0;
  WaveletBoundary boundary = WaveletBoundary::kReflect;
  int levels = 4;

  Tensor EffectiveCmKernel() const;
  void Validate() const;
};

// Decoupling of distorted detail coefficients into restored plus
// additive parts; T = R + A holds exactly per coefficient. The psi
// planes hold the per-position subband angles (degrees) used by the
// branch selector.
struct AdmDecomposition {
  WaveletPyramid restored;
  WaveletPyramid additive;
  std::vector<Tensor> psi_ref;
  std::vector<Tensor> psi_dist;
};

AdmDecomposition Decouple(const WaveletPyramid& ref_pyr, const WaveletPyramid& dist_pyr,
                          const AdmConfig& cfg);

// Full detail-loss score: CSF + contrast masking on the restored
// details over the central region, against the CSF'd reference
// details. 1.0 for identical images.
Tensor AdmScore(const Tensor& ref, const Tensor& dist, const AdmConfig& cfg);

// Central region of a plane after excluding `fraction` per side.
RectRegion CentralRegion(int rows, int cols, double fraction);

}  // namespace dvmaf

#endif  // DVMAF_ADM_H_
