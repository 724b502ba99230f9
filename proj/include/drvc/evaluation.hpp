// Copyright 2026 The DRVC Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DRVC_EVALUATION_HPP
#define DRVC_EVALUATION_HPP

#include <string>
#include <utility>
#include <vector>

#include "drvc/audio.hpp"
#include "drvc/tensor.hpp"

namespace drvc {

struct CepstralConfig {
  int order = 34;        // coefficients c1..c_order kept in addition to c0
  double alpha = 0.455;  // all-pass warping factor (22.05 kHz convention)
  int n_fft = 1024;      // frame settings match the training features
  int win_length = 1024;
  int hop_length = 256;
  double power_floor = 1e-10;
};

struct CepstralSequence {
  Tensor coeffs;  // [T x (order+1)], column 0 is c0 (energy)
  bool includes_c0 = true;

  int64_t n_frames() const { return coeffs.shape.empty() ? 0 : coeffs.dim(0); }
  int64_t order() const { return coeffs.shape.empty() ? 0 : coeffs.dim(1) - 1; }
};

// Mel-warped cepstra: log magnitude spectrum -> real cepstrum -> all-pass
// frequency transform to the warped axis.
CepstralSequence extract_cepstra(const AudioClip& clip, int order,
                                 const CepstralConfig& cfg = {});

// Oppenheim recursion mapping a linear-frequency cepstrum onto the warped
// axis; alpha = 0 is the identity (up to truncation).
std::vector<double> freqt(const std::vector<double>& c, int target_order, double alpha);

struct DtwPath {
  std::vector<std::pair<int, int>> pairs;  // (x index, y index), start to end
  double cost = 0.0;                       // summed local distances over the path
};

// Monotone warping path with steps {(1,0),(0,1),(1,1)} from (0,0) to
// (Tx-1,Ty-1) minimizing the summed Euclidean distance; c0 excluded unless
// include_c0.
DtwPath dtw_align(const CepstralSequence& x, const CepstralSequence& y, bool include_c0 = false);

// Mean over the DTW path of (10/ln 10) * sqrt(2 * sum_d (c_d - c'_d)^2), dB.
double mcd(const CepstralSequence& x, const CepstralSequence& y, bool include_c0 = false);

struct McdPair {
  std::string source_id;
  std::string target_id;
  std::string source_speaker;
  std::string target_speaker;
  double mcd_db = 0.0;
  int aligned_length = 0;
  std::string kind;  // "identity" or "cross"; set by the caller's protocol
};

struct MCDResult {
  double mean_mcd = 0.0;  // arithmetic mean over pairs
  double std_mcd = 0.0;   // population standard deviation
  std::vector<McdPair> per_pair;
};

// Matched converted/reference utterances, one MCD per pair plus mean and std.
MCDResult evaluate_pairs(const std::vector<AudioClip>& converted,
                         const std::vector<AudioClip>& references, const CepstralConfig& cfg = {},
                         bool include_c0 = false);

}  // namespace drvc

#endif  // DRVC_EVALUATION_HPP
