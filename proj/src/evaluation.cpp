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

#include "drvc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "drvc/dsp.hpp"

namespace drvc {

namespace {
const double kMcdScale = 10.0 / std::log(10.0);
}

std::vector<double> freqt(const std::vector<double>& c, int target_order, double alpha) {
  const size_t m2 = static_cast<size_t>(target_order);
  std::vector<double> prev(m2 + 1, 0.0), cur(m2 + 1, 0.0);
  for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) {
    cur[0] = c[static_cast<size_t>(i)] + alpha * prev[0];
    if (m2 >= 1) cur[1] = (1.0 - alpha * alpha) * prev[0] + alpha * prev[1];
    for (size_t m = 2; m <= m2; ++m) cur[m] = prev[m - 1] + alpha * (prev[m] - cur[m - 1]);
    std::swap(prev, cur);
  }
  return prev;
}

CepstralSequence extract_cepstra(const AudioClip& clip, int order, const CepstralConfig& cfg) {
  if (order < 1) throw ContractError("extract_cepstra: order must be >= 1");
  const int64_t n = static_cast<int64_t>(clip.samples.size());
  if (n < cfg.win_length)
    throw EmptyInputError("extract_cepstra: clip shorter than one analysis window");
  const int64_t t_len = 1 + (n - cfg.win_length) / cfg.hop_length;

  const auto window = dsp::hann_window(static_cast<size_t>(cfg.win_length));
  const size_t n_fft = static_cast<size_t>(cfg.n_fft);
  const size_t n_bins = n_fft / 2 + 1;

  CepstralSequence seq;
  seq.coeffs = Tensor({t_len, static_cast<int64_t>(order) + 1});
  seq.includes_c0 = true;

  std::vector<double> frame(static_cast<size_t>(cfg.win_length));
  std::vector<std::complex<double>> buf(n_fft);
  for (int64_t t = 0; t < t_len; ++t) {
    const size_t off = static_cast<size_t>(t) * static_cast<size_t>(cfg.hop_length);
    for (int i = 0; i < cfg.win_length; ++i)
      frame[static_cast<size_t>(i)] =
          clip.samples[off + static_cast<size_t>(i)] * window[static_cast<size_t>(i)];

    const auto spec = dsp::rfft(frame, n_fft);
    // symmetric log-magnitude array, then an inverse FFT gives the real
    // cepstrum of the frame
    for (size_t k = 0; k < n_fft; ++k) {
      const size_t src = k < n_bins ? k : n_fft - k;
      const double logmag = 0.5 * std::log(std::max(std::norm(spec[src]), cfg.power_floor));
      buf[k] = {logmag, 0.0};
    }
    dsp::fft(buf, true);

    std::vector<double> cep(n_bins);
    for (size_t q = 0; q < n_bins; ++q) cep[q] = buf[q].real();
    const std::vector<double> warped = freqt(cep, order, cfg.alpha);
    for (int d = 0; d <= order; ++d) seq.coeffs.at(t, d) = warped[static_cast<size_t>(d)];
  }
  return seq;
}

namespace {

double frame_distance(const CepstralSequence& x, int64_t i, const CepstralSequence& y, int64_t j,
                      bool include_c0) {
  const int64_t d0 = include_c0 ? 0 : 1;
  double acc = 0.0;
  for (int64_t d = d0; d <= x.order(); ++d) {
    const double diff = x.coeffs.at(i, d) - y.coeffs.at(j, d);
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

}  // namespace

DtwPath dtw_align(const CepstralSequence& x, const CepstralSequence& y, bool include_c0) {
  const int64_t tx = x.n_frames(), ty = y.n_frames();
  if (tx == 0 || ty == 0) throw ContractError("dtw_align: empty sequence");
  if (x.order() != y.order()) throw ContractError("dtw_align: cepstral order mismatch");

  const double inf = std::numeric_limits<double>::infinity();
  Tensor acc({tx, ty});
  std::vector<int8_t> from(static_cast<size_t>(tx * ty), -1);  // 0:(1,1) 1:(1,0) 2:(0,1)
  for (int64_t i = 0; i < tx; ++i) {
    for (int64_t j = 0; j < ty; ++j) {
      const double d = frame_distance(x, i, y, j, include_c0);
      double best = inf;
      int8_t move = -1;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else {
        if (i > 0 && j > 0 && acc.at(i - 1, j - 1) < best) {
          best = acc.at(i - 1, j - 1);
          move = 0;
        }
        if (i > 0 && acc.at(i - 1, j) < best) {
          best = acc.at(i - 1, j);
          move = 1;
        }
        if (j > 0 && acc.at(i, j - 1) < best) {
          best = acc.at(i, j - 1);
          move = 2;
        }
      }
      acc.at(i, j) = best + d;
      from[static_cast<size_t>(i * ty + j)] = move;
    }
  }

  DtwPath path;
  path.cost = acc.at(tx - 1, ty - 1);
  int64_t i = tx - 1, j = ty - 1;
  while (true) {
    path.pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
    const int8_t move = from[static_cast<size_t>(i * ty + j)];
    if (move < 0) break;
    if (move == 0) {
      --i;
      --j;
    } else if (move == 1) {
      --i;
    } else {
      --j;
    }
  }
  std::reverse(path.pairs.begin(), path.pairs.end());
  return path;
}

double mcd(const CepstralSequence& x, const CepstralSequence& y, bool include_c0) {
  if (x.order() != y.order()) throw ContractError("mcd: cepstral order mismatch");
  const DtwPath path = dtw_align(x, y, include_c0);
  const int64_t d0 = include_c0 ? 0 : 1;
  double acc = 0.0;
  for (const auto& [i, j] : path.pairs) {
    double sq = 0.0;
    for (int64_t d = d0; d <= x.order(); ++d) {
      const double diff = x.coeffs.at(i, d) - y.coeffs.at(j, d);
      sq += diff * diff;
    }
    acc += kMcdScale * std::sqrt(2.0 * sq);
  }
  return acc / static_cast<double>(path.pairs.size());
}

MCDResult evaluate_pairs(const std::vector<AudioClip>& converted,
                         const std::vector<AudioClip>& references, const CepstralConfig& cfg,
                         bool include_c0) {
  if (converted.empty()) throw ContractError("evaluate_pairs: empty pair list");
  if (converted.size() != references.size())
    throw ContractError("evaluate_pairs: converted/reference lists differ in length");

  MCDResult result;
  double sum = 0.0, sq = 0.0;
  for (size_t p = 0; p < converted.size(); ++p) {
    const CepstralSequence cx = extract_cepstra(converted[p], cfg.order, cfg);
    const CepstralSequence cy = extract_cepstra(references[p], cfg.order, cfg);
    const DtwPath path = dtw_align(cx, cy, include_c0);
    const double value = mcd(cx, cy, include_c0);
    McdPair pair;
    pair.source_id = converted[p].utterance_id;
    pair.target_id = references[p].utterance_id;
    pair.source_speaker = converted[p].speaker_id;
    pair.target_speaker = references[p].speaker_id;
    pair.mcd_db = value;
    pair.aligned_length = static_cast<int>(path.pairs.size());
    result.per_pair.push_back(std::move(pair));
    sum += value;
    sq += value * value;
  }
  const double n = static_cast<double>(converted.size());
  result.mean_mcd = sum / n;
  result.std_mcd = std::sqrt(std::max(0.0, sq / n - result.mean_mcd * result.mean_mcd));
  return result;
}

}  // namespace drvc
