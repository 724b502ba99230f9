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

#include "drvc/mel.hpp"

#include <algorithm>
#include <cmath>

#include "drvc/dsp.hpp"

namespace drvc {

namespace {

// Slaney mel scale: linear below 1 kHz, logarithmic above.
constexpr double kMinLogHz = 1000.0;
constexpr double kLinScale = 200.0 / 3.0;
const double kMinLogMel = kMinLogHz / kLinScale;
const double kLogStep = std::log(6.4) / 27.0;

double hz_to_mel(double hz) {
  if (hz < kMinLogHz) return hz / kLinScale;
  return kMinLogMel + std::log(hz / kMinLogHz) / kLogStep;
}

double mel_to_hz(double mel) {
  if (mel < kMinLogMel) return mel * kLinScale;
  return kMinLogHz * std::exp((mel - kMinLogMel) * kLogStep);
}

}  // namespace

std::vector<std::vector<double>> mel_filterbank(const MelConfig& cfg) {
  const int n_bins = cfg.n_fft / 2 + 1;
  const double fmax = cfg.fmax > 0.0 ? cfg.fmax : cfg.sample_rate / 2.0;
  const double mel_lo = hz_to_mel(cfg.fmin);
  const double mel_hi = hz_to_mel(fmax);

  std::vector<double> mel_f(static_cast<size_t>(cfg.n_mels) + 2);
  for (int i = 0; i < cfg.n_mels + 2; ++i)
    mel_f[static_cast<size_t>(i)] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (cfg.n_mels + 1));

  std::vector<std::vector<double>> fb(static_cast<size_t>(cfg.n_mels),
                                      std::vector<double>(static_cast<size_t>(n_bins), 0.0));
  for (int m = 0; m < cfg.n_mels; ++m) {
    const double f_lo = mel_f[static_cast<size_t>(m)];
    const double f_c = mel_f[static_cast<size_t>(m) + 1];
    const double f_hi = mel_f[static_cast<size_t>(m) + 2];
    const double norm = 2.0 / (f_hi - f_lo);  // slaney area normalization
    for (int k = 0; k < n_bins; ++k) {
      const double freq = static_cast<double>(k) * cfg.sample_rate / cfg.n_fft;
      double w = 0.0;
      if (freq >= f_lo && freq <= f_c && f_c > f_lo) {
        w = (freq - f_lo) / (f_c - f_lo);
      } else if (freq > f_c && freq <= f_hi && f_hi > f_c) {
        w = (f_hi - freq) / (f_hi - f_c);
      }
      fb[static_cast<size_t>(m)][static_cast<size_t>(k)] = w * norm;
    }
  }
  return fb;
}

int64_t mel_frame_count(int64_t n_samples, const MelConfig& cfg) {
  const int64_t len = cfg.center ? n_samples + 2 * (cfg.win_length / 2) : n_samples;
  if (len < cfg.win_length) return 0;
  return 1 + (len - cfg.win_length) / cfg.hop_length;
}

MelSpectrogram compute_mel(const AudioClip& clip, const MelConfig& cfg) {
  if (clip.sample_rate != cfg.sample_rate)
    throw ContractError("compute_mel: clip rate " + std::to_string(clip.sample_rate) +
                        " does not match config rate " + std::to_string(cfg.sample_rate));
  std::vector<double> x = clip.samples;
  if (cfg.center) {
    std::vector<double> padded(x.size() + 2 * static_cast<size_t>(cfg.win_length / 2), 0.0);
    std::copy(x.begin(), x.end(), padded.begin() + cfg.win_length / 2);
    x = std::move(padded);
  }
  const int64_t t_len = (static_cast<int64_t>(x.size()) >= cfg.win_length)
                            ? 1 + (static_cast<int64_t>(x.size()) - cfg.win_length) / cfg.hop_length
                            : 0;
  if (t_len < 1) throw EmptyInputError("compute_mel: clip shorter than one analysis window");

  const auto window = dsp::hann_window(static_cast<size_t>(cfg.win_length));
  const auto fb = mel_filterbank(cfg);
  const int n_bins = cfg.n_fft / 2 + 1;

  MelSpectrogram mel;
  mel.frames = Tensor({t_len, cfg.n_mels});
  mel.sample_rate = cfg.sample_rate;
  mel.hop_length = cfg.hop_length;
  mel.speaker_id = clip.speaker_id;
  mel.utterance_id = clip.utterance_id;

  std::vector<double> frame(static_cast<size_t>(cfg.win_length));
  for (int64_t t = 0; t < t_len; ++t) {
    const size_t off = static_cast<size_t>(t) * static_cast<size_t>(cfg.hop_length);
    for (int i = 0; i < cfg.win_length; ++i)
      frame[static_cast<size_t>(i)] = x[off + static_cast<size_t>(i)] * window[static_cast<size_t>(i)];
    const auto spec = dsp::rfft(frame, static_cast<size_t>(cfg.n_fft));
    std::vector<double> power(static_cast<size_t>(n_bins));
    for (int k = 0; k < n_bins; ++k) power[static_cast<size_t>(k)] = std::norm(spec[static_cast<size_t>(k)]);
    for (int m = 0; m < cfg.n_mels; ++m) {
      double e = 0.0;
      const auto& row = fb[static_cast<size_t>(m)];
      for (int k = 0; k < n_bins; ++k) e += row[static_cast<size_t>(k)] * power[static_cast<size_t>(k)];
      mel.frames.at(t, m) = std::log(std::max(e, cfg.log_floor));
    }
  }
  return mel;
}

MelStats compute_mel_stats(const std::vector<MelSpectrogram>& mels) {
  if (mels.empty()) throw EmptyInputError("compute_mel_stats: no spectrograms");
  const int64_t m = mels.front().n_mels();
  std::vector<double> sum(static_cast<size_t>(m), 0.0), sq(static_cast<size_t>(m), 0.0);
  int64_t n = 0;
  for (const auto& mel : mels) {
    if (mel.n_mels() != m) throw ContractError("compute_mel_stats: inconsistent mel bin count");
    for (int64_t t = 0; t < mel.n_frames(); ++t) {
      for (int64_t j = 0; j < m; ++j) {
        const double v = mel.frames.at(t, j);
        sum[static_cast<size_t>(j)] += v;
        sq[static_cast<size_t>(j)] += v * v;
      }
    }
    n += mel.n_frames();
  }
  MelStats stats;
  stats.mean.resize(static_cast<size_t>(m));
  stats.std.resize(static_cast<size_t>(m));
  for (int64_t j = 0; j < m; ++j) {
    const double mu = sum[static_cast<size_t>(j)] / static_cast<double>(n);
    const double var = std::max(0.0, sq[static_cast<size_t>(j)] / static_cast<double>(n) - mu * mu);
    stats.mean[static_cast<size_t>(j)] = mu;
    stats.std[static_cast<size_t>(j)] = std::sqrt(var);
  }
  return stats;
}

namespace {

constexpr double kStdEpsilon = 1e-8;

double safe_std(double s, int64_t bin, bool* warned) {
  if (s < kStdEpsilon) {
    if (!*warned) {
      log::warn("normalize_mel: zero std in mel bin " + std::to_string(bin) +
                ", clamping to epsilon");
      *warned = true;
    }
    return kStdEpsilon;
  }
  return s;
}

}  // namespace

MelSpectrogram normalize_mel(const MelSpectrogram& mel, const MelStats& stats) {
  if (static_cast<size_t>(mel.n_mels()) != stats.mean.size())
    throw ContractError("normalize_mel: stats dimension mismatch");
  MelSpectrogram out = mel;
  bool warned = false;
  for (int64_t t = 0; t < mel.n_frames(); ++t)
    for (int64_t j = 0; j < mel.n_mels(); ++j)
      out.frames.at(t, j) = (mel.frames.at(t, j) - stats.mean[static_cast<size_t>(j)]) /
                            safe_std(stats.std[static_cast<size_t>(j)], j, &warned);
  return out;
}

MelSpectrogram denormalize_mel(const MelSpectrogram& mel, const MelStats& stats) {
  if (static_cast<size_t>(mel.n_mels()) != stats.mean.size())
    throw ContractError("denormalize_mel: stats dimension mismatch");
  MelSpectrogram out = mel;
  bool warned = false;
  for (int64_t t = 0; t < mel.n_frames(); ++t)
    for (int64_t j = 0; j < mel.n_mels(); ++j)
      out.frames.at(t, j) = mel.frames.at(t, j) * safe_std(stats.std[static_cast<size_t>(j)], j, &warned) +
                            stats.mean[static_cast<size_t>(j)];
  return out;
}

MelSpectrogram crop_segment(const MelSpectrogram& mel, int64_t length, Rng& rng, CropPolicy policy) {
  if (length < 1) throw ContractError("crop_segment: length must be >= 1");
  const int64_t t_in = mel.n_frames();
  const int64_t m = mel.n_mels();
  MelSpectrogram out = mel;
  out.frames = Tensor({length, m});

  if (t_in >= length) {
    const int64_t max_start = t_in - length;
    std::uniform_int_distribution<int64_t> dist(0, max_start);
    const int64_t start = dist(rng);
    for (int64_t t = 0; t < length; ++t)
      for (int64_t j = 0; j < m; ++j) out.frames.at(t, j) = mel.frames.at(start + t, j);
    return out;
  }

  for (int64_t t = 0; t < length; ++t) {
    int64_t src;
    if (policy == CropPolicy::kTile) {
      src = t % t_in;
    } else {
      // symmetric extension: triangle wave of period 2*T, edge repeated
      const int64_t phase = t % (2 * t_in);
      src = phase < t_in ? phase : 2 * t_in - 1 - phase;
    }
    for (int64_t j = 0; j < m; ++j) out.frames.at(t, j) = mel.frames.at(src, j);
  }
  return out;
}

}  // namespace drvc
