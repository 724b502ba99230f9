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

#include "drvc/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace drvc {

namespace {

constexpr double kPi = 3.14159265358979323846;

uint32_t read_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

std::vector<double> read_wav(const std::filesystem::path& path, int* sample_rate) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open wav file: " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw IoError("not a RIFF/WAVE file: " + path.string());

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  size_t data_off = 0, data_len = 0;
  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const uint32_t len = read_u32(bytes.data() + pos + 4);
    if (std::memcmp(id, "fmt ", 4) == 0 && pos + 8 + 16 <= bytes.size()) {
      const uint8_t* p = bytes.data() + pos + 8;
      format = read_u16(p);
      channels = read_u16(p + 2);
      rate = read_u32(p + 4);
      bits = read_u16(p + 14);
    } else if (std::memcmp(id, "data", 4) == 0) {
      data_off = pos + 8;
      data_len = std::min<size_t>(len, bytes.size() - data_off);
    }
    pos += 8 + len + (len & 1);  // chunks are word-aligned
  }
  if (format == 0xFFFE) format = 1;  // WAVE_FORMAT_EXTENSIBLE carrying PCM
  if (channels == 0 || rate == 0 || data_off == 0)
    throw IoError("malformed wav file: " + path.string());
  if (format != 1 && format != 3)
    throw IoError("unsupported wav encoding (want PCM or float): " + path.string());

  const size_t bytes_per_sample = bits / 8;
  if (bytes_per_sample == 0) throw IoError("malformed wav bit depth: " + path.string());
  const size_t n_frames = data_len / (bytes_per_sample * channels);
  std::vector<double> out(n_frames, 0.0);
  const uint8_t* d = bytes.data() + data_off;
  for (size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    for (size_t c = 0; c < channels; ++c) {
      const uint8_t* s = d + (i * channels + c) * bytes_per_sample;
      double v = 0.0;
      if (format == 3 && bits == 32) {
        float fv;
        std::memcpy(&fv, s, 4);
        v = fv;
      } else if (format == 1 && bits == 16) {
        int16_t iv;
        std::memcpy(&iv, s, 2);
        v = iv / 32768.0;
      } else if (format == 1 && bits == 24) {
        int32_t iv = (s[0] << 8) | (s[1] << 16) | (static_cast<int32_t>(static_cast<int8_t>(s[2])) << 24);
        v = (iv >> 8) / 8388608.0;
      } else if (format == 1 && bits == 32) {
        int32_t iv;
        std::memcpy(&iv, s, 4);
        v = iv / 2147483648.0;
      } else {
        throw IoError("unsupported wav bit depth: " + path.string());
      }
      acc += v;
    }
    out[i] = acc / channels;
  }
  if (sample_rate) *sample_rate = static_cast<int>(rate);
  return out;
}

void write_wav_pcm16(const std::filesystem::path& path, const std::vector<double>& samples,
                     int sample_rate) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write wav file: " + path.string());
  const uint32_t data_len = static_cast<uint32_t>(samples.size() * 2);
  const uint32_t riff_len = 36 + data_len;
  auto put_u32 = [&](uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); };
  auto put_u16 = [&](uint16_t v) { f.write(reinterpret_cast<const char*>(&v), 2); };
  f.write("RIFF", 4);
  put_u32(riff_len);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  put_u32(16);
  put_u16(1);  // PCM
  put_u16(1);  // mono
  put_u32(static_cast<uint32_t>(sample_rate));
  put_u32(static_cast<uint32_t>(sample_rate * 2));
  put_u16(2);
  put_u16(16);
  f.write("data", 4);
  put_u32(data_len);
  for (double v : samples) {
    const double c = std::clamp(v, -1.0, 1.0);
    const int16_t iv = static_cast<int16_t>(std::lround(c * 32767.0));
    f.write(reinterpret_cast<const char*>(&iv), 2);
  }
  if (!f) throw IoError("short write on wav file: " + path.string());
}

std::vector<double> resample(const std::vector<double>& in, int from_rate, int to_rate) {
  if (from_rate <= 0 || to_rate <= 0) throw ContractError("resample: rates must be positive");
  if (from_rate == to_rate) return in;
  const int64_t n_in = static_cast<int64_t>(in.size());
  const int64_t n_out = static_cast<int64_t>(std::llround(static_cast<double>(n_in) * to_rate / from_rate));
  std::vector<double> out(static_cast<size_t>(n_out), 0.0);
  const double step = static_cast<double>(from_rate) / to_rate;  // input samples per output sample
  const double cutoff = std::min(1.0, static_cast<double>(to_rate) / from_rate);
  const int taps = 24;
  const double width = taps / cutoff;
  for (int64_t i = 0; i < n_out; ++i) {
    const double center = i * step;
    const int64_t j0 = std::max<int64_t>(0, static_cast<int64_t>(std::ceil(center - width)));
    const int64_t j1 = std::min<int64_t>(n_in - 1, static_cast<int64_t>(std::floor(center + width)));
    double acc = 0.0, wsum = 0.0;
    for (int64_t j = j0; j <= j1; ++j) {
      const double x = (j - center) * cutoff;
      const double sinc = x == 0.0 ? 1.0 : std::sin(kPi * x) / (kPi * x);
      const double hann = 0.5 * (1.0 + std::cos(kPi * x / taps));
      const double w = sinc * hann;
      acc += w * in[static_cast<size_t>(j)];
      wsum += w;
    }
    out[static_cast<size_t>(i)] = wsum != 0.0 ? acc / wsum : 0.0;
  }
  return out;
}

AudioClip load_audio(const std::filesystem::path& path, int target_rate) {
  int rate = 0;
  std::vector<double> samples = read_wav(path, &rate);
  if (samples.empty()) throw EmptyInputError("zero-length audio: " + path.string());
  if (rate != target_rate) samples = resample(samples, rate, target_rate);

  double peak = 0.0;
  for (double v : samples) peak = std::max(peak, std::abs(v));
  if (peak > 1.0) {
    for (auto& v : samples) v /= peak;
  }
  AudioClip clip;
  clip.samples = std::move(samples);
  clip.sample_rate = target_rate;
  clip.utterance_id = path.stem().string();
  return clip;
}

}  // namespace drvc
