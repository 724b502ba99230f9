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

#ifndef DRVC_DSP_HPP
#define DRVC_DSP_HPP

#include <complex>
#include <vector>

namespace drvc::dsp {

// In-place iterative radix-2 FFT; size must be a power of two.
void fft(std::vector<std::complex<double>>& x, bool inverse);

// Real-input forward FFT returning the n/2+1 non-redundant bins.
std::vector<std::complex<double>> rfft(const std::vector<double>& x, size_t n);

// Periodic Hann window of length n.
std::vector<double> hann_window(size_t n);

}  // namespace drvc::dsp

#endif  // DRVC_DSP_HPP
