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

#ifndef DRVC_TESTS_SUPPORT_HPP
#define DRVC_TESTS_SUPPORT_HPP

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "drvc/tensor.hpp"

namespace testsup {

inline drvc::Tensor random_tensor(std::vector<int64_t> shape, drvc::Rng& rng, double scale = 1.0) {
  drvc::Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (auto& v : t.data) v = dist(rng);
  return t;
}

// Central finite difference of a scalar-valued function w.r.t. one coordinate
// of x. The function must not hold references into x between calls.
inline double central_diff(std::function<double(const drvc::Tensor&)> f, drvc::Tensor x, size_t i,
                           double h = 1e-6) {
  const double orig = x.data[i];
  x.data[i] = orig + h;
  const double fp = f(x);
  x.data[i] = orig - h;
  const double fm = f(x);
  return (fp - fm) / (2.0 * h);
}

inline bool rel_close(double a, double b, double rel, double abs_floor = 1e-9) {
  return std::abs(a - b) <= std::max(abs_floor, rel * std::max(std::abs(a), std::abs(b)));
}

// Compares every coordinate of an analytic gradient against central
// differences. Returns the worst relative error seen.
inline double max_grad_error(std::function<double(const drvc::Tensor&)> f, const drvc::Tensor& x,
                             const drvc::Tensor& analytic, double h = 1e-6) {
  double worst = 0.0;
  for (size_t i = 0; i < x.data.size(); ++i) {
    const double fd = central_diff(f, x, i, h);
    const double an = analytic.data[i];
    const double denom = std::max({1e-8, std::abs(fd), std::abs(an)});
    worst = std::max(worst, std::abs(fd - an) / denom);
  }
  return worst;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    namespace fs = std::filesystem;
    path_ = fs::temp_directory_path() / ("drvc_test_" + tag + "_" + std::to_string(counter()++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::filesystem::path path_;
};

}  // namespace testsup

#endif  // DRVC_TESTS_SUPPORT_HPP
