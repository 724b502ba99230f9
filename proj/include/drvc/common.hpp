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

#ifndef DRVC_COMMON_HPP
#define DRVC_COMMON_HPP

#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>

namespace drvc {

// Exit-code contract for the CLI: usage/config errors map to 1,
// runtime/divergence errors to 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class ContractError : public std::runtime_error {
 public:
  explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

class EmptyInputError : public std::runtime_error {
 public:
  explicit EmptyInputError(const std::string& msg) : std::runtime_error(msg) {}
};

class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

// Single RNG type so engine state can be checkpointed via stream I/O.
using Rng = std::mt19937_64;

namespace log {

inline void warn(const std::string& msg) {
  std::fprintf(stderr, "[warn] %s\n", msg.c_str());
}

inline void info(const std::string& msg) {
  std::fprintf(stderr, "[info] %s\n", msg.c_str());
}

}  // namespace log

}  // namespace drvc

#endif  // DRVC_COMMON_HPP
