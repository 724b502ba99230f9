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

#include "drvc/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace drvc {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'D', 'R', 'V', 'C', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

json meta_to_json(const CheckpointMeta& meta, const nn::ParamStore& store) {
  json j;
  j["version"] = meta.version;
  j["epoch"] = meta.epoch;
  j["global_step"] = meta.global_step;
  j["total_steps"] = meta.total_steps;
  j["sampler_rng_state"] = meta.sampler_rng_state;
  j["speakers"] = meta.speakers;
  j["stats_mean"] = meta.stats.mean;
  j["stats_std"] = meta.stats.std;
  if (!meta.config_json.empty()) j["config"] = json::parse(meta.config_json);
  json dir = json::array();
  for (int i = 0; i < store.count(); ++i) {
    const auto& e = store.entry(i);
    dir.push_back(json{{"name", e.name}, {"shape", e.value.shape}});
  }
  j["arrays"] = dir;
  return j;
}

CheckpointMeta meta_from_json(const json& j) {
  CheckpointMeta meta;
  meta.version = j.at("version").get<uint32_t>();
  meta.epoch = j.at("epoch").get<int64_t>();
  meta.global_step = j.at("global_step").get<int64_t>();
  meta.total_steps = j.at("total_steps").get<int64_t>();
  meta.sampler_rng_state = j.at("sampler_rng_state").get<std::string>();
  meta.speakers = j.at("speakers").get<std::vector<std::string>>();
  meta.stats.mean = j.at("stats_mean").get<std::vector<double>>();
  meta.stats.std = j.at("stats_std").get<std::vector<double>>();
  if (j.contains("config")) meta.config_json = j.at("config").dump();
  return meta;
}

void write_tensor(std::ofstream& f, const Tensor& t) {
  f.write(reinterpret_cast<const char*>(t.data.data()),
          static_cast<std::streamsize>(t.data.size() * sizeof(double)));
}

void read_tensor(std::ifstream& f, Tensor& t) {
  f.read(reinterpret_cast<char*>(t.data.data()),
         static_cast<std::streamsize>(t.data.size() * sizeof(double)));
}

json read_header(std::ifstream& f, const std::filesystem::path& path) {
  char magic[8];
  uint32_t version = 0;
  uint64_t json_len = 0;
  f.read(magic, 8);
  f.read(reinterpret_cast<char*>(&version), 4);
  f.read(reinterpret_cast<char*>(&json_len), 8);
  if (!f || std::memcmp(magic, kMagic, 8) != 0)
    throw IoError("not a checkpoint file: " + path.string());
  if (version != kVersion)
    throw IoError("unsupported checkpoint version " + std::to_string(version) + " in " +
                  path.string());
  std::string header(json_len, '\0');
  f.read(header.data(), static_cast<std::streamsize>(json_len));
  if (!f) throw IoError("truncated checkpoint header: " + path.string());
  return json::parse(header);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const nn::ParamStore& store,
                     const CheckpointMeta& meta) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw IoError("cannot write checkpoint: " + tmp.string());
    const std::string header = meta_to_json(meta, store).dump();
    const uint64_t json_len = header.size();
    f.write(kMagic, 8);
    f.write(reinterpret_cast<const char*>(&kVersion), 4);
    f.write(reinterpret_cast<const char*>(&json_len), 8);
    f.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (int i = 0; i < store.count(); ++i) {
      const auto& e = store.entry(i);
      write_tensor(f, e.value);
      write_tensor(f, e.m);
      write_tensor(f, e.v);
    }
    if (!f) throw IoError("short write on checkpoint: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);  // atomic replace
}

CheckpointMeta load_checkpoint(const std::filesystem::path& path, nn::ParamStore* store) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read checkpoint: " + path.string());
  const json j = read_header(f, path);
  CheckpointMeta meta = meta_from_json(j);

  for (const auto& entry : j.at("arrays")) {
    const std::string name = entry.at("name").get<std::string>();
    const std::vector<int64_t> shape = entry.at("shape").get<std::vector<int64_t>>();
    const int idx = store->find(name);
    if (idx < 0)
      throw IoError("checkpoint array '" + name + "' has no matching parameter (" +
                    path.string() + ")");
    auto& e = store->entry(idx);
    if (e.value.shape != shape)
      throw IoError("checkpoint array '" + name + "' shape mismatch in " + path.string());
    read_tensor(f, e.value);
    read_tensor(f, e.m);
    read_tensor(f, e.v);
  }
  if (!f) throw IoError("truncated checkpoint arrays: " + path.string());
  return meta;
}

CheckpointMeta peek_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read checkpoint: " + path.string());
  return meta_from_json(read_header(f, path));
}

}  // namespace drvc
