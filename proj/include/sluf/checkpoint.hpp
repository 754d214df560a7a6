// Copyright 2026 SLUF Authors.
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

#pragma once

#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "sluf/graph.hpp"

namespace sluf {

// Checkpoint layout: magic "SLUF1\n", a UTF-8 JSON header mapping each
// parameter name to {shape, byte_offset}, a NUL byte, then the raw
// little-endian 64-bit float payload. Offsets are relative to the end of
// the NUL. Keys beginning with "__" are metadata, not tensors; "__meta__"
// echoes the model kind and its resolved config.
inline constexpr char kCheckpointMagic[] = "SLUF1\n";

inline void write_le64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

inline double read_le64(const char* p) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b)
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[b])) << (8 * b);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

inline void save_checkpoint(const ParamStore& store, const std::string& path,
                            const std::string& model_kind = "",
                            const std::map<std::string, std::string>& config = {}) {
  nlohmann::json header = nlohmann::json::object();
  if (!model_kind.empty() || !config.empty()) {
    header["__meta__"] = {{"model", model_kind}, {"config", config}};
  }
  std::string payload;
  std::int64_t offset = 0;
  for (const auto& [name, p] : store.all()) {
    check(name.rfind("__", 0) != 0, "checkpoint: param name '", name, "' collides with metadata");
    header[name] = {{"shape", p.value.shape}, {"byte_offset", offset}};
    for (double v : p.value.data) write_le64(payload, v);
    offset += 8 * p.value.numel();
  }
  std::ofstream f(path, std::ios::binary);
  check(f.good(), "checkpoint: cannot open '", path, "' for writing");
  f << kCheckpointMagic;
  f << header.dump();
  f.put('\0');
  f.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  check(f.good(), "checkpoint: write to '", path, "' failed");
}

struct CheckpointMeta {
  std::string model_kind;
  std::map<std::string, std::string> config;
};

// Loads into a fresh store. Existing params in `store` are not allowed;
// pass an empty one.
inline CheckpointMeta load_checkpoint(ParamStore& store, const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  check(f.good(), "checkpoint: cannot open '", path, "'");
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  std::size_t magic_len = std::strlen(kCheckpointMagic);
  check(bytes.size() > magic_len && bytes.compare(0, magic_len, kCheckpointMagic) == 0,
        "checkpoint: '", path, "' has wrong magic");
  std::size_t nul = bytes.find('\0', magic_len);
  check(nul != std::string::npos, "checkpoint: '", path, "' missing header terminator");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(magic_len, nul - magic_len));
  } catch (const std::exception& e) {
    fail("checkpoint: '", path, "' bad header: ", e.what());
  }
  const char* payload = bytes.data() + nul + 1;
  std::size_t payload_size = bytes.size() - nul - 1;

  CheckpointMeta meta;
  if (header.contains("__meta__")) {
    const auto& m = header["__meta__"];
    meta.model_kind = m.value("model", "");
    if (m.contains("config"))
      for (auto& [k, v] : m["config"].items()) meta.config[k] = v.get<std::string>();
  }
  for (auto& [name, entry] : header.items()) {
    if (name.rfind("__", 0) == 0) continue;
    std::vector<std::int64_t> shape = entry["shape"].get<std::vector<std::int64_t>>();
    std::int64_t off = entry["byte_offset"].get<std::int64_t>();
    Tensor t(shape);
    check(off >= 0 && static_cast<std::size_t>(off + 8 * t.numel()) <= payload_size,
          "checkpoint: tensor '", name, "' overruns payload");
    for (std::int64_t i = 0; i < t.numel(); ++i) t.data[i] = read_le64(payload + off + 8 * i);
    store.create(name, std::move(t));
  }
  return meta;
}

}  // namespace sluf
