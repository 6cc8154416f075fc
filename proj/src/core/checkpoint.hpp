// Copyright 2026 The Glyce Desk Authors.
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

// Named-tensor container (.gckp), little-endian:
//
//   "GCKP"  u32 version (1)
//   u32 n_meta,    n_meta x { str key, str value }
//   u32 n_tensors, n_tensors x { str name, u32 rank, u32 dims[rank], f64 values[] }
//
// where str is u32 length followed by bytes. Nothing may follow the last tensor.

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "core/params.hpp"
#include "core/tensor.hpp"

namespace glyce {

struct Checkpoint {
  static constexpr std::uint32_t kVersion = 1;

  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, ad::Tensor>> tensors;

  const ad::Tensor* find(const std::string& name) const;
  /// FormatError naming the key when absent.
  const std::string& meta_at(const std::string& key) const;
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& c);
Checkpoint parse_checkpoint(const std::vector<std::uint8_t>& bytes, const std::string& what);

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Appends every tensor of `ps` as prefix + name.
void add_tensors(Checkpoint& c, const std::string& prefix, const ParamSet& ps);
/// Copies prefix + name into each tensor of `ps`. FormatError naming the
/// tensor key on a missing entry or shape mismatch.
void read_tensors(const Checkpoint& c, const std::string& prefix, const ParamSet& ps);

/// Shortest text that parses back to the identical double.
std::string exact_double(double v);
double parse_exact_double(const std::string& s, const std::string& what);

}  // namespace glyce
