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

#include "core/checkpoint.hpp"

#include <charconv>
#include <cstring>

#include "core/binary_io.hpp"
#include "core/error.hpp"

namespace glyce {

namespace {

constexpr char kMagic[4] = {'G', 'C', 'K', 'P'};
constexpr std::uint32_t kMaxRank = 8;

}  // namespace

const ad::Tensor* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, t] : tensors)
    if (n == name) return &t;
  return nullptr;
}

const std::string& Checkpoint::meta_at(const std::string& key) const {
  const auto it = meta.find(key);
  if (it == meta.end()) throw FormatError("checkpoint: missing meta key '" + key + "'");
  return it->second;
}

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& c) {
  io::Writer w;
  w.put_bytes(kMagic, 4);
  w.put<std::uint32_t>(Checkpoint::kVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.meta.size()));
  for (const auto& [k, v] : c.meta) {
    w.put_string(k);
    w.put_string(v);
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.tensors.size()));
  for (const auto& [name, t] : c.tensors) {
    w.put_string(name);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.shape.size()));
    for (std::size_t d : t.shape) w.put<std::uint32_t>(static_cast<std::uint32_t>(d));
    for (double v : t.values) w.put<double>(v);
  }
  return std::move(w.bytes());
}

Checkpoint parse_checkpoint(const std::vector<std::uint8_t>& bytes, const std::string& what) {
  io::Reader r(bytes, what);
  char magic[4];
  r.get_bytes(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) r.fail("bad magic (not a checkpoint)", 0);
  const auto version = r.get<std::uint32_t>("version");
  if (version != Checkpoint::kVersion) {
    r.fail("unsupported version " + std::to_string(version) + " (expected " +
               std::to_string(Checkpoint::kVersion) + ")",
           4);
  }
  Checkpoint c;
  const auto n_meta = r.get<std::uint32_t>("meta count");
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string k = r.get_string("meta key");
    c.meta[k] = r.get_string("meta value for '" + k + "'");
  }
  const auto n_tensors = r.get<std::uint32_t>("tensor count");
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    const std::size_t at = r.offset();
    std::string name = r.get_string("tensor name");
    const auto rank = r.get<std::uint32_t>("rank of '" + name + "'");
    if (rank == 0 || rank > kMaxRank) r.fail("tensor '" + name + "' has invalid rank", at);
    ad::Shape shape(rank);
    std::size_t count = 1;
    for (auto& d : shape) {
      d = r.get<std::uint32_t>("shape of '" + name + "'");
      if (d == 0) r.fail("tensor '" + name + "' has a zero extent", at);
      count *= d;
    }
    r.need(count * sizeof(double), "values of '" + name + "'");
    std::vector<double> values(count);
    for (auto& v : values) v = r.get<double>("values of '" + name + "'");
    c.tensors.emplace_back(std::move(name), ad::Tensor(std::move(shape), std::move(values)));
  }
  if (r.remaining() != 0) {
    r.fail(std::to_string(r.remaining()) + " unexpected trailing bytes", r.offset());
  }
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  io::write_file(path, serialize_checkpoint(c));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(io::read_file(path), path.string());
}

void add_tensors(Checkpoint& c, const std::string& prefix, const ParamSet& ps) {
  for (const auto& it : ps.items()) {
    ad::Tensor t(it.tensor->shape, it.tensor->values);
    c.tensors.emplace_back(prefix + it.name, std::move(t));
  }
}

void read_tensors(const Checkpoint& c, const std::string& prefix, const ParamSet& ps) {
  for (const auto& it : ps.items()) {
    const std::string key = prefix + it.name;
    const ad::Tensor* t = c.find(key);
    if (t == nullptr) throw FormatError("checkpoint: missing tensor '" + key + "'");
    if (t->shape != it.tensor->shape) {
      throw FormatError("checkpoint: tensor '" + key + "' has shape " + ad::shape_str(t->shape) +
                        ", model expects " + ad::shape_str(it.tensor->shape));
    }
  }
  for (const auto& it : ps.items()) it.tensor->values = c.find(prefix + it.name)->values;
}

std::string exact_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

double parse_exact_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw FormatError(what + ": expected a number, found '" + s + "'");
  }
  return v;
}

}  // namespace glyce
