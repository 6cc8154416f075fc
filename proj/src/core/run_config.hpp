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

// Flat key=value run configuration. Every tunable default lives in one table;
// anything not in the table is rejected.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace glyce {

class RunConfig {
 public:
  struct Key {
    const char* name;
    const char* default_value;
    enum Type { kInt, kReal, kText } type;
    bool architecture;  ///< must match when loading a checkpoint
    const char* help;
  };

  /// Every recognized key in display order.
  static const std::vector<Key>& keys();

  RunConfig();

  /// ConfigError on an unknown key or a value of the wrong type.
  void set(const std::string& key, const std::string& value);
  /// Applies `key=value` lines; blank lines and '#' comments are skipped.
  void merge_text(const std::string& text, const std::string& origin);
  void merge_file(const std::filesystem::path& path);

  const std::string& get(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  double get_real(const std::string& key) const;
  std::uint64_t seed() const { return get_size("seed"); }

  bool operator==(const RunConfig& o) const { return values_ == o.values_; }
  const std::map<std::string, std::string>& values() const { return values_; }
  /// Architecture-relevant subset.
  std::map<std::string, std::string> architecture() const;

  /// "key=value\n" for every key, sorted; parseable by merge_text.
  std::string to_text() const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace glyce
