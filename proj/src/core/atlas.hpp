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

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "core/tensor.hpp"

namespace glyce {

using CharId = std::uint32_t;

/// On-disk header of a .gatl file. All integers little-endian.
///
///   offset 0  "GATL"
///   offset 4  u32 version (1)
///   offset 8  u32 n_chars
///   offset 12 u16 n_scripts
///   offset 14 u16 d_font
///   offset 16 u8  encoding (0: one byte per pixel, value = byte / 255)
///   offset 17 pixels, [char][script][row][col]
struct AtlasHeader {
  static constexpr char kMagic[4] = {'G', 'A', 'T', 'L'};
  static constexpr std::uint32_t kVersion = 1;
  static constexpr std::uint8_t kEncodingU8 = 0;
  static constexpr std::size_t kSize = 17;

  std::uint32_t version = kVersion;
  std::uint32_t n_chars = 0;
  std::uint16_t n_scripts = 0;
  std::uint16_t d_font = 0;
  std::uint8_t encoding = kEncodingU8;
};

/// Immutable per-character, per-script grayscale bitmaps. Pixels are stored
/// quantized to 1/255 steps so the file format roundtrips bit-exactly.
class GlyphAtlas {
 public:
  GlyphAtlas(std::uint32_t n_chars, std::uint16_t n_scripts, std::uint16_t d_font,
             std::vector<std::uint8_t> pixels);

  std::uint32_t n_chars() const { return n_chars_; }
  std::uint16_t n_scripts() const { return n_scripts_; }
  std::uint16_t d_font() const { return d_font_; }

  double pixel(CharId c, std::size_t script, std::size_t row, std::size_t col) const;
  std::span<const std::uint8_t> raw() const { return pixels_; }

  /// Scripts stacked as input channels: [n_scripts, d_font, d_font].
  ad::Tensor lookup(CharId c) const;

  bool operator==(const GlyphAtlas&) const = default;

 private:
  std::uint32_t n_chars_;
  std::uint16_t n_scripts_;
  std::uint16_t d_font_;
  std::vector<std::uint8_t> pixels_;
};

/// Number of stroke-motif families the synthetic generator partitions
/// `n_chars` characters into. Character c belongs to family c % count.
std::uint32_t motif_family_count(std::uint32_t n_chars);
std::uint32_t motif_family(CharId c, std::uint32_t n_chars);

/// Procedural atlas: each character is a family motif plus character-specific
/// strokes; script s > 0 is a fixed deformation of script 0. Pure function of
/// its arguments.
GlyphAtlas generate_synthetic_atlas(std::uint32_t n_chars, std::uint16_t n_scripts,
                                    std::uint16_t d_font, std::uint64_t seed);

void save_atlas(const GlyphAtlas& atlas, const std::filesystem::path& path);
GlyphAtlas load_atlas(const std::filesystem::path& path);

}  // namespace glyce
