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

#include "core/atlas.hpp"

#include <algorithm>
#include <cmath>

#include "core/binary_io.hpp"
#include "core/error.hpp"
#include "core/rng.hpp"

namespace glyce {

GlyphAtlas::GlyphAtlas(std::uint32_t n_chars, std::uint16_t n_scripts, std::uint16_t d_font,
                       std::vector<std::uint8_t> pixels)
    : n_chars_(n_chars), n_scripts_(n_scripts), d_font_(d_font), pixels_(std::move(pixels)) {
  if (n_chars == 0 || n_scripts == 0 || d_font == 0) {
    throw ConfigError("atlas dimensions must be positive");
  }
  const std::size_t expected =
      std::size_t{n_chars} * n_scripts * std::size_t{d_font} * d_font;
  if (pixels_.size() != expected) {
    throw ShapeError("atlas pixel count " + std::to_string(pixels_.size()) + " != " +
                     std::to_string(expected));
  }
}

double GlyphAtlas::pixel(CharId c, std::size_t script, std::size_t row, std::size_t col) const {
  if (c >= n_chars_ || script >= n_scripts_ || row >= d_font_ || col >= d_font_) {
    throw IndexError("atlas pixel index out of range");
  }
  const std::size_t d = d_font_;
  return pixels_[((std::size_t{c} * n_scripts_ + script) * d + row) * d + col] / 255.0;
}

ad::Tensor GlyphAtlas::lookup(CharId c) const {
  if (c >= n_chars_) {
    throw IndexError("char id " + std::to_string(c) + " outside atlas of " +
                     std::to_string(n_chars_) + " characters");
  }
  const std::size_t block = std::size_t{n_scripts_} * d_font_ * d_font_;
  ad::Tensor t({n_scripts_, d_font_, d_font_});
  const std::uint8_t* src = pixels_.data() + std::size_t{c} * block;
  for (std::size_t i = 0; i < block; ++i) t.values[i] = src[i] / 255.0;
  return t;
}

std::uint32_t motif_family_count(std::uint32_t n_chars) {
  return std::clamp<std::uint32_t>(n_chars / 5, 2, 10);
}

std::uint32_t motif_family(CharId c, std::uint32_t n_chars) {
  return c % motif_family_count(n_chars);
}

namespace {

using Canvas = std::vector<double>;

struct Stroke {
  double x0, y0, x1, y1;
};

Stroke random_stroke(Rng& rng, double d) {
  const double lo = 1.0, hi = d - 1.0;
  return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

void draw(Canvas& c, std::size_t d, const Stroke& s) {
  const double dx = s.x1 - s.x0, dy = s.y1 - s.y0;
  const double len2 = dx * dx + dy * dy;
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t q = 0; q < d; ++q) {
      const double px = static_cast<double>(q) + 0.5, py = static_cast<double>(r) + 0.5;
      double t = len2 > 0 ? ((px - s.x0) * dx + (py - s.y0) * dy) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const double ex = s.x0 + t * dx - px, ey = s.y0 + t * dy - py;
      const double dist = std::sqrt(ex * ex + ey * ey);
      const double ink = std::clamp(1.0 - std::max(0.0, dist - 0.35) / 0.6, 0.0, 1.0);
      double& v = c[r * d + q];
      v = std::max(v, ink);
    }
  }
}

double at(const Canvas& c, std::size_t d, long r, long q) {
  if (r < 0 || q < 0 || r >= static_cast<long>(d) || q >= static_cast<long>(d)) return 0.0;
  return c[static_cast<std::size_t>(r) * d + static_cast<std::size_t>(q)];
}

Canvas thicken(const Canvas& in, std::size_t d) {
  Canvas out(in.size());
  for (long r = 0; r < static_cast<long>(d); ++r)
    for (long q = 0; q < static_cast<long>(d); ++q) {
      const double n = std::max({at(in, d, r - 1, q), at(in, d, r + 1, q), at(in, d, r, q - 1),
                                 at(in, d, r, q + 1)});
      out[static_cast<std::size_t>(r) * d + static_cast<std::size_t>(q)] =
          std::max(at(in, d, r, q), 0.7 * n);
    }
  return out;
}

Canvas erode(const Canvas& in, std::size_t d) {
  Canvas out(in.size());
  for (long r = 0; r < static_cast<long>(d); ++r)
    for (long q = 0; q < static_cast<long>(d); ++q) {
      const double n = (at(in, d, r - 1, q) + at(in, d, r + 1, q) + at(in, d, r, q - 1) +
                        at(in, d, r, q + 1)) /
                       4.0;
      out[static_cast<std::size_t>(r) * d + static_cast<std::size_t>(q)] =
          at(in, d, r, q) * (0.4 + 0.6 * n);
    }
  return out;
}

Canvas shear(const Canvas& in, std::size_t d, double amount, long shift) {
  Canvas out(in.size());
  const double centre = static_cast<double>(d) / 2.0;
  for (long r = 0; r < static_cast<long>(d); ++r) {
    const long off = std::lround((static_cast<double>(r) + 0.5 - centre) * amount) + shift;
    for (long q = 0; q < static_cast<long>(d); ++q)
      out[static_cast<std::size_t>(r) * d + static_cast<std::size_t>(q)] = at(in, d, r, q - off);
  }
  return out;
}

/// Script s > 0 of a character. Seven base deformations; later cycles add a
/// horizontal shift so every script index renders differently.
Canvas deform(const Canvas& base, std::size_t d, std::size_t script) {
  const std::size_t kind = (script - 1) % 7;
  const long cycle = static_cast<long>((script - 1) / 7);
  Canvas c = base;
  switch (kind) {
    case 0: c = thicken(c, d); break;
    case 1: c = shear(c, d, 0.35, 0); break;
    case 2: c = erode(c, d); break;
    case 3: c = shear(c, d, -0.35, 0); break;
    case 4: c = shear(thicken(c, d), d, 0.25, 0); break;
    case 5: c = shear(erode(c, d), d, -0.25, 0); break;
    case 6: c = thicken(thicken(c, d), d); break;
  }
  if (cycle > 0) c = shear(c, d, 0.0, cycle % 2 == 1 ? cycle : -cycle);
  return c;
}

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

double squared_distance(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = (a[i] - b[i]) / 255.0;
    s += diff * diff;
  }
  return s;
}

}  // namespace

GlyphAtlas generate_synthetic_atlas(std::uint32_t n_chars, std::uint16_t n_scripts,
                                    std::uint16_t d_font, std::uint64_t seed) {
  if (n_chars < 2) throw ConfigError("synthetic atlas needs n_chars >= 2");
  if (n_scripts < 1) throw ConfigError("synthetic atlas needs n_scripts >= 1");
  if (d_font < 8) throw ConfigError("synthetic atlas needs d_font >= 8");

  const std::size_t d = d_font, plane = d * d;
  const std::uint32_t families = motif_family_count(n_chars);
  std::vector<std::vector<Stroke>> motifs(families);
  for (std::uint32_t f = 0; f < families; ++f) {
    Rng rng(derive_seed(seed, 1000 + f));
    for (int i = 0; i < 2; ++i) motifs[f].push_back(random_stroke(rng, static_cast<double>(d)));
  }

  // Minimum squared L2 distance between the script-0 bitmaps of any two
  // characters.
  constexpr double kMinSeparation = 1.0;
  constexpr int kMaxAttempts = 1000;

  std::vector<std::uint8_t> pixels(std::size_t{n_chars} * n_scripts * plane);
  std::vector<std::uint8_t> base_q(plane);
  for (std::uint32_t c = 0; c < n_chars; ++c) {
    Canvas base;
    bool accepted = false;
    for (int attempt = 0; attempt < kMaxAttempts && !accepted; ++attempt) {
      Rng rng(derive_seed(derive_seed(seed, 7), std::uint64_t{c} * kMaxAttempts + attempt));
      base.assign(plane, 0.0);
      for (const auto& s : motifs[c % families]) draw(base, d, s);
      for (int i = 0; i < 2; ++i) draw(base, d, random_stroke(rng, static_cast<double>(d)));
      for (std::size_t i = 0; i < plane; ++i) base_q[i] = quantize(base[i]);
      accepted = true;
      for (std::uint32_t prev = 0; prev < c && accepted; ++prev) {
        const std::uint8_t* other = pixels.data() + std::size_t{prev} * n_scripts * plane;
        accepted = squared_distance(base_q.data(), other, plane) >= kMinSeparation;
      }
    }
    if (!accepted) {
      throw ConfigError("cannot render " + std::to_string(n_chars) + " distinct glyphs at d_font=" +
                        std::to_string(d_font));
    }
    std::uint8_t* dst = pixels.data() + std::size_t{c} * n_scripts * plane;
    std::copy(base_q.begin(), base_q.end(), dst);
    for (std::size_t s = 1; s < n_scripts; ++s) {
      const Canvas v = deform(base, d, s);
      for (std::size_t i = 0; i < plane; ++i) dst[s * plane + i] = quantize(v[i]);
    }
  }
  return GlyphAtlas(n_chars, n_scripts, d_font, std::move(pixels));
}

void save_atlas(const GlyphAtlas& atlas, const std::filesystem::path& path) {
  io::Writer w;
  w.put_bytes(AtlasHeader::kMagic, 4);
  w.put<std::uint32_t>(AtlasHeader::kVersion);
  w.put<std::uint32_t>(atlas.n_chars());
  w.put<std::uint16_t>(atlas.n_scripts());
  w.put<std::uint16_t>(atlas.d_font());
  w.put<std::uint8_t>(AtlasHeader::kEncodingU8);
  w.put_bytes(atlas.raw().data(), atlas.raw().size());
  io::write_file(path, w.bytes());
}

GlyphAtlas load_atlas(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  io::Reader r(bytes, path.filename().string());
  char magic[4];
  r.get_bytes(magic, 4, "magic");
  if (std::memcmp(magic, AtlasHeader::kMagic, 4) != 0) r.fail("bad magic (expected GATL)", 0);
  AtlasHeader h;
  h.version = r.get<std::uint32_t>("version");
  if (h.version != AtlasHeader::kVersion) {
    r.fail("unsupported version " + std::to_string(h.version), 4);
  }
  h.n_chars = r.get<std::uint32_t>("n_chars");
  h.n_scripts = r.get<std::uint16_t>("n_scripts");
  h.d_font = r.get<std::uint16_t>("d_font");
  h.encoding = r.get<std::uint8_t>("encoding");
  if (h.encoding != AtlasHeader::kEncodingU8) {
    r.fail("unknown pixel encoding " + std::to_string(h.encoding), 16);
  }
  if (h.n_chars == 0 || h.n_scripts == 0 || h.d_font == 0) r.fail("zero dimension in header", 8);
  const std::size_t expected =
      std::size_t{h.n_chars} * h.n_scripts * std::size_t{h.d_font} * h.d_font;
  if (r.remaining() != expected) {
    throw FormatError(path.filename().string() + ": pixel block at byte offset " +
                      std::to_string(AtlasHeader::kSize) + " has " +
                      std::to_string(r.remaining()) + " bytes, header implies " +
                      std::to_string(expected));
  }
  std::vector<std::uint8_t> pixels(expected);
  r.get_bytes(pixels.data(), expected, "pixels");
  return GlyphAtlas(h.n_chars, h.n_scripts, h.d_font, std::move(pixels));
}

}  // namespace glyce
