// Copyright 2026 The palstream Authors
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

#include "palstream/codec.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string_view>

#include <fmt/core.h>

#include "palstream/error.h"

namespace palstream {

int index_bits(int mu) {
  if (mu < kMinPaletteSize || mu > kMaxPaletteSize) {
    throw ContractError(
        fmt::format("palette size mu = {} outside [{}, {}]", mu,
                    kMinPaletteSize, kMaxPaletteSize));
  }
  return std::bit_width(static_cast<unsigned>(mu - 1));
}

void QuantizedImage::validate() const {
  int m = mu();
  index_bits(m);
  if (width == 0 || height == 0) {
    throw ContractError("quantized image has a zero dimension");
  }
  if (indices.size() != std::size_t{width} * height) {
    throw ContractError(fmt::format("{} indices for a {}x{} image",
                                    indices.size(), width, height));
  }
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= m) {
      throw ContractError(
          fmt::format("index {} at pixel {} >= mu = {}", indices[i], i, m));
    }
  }
}

namespace {

constexpr std::string_view kMagic = "PQF1";

struct ColorHistogram {
  std::vector<Rgb> colors;
  std::vector<double> counts;
  std::vector<std::uint32_t> pixel_to_color;
};

ColorHistogram build_histogram(const RgbImage& img) {
  auto pixels = img.pixels();
  std::vector<std::uint64_t> keyed(pixels.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    keyed[i] = (std::uint64_t{pack_rgb(pixels[i])} << 32) | i;
  }
  std::sort(keyed.begin(), keyed.end());

  ColorHistogram h;
  h.pixel_to_color.resize(pixels.size());
  std::uint64_t prev = ~std::uint64_t{0};
  for (std::uint64_t k : keyed) {
    std::uint64_t color = k >> 32;
    if (color != prev) {
      h.colors.push_back(pixels[k & 0xffffffffu]);
      h.counts.push_back(0.0);
      prev = color;
    }
    h.counts.back() += 1.0;
    h.pixel_to_color[k & 0xffffffffu] =
        static_cast<std::uint32_t>(h.colors.size() - 1);
  }
  return h;
}

std::uint8_t to_channel(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    out.push_back(static_cast<std::uint8_t>(v >> shift));
  }
}

std::uint32_t get_be(std::span<const std::uint8_t> bytes, std::size_t offset,
                     int width) {
  std::uint32_t v = 0;
  for (int i = 0; i < width; ++i) v = (v << 8) | bytes[offset + i];
  return v;
}

}  // namespace

QuantizedImage encode(const RgbImage& img, int mu,
                      const kmeans::KmeansConfig& kcfg) {
  index_bits(mu);
  ColorHistogram hist = build_histogram(img);
  if (hist.colors.size() < static_cast<std::size_t>(mu)) {
    throw InfeasibleError(fmt::format(
        "mu = {} exceeds the image's {} distinct colors", mu,
        hist.colors.size()));
  }

  std::vector<double> coords;
  coords.reserve(hist.colors.size() * 3);
  for (const Rgb& c : hist.colors) {
    coords.push_back(c.r);
    coords.push_back(c.g);
    coords.push_back(c.b);
  }
  kmeans::PointSet points(3, std::move(coords), std::move(hist.counts));
  kmeans::KmeansConfig cfg = kcfg;
  cfg.k = static_cast<std::size_t>(mu);
  kmeans::Clustering clusters = kmeans::run(points, cfg);

  QuantizedImage q;
  q.width = img.width();
  q.height = img.height();
  q.palette.reserve(cfg.k);
  for (std::size_t j = 0; j < cfg.k; ++j) {
    auto c = clusters.centers.point(j);
    q.palette.push_back(Rgb{to_channel(c[0]), to_channel(c[1]), to_channel(c[2])});
  }
  q.indices.resize(img.pixel_count());
  for (std::size_t i = 0; i < q.indices.size(); ++i) {
    q.indices[i] = static_cast<std::uint8_t>(
        clusters.membership[hist.pixel_to_color[i]]);
  }
  return q;
}

RgbImage decode(const QuantizedImage& q) {
  q.validate();
  std::vector<Rgb> pixels(q.indices.size());
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    pixels[i] = q.palette[q.indices[i]];
  }
  return RgbImage(q.width, q.height, std::move(pixels));
}

std::vector<std::uint8_t> serialize(const QuantizedImage& q) {
  q.validate();
  const int gamma = q.gamma();
  const std::uint64_t index_bits_total = std::uint64_t{q.indices.size()} * gamma;

  std::vector<std::uint8_t> out;
  out.reserve(kPqfHeaderBytes + q.palette.size() * 3 + (index_bits_total + 7) / 8);
  for (char c : kMagic) out.push_back(static_cast<std::uint8_t>(c));
  put_u32(out, q.width);
  put_u32(out, q.height);
  out.push_back(static_cast<std::uint8_t>(q.mu() >> 8));
  out.push_back(static_cast<std::uint8_t>(q.mu() & 0xff));
  for (const Rgb& c : q.palette) {
    out.push_back(c.r);
    out.push_back(c.g);
    out.push_back(c.b);
  }

  std::uint32_t acc = 0;
  int filled = 0;
  for (std::uint8_t index : q.indices) {
    acc = (acc << gamma) | index;
    filled += gamma;
    while (filled >= 8) {
      filled -= 8;
      out.push_back(static_cast<std::uint8_t>(acc >> filled));
    }
    acc &= (1u << filled) - 1;
  }
  if (filled > 0) out.push_back(static_cast<std::uint8_t>(acc << (8 - filled)));
  return out;
}

QuantizedImage deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kPqfHeaderBytes) {
    throw FormatError(fmt::format("PQF1 header truncated: {} of {} bytes",
                                  bytes.size(), kPqfHeaderBytes));
  }
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw FormatError("bad PQF1 magic at byte offset 0");
  }
  QuantizedImage q;
  q.width = get_be(bytes, 4, 4);
  q.height = get_be(bytes, 8, 4);
  int mu = static_cast<int>(get_be(bytes, 12, 2));
  if (q.width == 0 || q.height == 0) {
    throw FormatError(
        fmt::format("PQF1 has zero dimension {}x{}", q.width, q.height));
  }
  if (mu < kMinPaletteSize || mu > kMaxPaletteSize) {
    throw FormatError(fmt::format("PQF1 mu = {} at byte offset 12 outside "
                                  "[2, 256]",
                                  mu));
  }
  const int gamma = index_bits(mu);
  const std::uint64_t pixel_count = std::uint64_t{q.width} * q.height;
  const std::uint64_t expected = kPqfHeaderBytes + std::uint64_t(mu) * 3 +
                                 (pixel_count * gamma + 7) / 8;
  if (bytes.size() != expected) {
    throw FormatError(fmt::format(
        "PQF1 size mismatch: {}x{} mu={} needs {} bytes, got {}", q.width,
        q.height, mu, expected, bytes.size()));
  }

  std::size_t pos = kPqfHeaderBytes;
  q.palette.resize(mu);
  for (Rgb& c : q.palette) {
    c = Rgb{bytes[pos], bytes[pos + 1], bytes[pos + 2]};
    pos += 3;
  }

  q.indices.resize(pixel_count);
  const std::uint32_t mask = (1u << gamma) - 1;
  std::uint32_t acc = 0;
  int filled = 0;
  for (std::size_t i = 0; i < pixel_count; ++i) {
    while (filled < gamma) {
      acc = (acc << 8) | bytes[pos++];
      filled += 8;
    }
    filled -= gamma;
    std::uint32_t index = (acc >> filled) & mask;
    if (index >= static_cast<std::uint32_t>(mu)) {
      throw FormatError(fmt::format(
          "PQF1 index {} for pixel {} (byte offset {}) >= mu = {}", index, i,
          pos - 1, mu));
    }
    q.indices[i] = static_cast<std::uint8_t>(index);
    acc &= (1u << filled) - 1;
  }
  if (acc != 0) {
    throw FormatError(fmt::format("PQF1 padding bits at byte offset {} are not "
                                  "zero",
                                  bytes.size() - 1));
  }
  return q;
}

std::uint64_t compressed_bits(std::uint64_t width, std::uint64_t height,
                              int mu) {
  if (width == 0 || height == 0) {
    throw ContractError("compression ratio needs positive dimensions");
  }
  return std::uint64_t(mu) * kColorDepthBits +
         width * height * static_cast<std::uint64_t>(index_bits(mu));
}

double compression_ratio(std::uint64_t width, std::uint64_t height, int mu) {
  double original = static_cast<double>(kColorDepthBits) *
                    static_cast<double>(width) * static_cast<double>(height);
  return original / static_cast<double>(compressed_bits(width, height, mu));
}

}  // namespace palstream
