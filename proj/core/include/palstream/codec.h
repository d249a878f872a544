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

#ifndef PALSTREAM_CODEC_H_
#define PALSTREAM_CODEC_H_

#include <cstdint>
#include <span>
#include <vector>

#include "palstream/image_io.h"
#include "palstream/kmeans.h"

namespace palstream {

inline constexpr int kColorDepthBits = 24;
inline constexpr int kMinPaletteSize = 2;
inline constexpr int kMaxPaletteSize = 256;

// Bits needed per palette index, ceil(log2(mu)). Throws ContractError unless
// 2 <= mu <= 256.
int index_bits(int mu);

// A palette of mu colors plus one palette index per pixel.
struct QuantizedImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<Rgb> palette;
  std::vector<std::uint8_t> indices;

  int mu() const noexcept { return static_cast<int>(palette.size()); }
  int gamma() const { return index_bits(mu()); }

  // Throws ContractError when sizes or indices are inconsistent.
  void validate() const;

  friend bool operator==(const QuantizedImage&, const QuantizedImage&) = default;
};

// Clusters the image's colors in RGB space with k = mu, maps every pixel to its
// nearest centroid and stores each centroid rounded to 8-bit channels.
// kcfg.k is ignored. Throws ContractError for mu outside [2, 256] and
// InfeasibleError when the image has fewer than mu distinct colors.
QuantizedImage encode(const RgbImage& img, int mu,
                      const kmeans::KmeansConfig& kcfg = {});

RgbImage decode(const QuantizedImage& q);

// PQF1 container: "PQF1", width u32 BE, height u32 BE, mu u16 BE, mu RGB
// triples, then indices packed MSB-first at gamma bits each, zero padded.
inline constexpr std::size_t kPqfHeaderBytes = 14;

std::vector<std::uint8_t> serialize(const QuantizedImage& q);
// Throws FormatError on bad magic, truncation or an index >= mu.
QuantizedImage deserialize(std::span<const std::uint8_t> bytes);

// mu * 24 + width * height * gamma.
std::uint64_t compressed_bits(std::uint64_t width, std::uint64_t height, int mu);

// Original bits over compressed bits.
double compression_ratio(std::uint64_t width, std::uint64_t height, int mu);

}  // namespace palstream

#endif  // PALSTREAM_CODEC_H_
