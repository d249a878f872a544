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

#include "palstream/image_io.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iterator>
#include <string>
#include <string_view>

#include <fmt/core.h>

#include "palstream/error.h"

namespace palstream {

RgbImage::RgbImage(std::uint32_t width, std::uint32_t height)
    : RgbImage(width, height,
               std::vector<Rgb>(std::size_t{width} * height)) {}

RgbImage::RgbImage(std::uint32_t width, std::uint32_t height,
                   std::vector<Rgb> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width_ == 0 || height_ == 0) {
    throw ContractError(
        fmt::format("image dimensions must be positive, got {}x{}", width_,
                    height_));
  }
  if (pixels_.size() != std::size_t{width_} * height_) {
    throw ContractError(fmt::format(
        "image {}x{} needs {} pixels, got {}", width_, height_,
        std::size_t{width_} * height_, pixels_.size()));
  }
}

std::size_t count_distinct_colors(const RgbImage& img) {
  std::vector<bool> seen(std::size_t{1} << 24);
  std::size_t distinct = 0;
  for (const Rgb& c : img.pixels()) {
    auto key = pack_rgb(c);
    if (!seen[key]) {
      seen[key] = true;
      ++distinct;
    }
  }
  return distinct;
}

namespace {

// Tokenizer over the PPM header. Tracks the byte offset for diagnostics.
class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }

  // Next whitespace-delimited token, skipping '#' comments.
  std::string_view next_token(std::string_view what) {
    skip_space_and_comments();
    std::size_t start = pos_;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]) &&
           bytes_[pos_] != '#') {
      ++pos_;
    }
    if (start == pos_) {
      throw FormatError(fmt::format(
          "PPM header truncated at byte {} while reading {}", start, what));
    }
    return {reinterpret_cast<const char*>(bytes_.data()) + start,
            pos_ - start};
  }

  std::uint32_t next_uint(std::string_view what) {
    std::size_t start_hint = pos_;
    std::string_view tok = next_token(what);
    std::uint32_t value = 0;
    auto [end, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || end != tok.data() + tok.size()) {
      throw FormatError(fmt::format("PPM {} token '{}' near byte {} is not an "
                                    "unsigned integer",
                                    what, tok, start_hint));
    }
    return value;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void consume_raster_separator() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw FormatError(fmt::format(
          "PPM header must end with a single whitespace byte at offset {}",
          pos_));
    }
    ++pos_;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' &&
               bytes_[pos_] != '\r') {
          ++pos_;
        }
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

RgbImage read_ppm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    std::string got;
    for (std::size_t i = 0; i < std::min<std::size_t>(2, bytes.size()); ++i) {
      got += std::isprint(bytes[i]) ? static_cast<char>(bytes[i]) : '?';
    }
    throw FormatError(fmt::format("bad PPM magic '{}', expected 'P6'", got));
  }
  HeaderReader header(bytes);
  if (std::string_view magic = header.next_token("magic"); magic != "P6") {
    throw FormatError(fmt::format("bad PPM magic '{}', expected 'P6'", magic));
  }
  std::uint32_t width = header.next_uint("width");
  std::uint32_t height = header.next_uint("height");
  std::uint32_t maxval = header.next_uint("maxval");
  if (width == 0 || height == 0) {
    throw FormatError(
        fmt::format("PPM has zero dimension {}x{}", width, height));
  }
  if (maxval != 255) {
    throw FormatError(
        fmt::format("PPM maxval token '{}' unsupported, expected 255", maxval));
  }
  header.consume_raster_separator();

  std::size_t payload = std::size_t{width} * height * 3;
  std::size_t start = header.offset();
  if (bytes.size() - start < payload) {
    throw FormatError(fmt::format(
        "PPM payload truncated at byte offset {}: need {} raster bytes, have {}",
        bytes.size(), payload, bytes.size() - start));
  }
  std::vector<Rgb> pixels(std::size_t{width} * height);
  const std::uint8_t* src = bytes.data() + start;
  for (Rgb& px : pixels) {
    px = Rgb{src[0], src[1], src[2]};
    src += 3;
  }
  return RgbImage(width, height, std::move(pixels));
}

std::vector<std::uint8_t> write_ppm(const RgbImage& img) {
  std::string header = fmt::format("P6\n{} {}\n255\n", img.width(), img.height());
  std::vector<std::uint8_t> out;
  out.reserve(header.size() + img.pixel_count() * 3);
  out.insert(out.end(), header.begin(), header.end());
  for (const Rgb& px : img.pixels()) {
    out.push_back(px.r);
    out.push_back(px.g);
    out.push_back(px.b);
  }
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError(fmt::format("cannot open '{}'", path.string()));
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw FormatError(fmt::format("cannot write '{}'", path.string()));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw FormatError(fmt::format("short write to '{}'", path.string()));
  }
}

RgbImage load_ppm(const std::filesystem::path& path) {
  return read_ppm(read_file_bytes(path));
}

void save_ppm(const std::filesystem::path& path, const RgbImage& img) {
  write_file_bytes(path, write_ppm(img));
}

}  // namespace palstream
