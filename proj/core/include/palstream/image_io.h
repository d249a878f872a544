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

#ifndef PALSTREAM_IMAGE_IO_H_
#define PALSTREAM_IMAGE_IO_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace palstream {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend auto operator<=>(const Rgb&, const Rgb&) = default;
};

// Packs a color into 0x00RRGGBB, handy as a hash or sort key.
constexpr std::uint32_t pack_rgb(Rgb c) {
  return (std::uint32_t{c.r} << 16) | (std::uint32_t{c.g} << 8) | c.b;
}

// Display or image geometry in pixels.
struct Resolution {
  std::uint32_t width = 0;
  std::uint32_t height = 0;

  friend auto operator<=>(const Resolution&, const Resolution&) = default;
};

// Row-major grid of 8-bit RGB pixels. Width and height are always >= 1.
class RgbImage {
 public:
  // Filled with black.
  RgbImage(std::uint32_t width, std::uint32_t height);
  RgbImage(std::uint32_t width, std::uint32_t height, std::vector<Rgb> pixels);

  std::uint32_t width() const noexcept { return width_; }
  std::uint32_t height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return pixels_.size(); }
  Resolution resolution() const noexcept { return {width_, height_}; }

  Rgb& at(std::uint32_t row, std::uint32_t col) {
    return pixels_[std::size_t{row} * width_ + col];
  }
  const Rgb& at(std::uint32_t row, std::uint32_t col) const {
    return pixels_[std::size_t{row} * width_ + col];
  }

  std::span<Rgb> pixels() noexcept { return pixels_; }
  std::span<const Rgb> pixels() const noexcept { return pixels_; }

  bool same_size(const RgbImage& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  std::uint32_t width_;
  std::uint32_t height_;
  std::vector<Rgb> pixels_;
};

// Number of distinct colors present in the image.
std::size_t count_distinct_colors(const RgbImage& img);

// Parses a binary P6 PPM with maxval 255. '#' comments are accepted in the
// header. Throws FormatError naming the offending token or byte offset.
RgbImage read_ppm(std::span<const std::uint8_t> bytes);

// Canonical "P6\n<w> <h>\n255\n" followed by raw row-major RGB.
std::vector<std::uint8_t> write_ppm(const RgbImage& img);

RgbImage load_ppm(const std::filesystem::path& path);
void save_ppm(const std::filesystem::path& path, const RgbImage& img);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::uint8_t> bytes);

}  // namespace palstream

#endif  // PALSTREAM_IMAGE_IO_H_
