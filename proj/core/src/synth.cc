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

#include "palstream/synth.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "palstream/error.h"

namespace palstream::synth {
namespace {

std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double lattice(std::int64_t x, std::int64_t y, std::uint64_t salt) {
  std::uint64_t h = mix(salt ^ mix(static_cast<std::uint64_t>(x) ^
                                   mix(static_cast<std::uint64_t>(y) + 0x51)));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double smooth(double t) { return t * t * (3.0 - 2.0 * t); }

double value_noise(double x, double y, std::uint64_t salt) {
  double fx = std::floor(x);
  double fy = std::floor(y);
  auto ix = static_cast<std::int64_t>(fx);
  auto iy = static_cast<std::int64_t>(fy);
  double tx = smooth(x - fx);
  double ty = smooth(y - fy);
  double a = lattice(ix, iy, salt);
  double b = lattice(ix + 1, iy, salt);
  double c = lattice(ix, iy + 1, salt);
  double d = lattice(ix + 1, iy + 1, salt);
  return (a + (b - a) * tx) + ((c + (d - c) * tx) - (a + (b - a) * tx)) * ty;
}

// Fractal Brownian motion in [0, 1].
double fbm(double x, double y, std::uint64_t salt, int octaves = 5) {
  double sum = 0.0;
  double amp = 0.5;
  double norm = 0.0;
  for (int o = 0; o < octaves; ++o) {
    sum += amp * value_noise(x, y, salt + static_cast<std::uint64_t>(o) * 977);
    norm += amp;
    x *= 2.0;
    y *= 2.0;
    amp *= 0.5;
  }
  return sum / norm;
}

struct Color {
  double r, g, b;
};

Color lerp(Color a, Color b, double t) {
  return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

std::uint8_t channel(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

struct Blob {
  double cx, cy, rx, ry;
  Color color;
};

void check_size(Resolution size) {
  if (size.width == 0 || size.height == 0) {
    throw ContractError("synthetic media needs positive dimensions");
  }
}

}  // namespace

RgbImage photo(Resolution size, std::uint64_t seed) {
  check_size(size);
  const double w = size.width;
  const double h = size.height;
  // Feature scale follows the height so wide crops of one scene line up.
  const double cell = std::max(8.0, h / 3.0);

  std::mt19937_64 rng(mix(seed));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Blob> blobs(6);
  for (auto& b : blobs) {
    b.cx = unit(rng) * w;
    b.cy = h * (0.45 + 0.5 * unit(rng));
    b.rx = h * (0.05 + 0.15 * unit(rng));
    b.ry = b.rx * (0.5 + unit(rng));
    b.color = {40 + 200 * unit(rng), 30 + 180 * unit(rng), 20 + 160 * unit(rng)};
  }

  const Color sky_top{70, 115, 200};
  const Color sky_low{195, 215, 235};
  const Color grass{35, 85, 40};
  const Color soil{165, 140, 85};
  const Color rock{120, 110, 105};

  RgbImage img(size.width, size.height);
  for (std::uint32_t y = 0; y < size.height; ++y) {
    for (std::uint32_t x = 0; x < size.width; ++x) {
      double u = x / cell;
      double v = y / cell;
      double horizon = h * (0.38 + 0.25 * (fbm(u * 0.5, 0.0, seed + 11, 3) - 0.5));
      Color c;
      if (y < horizon) {
        double t = y / std::max(horizon, 1.0);
        c = lerp(sky_top, sky_low, t);
        double cloud = std::clamp((fbm(u * 1.5, v * 3.0, seed + 23) - 0.5) * 3.0,
                                  0.0, 1.0);
        c = lerp(c, Color{245, 245, 248}, cloud);
      } else {
        double t = fbm(u * 2.0, v * 2.0, seed + 37);
        double m = fbm(u * 4.0, v * 4.0, seed + 41, 4);
        c = lerp(grass, soil, std::clamp(t * 1.6 - 0.3, 0.0, 1.0));
        c = lerp(c, rock, std::clamp((m - 0.55) * 4.0, 0.0, 1.0));
        double depth = (y - horizon) / std::max(h - horizon, 1.0);
        double shade = 0.65 + 0.5 * depth;
        c = {c.r * shade, c.g * shade, c.b * shade};
      }
      for (const auto& b : blobs) {
        double dx = (x - b.cx) / b.rx;
        double dy = (y - b.cy) / b.ry;
        double r2 = dx * dx + dy * dy;
        if (r2 < 1.0) {
          double light = 0.45 + 0.55 * std::sqrt(1.0 - r2) - 0.2 * dx - 0.2 * dy;
          c = {b.color.r * light, b.color.g * light, b.color.b * light};
        }
      }
      std::uint64_t grain = mix(seed ^ (std::uint64_t{y} << 32 | x));
      auto jitter = [&grain]() {
        double j = static_cast<double>(grain & 0xff) / 255.0 * 6.0 - 3.0;
        grain >>= 8;
        return j;
      };
      img.at(y, x) = Rgb{channel(c.r + jitter()), channel(c.g + jitter()),
                         channel(c.b + jitter())};
    }
  }
  return img;
}

RgbImage desktop(Resolution size, std::uint64_t seed) {
  RgbImage img = photo(size, seed);
  std::mt19937_64 rng(mix(seed + 5));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Rgb window_fill{236, 236, 236};
  const Rgb title{52, 92, 160};
  const Rgb glyph{30, 30, 30};
  const Rgb taskbar{28, 32, 40};

  auto fill = [&](std::uint32_t x0, std::uint32_t y0, std::uint32_t x1,
                  std::uint32_t y1, Rgb color) {
    x1 = std::min(x1, size.width);
    y1 = std::min(y1, size.height);
    for (std::uint32_t y = y0; y < y1; ++y) {
      for (std::uint32_t x = x0; x < x1; ++x) img.at(y, x) = color;
    }
  };

  const std::uint32_t bar = std::max<std::uint32_t>(2, size.height / 20);
  fill(0, size.height - bar, size.width, size.height, taskbar);
  for (int win = 0; win < 2; ++win) {
    auto x0 = static_cast<std::uint32_t>(unit(rng) * size.width * 0.4);
    auto y0 = static_cast<std::uint32_t>(unit(rng) * size.height * 0.3);
    auto x1 = x0 + static_cast<std::uint32_t>(size.width * (0.3 + 0.2 * unit(rng)));
    auto y1 = y0 + static_cast<std::uint32_t>(size.height * (0.3 + 0.2 * unit(rng)));
    fill(x0, y0, x1, y1, window_fill);
    fill(x0, y0, x1, y0 + bar, title);
    // Rows of glyph-sized dark marks.
    const std::uint32_t glyph_h = std::max<std::uint32_t>(1, bar / 2);
    for (std::uint32_t y = y0 + 2 * bar; y + glyph_h < std::min(y1, size.height);
         y += 2 * glyph_h + 1) {
      for (std::uint32_t x = x0 + 2; x + 3 < std::min(x1, size.width); x += 4) {
        if (mix(seed ^ (std::uint64_t{y} << 20) ^ x) % 4 != 0) {
          fill(x, y, x + 3, y + glyph_h, glyph);
        }
      }
    }
  }
  return img;
}

std::vector<RgbImage> panning_sequence(Resolution size, std::size_t frames,
                                       std::uint32_t shift_px,
                                       std::uint64_t seed) {
  check_size(size);
  if (frames == 0) return {};
  auto span = static_cast<std::uint32_t>(size.width + shift_px * (frames - 1));
  RgbImage scene = photo({span, size.height}, seed);
  std::vector<RgbImage> out;
  out.reserve(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    RgbImage frame(size.width, size.height);
    auto offset = static_cast<std::uint32_t>(f * shift_px);
    for (std::uint32_t y = 0; y < size.height; ++y) {
      for (std::uint32_t x = 0; x < size.width; ++x) {
        frame.at(y, x) = scene.at(y, x + offset);
      }
    }
    out.push_back(std::move(frame));
  }
  return out;
}

std::vector<RgbImage> static_sequence(Resolution size, std::size_t frames,
                                      std::uint64_t seed) {
  return std::vector<RgbImage>(frames, desktop(size, seed));
}

}  // namespace palstream::synth
