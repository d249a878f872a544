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

#ifndef PALSTREAM_SYNTH_H_
#define PALSTREAM_SYNTH_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "palstream/image_io.h"

// Deterministic procedural test media. Real photographs are not shipped, so
// tests, benchmarks and demos draw on these instead.
namespace palstream::synth {

// Natural-looking scene: fractal value-noise terrain under a sky gradient,
// a few shaded blobs and mild sensor noise. Thousands of distinct colors.
RgbImage photo(Resolution size, std::uint64_t seed);

// Desktop screen: photographic wallpaper with flat-colored windows, title
// bars and text-like glyph rows on top.
RgbImage desktop(Resolution size, std::uint64_t seed);

// Camera pan across one wide scene, shifted shift_px columns per frame.
std::vector<RgbImage> panning_sequence(Resolution size, std::size_t frames,
                                       std::uint32_t shift_px,
                                       std::uint64_t seed);

// The same desktop frame repeated.
std::vector<RgbImage> static_sequence(Resolution size, std::size_t frames,
                                      std::uint64_t seed);

}  // namespace palstream::synth

#endif  // PALSTREAM_SYNTH_H_
