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

#ifndef PALSTREAM_METRICS_H_
#define PALSTREAM_METRICS_H_

#include <cstddef>
#include <string>
#include <string_view>

#include "palstream/image_io.h"

namespace palstream::metrics {

inline constexpr double kPeakValue = 255.0;

enum class PsnrFormula {
  // 20 log10(255 / sqrt(mse)).
  kCanonical,
  // 20 log10(255 / mse), the literal variant kept for auditing old numbers.
  kLiteralMse,
};

// Parses "canonical" or "paper-eq14". Throws ContractError otherwise.
PsnrFormula parse_psnr_formula(std::string_view name);

// Mean over pixel positions of the squared RGB distance (three channels summed
// inside the norm, averaged over width * height only).
double mse(const RgbImage& a, const RgbImage& b);

// +infinity when the images are identical.
double psnr(const RgbImage& a, const RgbImage& b,
            PsnrFormula formula = PsnrFormula::kCanonical);
double psnr_from_mse(double mse_value,
                     PsnrFormula formula = PsnrFormula::kCanonical);

// Sum of signed sample differences received - original over all 3*W*H
// channel samples.
double frame_error(const RgbImage& received, const RgbImage& original);

// Mean squared difference over all 3*W*H channel samples. Equals mse() / 3.
double frame_mse(const RgbImage& received, const RgbImage& original);

struct FrameMetrics {
  std::size_t frame_index = 0;
  double total_error = 0.0;
  double mse = 0.0;
  // +infinity iff mse == 0.
  double psnr_db = 0.0;
};

// Per-frame loss distortion, PSNR taken from the per-sample mse.
FrameMetrics frame_metrics(std::size_t frame_index, const RgbImage& received,
                           const RgbImage& original);

// Fixed-precision text for reports; "inf" for lossless.
std::string format_psnr(double psnr_db);

}  // namespace palstream::metrics

#endif  // PALSTREAM_METRICS_H_
