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

#include "palstream/metrics.h"

#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "palstream/error.h"

namespace palstream::metrics {
namespace {

void check_same_size(const RgbImage& a, const RgbImage& b) {
  if (!a.same_size(b)) {
    throw ContractError(fmt::format("image sizes differ: {}x{} vs {}x{}",
                                    a.width(), a.height(), b.width(),
                                    b.height()));
  }
}

// Sum over all channel samples of (a - b)^2.
double sum_squared_diff(const RgbImage& a, const RgbImage& b) {
  check_same_size(a, b);
  auto pa = a.pixels();
  auto pb = b.pixels();
  std::uint64_t acc = 0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    int dr = int{pa[i].r} - pb[i].r;
    int dg = int{pa[i].g} - pb[i].g;
    int db = int{pa[i].b} - pb[i].b;
    acc += static_cast<std::uint64_t>(dr * dr + dg * dg + db * db);
  }
  return static_cast<double>(acc);
}

}  // namespace

PsnrFormula parse_psnr_formula(std::string_view name) {
  if (name == "canonical") return PsnrFormula::kCanonical;
  if (name == "paper-eq14") return PsnrFormula::kLiteralMse;
  throw ContractError(fmt::format(
      "unknown PSNR formula '{}', expected canonical or paper-eq14", name));
}

double mse(const RgbImage& a, const RgbImage& b) {
  return sum_squared_diff(a, b) / static_cast<double>(a.pixel_count());
}

double psnr_from_mse(double mse_value, PsnrFormula formula) {
  if (mse_value == 0.0) return std::numeric_limits<double>::infinity();
  switch (formula) {
    case PsnrFormula::kCanonical:
      return 20.0 * std::log10(kPeakValue / std::sqrt(mse_value));
    case PsnrFormula::kLiteralMse:
      return 20.0 * std::log10(kPeakValue / mse_value);
  }
  return 0.0;
}

double psnr(const RgbImage& a, const RgbImage& b, PsnrFormula formula) {
  return psnr_from_mse(mse(a, b), formula);
}

double frame_error(const RgbImage& received, const RgbImage& original) {
  check_same_size(received, original);
  auto pr = received.pixels();
  auto po = original.pixels();
  std::int64_t acc = 0;
  for (std::size_t i = 0; i < pr.size(); ++i) {
    acc += (int{pr[i].r} - po[i].r) + (int{pr[i].g} - po[i].g) +
           (int{pr[i].b} - po[i].b);
  }
  return static_cast<double>(acc);
}

double frame_mse(const RgbImage& received, const RgbImage& original) {
  return sum_squared_diff(received, original) /
         (3.0 * static_cast<double>(received.pixel_count()));
}

FrameMetrics frame_metrics(std::size_t frame_index, const RgbImage& received,
                           const RgbImage& original) {
  FrameMetrics m;
  m.frame_index = frame_index;
  m.total_error = frame_error(received, original);
  m.mse = frame_mse(received, original);
  m.psnr_db = psnr_from_mse(m.mse);
  return m;
}

std::string format_psnr(double psnr_db) {
  if (std::isinf(psnr_db) && psnr_db > 0) return "inf";
  return fmt::format("{:.4f}", psnr_db);
}

}  // namespace palstream::metrics
