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

#include "palstream/qos.h"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/core.h>

#include "palstream/codec.h"
#include "palstream/csv.h"
#include "palstream/error.h"

namespace palstream::qos {
namespace {

constexpr std::string_view kProfileKeys[] = {"resolution", "cpu", "battery",
                                             "bandwidth_kbps"};

Resolution parse_resolution(std::string_view key, std::string_view value) {
  auto x = value.find_first_of("xX");
  if (x == std::string_view::npos) {
    throw ProfileError(std::string(key),
                       fmt::format("'{}' is not WIDTHxHEIGHT", value));
  }
  long long w = 0;
  long long h = 0;
  try {
    w = csv::parse_int(value.substr(0, x), "width");
    h = csv::parse_int(value.substr(x + 1), "height");
  } catch (const FormatError&) {
    throw ProfileError(std::string(key),
                       fmt::format("'{}' is not WIDTHxHEIGHT", value));
  }
  if (w <= 0 || h <= 0 || w > UINT32_MAX || h > UINT32_MAX) {
    throw ProfileError(std::string(key),
                       fmt::format("'{}' must have positive dimensions", value));
  }
  return {static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(h)};
}

double parse_number(std::string_view key, std::string_view value) {
  try {
    return csv::parse_double(value, key);
  } catch (const FormatError&) {
    throw ProfileError(std::string(key),
                       fmt::format("'{}' is not a number", value));
  }
}

double parse_fraction(std::string_view key, std::string_view value) {
  double v = parse_number(key, value);
  if (v < 0.0 || v > 1.0) {
    throw ProfileError(std::string(key),
                       fmt::format("{} outside [0, 1]", value));
  }
  return v;
}

}  // namespace

DeviceProfile parse_profile(std::string_view text) {
  std::map<std::string, std::string, std::less<>> entries;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = csv::trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ProfileError(std::string(csv::trim(line)),
                         "expected key=value");
    }
    std::string key(csv::trim(line.substr(0, eq)));
    std::string_view value = csv::trim(line.substr(eq + 1));
    if (std::find(std::begin(kProfileKeys), std::end(kProfileKeys), key) ==
        std::end(kProfileKeys)) {
      throw ProfileError(key, "unknown key");
    }
    if (!entries.emplace(key, std::string(value)).second) {
      throw ProfileError(key, "given more than once");
    }
  }
  for (std::string_view key : kProfileKeys) {
    if (entries.find(key) == entries.end()) {
      throw ProfileError(std::string(key), "missing");
    }
  }

  DeviceProfile p;
  p.resolution = parse_resolution("resolution", entries.find("resolution")->second);
  p.cpu = parse_fraction("cpu", entries.find("cpu")->second);
  p.battery = parse_fraction("battery", entries.find("battery")->second);
  p.bandwidth_kbps =
      parse_number("bandwidth_kbps", entries.find("bandwidth_kbps")->second);
  if (p.bandwidth_kbps < 0.0) {
    throw ProfileError("bandwidth_kbps", "must be >= 0");
  }
  return p;
}

std::string format_profile(const DeviceProfile& p) {
  return fmt::format("resolution={}x{}\ncpu={}\nbattery={}\nbandwidth_kbps={}\n",
                     p.resolution.width, p.resolution.height,
                     csv::format_double(p.cpu), csv::format_double(p.battery),
                     csv::format_double(p.bandwidth_kbps));
}

DeviceClass classify_device(Resolution r) {
  if (r.width == 0 || r.height == 0) {
    throw ContractError("device resolution must be positive");
  }
  return (r.width <= kThinClientMax.width && r.height <= kThinClientMax.height)
             ? DeviceClass::kThinClient
             : DeviceClass::kDesktop;
}

double adjust_target_psnr(double sigma_kbps, double theta_kbps,
                          double default_psnr) {
  if (!(theta_kbps > 0.0) || sigma_kbps < 0.0) {
    throw ContractError(fmt::format(
        "need theta > 0 and sigma >= 0, got theta={} sigma={}", theta_kbps,
        sigma_kbps));
  }
  if (default_psnr < kMinAcceptablePsnr || default_psnr > kMaxAcceptablePsnr) {
    throw ContractError(
        fmt::format("default PSNR {} outside [25, 50]", default_psnr));
  }
  double deficit_tenths = (theta_kbps - sigma_kbps) / theta_kbps * 10.0;
  // Absorb rounding so an exact 20% deficit is two steps, not three.
  double steps = std::max(0.0, std::ceil(deficit_tenths - 1e-9));
  return std::clamp(default_psnr - steps, kMinAcceptablePsnr,
                    kMaxAcceptablePsnr);
}

EstimationTable::EstimationTable(std::vector<EstimationRow> rows)
    : rows_(std::move(rows)) {
  for (const auto& row : rows_) {
    if (row.psnr_db < kMinAcceptablePsnr || row.psnr_db > kMaxAcceptablePsnr) {
      throw ContractError(fmt::format(
          "estimation row PSNR {} outside [25, 50]", row.psnr_db));
    }
    if (!(row.estimated_size_kb > 0.0)) {
      throw ContractError(fmt::format("estimation row size {} must be positive",
                                      row.estimated_size_kb));
    }
    if (row.resolution.width == 0 || row.resolution.height == 0) {
      throw ContractError("estimation row resolution must be positive");
    }
  }
}

bool EstimationTable::has_class(DeviceClass c) const {
  return std::any_of(rows_.begin(), rows_.end(),
                     [c](const auto& r) { return r.device_class == c; });
}

EstimationTable parse_estimation_table(std::string_view text) {
  csv::Document doc = csv::parse(
      text, {"device_class", "width", "height", "psnr_db", "estimated_size_kb"});
  std::vector<EstimationRow> rows;
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    const auto& f = doc.rows[r];
    std::size_t line = doc.line_numbers[r];
    EstimationRow row;
    long long cls = csv::parse_int(f[0], "device_class", line);
    if (cls != 1 && cls != 2) {
      throw FormatError(fmt::format("device_class {} on line {} must be 1 or 2",
                                    cls, line));
    }
    row.device_class = static_cast<DeviceClass>(cls);
    long long w = csv::parse_int(f[1], "width", line);
    long long h = csv::parse_int(f[2], "height", line);
    if (w <= 0 || h <= 0 || w > UINT32_MAX || h > UINT32_MAX) {
      throw FormatError(fmt::format("bad resolution {}x{} on line {}", w, h, line));
    }
    row.resolution = {static_cast<std::uint32_t>(w),
                      static_cast<std::uint32_t>(h)};
    row.psnr_db = csv::parse_double(f[3], "psnr_db", line);
    row.estimated_size_kb = csv::parse_double(f[4], "estimated_size_kb", line);
    if (row.psnr_db < kMinAcceptablePsnr || row.psnr_db > kMaxAcceptablePsnr ||
        !(row.estimated_size_kb > 0.0)) {
      throw FormatError(fmt::format(
          "row on line {} needs PSNR in [25, 50] and a positive size", line));
    }
    rows.push_back(row);
  }
  return EstimationTable(std::move(rows));
}

std::string format_estimation_table(const EstimationTable& table,
                                    const std::vector<std::string>& notes) {
  std::string out;
  for (const auto& note : notes) out += "# " + note + "\n";
  out += "device_class,width,height,psnr_db,estimated_size_kb\n";
  for (const auto& row : table.rows()) {
    out += fmt::format("{},{},{},{},{}\n", static_cast<int>(row.device_class),
                       row.resolution.width, row.resolution.height,
                       csv::format_double(row.psnr_db),
                       csv::format_double(row.estimated_size_kb));
  }
  return out;
}

const EstimationRow& lookup(const EstimationTable& table, DeviceClass device,
                            double target_psnr) {
  const EstimationRow* best = nullptr;
  double best_gap = 0.0;
  for (const auto& row : table.rows()) {
    if (row.device_class != device) continue;
    double gap = std::abs(row.psnr_db - target_psnr);
    if (best == nullptr || gap < best_gap ||
        (gap == best_gap && row.psnr_db < best->psnr_db)) {
      best = &row;
      best_gap = gap;
    }
  }
  if (best == nullptr) {
    throw LookupError(fmt::format("estimation table has no rows for device "
                                  "class {}",
                                  static_cast<int>(device)));
  }
  return *best;
}

std::string_view mode_name(TransmissionMode mode) {
  return mode == TransmissionMode::kFull ? "full_transmission" : "compressed";
}

int palette_size_for(double mu_real) {
  if (std::isnan(mu_real)) throw NumericError("predicted mu is not a number");
  double rounded = std::round(
      std::clamp(mu_real, static_cast<double>(kMinPaletteSize),
                 static_cast<double>(kMaxPaletteSize)));
  return static_cast<int>(rounded);
}

QosDecision decide(const DeviceProfile& profile, const EstimationTable& table,
                   const regression::LinearModel& model, double theta_kbps,
                   double default_psnr) {
  if (model.k() != 3) {
    throw ContractError(fmt::format(
        "decision model needs 3 predictors (size, resolution class, PSNR), "
        "has {}",
        model.k()));
  }
  QosDecision d;
  d.sigma_kbps = profile.bandwidth_kbps;
  d.theta_kbps = theta_kbps;
  if (d.sigma_kbps > d.theta_kbps) {
    d.mode = TransmissionMode::kFull;
    return d;
  }
  d.mode = TransmissionMode::kCompressed;
  d.target_psnr_db = adjust_target_psnr(d.sigma_kbps, theta_kbps, default_psnr);
  DeviceClass device = classify_device(profile.resolution);
  const EstimationRow& row = lookup(table, device, d.target_psnr_db);
  d.chosen_row = row;
  const double predictors[] = {row.estimated_size_kb,
                               class_code(row.device_class), row.psnr_db};
  d.mu_real = regression::predict(model, predictors);
  d.mu_int = palette_size_for(d.mu_real);
  return d;
}

std::string format_decision_csv(const QosDecision& d) {
  if (d.mode == TransmissionMode::kFull) {
    return fmt::format("{},,,,{},{},,", mode_name(d.mode),
                       csv::format_double(d.sigma_kbps),
                       csv::format_double(d.theta_kbps));
  }
  return fmt::format("{},{:.6f},{},{},{},{},{},{}", mode_name(d.mode),
                     d.mu_real, d.mu_int, csv::format_double(d.target_psnr_db),
                     csv::format_double(d.sigma_kbps),
                     csv::format_double(d.theta_kbps),
                     csv::format_double(d.chosen_row->psnr_db),
                     csv::format_double(d.chosen_row->estimated_size_kb));
}

}  // namespace palstream::qos
