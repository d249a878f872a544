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

#include "palstream/history.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include <fmt/core.h>

#include "palstream/codec.h"
#include "palstream/csv.h"
#include "palstream/error.h"

namespace palstream::history {

Resolution resolution_for_code(int code) {
  if (code < 1 || code > static_cast<int>(kStandardResolutions.size())) {
    throw ContractError(
        fmt::format("resolution code {} outside 1..{}", code,
                    kStandardResolutions.size()));
  }
  return kStandardResolutions[code - 1];
}

int code_for_resolution(Resolution r) {
  auto it = std::find(kStandardResolutions.begin(), kStandardResolutions.end(), r);
  return it == kStandardResolutions.end()
             ? 0
             : static_cast<int>(it - kStandardResolutions.begin()) + 1;
}

std::vector<CompressionRecord> parse_history_csv(std::string_view text) {
  csv::Document doc = csv::parse(
      text, {"image", "resolution_code", "mu", "size_kb", "psnr_db", "cr"});
  std::vector<CompressionRecord> out;
  out.reserve(doc.rows.size());
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    const auto& f = doc.rows[r];
    std::size_t line = doc.line_numbers[r];
    CompressionRecord rec;
    rec.image = f[0];
    long long code = csv::parse_int(f[1], "resolution_code", line);
    if (code < 1 || code > static_cast<long long>(kStandardResolutions.size())) {
      throw FormatError(fmt::format(
          "resolution_code {} on line {} outside 1..7", code, line));
    }
    rec.resolution_code = static_cast<int>(code);
    long long mu = csv::parse_int(f[2], "mu", line);
    if (mu < kMinPaletteSize || mu > kMaxPaletteSize) {
      throw FormatError(
          fmt::format("mu {} on line {} outside [2, 256]", mu, line));
    }
    rec.mu = static_cast<int>(mu);
    rec.size_kb = csv::parse_double(f[3], "size_kb", line);
    rec.psnr_db = csv::parse_double(f[4], "psnr_db", line);
    rec.cr = csv::parse_double(f[5], "cr", line);
    out.push_back(std::move(rec));
  }
  return out;
}

std::string format_history_csv(const std::vector<CompressionRecord>& records) {
  std::string out(kHistoryCsvHeader);
  out += '\n';
  for (const auto& r : records) {
    out += fmt::format("{},{},{},{},{},{}\n", r.image, r.resolution_code, r.mu,
                       csv::format_double(r.size_kb),
                       csv::format_double(r.psnr_db), csv::format_double(r.cr));
  }
  return out;
}

HistoryDataset build_dataset(const std::vector<CompressionRecord>& records,
                             const PsnrWindow& window) {
  HistoryDataset out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!window.contains(r.psnr_db)) continue;
    auto device = qos::classify_device(resolution_for_code(r.resolution_code));
    const double row[] = {r.size_kb, qos::class_code(device), r.psnr_db};
    out.data.add_row(row, static_cast<double>(r.mu));
    out.source_rows.push_back(i);
  }
  return out;
}

const std::vector<qos::EstimationRow>& pinned_estimation_rows() {
  using qos::DeviceClass;
  static const std::vector<qos::EstimationRow> rows = {
      {DeviceClass::kThinClient, {300, 212}, 28.0, 20.6},
      {DeviceClass::kThinClient, {600, 450}, 30.0, 42.2},
      {DeviceClass::kDesktop, {800, 600}, 25.0, 373.9},
      {DeviceClass::kDesktop, {1920, 1080}, 40.0, 657.2},
  };
  return rows;
}

qos::EstimationTable generate_estimation_table(
    const std::vector<CompressionRecord>& records, const TableOptions& options) {
  struct Group {
    double size_sum = 0.0;
    std::size_t count = 0;
    Resolution largest;
  };
  // Keyed by (class code, PSNR bucket).
  std::map<std::pair<int, int>, Group> groups;
  for (const auto& r : records) {
    if (r.mu < options.min_mu || r.mu > options.max_mu) continue;
    if (!options.window.contains(r.psnr_db)) continue;
    Resolution res = resolution_for_code(r.resolution_code);
    int cls = static_cast<int>(qos::classify_device(res));
    int bucket = static_cast<int>(std::floor(r.psnr_db));
    Group& g = groups[{cls, bucket}];
    g.size_sum += r.size_kb;
    ++g.count;
    auto area = [](Resolution x) { return std::uint64_t{x.width} * x.height; };
    if (area(res) > area(g.largest)) g.largest = res;
  }

  std::vector<qos::EstimationRow> rows;
  if (options.include_pinned) rows = pinned_estimation_rows();
  auto pinned_here = [&](int cls, int bucket) {
    return std::any_of(rows.begin(), rows.end(), [&](const auto& p) {
      return static_cast<int>(p.device_class) == cls &&
             static_cast<int>(std::floor(p.psnr_db)) == bucket;
    });
  };
  std::size_t pinned_count = rows.size();
  for (const auto& [key, g] : groups) {
    auto [cls, bucket] = key;
    if (pinned_count > 0 && pinned_here(cls, bucket)) continue;
    rows.push_back({static_cast<qos::DeviceClass>(cls), g.largest,
                    static_cast<double>(bucket),
                    std::round(g.size_sum / static_cast<double>(g.count) * 10.0) /
                        10.0});
  }

  qos::EstimationTable table(std::move(rows));
  for (auto cls : {qos::DeviceClass::kThinClient, qos::DeviceClass::kDesktop}) {
    if (!table.has_class(cls)) {
      throw InfeasibleError(fmt::format(
          "no estimation rows for device class {}", static_cast<int>(cls)));
    }
  }
  return table;
}

}  // namespace palstream::history
