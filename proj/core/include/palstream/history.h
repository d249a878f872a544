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

#ifndef PALSTREAM_HISTORY_H_
#define PALSTREAM_HISTORY_H_

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "palstream/qos.h"
#include "palstream/regression.h"

// Historical compression observations and the artifacts derived from them:
// the regression dataset and the estimation table.
namespace palstream::history {

// Resolution codes 1..7 name these geometries, in order.
inline constexpr std::array<Resolution, 7> kStandardResolutions = {{
    {300, 212},
    {590, 430},
    {600, 450},
    {745, 258},
    {1536, 2048},
    {1680, 1050},
    {1920, 1080},
}};

// Throws ContractError for a code outside 1..7.
Resolution resolution_for_code(int code);
// 0 when the geometry has no standard code.
int code_for_resolution(Resolution r);

struct CompressionRecord {
  std::string image;
  int resolution_code = 0;
  int mu = 0;
  double size_kb = 0.0;
  double psnr_db = 0.0;
  double cr = 0.0;

  friend bool operator==(const CompressionRecord&,
                         const CompressionRecord&) = default;
};

inline constexpr std::string_view kHistoryCsvHeader =
    "image,resolution_code,mu,size_kb,psnr_db,cr";

std::vector<CompressionRecord> parse_history_csv(std::string_view text);
std::string format_history_csv(const std::vector<CompressionRecord>& records);

struct PsnrWindow {
  double min_db = qos::kMinAcceptablePsnr;
  double max_db = qos::kMaxAcceptablePsnr;

  bool contains(double psnr) const { return psnr >= min_db && psnr <= max_db; }
};

struct HistoryDataset {
  // Predictors (size_kb, device class code, psnr_db); response mu.
  regression::Dataset data{3};
  // Index into the source records for every dataset row.
  std::vector<std::size_t> source_rows;
};

// Records inside the PSNR window, in input order.
HistoryDataset build_dataset(const std::vector<CompressionRecord>& records,
                             const PsnrWindow& window = {});

inline const std::vector<std::string> kModelTermNames = {
    "intercept", "compression_size_kb", "resolution_class", "psnr_db"};

// The four concrete rows of the published estimation table. They override
// any derived row for the same device class and PSNR bucket.
const std::vector<qos::EstimationRow>& pinned_estimation_rows();

struct TableOptions {
  PsnrWindow window;
  int min_mu = 8;
  int max_mu = 64;
  bool include_pinned = true;
};

// Derived rows group records with min_mu <= mu <= max_mu and PSNR inside the
// window by (device class, floor(PSNR)) and average their sizes, rounded to
// 0.1 kB. Each derived row takes the largest geometry in its group. Pinned rows
// come first, then derived rows ordered by class and PSNR. Throws
// InfeasibleError when a device class ends up with no rows.
qos::EstimationTable generate_estimation_table(
    const std::vector<CompressionRecord>& records,
    const TableOptions& options = {});

}  // namespace palstream::history

#endif  // PALSTREAM_HISTORY_H_
