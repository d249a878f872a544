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

#ifndef PALSTREAM_QOS_H_
#define PALSTREAM_QOS_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "palstream/image_io.h"
#include "palstream/regression.h"

// Decision engine that picks a palette size from device and network state.
namespace palstream::qos {

// What a client reports about itself. cpu and battery are carried for logging;
// the decision depends only on resolution and bandwidth.
struct DeviceProfile {
  Resolution resolution;
  double cpu = 0.0;      // operation ratio in [0, 1]
  double battery = 0.0;  // remaining fraction in [0, 1]
  double bandwidth_kbps = 0.0;

  friend bool operator==(const DeviceProfile&, const DeviceProfile&) = default;
};

// Parses "key=value" lines with keys resolution (WxH), cpu, battery and
// bandwidth_kbps. Blank lines and '#' comments are skipped. Throws
// ProfileError naming the key on a missing, unknown, duplicate, malformed or
// out-of-range entry.
DeviceProfile parse_profile(std::string_view text);
std::string format_profile(const DeviceProfile& profile);

// Coded value used as the Resolution predictor.
enum class DeviceClass { kThinClient = 1, kDesktop = 2 };

inline constexpr Resolution kThinClientMax{600, 450};

// Thin client when both dimensions fit within kThinClientMax.
DeviceClass classify_device(Resolution resolution);
constexpr double class_code(DeviceClass c) { return static_cast<int>(c); }

inline constexpr double kMinAcceptablePsnr = 25.0;
inline constexpr double kMaxAcceptablePsnr = 50.0;
inline constexpr double kDefaultTargetPsnr = 30.0;
inline constexpr double kDefaultThetaFraction = 0.8;

// One dB below default_psnr per started 10% of bandwidth deficit relative to
// theta, clamped to [25, 50].
double adjust_target_psnr(double sigma_kbps, double theta_kbps,
                          double default_psnr = kDefaultTargetPsnr);

struct EstimationRow {
  DeviceClass device_class = DeviceClass::kThinClient;
  Resolution resolution;
  double psnr_db = 0.0;
  double estimated_size_kb = 0.0;

  friend bool operator==(const EstimationRow&, const EstimationRow&) = default;
};

// (device class, PSNR) -> expected compressed size, in file order.
class EstimationTable {
 public:
  EstimationTable() = default;
  // Throws ContractError on a PSNR outside [25, 50] or a non-positive size.
  explicit EstimationTable(std::vector<EstimationRow> rows);

  const std::vector<EstimationRow>& rows() const noexcept { return rows_; }
  bool has_class(DeviceClass c) const;

 private:
  std::vector<EstimationRow> rows_;
};

// CSV "device_class,width,height,psnr_db,estimated_size_kb". Comment lines
// are kept on output only as provenance notes passed by the caller.
EstimationTable parse_estimation_table(std::string_view text);
std::string format_estimation_table(const EstimationTable& table,
                                    const std::vector<std::string>& notes = {});

// Row of the class whose PSNR is nearest target; equal distance prefers the
// lower PSNR, then the earlier row. Throws LookupError for an absent class.
const EstimationRow& lookup(const EstimationTable& table, DeviceClass device,
                            double target_psnr);

enum class TransmissionMode { kFull, kCompressed };
std::string_view mode_name(TransmissionMode mode);

struct QosDecision {
  TransmissionMode mode = TransmissionMode::kFull;
  double sigma_kbps = 0.0;
  double theta_kbps = 0.0;
  // The remaining fields are set only for compressed transmission.
  double mu_real = 0.0;
  int mu_int = 0;
  double target_psnr_db = 0.0;
  std::optional<EstimationRow> chosen_row;
};

// round(mu) clamped to [2, 256].
int palette_size_for(double mu_real);

// Full transmission when bandwidth exceeds theta. Otherwise looks up the row
// for the adjusted target PSNR and predicts mu from
// (estimated size, class code, row PSNR); model must take exactly those three
// predictors in that order.
QosDecision decide(const DeviceProfile& profile, const EstimationTable& table,
                   const regression::LinearModel& model, double theta_kbps,
                   double default_psnr = kDefaultTargetPsnr);

// "mode,mu_real,mu_int,target_psnr,sigma,theta,row_psnr,row_size"; the
// compressed-only fields are empty for full transmission.
inline constexpr std::string_view kDecisionCsvHeader =
    "mode,mu_real,mu_int,target_psnr,sigma,theta,row_psnr,row_size";
std::string format_decision_csv(const QosDecision& d);

}  // namespace palstream::qos

#endif  // PALSTREAM_QOS_H_
