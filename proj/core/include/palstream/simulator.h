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

#ifndef PALSTREAM_SIMULATOR_H_
#define PALSTREAM_SIMULATOR_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "palstream/image_io.h"
#include "palstream/kmeans.h"
#include "palstream/metrics.h"
#include "palstream/qos.h"
#include "palstream/regression.h"

// Trace-driven streaming session: per-frame palette coding under a bandwidth
// trace, injected frame loss, and last-good-frame concealment.
namespace palstream::sim {

inline constexpr double kFrameRateFps = 24.0;

double frame_timestamp_ms(std::size_t index, double fps = kFrameRateFps);

struct TraceSample {
  double time_ms = 0.0;
  double bandwidth_kbps = 0.0;

  friend bool operator==(const TraceSample&, const TraceSample&) = default;
};

class BandwidthTrace {
 public:
  // Throws TraceError unless times strictly increase, bandwidths are >= 0 and
  // nominal_kbps > 0.
  BandwidthTrace(std::vector<TraceSample> samples, double nominal_kbps);

  // Step function: the last sample at or before time_ms. Throws TraceError
  // before the first sample.
  double bandwidth_at(double time_ms) const;

  // Throws TraceError when the trace does not span [0, end_ms].
  void require_covers(double end_ms) const;

  const std::vector<TraceSample>& samples() const noexcept { return samples_; }
  double nominal_kbps() const noexcept { return nominal_kbps_; }

  friend bool operator==(const BandwidthTrace&, const BandwidthTrace&) = default;

 private:
  std::vector<TraceSample> samples_;
  double nominal_kbps_;
};

// "time_ms,bandwidth_kbps" with a "# nominal_kbps=<v>" comment line.
BandwidthTrace parse_trace_csv(std::string_view text);
std::string format_trace_csv(const BandwidthTrace& trace);

struct LossPlan {
  std::set<std::size_t> lost_frames;

  bool contains(std::size_t frame) const { return lost_frames.count(frame) > 0; }
};

// Comma-separated frame indices, e.g. "26,52". Empty text is an empty plan.
LossPlan parse_loss_list(std::string_view text);

struct Concealment {
  RgbImage frame;
  // Frame the substitute was copied from; nullopt means a black frame was
  // shown because nothing had been received yet.
  std::optional<std::size_t> source;
};

// Substitute for a lost frame: the most recent earlier frame that arrived.
// received[i] holds the decoded frame i, or nullopt when frame i was lost.
Concealment conceal(std::span<const std::optional<RgbImage>> received,
                    std::size_t lost_index, Resolution size);

// Streaming form of conceal() that only keeps the last good frame.
class ConcealmentBuffer {
 public:
  void on_received(std::size_t frame, const RgbImage& decoded);
  Concealment conceal(Resolution size) const;

 private:
  std::optional<std::size_t> last_index_;
  std::optional<RgbImage> last_frame_;
};

struct QosInputs {
  qos::EstimationTable table;
  regression::LinearModel model;
  double theta_fraction = qos::kDefaultThetaFraction;
  double default_psnr = qos::kDefaultTargetPsnr;
};

struct SessionConfig {
  bool qos_enabled = false;
  // Palette size without QoS control, and for full-transmission frames.
  int baseline_mu = 128;
  double fps = kFrameRateFps;
  kmeans::KmeansConfig kmeans;
  metrics::PsnrFormula psnr_formula = metrics::PsnrFormula::kCanonical;
  // Required when qos_enabled.
  std::optional<QosInputs> qos;
};

struct FrameRecord {
  std::size_t frame_index = 0;
  qos::TransmissionMode mode = qos::TransmissionMode::kCompressed;
  // Palette size actually used; 0 when the frame went out uncompressed
  // because it has a single color.
  int mu = 0;
  double sigma_kbps = 0.0;
  std::uint64_t bytes = 0;
  bool lost = false;
  std::optional<std::size_t> concealed_from;
  // Lost with nothing to conceal from.
  bool blank = false;
  // PSNR of what the client shows against the original frame.
  double psnr_db = 0.0;
  // PSNR the frame would have had if it had arrived.
  double delivered_psnr_db = 0.0;
  std::optional<qos::QosDecision> decision;
};

struct StreamReport {
  std::vector<FrameRecord> frames;
  std::uint64_t total_bytes = 0;
  // Over frames with finite PSNR; NaN when there are none.
  double mean_psnr_db = 0.0;
  // +infinity when every frame is lossless.
  double min_psnr_db = 0.0;
  std::size_t lossless_frames = 0;
  std::size_t lost_frames = 0;

  // Rebuilds the aggregate fields from frames.
  void recompute_aggregates();
};

// Runs one session. Frames are timestamped at fps; every timestamp must be
// covered by the trace. Throws ContractError on an empty or mixed-size frame
// sequence, a loss index past the end or QoS without inputs.
StreamReport run(std::span<const RgbImage> frames, const BandwidthTrace& trace,
                 const LossPlan& plan, const SessionConfig& config);

// "frame,mode,mu,bytes,lost,concealed_from,psnr_db" rows followed by a
// "metric,value" aggregate block.
std::string format_report_csv(const StreamReport& report);

}  // namespace palstream::sim

#endif  // PALSTREAM_SIMULATOR_H_
