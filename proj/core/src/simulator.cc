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

#include "palstream/simulator.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "palstream/codec.h"
#include "palstream/csv.h"
#include "palstream/error.h"

namespace palstream::sim {

double frame_timestamp_ms(std::size_t index, double fps) {
  return static_cast<double>(index) * (1000.0 / fps);
}

BandwidthTrace::BandwidthTrace(std::vector<TraceSample> samples,
                               double nominal_kbps)
    : samples_(std::move(samples)), nominal_kbps_(nominal_kbps) {
  if (samples_.empty()) throw TraceError("bandwidth trace has no samples");
  if (!(nominal_kbps_ > 0.0) || !std::isfinite(nominal_kbps_)) {
    throw TraceError(
        fmt::format("nominal bandwidth {} must be positive", nominal_kbps_));
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (samples_[i].bandwidth_kbps < 0.0) {
      throw TraceError(fmt::format("negative bandwidth at sample {}", i));
    }
    if (i > 0 && !(samples_[i].time_ms > samples_[i - 1].time_ms)) {
      throw TraceError(
          fmt::format("trace times must strictly increase at sample {}", i));
    }
  }
}

double BandwidthTrace::bandwidth_at(double time_ms) const {
  auto after = std::upper_bound(
      samples_.begin(), samples_.end(), time_ms,
      [](double t, const TraceSample& s) { return t < s.time_ms; });
  if (after == samples_.begin()) {
    throw TraceError(fmt::format("trace starts at {} ms, after t = {} ms",
                                 samples_.front().time_ms, time_ms));
  }
  return std::prev(after)->bandwidth_kbps;
}

void BandwidthTrace::require_covers(double end_ms) const {
  if (samples_.front().time_ms > 0.0) {
    throw TraceError(fmt::format("trace starts at {} ms, after the session "
                                 "start",
                                 samples_.front().time_ms));
  }
  if (samples_.back().time_ms < end_ms) {
    throw TraceError(fmt::format("trace ends at {} ms but the session runs to "
                                 "{} ms",
                                 samples_.back().time_ms, end_ms));
  }
}

BandwidthTrace parse_trace_csv(std::string_view text) {
  csv::Document doc = csv::parse(text, {"time_ms", "bandwidth_kbps"});
  std::optional<double> nominal;
  for (const auto& comment : doc.comments) {
    constexpr std::string_view kKey = "nominal_kbps=";
    if (std::string_view(comment).substr(0, kKey.size()) == kKey) {
      nominal = csv::parse_double(std::string_view(comment).substr(kKey.size()),
                                  "nominal_kbps");
    }
  }
  if (!nominal) throw TraceError("trace lacks a '# nominal_kbps=' comment");
  std::vector<TraceSample> samples;
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    samples.push_back(
        {csv::parse_double(doc.rows[r][0], "time_ms", doc.line_numbers[r]),
         csv::parse_double(doc.rows[r][1], "bandwidth_kbps",
                           doc.line_numbers[r])});
  }
  return BandwidthTrace(std::move(samples), *nominal);
}

std::string format_trace_csv(const BandwidthTrace& trace) {
  std::string out = fmt::format("# nominal_kbps={}\ntime_ms,bandwidth_kbps\n",
                                csv::format_double(trace.nominal_kbps()));
  for (const auto& s : trace.samples()) {
    out += fmt::format("{},{}\n", csv::format_double(s.time_ms),
                       csv::format_double(s.bandwidth_kbps));
  }
  return out;
}

LossPlan parse_loss_list(std::string_view text) {
  LossPlan plan;
  if (csv::trim(text).empty()) return plan;
  for (std::string_view field : csv::split(text)) {
    long long frame = 0;
    try {
      frame = csv::parse_int(field, "lost frame");
    } catch (const FormatError& e) {
      throw ContractError(e.what());
    }
    if (frame < 0) {
      throw ContractError(fmt::format("lost frame {} is negative", frame));
    }
    plan.lost_frames.insert(static_cast<std::size_t>(frame));
  }
  return plan;
}

Concealment conceal(std::span<const std::optional<RgbImage>> received,
                    std::size_t lost_index, Resolution size) {
  std::size_t limit = std::min(lost_index, received.size());
  for (std::size_t i = limit; i-- > 0;) {
    if (received[i]) return {*received[i], i};
  }
  return {RgbImage(size.width, size.height), std::nullopt};
}

void ConcealmentBuffer::on_received(std::size_t frame, const RgbImage& decoded) {
  last_index_ = frame;
  last_frame_ = decoded;
}

Concealment ConcealmentBuffer::conceal(Resolution size) const {
  if (last_frame_) return {*last_frame_, last_index_};
  return {RgbImage(size.width, size.height), std::nullopt};
}

namespace {

struct Transmission {
  RgbImage decoded;
  int mu = 0;
  std::uint64_t bytes = 0;
};

// Encodes at the requested palette size, capped by the colors present.
Transmission transmit(const RgbImage& frame, int mu,
                      const kmeans::KmeansConfig& kcfg) {
  std::size_t distinct = count_distinct_colors(frame);
  int effective = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(mu), distinct));
  if (effective < kMinPaletteSize) {
    return {frame, 0, std::uint64_t{3} * frame.pixel_count()};
  }
  QuantizedImage q = encode(frame, effective, kcfg);
  std::uint64_t bytes = serialize(q).size();
  return {decode(q), effective, bytes};
}

}  // namespace

StreamReport run(std::span<const RgbImage> frames, const BandwidthTrace& trace,
                 const LossPlan& plan, const SessionConfig& config) {
  if (frames.empty()) throw ContractError("session needs at least one frame");
  const Resolution size = frames.front().resolution();
  for (const auto& f : frames) {
    if (f.resolution() != size) {
      throw ContractError("all frames in a session must share one size");
    }
  }
  if (!plan.lost_frames.empty() && *plan.lost_frames.rbegin() >= frames.size()) {
    throw ContractError(fmt::format("lost frame {} beyond the {}-frame session",
                                    *plan.lost_frames.rbegin(), frames.size()));
  }
  if (config.qos_enabled && !config.qos) {
    throw ContractError("QoS control enabled without estimation inputs");
  }
  if (!(config.fps > 0.0)) throw ContractError("frame rate must be positive");
  index_bits(config.baseline_mu);
  trace.require_covers(frame_timestamp_ms(frames.size() - 1, config.fps));

  StreamReport report;
  report.frames.reserve(frames.size());
  ConcealmentBuffer buffer;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    FrameRecord rec;
    rec.frame_index = i;
    rec.sigma_kbps = trace.bandwidth_at(frame_timestamp_ms(i, config.fps));

    int mu = config.baseline_mu;
    if (config.qos_enabled) {
      const QosInputs& in = *config.qos;
      qos::DeviceProfile profile{.resolution = size,
                                 .bandwidth_kbps = rec.sigma_kbps};
      qos::QosDecision d =
          qos::decide(profile, in.table, in.model,
                      in.theta_fraction * trace.nominal_kbps(), in.default_psnr);
      rec.mode = d.mode;
      if (d.mode == qos::TransmissionMode::kCompressed) mu = d.mu_int;
      rec.decision = d;
    }

    Transmission tx = transmit(frames[i], mu, config.kmeans);
    rec.mu = tx.mu;
    rec.bytes = tx.bytes;
    rec.delivered_psnr_db = metrics::psnr(frames[i], tx.decoded, config.psnr_formula);

    if (plan.contains(i)) {
      rec.lost = true;
      Concealment c = buffer.conceal(size);
      rec.concealed_from = c.source;
      rec.blank = !c.source.has_value();
      rec.psnr_db = metrics::psnr(frames[i], c.frame, config.psnr_formula);
    } else {
      rec.psnr_db = rec.delivered_psnr_db;
      buffer.on_received(i, tx.decoded);
    }
    report.frames.push_back(std::move(rec));
  }
  report.recompute_aggregates();
  return report;
}

void StreamReport::recompute_aggregates() {
  total_bytes = 0;
  lossless_frames = 0;
  lost_frames = 0;
  min_psnr_db = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  std::size_t finite = 0;
  for (const auto& f : frames) {
    total_bytes += f.bytes;
    if (f.lost) ++lost_frames;
    min_psnr_db = std::min(min_psnr_db, f.psnr_db);
    if (std::isinf(f.psnr_db)) {
      ++lossless_frames;
    } else {
      sum += f.psnr_db;
      ++finite;
    }
  }
  mean_psnr_db = finite == 0 ? std::numeric_limits<double>::quiet_NaN()
                             : sum / static_cast<double>(finite);
}

std::string format_report_csv(const StreamReport& report) {
  std::string out = "frame,mode,mu,bytes,lost,concealed_from,psnr_db\n";
  for (const auto& f : report.frames) {
    std::string concealed;
    if (f.lost) {
      concealed = f.concealed_from ? std::to_string(*f.concealed_from) : "blank";
    }
    out += fmt::format("{},{},{},{},{},{},{}\n", f.frame_index,
                       qos::mode_name(f.mode), f.mu, f.bytes, f.lost ? 1 : 0,
                       concealed, metrics::format_psnr(f.psnr_db));
  }
  out += "# aggregate\nmetric,value\n";
  out += fmt::format("frames,{}\n", report.frames.size());
  out += fmt::format("total_bytes,{}\n", report.total_bytes);
  out += fmt::format("lost_frames,{}\n", report.lost_frames);
  out += fmt::format("lossless_frames,{}\n", report.lossless_frames);
  out += fmt::format("mean_psnr_db,{}\n",
                     std::isnan(report.mean_psnr_db)
                         ? std::string("nan")
                         : metrics::format_psnr(report.mean_psnr_db));
  out += fmt::format("min_psnr_db,{}\n", metrics::format_psnr(report.min_psnr_db));
  return out;
}

}  // namespace palstream::sim
