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

// palstream: palette compression, quality metrics, QoS decisions and
// streaming simulation from the command line. Every subcommand writes CSV to
// stdout (or --out) and reports failures as one line on stderr.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "palstream/codec.h"
#include "palstream/csv.h"
#include "palstream/error.h"
#include "palstream/history.h"
#include "palstream/image_io.h"
#include "palstream/metrics.h"
#include "palstream/qos.h"
#include "palstream/regression.h"
#include "palstream/simulator.h"
#include "palstream/synth.h"

namespace fs = std::filesystem;

namespace palstream {
namespace {

constexpr int kExitUsage = 2;
constexpr int kExitFormat = 3;
constexpr int kExitNumeric = 4;
constexpr int kExitInfeasible = 5;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kContract:
      return kExitUsage;
    case ErrorKind::kFormat:
      return kExitFormat;
    case ErrorKind::kNumeric:
      return kExitNumeric;
    case ErrorKind::kInfeasible:
      return kExitInfeasible;
  }
  return 1;
}

struct Globals {
  std::uint64_t seed = 0;
  std::string psnr_formula = "canonical";

  kmeans::KmeansConfig kmeans() const { return {.seed = seed}; }
  metrics::PsnrFormula formula() const {
    return metrics::parse_psnr_formula(psnr_formula);
  }
};

std::string read_text(const fs::path& path) {
  auto bytes = read_file_bytes(path);
  return {bytes.begin(), bytes.end()};
}

// Writes to path, or to stdout when path is empty.
void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()),
                                   text.size()));
}

std::vector<int> parse_mu_list(const std::string& text) {
  std::vector<int> out;
  for (auto field : csv::split(text)) {
    long long mu = 0;
    try {
      mu = csv::parse_int(field, "mu");
    } catch (const FormatError& e) {
      throw ContractError(e.what());
    }
    if (mu < kMinPaletteSize || mu > kMaxPaletteSize) {
      throw ContractError(fmt::format("--mu {} outside [2, 256]", mu));
    }
    out.push_back(static_cast<int>(mu));
  }
  return out;
}

// ---------------------------------------------------------------- compress

struct CompressArgs {
  std::vector<std::string> inputs;
  std::string mu = "16";
  std::string out;
  std::string format = "stats";
};

int run_compress(const CompressArgs& args, const Globals& g) {
  std::vector<int> mus = parse_mu_list(args.mu);
  if (!args.out.empty() && (args.inputs.size() != 1 || mus.size() != 1)) {
    throw ContractError("--out needs exactly one input and one --mu value");
  }
  const bool history = args.format == "history";
  const auto formula = g.formula();

  std::string table = history ? std::string(history::kHistoryCsvHeader) + "\n"
                              : "image,width,height,mu,bytes,size_kb,psnr_db,cr\n";
  for (const auto& input : args.inputs) {
    RgbImage img = load_ppm(input);
    std::string name = fs::path(input).stem().string();
    int code = history::code_for_resolution(img.resolution());
    if (history && code == 0) {
      throw ContractError(fmt::format(
          "{} is {}x{}, not one of the seven standard geometries", input,
          img.width(), img.height()));
    }
    for (int mu : mus) {
      QuantizedImage q = encode(img, mu, g.kmeans());
      auto bytes = serialize(q);
      if (!args.out.empty()) write_file_bytes(args.out, bytes);
      double psnr = metrics::psnr(img, decode(q), formula);
      double size_kb = static_cast<double>(bytes.size()) / 1024.0;
      double cr = compression_ratio(img.width(), img.height(), mu);
      if (history) {
        table += fmt::format("{},{},{},{:.1f},{},{:.4f}\n", name, code, mu,
                             size_kb, metrics::format_psnr(psnr), cr);
      } else {
        table += fmt::format("{},{},{},{},{},{:.3f},{},{:.4f}\n", name,
                             img.width(), img.height(), mu, bytes.size(),
                             size_kb, metrics::format_psnr(psnr), cr);
      }
    }
  }
  emit("", table);
  return 0;
}

// -------------------------------------------------------------- decompress

struct DecompressArgs {
  std::string input;
  std::string out;
};

int run_decompress(const DecompressArgs& args) {
  QuantizedImage q = deserialize(read_file_bytes(args.input));
  save_ppm(args.out, decode(q));
  emit("", fmt::format("width,height,mu\n{},{},{}\n", q.width, q.height, q.mu()));
  return 0;
}

// ----------------------------------------------------------------- metrics

struct MetricsArgs {
  std::string reference;
  std::string distorted;
};

int run_metrics(const MetricsArgs& args, const Globals& g) {
  RgbImage a = load_ppm(args.reference);
  RgbImage b = load_ppm(args.distorted);
  double mse = metrics::mse(a, b);
  emit("", fmt::format("mse,frame_mse,frame_error,psnr_db\n{},{},{},{}\n",
                       csv::format_double(mse),
                       csv::format_double(metrics::frame_mse(b, a)),
                       csv::format_double(metrics::frame_error(b, a)),
                       metrics::format_psnr(
                           metrics::psnr_from_mse(mse, g.formula()))));
  return 0;
}

// --------------------------------------------------------------------- fit

struct FitArgs {
  std::string history;
  double psnr_min = qos::kMinAcceptablePsnr;
  double psnr_max = qos::kMaxAcceptablePsnr;
  std::string cooks_rule = "4overN";
  std::string out;
};

int run_fit(const FitArgs& args) {
  if (args.psnr_min > args.psnr_max) {
    throw ContractError("--psnr-min exceeds --psnr-max");
  }
  auto rule = regression::CooksRule::parse(args.cooks_rule);
  auto records = history::parse_history_csv(read_text(args.history));
  auto ds = history::build_dataset(records, {args.psnr_min, args.psnr_max});
  regression::LinearModel model =
      regression::fit_with_outlier_removal(ds.data, rule);

  // Report removed rows as 0-based data rows of the input file.
  regression::LinearModel saved = model;
  for (auto& r : saved.diagnostics.removed_rows) r = ds.source_rows[r];
  std::string model_csv =
      fmt::format("# fitted on {} of {} rows with {} <= psnr_db <= {}\n",
                  ds.data.size(), records.size(),
                  csv::format_double(args.psnr_min),
                  csv::format_double(args.psnr_max)) +
      regression::format_model_csv(saved, history::kModelTermNames);

  std::string report;
  if (args.out.empty()) {
    report += model_csv;
  } else {
    emit(args.out, model_csv);
  }

  const auto& cooks = model.diagnostics.cooks_distances;
  report += fmt::format("# cooks_distance rule={} threshold={}\n",
                        rule.name(),
                        csv::format_double(rule.threshold(ds.data.size())));
  report += "row,image,mu,psnr_db,cooks_distance,removed\n";
  const auto& removed = model.diagnostics.removed_rows;
  for (std::size_t i = 0; i < ds.data.size(); ++i) {
    const auto& rec = records[ds.source_rows[i]];
    bool gone = std::binary_search(removed.begin(), removed.end(), i);
    report += fmt::format("{},{},{},{},{},{}\n", ds.source_rows[i], rec.image,
                          rec.mu, csv::format_double(rec.psnr_db),
                          csv::format_double(cooks[i]), gone ? 1 : 0);
  }

  auto diag = regression::residual_diagnostics(model);
  report += "# residual_histogram\nbin_low,bin_high,count\n";
  for (std::size_t b = 0; b < diag.counts.size(); ++b) {
    report += fmt::format("{},{},{}\n", csv::format_double(diag.bin_edges[b]),
                          csv::format_double(diag.bin_edges[b + 1]),
                          diag.counts[b]);
  }
  report += "# normal_probability_plot\ntheoretical_quantile,residual\n";
  for (const auto& [q, r] : diag.normal_plot) {
    report += fmt::format("{},{}\n", csv::format_double(q), csv::format_double(r));
  }
  emit("", report);
  return 0;
}

// ------------------------------------------------------------------ decide

struct DecideArgs {
  std::string profile;
  std::string table;
  std::string model;
  double theta_fraction = qos::kDefaultThetaFraction;
  std::optional<double> nominal_kbps;
  std::optional<double> theta_kbps;
  double default_psnr = qos::kDefaultTargetPsnr;
  bool header = false;
};

int run_decide(const DecideArgs& args) {
  if (args.nominal_kbps.has_value() == args.theta_kbps.has_value()) {
    throw ContractError("give exactly one of --nominal-kbps and --theta-kbps");
  }
  double theta = args.theta_kbps ? *args.theta_kbps
                                 : args.theta_fraction * *args.nominal_kbps;
  if (!(theta > 0.0)) throw ContractError("bandwidth threshold must be positive");
  auto profile = qos::parse_profile(read_text(args.profile));
  auto table = qos::parse_estimation_table(read_text(args.table));
  auto model = regression::parse_model_csv(read_text(args.model));
  auto d = qos::decide(profile, table, model, theta, args.default_psnr);
  std::string out;
  if (args.header) out += std::string(qos::kDecisionCsvHeader) + "\n";
  out += qos::format_decision_csv(d) + "\n";
  emit("", out);
  return 0;
}

// --------------------------------------------------------------- gen-table

struct GenTableArgs {
  std::string history;
  std::string out;
  double psnr_min = qos::kMinAcceptablePsnr;
  double psnr_max = qos::kMaxAcceptablePsnr;
  int min_mu = 8;
  int max_mu = 64;
  bool no_pinned = false;
};

int run_gen_table(const GenTableArgs& args) {
  if (args.min_mu > args.max_mu) throw ContractError("--min-mu exceeds --max-mu");
  auto records = history::parse_history_csv(read_text(args.history));
  history::TableOptions opts{.window = {args.psnr_min, args.psnr_max},
                             .min_mu = args.min_mu,
                             .max_mu = args.max_mu,
                             .include_pinned = !args.no_pinned};
  auto table = history::generate_estimation_table(records, opts);
  std::vector<std::string> notes;
  if (opts.include_pinned) {
    notes.push_back(fmt::format("first {} rows: published reference values",
                                history::pinned_estimation_rows().size()));
  }
  notes.push_back(fmt::format(
      "other rows: mean size_kb per (device class, whole-dB PSNR) over "
      "{} <= mu <= {}, derived from {}",
      args.min_mu, args.max_mu, fs::path(args.history).filename().string()));
  emit(args.out, qos::format_estimation_table(table, notes));
  return 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string frames_dir;
  std::string trace;
  std::string loss;
  std::string qos = "off";
  std::string table;
  std::string model;
  double theta_fraction = qos::kDefaultThetaFraction;
  double default_psnr = qos::kDefaultTargetPsnr;
  int baseline_mu = 128;
  double fps = sim::kFrameRateFps;
  std::string out;
};

std::vector<RgbImage> load_frames(const fs::path& dir) {
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ppm") {
      paths.push_back(entry.path());
    }
  }
  if (paths.empty()) {
    throw ContractError(fmt::format("no .ppm frames in {}", dir.string()));
  }
  std::sort(paths.begin(), paths.end());
  std::vector<RgbImage> frames;
  frames.reserve(paths.size());
  for (const auto& p : paths) frames.push_back(load_ppm(p));
  return frames;
}

int run_simulate(const SimulateArgs& args, const Globals& g) {
  sim::SessionConfig cfg;
  cfg.qos_enabled = args.qos == "on";
  cfg.baseline_mu = args.baseline_mu;
  cfg.fps = args.fps;
  cfg.kmeans = g.kmeans();
  cfg.psnr_formula = g.formula();
  if (cfg.qos_enabled) {
    if (args.table.empty() || args.model.empty()) {
      throw ContractError("--qos on needs --table and --model");
    }
  }
  auto plan = sim::parse_loss_list(args.loss);
  auto trace = sim::parse_trace_csv(read_text(args.trace));
  if (cfg.qos_enabled) {
    cfg.qos = sim::QosInputs{
        .table = qos::parse_estimation_table(read_text(args.table)),
        .model = regression::parse_model_csv(read_text(args.model)),
        .theta_fraction = args.theta_fraction,
        .default_psnr = args.default_psnr};
  }
  auto frames = load_frames(args.frames_dir);
  auto report = sim::run(frames, trace, plan, cfg);
  emit(args.out, sim::format_report_csv(report));
  return 0;
}

// ------------------------------------------------------------------- synth

struct SynthArgs {
  std::string kind = "photo";
  std::string size = "300x212";
  std::size_t frames = 1;
  std::uint32_t shift = 8;
  std::string out;
};

Resolution parse_size(const std::string& text) {
  auto parts = csv::split(text, 'x');
  if (parts.size() != 2) throw ContractError(fmt::format("--size '{}' is not WxH", text));
  long long w = 0;
  long long h = 0;
  try {
    w = csv::parse_int(parts[0], "width");
    h = csv::parse_int(parts[1], "height");
  } catch (const FormatError&) {
    throw ContractError(fmt::format("--size '{}' is not WxH", text));
  }
  if (w <= 0 || h <= 0 || w > 16384 || h > 16384) {
    throw ContractError(fmt::format("--size '{}' out of range", text));
  }
  return {static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(h)};
}

int run_synth(const SynthArgs& args, const Globals& g) {
  Resolution size = parse_size(args.size);
  if (args.kind == "photo" || args.kind == "desktop") {
    RgbImage img = args.kind == "photo" ? synth::photo(size, g.seed)
                                        : synth::desktop(size, g.seed);
    save_ppm(args.out, img);
    emit("", fmt::format("path,width,height,distinct_colors\n{},{},{},{}\n",
                         args.out, size.width, size.height,
                         count_distinct_colors(img)));
    return 0;
  }
  auto seq = args.kind == "pan"
                 ? synth::panning_sequence(size, args.frames, args.shift, g.seed)
                 : synth::static_sequence(size, args.frames, g.seed);
  fs::create_directories(args.out);
  std::string listing = "path\n";
  for (std::size_t i = 0; i < seq.size(); ++i) {
    fs::path p = fs::path(args.out) / fmt::format("frame_{:04d}.ppm", i);
    save_ppm(p, seq[i]);
    listing += p.string() + "\n";
  }
  emit("", listing);
  return 0;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Palette compression, quality metrics, QoS decisions and "
               "streaming simulation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "palstream 0.1.0");

  Globals g;
  app.add_option("--seed", g.seed, "k-means seed")->capture_default_str();
  app.add_option("--psnr-formula", g.psnr_formula, "PSNR variant")
      ->check(CLI::IsMember({"canonical", "paper-eq14"}))
      ->capture_default_str();

  CompressArgs compress;
  auto* c = app.add_subcommand("compress", "Palette-compress PPM images");
  c->add_option("inputs", compress.inputs, "Input .ppm files")
      ->required()
      ->check(CLI::ExistingFile);
  c->add_option("--mu", compress.mu, "Palette size, or a comma list")
      ->capture_default_str();
  c->add_option("--out", compress.out, "Write the PQF1 file here");
  c->add_option("--format", compress.format, "stats or history")
      ->check(CLI::IsMember({"stats", "history"}))
      ->capture_default_str();

  DecompressArgs decompress;
  auto* d = app.add_subcommand("decompress", "Decode a PQF1 file to PPM");
  d->add_option("input", decompress.input)->required()->check(CLI::ExistingFile);
  d->add_option("--out", decompress.out)->required();

  MetricsArgs met;
  auto* m = app.add_subcommand("metrics", "MSE and PSNR between two images");
  m->add_option("reference", met.reference)->required()->check(CLI::ExistingFile);
  m->add_option("distorted", met.distorted)->required()->check(CLI::ExistingFile);

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "Fit the palette-size model");
  f->add_option("history", fit.history)->required()->check(CLI::ExistingFile);
  f->add_option("--psnr-min", fit.psnr_min)->capture_default_str();
  f->add_option("--psnr-max", fit.psnr_max)->capture_default_str();
  f->add_option("--cooks-rule", fit.cooks_rule, "4overN or a fixed threshold")
      ->capture_default_str();
  f->add_option("--out", fit.out, "Model file (default: stdout)");

  DecideArgs decide;
  auto* dc = app.add_subcommand("decide", "Choose a palette size for a client");
  dc->add_option("profile", decide.profile)->required()->check(CLI::ExistingFile);
  dc->add_option("table", decide.table)->required()->check(CLI::ExistingFile);
  dc->add_option("model", decide.model)->required()->check(CLI::ExistingFile);
  dc->add_option("--theta-fraction", decide.theta_fraction)
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  dc->add_option("--nominal-kbps", decide.nominal_kbps,
                 "Full bandwidth; theta = fraction * nominal");
  dc->add_option("--theta-kbps", decide.theta_kbps, "Explicit threshold");
  dc->add_option("--default-psnr", decide.default_psnr)
      ->check(CLI::Range(qos::kMinAcceptablePsnr, qos::kMaxAcceptablePsnr))
      ->capture_default_str();
  dc->add_flag("--header", decide.header, "Print the column header first");

  GenTableArgs gen;
  auto* gt = app.add_subcommand("gen-table", "Build the estimation table");
  gt->add_option("history", gen.history)->required()->check(CLI::ExistingFile);
  gt->add_option("--out", gen.out, "Table file (default: stdout)");
  gt->add_option("--psnr-min", gen.psnr_min)->capture_default_str();
  gt->add_option("--psnr-max", gen.psnr_max)->capture_default_str();
  gt->add_option("--min-mu", gen.min_mu)->capture_default_str();
  gt->add_option("--max-mu", gen.max_mu)->capture_default_str();
  gt->add_flag("--no-pinned", gen.no_pinned, "Omit the published rows");

  SimulateArgs simulate;
  auto* s = app.add_subcommand("simulate", "Run a streaming session");
  s->add_option("frames-dir", simulate.frames_dir)
      ->required()
      ->check(CLI::ExistingDirectory);
  s->add_option("trace", simulate.trace)->required()->check(CLI::ExistingFile);
  s->add_option("--loss", simulate.loss, "Lost frame indices, e.g. 26,52");
  s->add_option("--qos", simulate.qos)
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  s->add_option("--table", simulate.table)->check(CLI::ExistingFile);
  s->add_option("--model", simulate.model)->check(CLI::ExistingFile);
  s->add_option("--theta-fraction", simulate.theta_fraction)
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  s->add_option("--default-psnr", simulate.default_psnr)
      ->check(CLI::Range(qos::kMinAcceptablePsnr, qos::kMaxAcceptablePsnr))
      ->capture_default_str();
  s->add_option("--baseline-mu", simulate.baseline_mu)
      ->check(CLI::Range(kMinPaletteSize, kMaxPaletteSize))
      ->capture_default_str();
  s->add_option("--fps", simulate.fps)->check(CLI::PositiveNumber)->capture_default_str();
  s->add_option("--out", simulate.out, "Report file (default: stdout)");

  SynthArgs syn;
  auto* sy = app.add_subcommand("synth", "Generate procedural test media");
  sy->add_option("kind", syn.kind, "photo, desktop, pan or static")
      ->required()
      ->check(CLI::IsMember({"photo", "desktop", "pan", "static"}));
  sy->add_option("--size", syn.size)->capture_default_str();
  sy->add_option("--frames", syn.frames)->check(CLI::Range(1, 100000))->capture_default_str();
  sy->add_option("--shift", syn.shift)->capture_default_str();
  sy->add_option("--out", syn.out, "File, or directory for sequences")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::cerr << "error: usage: " << msg << "\n";
    return kExitUsage;
  }

  g.formula();  // validated before any work starts
  if (c->parsed()) return run_compress(compress, g);
  if (d->parsed()) return run_decompress(decompress);
  if (m->parsed()) return run_metrics(met, g);
  if (f->parsed()) return run_fit(fit);
  if (dc->parsed()) return run_decide(decide);
  if (gt->parsed()) return run_gen_table(gen);
  if (s->parsed()) return run_simulate(simulate, g);
  return run_synth(syn, g);
}

}  // namespace
}  // namespace palstream

int main(int argc, char** argv) {
  try {
    return palstream::run_cli(argc, argv);
  } catch (const palstream::Error& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    std::cerr << "error: " << palstream::error_kind_name(e.kind()) << ": " << msg
              << "\n";
    return palstream::exit_code_for(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: format: " << e.what() << "\n";
    return palstream::kExitFormat;
  }
}
