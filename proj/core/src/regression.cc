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

#include "palstream/regression.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <fmt/core.h>

#include "palstream/csv.h"
#include "palstream/error.h"

namespace palstream::regression {

Dataset::Dataset(std::size_t k) : k_(k) {}

void Dataset::add_row(std::span<const double> predictors, double response) {
  if (predictors.size() != k_) {
    throw ContractError(fmt::format("row has {} predictors, dataset has {}",
                                    predictors.size(), k_));
  }
  predictors_.insert(predictors_.end(), predictors.begin(), predictors.end());
  response_.push_back(response);
}

Dataset Dataset::subset(std::span<const std::size_t> keep) const {
  Dataset out(k_);
  for (std::size_t row : keep) {
    if (row >= size()) {
      throw ContractError(fmt::format("row {} out of range", row));
    }
    out.add_row(predictors(row), response(row));
  }
  return out;
}

namespace {

// Column-major dense matrix, just enough for a small least-squares solve.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& operator()(std::size_t r, std::size_t c) { return data[c * rows + r]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data[c * rows + r];
  }
};

Matrix design_matrix(const Dataset& data) {
  Matrix x(data.size(), data.k() + 1);
  for (std::size_t i = 0; i < data.size(); ++i) {
    x(i, 0) = 1.0;
    auto row = data.predictors(i);
    for (std::size_t j = 0; j < data.k(); ++j) x(i, j + 1) = row[j];
  }
  return x;
}

void require_enough_rows(const Dataset& data) {
  if (data.size() <= data.k() + 1) {
    throw NumericError(fmt::format(
        "need more than {} rows to fit {} predictors with an intercept, got {}",
        data.k() + 1, data.k(), data.size()));
  }
}

struct Decomposition {
  Matrix r_inverse;     // p x p, upper triangular
  std::vector<double> beta;
};

// Householder QR of the design; returns R^{-1} and the least-squares beta.
Decomposition solve_least_squares(const Dataset& data) {
  require_enough_rows(data);
  Matrix a = design_matrix(data);
  const std::size_t n = a.rows;
  const std::size_t p = a.cols;
  std::vector<double> y(data.responses().begin(), data.responses().end());

  std::vector<double> column_norm(p);
  for (std::size_t j = 0; j < p; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a(i, j) * a(i, j);
    column_norm[j] = std::sqrt(acc);
  }

  std::vector<double> v(n);
  for (std::size_t j = 0; j < p; ++j) {
    double norm = 0.0;
    for (std::size_t i = j; i < n; ++i) norm += a(i, j) * a(i, j);
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    double alpha = a(j, j) > 0 ? -norm : norm;
    for (std::size_t i = j; i < n; ++i) v[i] = a(i, j);
    v[j] -= alpha;
    double vv = 0.0;
    for (std::size_t i = j; i < n; ++i) vv += v[i] * v[i];
    if (vv == 0.0) continue;
    for (std::size_t c = j; c < p; ++c) {
      double dot = 0.0;
      for (std::size_t i = j; i < n; ++i) dot += v[i] * a(i, c);
      double scale = 2.0 * dot / vv;
      for (std::size_t i = j; i < n; ++i) a(i, c) -= scale * v[i];
    }
    double dot = 0.0;
    for (std::size_t i = j; i < n; ++i) dot += v[i] * y[i];
    double scale = 2.0 * dot / vv;
    for (std::size_t i = j; i < n; ++i) y[i] -= scale * v[i];
  }

  // Most dependent column: smallest diagonal of R relative to its column norm.
  std::size_t weakest = 0;
  double weakest_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < p; ++j) {
    double ratio =
        column_norm[j] == 0.0 ? 0.0 : std::abs(a(j, j)) / column_norm[j];
    if (ratio < weakest_ratio) {
      weakest_ratio = ratio;
      weakest = j;
    }
  }
  auto singular = [&](double condition) {
    std::string name =
        weakest == 0 ? "intercept" : fmt::format("predictor {}", weakest - 1);
    return SingularDesignError(
        static_cast<int>(weakest),
        fmt::format("singular design: column {} ({}) is linearly dependent on "
                    "the others (condition estimate {:.3g})",
                    weakest, name, condition));
  };
  for (std::size_t j = 0; j < p; ++j) {
    if (a(j, j) == 0.0) throw singular(std::numeric_limits<double>::infinity());
  }

  Matrix r_inv(p, p);
  for (std::size_t c = 0; c < p; ++c) {
    r_inv(c, c) = 1.0 / a(c, c);
    for (std::size_t r = c; r-- > 0;) {
      double acc = 0.0;
      for (std::size_t m = r + 1; m <= c; ++m) acc += a(r, m) * r_inv(m, c);
      r_inv(r, c) = -acc / a(r, r);
    }
  }
  auto norm1 = [p](auto&& at) {
    double best = 0.0;
    for (std::size_t c = 0; c < p; ++c) {
      double acc = 0.0;
      for (std::size_t r = 0; r <= c; ++r) acc += std::abs(at(r, c));
      best = std::max(best, acc);
    }
    return best;
  };
  double condition = norm1([&](std::size_t r, std::size_t c) { return a(r, c); }) *
                     norm1([&](std::size_t r, std::size_t c) { return r_inv(r, c); });
  if (!(condition <= kMaxCondition)) throw singular(condition);

  std::vector<double> beta(p, 0.0);
  for (std::size_t r = 0; r < p; ++r) {
    for (std::size_t c = r; c < p; ++c) beta[r] += r_inv(r, c) * y[c];
  }
  return {std::move(r_inv), std::move(beta)};
}

std::vector<double> residuals_of(const Dataset& data,
                                 const std::vector<double>& beta) {
  std::vector<double> out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    double fitted = beta[0];
    auto row = data.predictors(i);
    for (std::size_t j = 0; j < data.k(); ++j) fitted += beta[j + 1] * row[j];
    out[i] = data.response(i) - fitted;
  }
  return out;
}

}  // namespace

LinearModel fit(const Dataset& data) {
  LinearModel model;
  model.beta = solve_least_squares(data).beta;
  model.diagnostics.residuals = residuals_of(data, model.beta);
  return model;
}

double predict(const LinearModel& model, std::span<const double> predictors) {
  if (model.beta.empty() || predictors.size() != model.k()) {
    throw ContractError(fmt::format("model takes {} predictors, got {}",
                                    model.k(), predictors.size()));
  }
  double y = model.beta[0];
  for (std::size_t j = 0; j < predictors.size(); ++j) {
    y += model.beta[j + 1] * predictors[j];
  }
  return y;
}

std::vector<double> cooks_distance(const Dataset& data,
                                   const LinearModel& model) {
  if (model.k() != data.k()) {
    throw ContractError(fmt::format("model has {} predictors, data has {}",
                                    model.k(), data.k()));
  }
  Decomposition qr = solve_least_squares(data);
  const std::size_t n = data.size();
  const std::size_t p = data.k() + 1;
  std::vector<double> e = residuals_of(data, model.beta);

  double sse = 0.0;
  double yy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sse += e[i] * e[i];
    yy += data.response(i) * data.response(i);
  }
  std::vector<double> distances(n, 0.0);
  double exact_fit_level = 1e-10 * std::max(1.0, std::sqrt(yy));
  if (std::sqrt(sse) <= exact_fit_level) return distances;
  double s2 = sse / static_cast<double>(n - p);

  std::vector<double> row(p);
  for (std::size_t i = 0; i < n; ++i) {
    row[0] = 1.0;
    auto x = data.predictors(i);
    std::copy(x.begin(), x.end(), row.begin() + 1);
    // h_ii = || x_i^T R^{-1} ||^2
    double leverage = 0.0;
    for (std::size_t c = 0; c < p; ++c) {
      double acc = 0.0;
      for (std::size_t r = 0; r <= c; ++r) acc += row[r] * qr.r_inverse(r, c);
      leverage += acc * acc;
    }
    double slack = 1.0 - leverage;
    distances[i] = slack <= 1e-12
                       ? std::numeric_limits<double>::infinity()
                       : e[i] * e[i] / (static_cast<double>(p) * s2) * leverage /
                             (slack * slack);
  }
  return distances;
}

CooksRule CooksRule::fixed(double threshold) {
  if (!(threshold > 0.0) || !std::isfinite(threshold)) {
    throw ContractError(
        fmt::format("Cook's distance threshold {} must be positive", threshold));
  }
  return CooksRule(threshold);
}

CooksRule CooksRule::parse(std::string_view text) {
  if (text == "4overN" || text == "4/n") return four_over_n();
  double value = 0.0;
  try {
    value = csv::parse_double(text, "Cook's distance rule");
  } catch (const FormatError&) {
    throw ContractError(fmt::format(
        "Cook's distance rule '{}' is neither 4overN nor a number", text));
  }
  return fixed(value);
}

double CooksRule::threshold(std::size_t n) const {
  return fixed_ > 0.0 ? fixed_ : 4.0 / static_cast<double>(n);
}

std::string CooksRule::name() const {
  return fixed_ > 0.0 ? csv::format_double(fixed_) : "4overN";
}

LinearModel fit_with_outlier_removal(const Dataset& data,
                                     const CooksRule& rule) {
  LinearModel screening = fit(data);
  std::vector<double> distances = cooks_distance(data, screening);
  double cut = rule.threshold(data.size());

  std::vector<std::size_t> keep;
  std::vector<std::size_t> removed;
  for (std::size_t i = 0; i < data.size(); ++i) {
    (distances[i] > cut ? removed : keep).push_back(i);
  }
  if (removed.empty()) {
    screening.diagnostics.cooks_distances = std::move(distances);
    return screening;
  }
  Dataset reduced = data.subset(keep);
  if (reduced.size() <= data.k() + 1) {
    throw NumericError(fmt::format(
        "removing {} outliers leaves {} rows, too few for {} predictors",
        removed.size(), reduced.size(), data.k()));
  }
  LinearModel refit = fit(reduced);
  refit.diagnostics.cooks_distances = std::move(distances);
  refit.diagnostics.removed_rows = std::move(removed);
  return refit;
}

ResidualDiagnostics residual_diagnostics(const LinearModel& model) {
  const auto& e = model.diagnostics.residuals;
  if (e.empty()) {
    throw ContractError("residual diagnostics need a fitted model");
  }
  const std::size_t n = e.size();
  ResidualDiagnostics out;

  std::size_t bins =
      static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(n)))) + 1;
  auto [lo_it, hi_it] = std::minmax_element(e.begin(), e.end());
  double lo = *lo_it;
  double hi = *hi_it;
  if (hi == lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  double width = (hi - lo) / static_cast<double>(bins);
  out.bin_edges.resize(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) {
    out.bin_edges[b] = lo + width * static_cast<double>(b);
  }
  out.bin_edges.back() = hi;
  out.counts.assign(bins, 0);
  for (double r : e) {
    auto b = static_cast<std::size_t>((r - lo) / width);
    ++out.counts[std::min(b, bins - 1)];
  }

  std::vector<double> sorted = e;
  std::sort(sorted.begin(), sorted.end());
  boost::math::normal_distribution<double> standard;
  out.normal_plot.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double position = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    out.normal_plot.emplace_back(boost::math::quantile(standard, position),
                                 sorted[i]);
  }
  return out;
}

std::string format_model_csv(const LinearModel& model,
                             std::span<const std::string> term_names) {
  if (term_names.size() != model.beta.size()) {
    throw ContractError(fmt::format("{} term names for {} coefficients",
                                    term_names.size(), model.beta.size()));
  }
  std::string out = "term,coefficient\n";
  for (std::size_t j = 0; j < model.beta.size(); ++j) {
    out += fmt::format("{},{}\n", term_names[j],
                       csv::format_double(model.beta[j]));
  }
  if (!model.diagnostics.removed_rows.empty()) {
    std::string rows;
    for (std::size_t r : model.diagnostics.removed_rows) {
      rows += (rows.empty() ? "" : ";") + std::to_string(r);
    }
    out += "# removed_rows=" + rows + "\n";
  }
  return out;
}

LinearModel parse_model_csv(std::string_view text) {
  csv::Document doc = csv::parse(text, {"term", "coefficient"});
  if (doc.rows.empty()) throw FormatError("model file has no coefficients");
  LinearModel model;
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    model.beta.push_back(csv::parse_double(doc.rows[r][1], "coefficient",
                                           doc.line_numbers[r]));
  }
  return model;
}

}  // namespace palstream::regression
