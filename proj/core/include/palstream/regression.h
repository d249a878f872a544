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

#ifndef PALSTREAM_REGRESSION_H_
#define PALSTREAM_REGRESSION_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace palstream::regression {

// Observations of k predictors and one response.
class Dataset {
 public:
  explicit Dataset(std::size_t k);

  // Throws ContractError when predictors.size() != k().
  void add_row(std::span<const double> predictors, double response);

  std::size_t k() const noexcept { return k_; }
  std::size_t size() const noexcept { return response_.size(); }

  std::span<const double> predictors(std::size_t row) const {
    return {predictors_.data() + row * k_, k_};
  }
  double response(std::size_t row) const { return response_[row]; }
  std::span<const double> responses() const noexcept { return response_; }

  // Rows listed in keep, in that order.
  Dataset subset(std::span<const std::size_t> keep) const;

 private:
  std::size_t k_;
  std::vector<double> predictors_;
  std::vector<double> response_;
};

struct FitDiagnostics {
  // Residuals y - X beta of the rows the final fit used.
  std::vector<double> residuals;
  // Cook's distance of every input row from the screening fit. Empty for a
  // plain fit().
  std::vector<double> cooks_distances;
  // Input rows dropped before the final fit, ascending.
  std::vector<std::size_t> removed_rows;
};

struct LinearModel {
  // Intercept first, then one coefficient per predictor.
  std::vector<double> beta;
  FitDiagnostics diagnostics;

  std::size_t k() const noexcept { return beta.empty() ? 0 : beta.size() - 1; }
};

// Designs whose 1-norm condition estimate exceeds this are rejected.
inline constexpr double kMaxCondition = 1e12;

// Least squares with an intercept column. Solves the normal equations through
// a Householder QR of the design. Throws NumericError when size() <= k + 1 and
// SingularDesignError when the design is rank deficient.
LinearModel fit(const Dataset& data);

double predict(const LinearModel& model, std::span<const double> predictors);

// D_i = e_i^2 / (p s^2) * h_ii / (1 - h_ii)^2 for a model fitted on data.
// Exact fits (residuals at rounding level) give all zeros. Throws NumericError
// when size() <= k + 1.
std::vector<double> cooks_distance(const Dataset& data, const LinearModel& model);

class CooksRule {
 public:
  // Threshold 4 / n.
  static CooksRule four_over_n() { return CooksRule(0.0); }
  static CooksRule fixed(double threshold);
  // "4overN" or a positive number.
  static CooksRule parse(std::string_view text);

  double threshold(std::size_t n) const;
  std::string name() const;

 private:
  explicit CooksRule(double fixed) : fixed_(fixed) {}
  double fixed_;  // 0 selects 4 / n
};

// fit, drop every row with Cook's distance above the rule's threshold, refit
// once. Throws NumericError when too few rows survive.
LinearModel fit_with_outlier_removal(const Dataset& data, const CooksRule& rule);

struct ResidualDiagnostics {
  // bin_edges.size() == counts.size() + 1; bin count follows Sturges' rule.
  std::vector<double> bin_edges;
  std::vector<std::size_t> counts;
  // (standard normal quantile at (i - 0.5) / n, i-th smallest residual).
  std::vector<std::pair<double, double>> normal_plot;
};

// Throws ContractError for a model without residuals.
ResidualDiagnostics residual_diagnostics(const LinearModel& model);

// Model file: "term,coefficient" rows after an optional header, '#' comments
// ignored. term_names label the intercept and each predictor.
std::string format_model_csv(const LinearModel& model,
                             std::span<const std::string> term_names);
LinearModel parse_model_csv(std::string_view text);

}  // namespace palstream::regression

#endif  // PALSTREAM_REGRESSION_H_
