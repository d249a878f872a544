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
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "palstream/error.h"

namespace palstream::regression {
namespace {

struct Synthetic {
  Dataset data{0};
  std::vector<double> beta;
};

// y = beta . (1, x) + noise with predictors uniform in [-10, 10].
Synthetic make_linear(std::size_t n, std::size_t k, double noise,
                      std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::normal_distribution<double> eps(0.0, noise > 0 ? noise : 1.0);
  Synthetic s{Dataset(k), {}};
  for (std::size_t j = 0; j <= k; ++j) s.beta.push_back(u(rng));
  std::vector<double> x(k);
  for (std::size_t i = 0; i < n; ++i) {
    double y = s.beta[0];
    for (std::size_t j = 0; j < k; ++j) {
      x[j] = u(rng);
      y += s.beta[j + 1] * x[j];
    }
    if (noise > 0) y += eps(rng);
    s.data.add_row(x, y);
  }
  return s;
}

Eigen::MatrixXd eigen_design(const Dataset& d) {
  Eigen::MatrixXd x(d.size(), d.k() + 1);
  for (std::size_t i = 0; i < d.size(); ++i) {
    x(i, 0) = 1.0;
    for (std::size_t j = 0; j < d.k(); ++j) x(i, j + 1) = d.predictors(i)[j];
  }
  return x;
}

Eigen::VectorXd eigen_response(const Dataset& d) {
  Eigen::VectorXd y(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) y(i) = d.response(i);
  return y;
}

Eigen::VectorXd oracle_beta(const Dataset& d) {
  return eigen_design(d).colPivHouseholderQr().solve(eigen_response(d));
}

// Cook's distance from n leave-one-out refits:
// D_i = sum_j (yhat_j - yhat_j(i))^2 / (p s^2).
std::vector<double> oracle_cooks(const Dataset& d) {
  Eigen::MatrixXd x = eigen_design(d);
  Eigen::VectorXd y = eigen_response(d);
  const auto n = static_cast<Eigen::Index>(d.size());
  const auto p = x.cols();
  Eigen::VectorXd b = x.colPivHouseholderQr().solve(y);
  Eigen::VectorXd fitted = x * b;
  double s2 = (y - fitted).squaredNorm() / static_cast<double>(n - p);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::MatrixXd xi(n - 1, p);
    Eigen::VectorXd yi(n - 1);
    for (Eigen::Index r = 0, w = 0; r < n; ++r) {
      if (r == i) continue;
      xi.row(w) = x.row(r);
      yi(w) = y(r);
      ++w;
    }
    Eigen::VectorXd bi = xi.colPivHouseholderQr().solve(yi);
    out.push_back((fitted - x * bi).squaredNorm() / (static_cast<double>(p) * s2));
  }
  return out;
}

TEST(Fit, NoiselessTextbookExample) {
  Dataset d(2);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int i = 0; i < 10; ++i) {
    double x1 = u(rng);
    double x2 = u(rng);
    const double row[] = {x1, x2};
    d.add_row(row, 2 + 3 * x1 - x2);
  }
  LinearModel m = fit(d);
  ASSERT_EQ(m.beta.size(), 3u);
  EXPECT_NEAR(m.beta[0], 2.0, 1e-9);
  EXPECT_NEAR(m.beta[1], 3.0, 1e-9);
  EXPECT_NEAR(m.beta[2], -1.0, 1e-9);
}

TEST(Fit, ConstantResponse) {
  std::mt19937_64 rng(2);
  Synthetic s = make_linear(20, 3, 0.0, rng);
  Dataset d(3);
  for (std::size_t i = 0; i < s.data.size(); ++i) d.add_row(s.data.predictors(i), 7.5);
  LinearModel m = fit(d);
  EXPECT_NEAR(m.beta[0], 7.5, 1e-9);
  for (std::size_t j = 1; j < m.beta.size(); ++j) EXPECT_NEAR(m.beta[j], 0.0, 1e-9);
}

TEST(Fit, NoiselessRecoveryOnRandomSystems) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> k_dist(1, 5);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t k = k_dist(rng);
    std::uniform_int_distribution<std::size_t> n_dist(k + 2, 200);
    Synthetic s = make_linear(n_dist(rng), k, 0.0, rng);
    LinearModel m = fit(s.data);
    for (std::size_t j = 0; j <= k; ++j) EXPECT_NEAR(m.beta[j], s.beta[j], 1e-9);
  }
}

TEST(Fit, MatchesOrthogonalDecompositionOracle) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    Synthetic s = make_linear(40, 4, 3.0, rng);
    LinearModel m = fit(s.data);
    Eigen::VectorXd b = oracle_beta(s.data);
    for (std::size_t j = 0; j < m.beta.size(); ++j) {
      EXPECT_NEAR(m.beta[j], b(static_cast<Eigen::Index>(j)),
                  1e-6 * std::max(1.0, std::abs(b(static_cast<Eigen::Index>(j)))));
    }
  }
}

TEST(Fit, ResidualsOrthogonalToDesign) {
  std::mt19937_64 rng(5);
  Synthetic s = make_linear(60, 3, 2.0, rng);
  LinearModel m = fit(s.data);
  Eigen::MatrixXd x = eigen_design(s.data);
  Eigen::Map<const Eigen::VectorXd> e(m.diagnostics.residuals.data(),
                                      static_cast<Eigen::Index>(m.diagnostics.residuals.size()));
  double ynorm = eigen_response(s.data).norm();
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    EXPECT_LE(std::abs(x.col(j).dot(e)), 1e-6 * x.col(j).norm() * ynorm);
  }
  EXPECT_LE(std::abs(e.sum()), 1e-6 * ynorm);
}

TEST(Fit, TooFewRowsIsNumericError) {
  Dataset d(2);
  const double a[] = {1, 2};
  const double b[] = {3, 1};
  d.add_row(a, 1);
  d.add_row(b, 2);
  d.add_row(a, 3);
  EXPECT_THROW(fit(d), NumericError);
}

TEST(Fit, CollinearColumnNamed) {
  Dataset d(3);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 30; ++i) {
    double a = u(rng);
    double b = u(rng);
    const double row[] = {a, b, 2 * a - b};
    d.add_row(row, u(rng));
  }
  try {
    fit(d);
    FAIL() << "expected SingularDesignError";
  } catch (const SingularDesignError& e) {
    EXPECT_GE(e.column(), 1);
    EXPECT_NE(std::string(e.what()).find("column"), std::string::npos);
  }
}

TEST(Fit, ConstantPredictorDuplicatesIntercept) {
  Dataset d(1);
  for (int i = 0; i < 10; ++i) {
    const double row[] = {4.0};
    d.add_row(row, i);
  }
  EXPECT_THROW(fit(d), SingularDesignError);
}

TEST(Predict, PublishedWorkedExample) {
  LinearModel m{.beta = {-313.97, 0.0496, 4.1217, 11.444}, .diagnostics = {}};
  const double x[] = {20.6, 1, 28};
  EXPECT_NEAR(predict(m, x), 11.60546, 1e-4);
}

TEST(Predict, InterceptAtOrigin) {
  LinearModel m{.beta = {-310.72, 0.051, 5.7905, 11.158}, .diagnostics = {}};
  const double x[] = {0, 0, 0};
  EXPECT_DOUBLE_EQ(predict(m, x), -310.72);
}

TEST(Predict, ZeroModel) {
  LinearModel m{.beta = {0, 0, 0}, .diagnostics = {}};
  const double x[] = {5, -8};
  EXPECT_EQ(predict(m, x), 0.0);
}

TEST(Predict, DimensionMismatch) {
  LinearModel m{.beta = {1, 2}, .diagnostics = {}};
  const double x[] = {1, 2};
  EXPECT_THROW(predict(m, x), ContractError);
}

TEST(Predict, Affine) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-50, 50);
  LinearModel m{.beta = {u(rng), u(rng), u(rng), u(rng)}, .diagnostics = {}};
  for (int trial = 0; trial < 100; ++trial) {
    double a = u(rng) / 50.0;
    double p[3];
    double q[3];
    double mix[3];
    for (int j = 0; j < 3; ++j) {
      p[j] = u(rng);
      q[j] = u(rng);
      mix[j] = a * p[j] + (1 - a) * q[j];
    }
    EXPECT_NEAR(predict(m, mix), a * predict(m, p) + (1 - a) * predict(m, q),
                1e-9 * 1e4);
  }
}

TEST(CooksDistance, ZeroForNoiselessData) {
  std::mt19937_64 rng(8);
  Synthetic s = make_linear(25, 2, 0.0, rng);
  for (double d : cooks_distance(s.data, fit(s.data))) EXPECT_EQ(d, 0.0);
}

TEST(CooksDistance, MatchesLeaveOneOutOracle) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::size_t> k_dist(1, 4);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t k = k_dist(rng);
    std::uniform_int_distribution<std::size_t> n_dist(k + 3, 50);
    Synthetic s = make_linear(n_dist(rng), k, 1.5, rng);
    auto got = cooks_distance(s.data, fit(s.data));
    auto want = oracle_cooks(s.data);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_NEAR(got[i], want[i], 1e-6 * std::max(1.0, want[i]));
    }
  }
}

TEST(CooksDistance, GrossOutlierIsMaximal) {
  std::mt19937_64 rng(10);
  Synthetic s = make_linear(20, 2, 0.5, rng);
  Dataset d(2);
  for (std::size_t i = 0; i < s.data.size(); ++i) {
    d.add_row(s.data.predictors(i), s.data.response(i) + (i == 13 ? 50.0 : 0.0));
  }
  auto dist = cooks_distance(d, fit(d));
  EXPECT_EQ(std::max_element(dist.begin(), dist.end()) - dist.begin(), 13);
}

TEST(CooksDistance, PermutationEquivariant) {
  std::mt19937_64 rng(11);
  Synthetic s = make_linear(30, 3, 1.0, rng);
  std::vector<std::size_t> perm(s.data.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  Dataset shuffled = s.data.subset(perm);
  auto a = cooks_distance(s.data, fit(s.data));
  auto b = cooks_distance(shuffled, fit(shuffled));
  for (std::size_t i = 0; i < perm.size(); ++i) {
    EXPECT_NEAR(b[i], a[perm[i]], 1e-9 * std::max(1.0, a[perm[i]]));
  }
}

TEST(OutlierRemoval, CleanDataKeepsEverythingAtFixedThreshold) {
  std::mt19937_64 rng(12);
  Synthetic s = make_linear(40, 2, 1.0, rng);
  LinearModel plain = fit(s.data);
  LinearModel screened = fit_with_outlier_removal(s.data, CooksRule::fixed(1.0));
  EXPECT_TRUE(screened.diagnostics.removed_rows.empty());
  EXPECT_EQ(screened.beta, plain.beta);
  EXPECT_EQ(screened.diagnostics.cooks_distances.size(), 40u);
}

TEST(OutlierRemoval, NoiselessDataRemovesNothing) {
  std::mt19937_64 rng(13);
  Synthetic s = make_linear(40, 3, 0.0, rng);
  LinearModel m = fit_with_outlier_removal(s.data, CooksRule::four_over_n());
  EXPECT_TRUE(m.diagnostics.removed_rows.empty());
}

TEST(OutlierRemoval, PlantedOutliersRemovedAndCoefficientsRecovered) {
  std::mt19937_64 rng(14);
  Synthetic s = make_linear(60, 2, 0.1, rng);
  Dataset d(2);
  for (std::size_t i = 0; i < s.data.size(); ++i) {
    double shift = (i == 7 || i == 41) ? 60.0 : 0.0;
    d.add_row(s.data.predictors(i), s.data.response(i) + shift);
  }
  LinearModel single = fit(d);
  LinearModel m = fit_with_outlier_removal(d, CooksRule::four_over_n());
  const auto& removed = m.diagnostics.removed_rows;
  EXPECT_TRUE(std::find(removed.begin(), removed.end(), 7u) != removed.end());
  EXPECT_TRUE(std::find(removed.begin(), removed.end(), 41u) != removed.end());
  double refit_err = 0.0;
  double single_err = 0.0;
  for (std::size_t j = 0; j < 3; ++j) {
    refit_err = std::max(refit_err, std::abs(m.beta[j] - s.beta[j]));
    single_err = std::max(single_err, std::abs(single.beta[j] - s.beta[j]));
  }
  EXPECT_LT(refit_err, 0.1);
  EXPECT_GT(single_err, refit_err);
}

TEST(OutlierRemoval, TooFewSurvivorsIsNumericError) {
  Dataset d(1);
  const double xs[] = {0, 1, 2, 3, 4};
  const double ys[] = {0, 1, 2, 3, 40};
  for (int i = 0; i < 5; ++i) d.add_row(std::span(&xs[i], 1), ys[i]);
  EXPECT_THROW(fit_with_outlier_removal(d, CooksRule::fixed(1e-9)),
               NumericError);
}

TEST(CooksRule, Parse) {
  EXPECT_DOUBLE_EQ(CooksRule::parse("4overN").threshold(50), 0.08);
  EXPECT_DOUBLE_EQ(CooksRule::parse("4/n").threshold(8), 0.5);
  EXPECT_DOUBLE_EQ(CooksRule::parse("1").threshold(8), 1.0);
  EXPECT_EQ(CooksRule::parse("4overN").name(), "4overN");
  EXPECT_THROW(CooksRule::parse("huge"), ContractError);
  EXPECT_THROW(CooksRule::parse("-1"), ContractError);
}

TEST(ResidualDiagnostics, HistogramAndNormalPlot) {
  std::mt19937_64 rng(15);
  Synthetic s = make_linear(50, 2, 2.0, rng);
  LinearModel m = fit(s.data);
  ResidualDiagnostics r = residual_diagnostics(m);
  // Sturges: ceil(log2 50) + 1 = 7 bins.
  EXPECT_EQ(r.counts.size(), 7u);
  EXPECT_EQ(r.bin_edges.size(), 8u);
  EXPECT_EQ(std::accumulate(r.counts.begin(), r.counts.end(), std::size_t{0}), 50u);
  ASSERT_EQ(r.normal_plot.size(), 50u);
  for (std::size_t i = 1; i < r.normal_plot.size(); ++i) {
    EXPECT_LT(r.normal_plot[i - 1].first, r.normal_plot[i].first);
    EXPECT_LE(r.normal_plot[i - 1].second, r.normal_plot[i].second);
  }
  // Symmetric plotting positions give antisymmetric quantiles.
  EXPECT_NEAR(r.normal_plot.front().first, -r.normal_plot.back().first, 1e-12);
  EXPECT_NEAR(r.normal_plot[0].first, -2.326348, 1e-5);  // Phi^-1(0.01)
}

TEST(ResidualDiagnostics, RequiresResiduals) {
  EXPECT_THROW(residual_diagnostics(LinearModel{}), ContractError);
}

TEST(ModelCsv, RoundTrip) {
  LinearModel m{.beta = {-313.97, 0.0496, 4.1217, 11.444}, .diagnostics = {}};
  m.diagnostics.removed_rows = {3, 9};
  std::vector<std::string> names = {"intercept", "a", "b", "c"};
  std::string text = format_model_csv(m, names);
  EXPECT_EQ(text,
            "term,coefficient\nintercept,-313.97\na,0.0496\nb,4.1217\n"
            "c,11.444\n# removed_rows=3;9\n");
  EXPECT_EQ(parse_model_csv(text).beta, m.beta);
  EXPECT_THROW(parse_model_csv("term,coefficient\n"), FormatError);
  EXPECT_THROW(parse_model_csv("name,value\nx,1\n"), FormatError);
}

}  // namespace
}  // namespace palstream::regression
