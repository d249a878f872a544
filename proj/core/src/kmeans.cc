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

#include "palstream/kmeans.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <fmt/core.h>

#include "palstream/error.h"

namespace palstream::kmeans {

PointSet::PointSet(std::size_t dim, std::vector<double> coords,
                   std::vector<double> weights)
    : dim_(dim), coords_(std::move(coords)), weights_(std::move(weights)) {
  if (dim_ == 0) {
    throw ContractError("point dimension must be >= 1");
  }
  if (coords_.empty() || coords_.size() % dim_ != 0) {
    throw ContractError(fmt::format(
        "{} coordinates do not form a nonempty set of {}-d points",
        coords_.size(), dim_));
  }
  if (!weights_.empty()) {
    if (weights_.size() != size()) {
      throw ContractError(fmt::format("{} weights for {} points",
                                      weights_.size(), size()));
    }
    for (double w : weights_) {
      if (!(w > 0.0) || !std::isfinite(w)) {
        throw ContractError("point weights must be positive and finite");
      }
    }
  }
}

void KmeansConfig::validate() const {
  if (k == 0) throw ContractError("k-means needs k >= 1");
  if (max_iterations == 0) {
    throw ContractError("k-means needs max_iterations >= 1");
  }
  if (!(tolerance >= 0.0)) {
    throw ContractError("k-means tolerance must be >= 0");
  }
}

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    double diff = a[d] - b[d];
    acc += diff * diff;
  }
  return acc;
}

void check_dims(const PointSet& data, const PointSet& centers) {
  if (data.dim() != centers.dim()) {
    throw ContractError(fmt::format("point dimension {} != center dimension {}",
                                    data.dim(), centers.dim()));
  }
}

struct Nearest {
  std::uint32_t index = 0;
  double best_sq = std::numeric_limits<double>::infinity();
  double second_sq = std::numeric_limits<double>::infinity();
};

Nearest nearest_two(std::span<const double> x, const PointSet& centers) {
  Nearest n;
  for (std::size_t j = 0; j < centers.size(); ++j) {
    double d = squared_distance(x, centers.point(j));
    if (d < n.best_sq) {
      n.second_sq = n.best_sq;
      n.best_sq = d;
      n.index = static_cast<std::uint32_t>(j);
    } else if (d < n.second_sq) {
      n.second_sq = d;
    }
  }
  return n;
}

bool same_point(std::span<const double> a, std::span<const double> b) {
  return std::equal(a.begin(), a.end(), b.begin());
}

// Bounds are only trusted with a margin so that rounding in the drift updates
// can never hide a reassignment.
constexpr double kBoundRelSlack = 1e-10;
constexpr double kBoundAbsSlack = 1e-10;

bool provably_strictly_closer(double upper, double bound) {
  return upper * (1.0 + kBoundRelSlack) + kBoundAbsSlack < bound;
}

}  // namespace

PointSet init_centers(const PointSet& data, const KmeansConfig& cfg) {
  cfg.validate();
  const std::size_t n = data.size();

  // Efraimidis-Spirakis keys: ordering by log(u)/w descending is a weighted
  // sample without replacement; with unit weights it is a uniform shuffle.
  std::mt19937_64 rng(cfg.seed);
  std::vector<double> keys(n);
  for (std::size_t i = 0; i < n; ++i) {
    double u = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
    keys[i] = std::log(u) / data.weight(i);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto by_key = [&keys](std::size_t a, std::size_t b) {
    return keys[a] > keys[b] || (keys[a] == keys[b] && a < b);
  };

  std::vector<double> chosen;
  chosen.reserve(cfg.k * data.dim());
  std::size_t picked = 0;
  auto take_from = [&](std::size_t begin, std::size_t end) {
    for (std::size_t pos = begin; pos < end && picked < cfg.k; ++pos) {
      auto candidate = data.point(order[pos]);
      bool duplicate = false;
      for (std::size_t c = 0; c < picked && !duplicate; ++c) {
        duplicate = same_point(
            candidate, std::span<const double>(chosen).subspan(
                           c * data.dim(), data.dim()));
      }
      if (!duplicate) {
        chosen.insert(chosen.end(), candidate.begin(), candidate.end());
        ++picked;
      }
    }
  };

  // Usually the first few keys already give k distinct points.
  std::size_t head = std::min(n, 4 * cfg.k + 16);
  std::partial_sort(order.begin(), order.begin() + head, order.end(), by_key);
  take_from(0, head);
  if (picked < cfg.k && head < n) {
    std::sort(order.begin() + head, order.end(), by_key);
    take_from(head, n);
  }
  if (picked < cfg.k) {
    throw InfeasibleError(fmt::format(
        "k = {} exceeds the {} distinct points available", cfg.k, picked));
  }
  return PointSet(data.dim(), std::move(chosen));
}

std::vector<std::uint32_t> assign(const PointSet& data,
                                  const PointSet& centers) {
  check_dims(data, centers);
  std::vector<std::uint32_t> membership(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    membership[i] = nearest_two(data.point(i), centers).index;
  }
  return membership;
}

PointSet update_centers(const PointSet& data,
                        std::span<const std::uint32_t> membership,
                        const PointSet& previous) {
  check_dims(data, previous);
  if (membership.size() != data.size()) {
    throw ContractError(fmt::format("{} memberships for {} points",
                                    membership.size(), data.size()));
  }
  const std::size_t k = previous.size();
  const std::size_t dim = data.dim();
  std::vector<double> sums(k * dim, 0.0);
  std::vector<double> mass(k, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::uint32_t c = membership[i];
    if (c >= k) {
      throw ContractError(
          fmt::format("membership {} of point {} names no center", c, i));
    }
    double w = data.weight(i);
    auto x = data.point(i);
    for (std::size_t d = 0; d < dim; ++d) sums[c * dim + d] += w * x[d];
    mass[c] += w;
  }
  PointSet next = previous;
  for (std::size_t c = 0; c < k; ++c) {
    if (mass[c] == 0.0) continue;  // empty cluster keeps its stale center
    auto center = next.point(c);
    for (std::size_t d = 0; d < dim; ++d) center[d] = sums[c * dim + d] / mass[c];
  }
  return next;
}

double sum_squared_error(const PointSet& data, const PointSet& centers,
                         std::span<const std::uint32_t> membership) {
  check_dims(data, centers);
  double sse = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    sse += data.weight(i) *
           squared_distance(data.point(i), centers.point(membership[i]));
  }
  return sse;
}

Clustering run(const PointSet& data, const KmeansConfig& cfg) {
  PointSet centers = init_centers(data, cfg);
  const std::size_t n = data.size();
  const std::size_t k = centers.size();

  // Hamerly bounds: upper[i] >= distance to the assigned center, lower[i] <=
  // distance to every other center.
  std::vector<std::uint32_t> membership(n);
  std::vector<double> upper(n);
  std::vector<double> lower(n);
  auto full_scan = [&](std::size_t i) {
    Nearest near = nearest_two(data.point(i), centers);
    membership[i] = near.index;
    upper[i] = std::sqrt(near.best_sq);
    lower[i] = std::sqrt(near.second_sq);
  };
  for (std::size_t i = 0; i < n; ++i) full_scan(i);

  Clustering out{.centers = centers, .membership = {}, .sse_history = {}};
  std::vector<double> drift(k);
  std::vector<double> half_gap(k);
  while (true) {
    out.sse_history.push_back(sum_squared_error(data, centers, membership));

    PointSet next = update_centers(data, membership, centers);
    double max_drift = 0.0;
    std::size_t max_at = 0;
    double runner_up = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      drift[j] = std::sqrt(squared_distance(centers.point(j), next.point(j)));
      if (drift[j] > max_drift) {
        runner_up = max_drift;
        max_drift = drift[j];
        max_at = j;
      } else if (drift[j] > runner_up) {
        runner_up = drift[j];
      }
    }
    centers = std::move(next);
    ++out.iterations;
    if (max_drift <= cfg.tolerance) {
      out.converged = true;
      break;
    }
    if (out.iterations >= cfg.max_iterations) break;

    for (std::size_t j = 0; j < k; ++j) {
      double gap = std::numeric_limits<double>::infinity();
      for (std::size_t o = 0; o < k; ++o) {
        if (o != j) {
          gap = std::min(gap, squared_distance(centers.point(j),
                                               centers.point(o)));
        }
      }
      half_gap[j] = 0.5 * std::sqrt(gap);
    }
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t a = membership[i];
      upper[i] += drift[a];
      lower[i] -= (a == max_at) ? runner_up : max_drift;
      double bound = std::max(half_gap[a], lower[i]);
      if (provably_strictly_closer(upper[i], bound)) continue;
      upper[i] = std::sqrt(squared_distance(data.point(i), centers.point(a)));
      if (provably_strictly_closer(upper[i], bound)) continue;
      full_scan(i);
    }
  }

  // Final exact assignment against the returned centers.
  out.membership = assign(data, centers);
  out.sse = sum_squared_error(data, centers, out.membership);
  out.sse_history.push_back(out.sse);
  out.centers = std::move(centers);
  return out;
}

}  // namespace palstream::kmeans
