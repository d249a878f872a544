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

#ifndef PALSTREAM_KMEANS_H_
#define PALSTREAM_KMEANS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace palstream::kmeans {

// N points of dimension D stored row-major, with optional per-point weights.
// A weighted point with weight w behaves exactly like w coincident copies,
// which lets callers cluster a color histogram instead of every pixel.
class PointSet {
 public:
  PointSet(std::size_t dim, std::vector<double> coords,
           std::vector<double> weights = {});

  std::size_t size() const noexcept { return coords_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  bool weighted() const noexcept { return !weights_.empty(); }

  std::span<const double> point(std::size_t i) const {
    return {coords_.data() + i * dim_, dim_};
  }
  std::span<double> point(std::size_t i) {
    return {coords_.data() + i * dim_, dim_};
  }
  double weight(std::size_t i) const {
    return weights_.empty() ? 1.0 : weights_[i];
  }

  std::span<const double> coords() const noexcept { return coords_; }

  friend bool operator==(const PointSet&, const PointSet&) = default;

 private:
  std::size_t dim_;
  std::vector<double> coords_;
  std::vector<double> weights_;
};

struct KmeansConfig {
  std::size_t k = 8;
  std::size_t max_iterations = 50;
  // Converged once no center moves farther than this (Euclidean).
  double tolerance = 1e-4;
  std::uint64_t seed = 0;

  // Throws ContractError on k == 0, max_iterations == 0 or tolerance < 0.
  void validate() const;
};

struct Clustering {
  PointSet centers;
  // Zero-based index into centers for every input point.
  std::vector<std::uint32_t> membership;
  double sse = 0.0;
  // Number of center updates performed.
  std::size_t iterations = 0;
  bool converged = false;
  // SSE after every assignment step, ending with the final one.
  std::vector<double> sse_history;
};

// k distinct points drawn without replacement from data, uniformly over
// points (or proportionally to weight). Throws InfeasibleError when data holds
// fewer than k distinct points.
PointSet init_centers(const PointSet& data, const KmeansConfig& cfg);

// Nearest center by squared Euclidean distance; ties go to the lowest index.
std::vector<std::uint32_t> assign(const PointSet& data, const PointSet& centers);

// Weighted mean of each cluster. A cluster with no members keeps its entry
// from previous.
PointSet update_centers(const PointSet& data,
                        std::span<const std::uint32_t> membership,
                        const PointSet& previous);

double sum_squared_error(const PointSet& data, const PointSet& centers,
                         std::span<const std::uint32_t> membership);

// Lloyd iterations from init_centers until the largest center displacement is
// within cfg.tolerance or cfg.max_iterations updates have run. The returned
// membership is the exact nearest-center assignment for the returned centers.
Clustering run(const PointSet& data, const KmeansConfig& cfg);

}  // namespace palstream::kmeans

#endif  // PALSTREAM_KMEANS_H_
