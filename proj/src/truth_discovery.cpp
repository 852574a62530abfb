/*
 * Copyright 2026 The truthfl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "truthfl/truth_discovery.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "truthfl/rng.hpp"

namespace truthfl {

std::string_view to_string(CoefficientFunction g) {
  return g == CoefficientFunction::Inverse ? "inverse" : "neglog";
}

CoefficientFunction parse_coefficient(std::string_view text) {
  if (text == "inverse") return CoefficientFunction::Inverse;
  if (text == "neglog") return CoefficientFunction::NegLog;
  throw std::invalid_argument("unknown coefficient function '" + std::string(text) + "'");
}

std::string_view to_string(TruthInit init) {
  return init == TruthInit::SimpleAverage ? "simple_average" : "fedavg";
}

TruthInit parse_truth_init(std::string_view text) {
  if (text == "simple_average") return TruthInit::SimpleAverage;
  if (text == "fedavg") return TruthInit::FedAvgWeighted;
  throw std::invalid_argument("unknown truth init '" + std::string(text) + "'");
}

void FedTruthConfig::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("fedtruth: epsilon must be > 0");
  if (max_iterations < 1) throw std::invalid_argument("fedtruth: max_iterations must be >= 1");
}

double coefficient(CoefficientFunction g, double p) {
  switch (g) {
    case CoefficientFunction::Inverse:
      return 1.0 / p;
    case CoefficientFunction::NegLog:
      return -std::log(p);
  }
  throw std::logic_error("coefficient: unknown function");
}

std::vector<double> performances_from_distances(std::span<const double> distances,
                                                CoefficientFunction g) {
  const std::size_t n = distances.size();
  if (n == 0) throw std::invalid_argument("performances: empty input");
  std::vector<double> p(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(distances[k] >= 0.0) || !std::isfinite(distances[k])) {
      throw std::invalid_argument("performances: distances must be finite and >= 0");
    }
    p[k] = g == CoefficientFunction::Inverse ? std::sqrt(distances[k]) : distances[k];
  }
  double total = 0.0;
  for (double v : p) total += v;
  if (total == 0.0) return std::vector<double>(n, 1.0 / static_cast<double>(n));

  for (double& v : p) v = std::max(v / total, kPerformanceFloor);
  double renorm = 0.0;
  for (double v : p) renorm += v;
  for (double& v : p) v /= renorm;
  return p;
}

std::vector<double> update_performances(const ParamVector& truth,
                                        std::span<const ParamVector> updates,
                                        DistanceKind kind, CoefficientFunction g) {
  require_same_dimension(updates, "update_performances");
  if (truth.size() != updates.front().size()) {
    throw DimensionError("update_performances: truth/update length mismatch");
  }
  std::vector<double> d;
  d.reserve(updates.size());
  for (const auto& u : updates) d.push_back(distance(kind, truth, u));
  return performances_from_distances(d, g);
}

std::vector<double> performances_to_weights(std::span<const double> performances,
                                            CoefficientFunction g) {
  const std::size_t n = performances.size();
  if (n == 0) throw std::invalid_argument("performances_to_weights: empty input");
  std::vector<double> a(n);
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double p = performances[k];
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("performances_to_weights: performance must be in (0, 1]");
    }
    a[k] = coefficient(g, p);
    total += a[k];
  }
  // Only reachable with a single client at p = 1 under NegLog.
  if (total == 0.0) return std::vector<double>(n, 1.0 / static_cast<double>(n));
  for (double& v : a) v /= total;
  return a;
}

namespace {

std::vector<double> initial_weights(std::size_t n, const FedTruthConfig& cfg,
                                    std::span<const double> sample_counts) {
  if (cfg.init == TruthInit::SimpleAverage) {
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
  }
  if (sample_counts.size() != n) {
    throw std::invalid_argument("estimate_truth: FedAvg initialization needs one sample count per update");
  }
  double total = 0.0;
  for (double c : sample_counts) total += c;
  if (!(total > 0.0)) throw std::invalid_argument("estimate_truth: zero total sample count");
  std::vector<double> w(n);
  for (std::size_t k = 0; k < n; ++k) w[k] = sample_counts[k] / total;
  return w;
}

}  // namespace

TruthEstimate estimate_truth(std::span<const ParamVector> updates, const FedTruthConfig& cfg,
                             std::span<const double> sample_counts) {
  cfg.validate();
  require_same_dimension(updates, "estimate_truth");
  const std::size_t n = updates.size();

  std::vector<double> weights = initial_weights(n, cfg, sample_counts);
  ParamVector truth = weighted_sum(updates, weights);
  std::vector<double> performances(n, 1.0 / static_cast<double>(n));

  int iterations = 0;
  bool converged = false;
  while (iterations < cfg.max_iterations) {
    performances = update_performances(truth, updates, cfg.distance, cfg.coefficient);
    weights = performances_to_weights(performances, cfg.coefficient);
    ParamVector next = weighted_sum(updates, weights);
    const double change = euclidean_distance(next.values(), truth.values());
    truth = std::move(next);
    ++iterations;
    if (change <= cfg.epsilon) {
      converged = true;
      break;
    }
  }
  return {std::move(truth), std::move(weights), std::move(performances), iterations, converged};
}

int LayeredTruthEstimate::total_iterations() const {
  int total = 0;
  for (const auto& e : per_layer) total += e.iterations;
  return total;
}

std::vector<double> LayeredTruthEstimate::mean_weights() const {
  std::vector<double> mean(per_layer.front().weights.size(), 0.0);
  for (const auto& e : per_layer) {
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += e.weights[k];
  }
  for (double& v : mean) v /= static_cast<double>(per_layer.size());
  return mean;
}

LayeredTruthEstimate estimate_truth_layered(std::span<const LayeredUpdate> updates,
                                            const FedTruthConfig& cfg,
                                            std::span<const double> sample_counts) {
  if (updates.empty()) throw std::invalid_argument("estimate_truth_layered: empty input");
  const auto& first = updates.front();
  for (const auto& u : updates) {
    if (!same_layout(u, first)) {
      throw DimensionError("estimate_truth_layered: layer structure mismatch");
    }
  }
  std::vector<Layer> layers;
  std::vector<TruthEstimate> per_layer;
  layers.reserve(first.layer_count());
  per_layer.reserve(first.layer_count());
  for (std::size_t l = 0; l < first.layer_count(); ++l) {
    std::vector<ParamVector> column;
    column.reserve(updates.size());
    for (const auto& u : updates) column.push_back(u.layer(l).params);
    auto estimate = estimate_truth(column, cfg, sample_counts);
    layers.push_back({first.layer(l).name, estimate.truth});
    per_layer.push_back(std::move(estimate));
  }
  return {LayeredUpdate(std::move(layers)), std::move(per_layer)};
}

namespace {

double subset_gap(std::span<const ParamVector> updates, const std::vector<int>& subset,
                  const Eigen::MatrixXd& pairwise, const ParamVector& aggregate) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(aggregate.size());
  for (int i : subset) mean += updates[static_cast<std::size_t>(i)].values();
  mean /= static_cast<double>(subset.size());
  double diameter = 0.0;
  for (std::size_t a = 0; a < subset.size(); ++a) {
    for (std::size_t b = a + 1; b < subset.size(); ++b) {
      diameter = std::max(diameter, pairwise(subset[a], subset[b]));
    }
  }
  return euclidean_distance(aggregate.values(), mean) - diameter;
}

}  // namespace

double resilience_gap(std::span<const ParamVector> updates, int f, const ParamVector& aggregate,
                      std::uint64_t seed) {
  require_same_dimension(updates, "resilience_gap");
  const int n = static_cast<int>(updates.size());
  if (f < 0 || 2 * f >= n) {
    throw std::invalid_argument("resilience_gap: need 0 <= f < n/2");
  }
  if (aggregate.size() != updates.front().size()) {
    throw DimensionError("resilience_gap: aggregate length mismatch");
  }
  Eigen::MatrixXd pairwise = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      pairwise(i, j) = pairwise(j, i) =
          euclidean_distance(updates[static_cast<std::size_t>(i)].values(),
                             updates[static_cast<std::size_t>(j)].values());
    }
  }

  const int m = n - f;
  double worst = -std::numeric_limits<double>::infinity();
  if (n <= 12) {
    // Enumerate m-subsets in lexicographic order via a selection mask.
    std::vector<bool> mask(static_cast<std::size_t>(n), false);
    std::fill(mask.begin(), mask.begin() + m, true);
    std::vector<int> subset;
    do {
      subset.clear();
      for (int i = 0; i < n; ++i) {
        if (mask[static_cast<std::size_t>(i)]) subset.push_back(i);
      }
      worst = std::max(worst, subset_gap(updates, subset, pairwise, aggregate));
    } while (std::prev_permutation(mask.begin(), mask.end()));
    return worst;
  }

  RandomStream rng(seed);
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int trial = 0; trial < 1000; ++trial) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> subset(order.begin(), order.begin() + m);
    std::sort(subset.begin(), subset.end());
    worst = std::max(worst, subset_gap(updates, subset, pairwise, aggregate));
  }
  return worst;
}

}  // namespace truthfl
