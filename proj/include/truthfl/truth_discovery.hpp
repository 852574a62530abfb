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
#ifndef TRUTHFL_TRUTH_DISCOVERY_HPP_
#define TRUTHFL_TRUTH_DISCOVERY_HPP_

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "truthfl/numeric.hpp"

namespace truthfl {

/// Decreasing map from a client's performance share to its unnormalized
/// aggregation weight.
enum class CoefficientFunction {
  Inverse,  // g(p) = 1 / p
  NegLog,   // g(p) = -log(p)
};

enum class TruthInit { SimpleAverage, FedAvgWeighted };

std::string_view to_string(CoefficientFunction g);
CoefficientFunction parse_coefficient(std::string_view text);
std::string_view to_string(TruthInit init);
TruthInit parse_truth_init(std::string_view text);

struct FedTruthConfig {
  DistanceKind distance = DistanceKind::Euclidean;
  CoefficientFunction coefficient = CoefficientFunction::NegLog;
  double epsilon = 1e-6;
  int max_iterations = 100;
  TruthInit init = TruthInit::SimpleAverage;

  void validate() const;
};

struct TruthEstimate {
  ParamVector truth;
  std::vector<double> weights;
  std::vector<double> performances;
  int iterations = 0;
  bool converged = false;
};

/// Lower bound applied to performance shares before g is evaluated; both
/// coefficient functions diverge at zero.
inline constexpr double kPerformanceFloor = 1e-12;

double coefficient(CoefficientFunction g, double p);

/// Minimizer of sum_k g(p_k) d_k subject to sum_k p_k = 1 for fixed
/// distances: p_k proportional to d_k under NegLog and to sqrt(d_k) under
/// Inverse. All-zero distances give the uniform share; zero entries among
/// non-zero ones are floored at kPerformanceFloor and the result renormalized.
std::vector<double> performances_from_distances(std::span<const double> distances,
                                                CoefficientFunction g);

/// Performance shares of each update relative to the current truth. With the
/// default NegLog coefficient this is the plain distance share d_k / sum d.
std::vector<double> update_performances(const ParamVector& truth,
                                        std::span<const ParamVector> updates,
                                        DistanceKind kind,
                                        CoefficientFunction g = CoefficientFunction::NegLog);

/// a_k = g(p_k) / sum_j g(p_j).
std::vector<double> performances_to_weights(std::span<const double> performances,
                                            CoefficientFunction g);

/// Coordinate descent on the joint (truth, performance) objective: alternate
/// performance shares, weights and the weighted-sum truth until the truth
/// moves by at most cfg.epsilon in L2 or cfg.max_iterations is reached.
/// `sample_counts` is only read when cfg.init is FedAvgWeighted.
TruthEstimate estimate_truth(std::span<const ParamVector> updates, const FedTruthConfig& cfg,
                             std::span<const double> sample_counts = {});

struct LayeredTruthEstimate {
  LayeredUpdate truth;
  std::vector<TruthEstimate> per_layer;

  int total_iterations() const;
  /// Per-client weights averaged over layers.
  std::vector<double> mean_weights() const;
};

/// Runs estimate_truth independently on every layer and reassembles the
/// truth in layer order.
LayeredTruthEstimate estimate_truth_layered(std::span<const LayeredUpdate> updates,
                                            const FedTruthConfig& cfg,
                                            std::span<const double> sample_counts = {});

/// Largest value of ||aggregate - mean(S)|| - diam(S) over subsets S of size
/// n - f (all subsets when n <= 12, otherwise 1000 sampled ones). A result
/// <= 0 means the (f, 1) resilient-averaging bound held on every tested S.
double resilience_gap(std::span<const ParamVector> updates, int f, const ParamVector& aggregate,
                      std::uint64_t seed = 0);

}  // namespace truthfl

#endif  // TRUTHFL_TRUTH_DISCOVERY_HPP_
