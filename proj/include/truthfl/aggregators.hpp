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
#ifndef TRUTHFL_AGGREGATORS_HPP_
#define TRUTHFL_AGGREGATORS_HPP_

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "truthfl/numeric.hpp"
#include "truthfl/rng.hpp"
#include "truthfl/truth_discovery.hpp"

namespace truthfl {

enum class AggregatorKind { FedTruth, FedTruthLayer, FedAvg, Krum, Median, TrimmedMean, FLTrust, Flame };

std::string_view to_string(AggregatorKind kind);
AggregatorKind parse_aggregator_kind(std::string_view text);

struct AggregatorSpec {
  AggregatorKind kind = AggregatorKind::FedTruth;
  FedTruthConfig fedtruth;
  std::optional<int> trim_k;  // default: floor(0.2 n) per side
  std::optional<int> krum_f;  // default: largest f with n >= f + 3, capped by the caller
  double flame_noise_factor = 0.001;

  /// Checks kind-specific parameters against a round of n updates.
  void validate(int n) const;
  int resolved_trim_k(int n) const;
  int resolved_krum_f(int n) const;
};

ParamVector fedavg(std::span<const ParamVector> updates, std::span<const double> sample_counts);

/// Index of the update with the smallest sum of squared Euclidean distances
/// to its n - f - 2 nearest neighbours; ties go to the lowest index.
std::size_t krum_select(std::span<const ParamVector> updates, int f);
ParamVector krum(std::span<const ParamVector> updates, int f);

ParamVector coordinate_median(std::span<const ParamVector> updates);
ParamVector trimmed_mean(std::span<const ParamVector> updates, int trim_k);

struct FLTrustResult {
  ParamVector aggregate;
  std::vector<double> trust_scores;
};
FLTrustResult fltrust_detailed(std::span<const ParamVector> updates, const ParamVector& server_update);
ParamVector fltrust(std::span<const ParamVector> updates, const ParamVector& server_update);

struct FlameResult {
  ParamVector aggregate;
  std::vector<std::size_t> survivors;  // ascending client indices
  double clip_norm = 0.0;
};
/// Cluster (single linkage on cosine distance, majority cut), clip to the
/// median survivor norm, average, then add N(0, (noise_factor * median)^2).
FlameResult flame_detailed(std::span<const ParamVector> updates, double noise_factor,
                           RandomStream& rng);
ParamVector flame(std::span<const ParamVector> updates, double noise_factor, RandomStream& rng);

struct AggregationInput {
  std::span<const LayeredUpdate> updates;
  std::span<const double> sample_counts;
  const LayeredUpdate* server_update = nullptr;  // FLTrust only
  RandomStream* rng = nullptr;                   // Flame only
};

struct AggregationOutcome {
  LayeredUpdate aggregate;
  std::vector<double> weights;    // empty for rules without per-client weights
  std::optional<int> iterations;  // FedTruth variants only
  double wall_time_s = 0.0;
};

AggregationOutcome aggregate(const AggregatorSpec& spec, const AggregationInput& input);

}  // namespace truthfl

#endif  // TRUTHFL_AGGREGATORS_HPP_
