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
#include "truthfl/aggregators.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <random>

namespace truthfl {

std::string_view to_string(AggregatorKind kind) {
  switch (kind) {
    case AggregatorKind::FedTruth: return "fedtruth";
    case AggregatorKind::FedTruthLayer: return "fedtruth_layer";
    case AggregatorKind::FedAvg: return "fedavg";
    case AggregatorKind::Krum: return "krum";
    case AggregatorKind::Median: return "median";
    case AggregatorKind::TrimmedMean: return "trimmed_mean";
    case AggregatorKind::FLTrust: return "fltrust";
    case AggregatorKind::Flame: return "flame";
  }
  return "unknown";
}

AggregatorKind parse_aggregator_kind(std::string_view text) {
  for (auto kind : {AggregatorKind::FedTruth, AggregatorKind::FedTruthLayer, AggregatorKind::FedAvg,
                    AggregatorKind::Krum, AggregatorKind::Median, AggregatorKind::TrimmedMean,
                    AggregatorKind::FLTrust, AggregatorKind::Flame}) {
    if (text == to_string(kind)) return kind;
  }
  throw std::invalid_argument("unknown aggregator '" + std::string(text) + "'");
}

int AggregatorSpec::resolved_trim_k(int n) const {
  return trim_k ? *trim_k : static_cast<int>(std::floor(0.2 * n));
}

int AggregatorSpec::resolved_krum_f(int n) const {
  return krum_f ? *krum_f : std::max(0, (n - 3) / 2);
}

void AggregatorSpec::validate(int n) const {
  if (n < 1) throw std::invalid_argument("aggregator: no updates");
  switch (kind) {
    case AggregatorKind::FedTruth:
    case AggregatorKind::FedTruthLayer:
      fedtruth.validate();
      break;
    case AggregatorKind::TrimmedMean: {
      const int k = resolved_trim_k(n);
      if (k < 0 || 2 * k >= n) {
        throw std::invalid_argument("trimmed_mean: trim_k=" + std::to_string(k) +
                                    " must satisfy 2*trim_k < n=" + std::to_string(n));
      }
      break;
    }
    case AggregatorKind::Krum: {
      const int f = resolved_krum_f(n);
      if (f < 0 || 2 * f >= n - 2) {
        throw std::invalid_argument("krum: krum_f=" + std::to_string(f) +
                                    " must satisfy krum_f < (n-2)/2 with n=" + std::to_string(n));
      }
      break;
    }
    case AggregatorKind::Flame:
      if (n < 3) throw std::invalid_argument("flame: needs at least 3 updates");
      if (!(flame_noise_factor >= 0.0)) throw std::invalid_argument("flame: noise factor must be >= 0");
      break;
    default:
      break;
  }
}

ParamVector fedavg(std::span<const ParamVector> updates, std::span<const double> sample_counts) {
  if (sample_counts.size() != updates.size()) {
    throw DimensionError("fedavg: sample counts not aligned with updates");
  }
  double total = 0.0;
  for (double c : sample_counts) {
    if (c < 0.0) throw std::invalid_argument("fedavg: negative sample count");
    total += c;
  }
  if (!(total > 0.0)) throw std::invalid_argument("fedavg: zero total sample count");
  std::vector<double> weights(sample_counts.size());
  for (std::size_t k = 0; k < weights.size(); ++k) weights[k] = sample_counts[k] / total;
  return weighted_sum(updates, weights);
}

std::size_t krum_select(std::span<const ParamVector> updates, int f) {
  require_same_dimension(updates, "krum");
  const int n = static_cast<int>(updates.size());
  if (f < 0 || n < f + 3) {
    throw std::invalid_argument("krum: need n >= f + 3 (n=" + std::to_string(n) +
                                ", f=" + std::to_string(f) + ")");
  }
  Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const auto diff = updates[static_cast<std::size_t>(i)].values() - updates[static_cast<std::size_t>(j)].values();
      sq(i, j) = sq(j, i) = dot(diff, diff);
    }
  }
  const int neighbours = n - f - 2;
  std::size_t best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  std::vector<double> row;
  for (int i = 0; i < n; ++i) {
    row.clear();
    for (int j = 0; j < n; ++j) {
      if (j != i) row.push_back(sq(i, j));
    }
    std::sort(row.begin(), row.end());
    double score = 0.0;
    for (int j = 0; j < neighbours; ++j) score += row[static_cast<std::size_t>(j)];
    if (score < best_score) {
      best_score = score;
      best = static_cast<std::size_t>(i);
    }
  }
  return best;
}

ParamVector krum(std::span<const ParamVector> updates, int f) {
  return updates[krum_select(updates, f)];
}

namespace {

// Calls fn(coordinate, sorted column) for every coordinate.
template <typename Fn>
ParamVector per_coordinate(std::span<const ParamVector> updates, Fn fn) {
  const Eigen::Index dim = updates.front().size();
  Eigen::VectorXd out(dim);
  std::vector<double> column(updates.size());
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (std::size_t k = 0; k < updates.size(); ++k) column[k] = updates[k][i];
    std::sort(column.begin(), column.end());
    out[i] = fn(column);
  }
  return ParamVector(std::move(out));
}

}  // namespace

ParamVector coordinate_median(std::span<const ParamVector> updates) {
  require_same_dimension(updates, "median");
  return per_coordinate(updates, [](const std::vector<double>& sorted) {
    const std::size_t n = sorted.size();
    if (n % 2 == 1) return sorted[n / 2];
    return (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
  });
}

ParamVector trimmed_mean(std::span<const ParamVector> updates, int trim_k) {
  require_same_dimension(updates, "trimmed_mean");
  const int n = static_cast<int>(updates.size());
  if (trim_k < 0 || 2 * trim_k >= n) {
    throw std::invalid_argument("trimmed_mean: 2*trim_k must be < n");
  }
  return per_coordinate(updates, [trim_k, n](const std::vector<double>& sorted) {
    double acc = 0.0;
    for (int k = trim_k; k < n - trim_k; ++k) acc += sorted[static_cast<std::size_t>(k)];
    return acc / static_cast<double>(n - 2 * trim_k);
  });
}

FLTrustResult fltrust_detailed(std::span<const ParamVector> updates, const ParamVector& server_update) {
  require_same_dimension(updates, "fltrust");
  if (server_update.size() != updates.front().size()) {
    throw DimensionError("fltrust: server update length mismatch");
  }
  const double server_norm = l2_norm(server_update);
  if (server_norm == 0.0) throw std::invalid_argument("fltrust: zero server update");

  std::vector<double> trust(updates.size(), 0.0);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(server_update.size());
  double total = 0.0;
  for (std::size_t k = 0; k < updates.size(); ++k) {
    const double norm = l2_norm(updates[k]);
    if (norm == 0.0) continue;
    trust[k] = std::max(0.0, cosine_similarity(updates[k].values(), server_update.values()));
    if (trust[k] == 0.0) continue;
    acc.noalias() += (trust[k] * server_norm / norm) * updates[k].values();
    total += trust[k];
  }
  if (total == 0.0) return {server_update, std::move(trust)};
  return {ParamVector(acc / total), std::move(trust)};
}

ParamVector fltrust(std::span<const ParamVector> updates, const ParamVector& server_update) {
  return fltrust_detailed(updates, server_update).aggregate;
}

namespace {

struct DisjointSets {
  explicit DisjointSets(std::size_t n) : parent(n), size(n, 1) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  std::size_t unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return size[a];
    if (size[a] < size[b]) std::swap(a, b);
    parent[b] = a;
    size[a] += size[b];
    return size[a];
  }
  std::vector<std::size_t> parent;
  std::vector<std::size_t> size;
};

// Members of the first single-linkage cluster to reach `quorum` members,
// merging all edges of equal height together.
std::vector<std::size_t> majority_cluster(std::span<const ParamVector> updates, std::size_t quorum) {
  const std::size_t n = updates.size();
  struct Edge {
    double height;
    std::size_t a, b;
  };
  std::vector<Edge> edges;
  edges.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      edges.push_back({cosine_distance(updates[i].values(), updates[j].values()), i, j});
    }
  }
  std::stable_sort(edges.begin(), edges.end(),
                   [](const Edge& x, const Edge& y) { return x.height < y.height; });

  DisjointSets sets(n);
  std::size_t e = 0;
  while (e < edges.size()) {
    const double height = edges[e].height;
    std::size_t largest = 0;
    for (; e < edges.size() && edges[e].height == height; ++e) {
      largest = std::max(largest, sets.unite(edges[e].a, edges[e].b));
    }
    if (largest >= quorum) break;
  }
  std::vector<std::size_t> best_root_members;
  std::vector<std::size_t> count(n, 0);
  for (std::size_t i = 0; i < n; ++i) ++count[sets.find(i)];
  const std::size_t root =
      static_cast<std::size_t>(std::max_element(count.begin(), count.end()) - count.begin());
  for (std::size_t i = 0; i < n; ++i) {
    if (sets.find(i) == root) best_root_members.push_back(i);
  }
  return best_root_members;
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

}  // namespace

FlameResult flame_detailed(std::span<const ParamVector> updates, double noise_factor,
                           RandomStream& rng) {
  require_same_dimension(updates, "flame");
  if (updates.size() < 3) throw std::invalid_argument("flame: needs at least 3 updates");
  if (!(noise_factor >= 0.0)) throw std::invalid_argument("flame: noise factor must be >= 0");

  const std::size_t quorum = updates.size() / 2 + 1;
  auto survivors = majority_cluster(updates, quorum);

  std::vector<double> norms;
  norms.reserve(survivors.size());
  for (auto k : survivors) norms.push_back(l2_norm(updates[k]));
  const double clip = median_of(norms);

  Eigen::VectorXd acc = Eigen::VectorXd::Zero(updates.front().size());
  for (std::size_t s = 0; s < survivors.size(); ++s) {
    const double scale = norms[s] > clip ? clip / norms[s] : 1.0;
    acc.noalias() += scale * updates[survivors[s]].values();
  }
  acc /= static_cast<double>(survivors.size());

  const double sigma = noise_factor * clip;
  if (sigma > 0.0) {
    std::normal_distribution<double> normal(0.0, sigma);
    for (Eigen::Index i = 0; i < acc.size(); ++i) acc[i] += normal(rng);
  }
  return {ParamVector(std::move(acc)), std::move(survivors), clip};
}

ParamVector flame(std::span<const ParamVector> updates, double noise_factor, RandomStream& rng) {
  return flame_detailed(updates, noise_factor, rng).aggregate;
}

namespace {

std::vector<ParamVector> flatten_all(std::span<const LayeredUpdate> updates) {
  std::vector<ParamVector> flat;
  flat.reserve(updates.size());
  for (const auto& u : updates) flat.push_back(flatten(u));
  return flat;
}

}  // namespace

AggregationOutcome aggregate(const AggregatorSpec& spec, const AggregationInput& input) {
  const auto& updates = input.updates;
  if (updates.empty()) throw std::invalid_argument("aggregate: no updates");
  const int n = static_cast<int>(updates.size());
  spec.validate(n);
  for (const auto& u : updates) {
    if (!same_layout(u, updates.front())) throw DimensionError("aggregate: layer structure mismatch");
  }
  const auto layout = updates.front().layout();
  const auto start = std::chrono::steady_clock::now();

  auto finish = [&](ParamVector flat, std::vector<double> weights,
                    std::optional<int> iterations) -> AggregationOutcome {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {unflatten(flat, layout), std::move(weights), iterations, elapsed};
  };

  if (spec.kind == AggregatorKind::FedTruthLayer) {
    auto estimate = estimate_truth_layered(updates, spec.fedtruth, input.sample_counts);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    auto weights = estimate.mean_weights();
    const int iterations = estimate.total_iterations();
    return {std::move(estimate.truth), std::move(weights), iterations, elapsed};
  }

  const auto flat = flatten_all(updates);
  switch (spec.kind) {
    case AggregatorKind::FedTruth: {
      auto estimate = estimate_truth(flat, spec.fedtruth, input.sample_counts);
      return finish(std::move(estimate.truth), std::move(estimate.weights), estimate.iterations);
    }
    case AggregatorKind::FedAvg: {
      double total = 0.0;
      for (double c : input.sample_counts) total += c;
      std::vector<double> weights;
      for (double c : input.sample_counts) weights.push_back(c / total);
      return finish(fedavg(flat, input.sample_counts), std::move(weights), std::nullopt);
    }
    case AggregatorKind::Krum: {
      const auto chosen = krum_select(flat, spec.resolved_krum_f(n));
      std::vector<double> weights(flat.size(), 0.0);
      weights[chosen] = 1.0;
      return finish(flat[chosen], std::move(weights), std::nullopt);
    }
    case AggregatorKind::Median:
      return finish(coordinate_median(flat), {}, std::nullopt);
    case AggregatorKind::TrimmedMean:
      return finish(trimmed_mean(flat, spec.resolved_trim_k(n)), {}, std::nullopt);
    case AggregatorKind::FLTrust: {
      if (input.server_update == nullptr) {
        throw std::invalid_argument("fltrust: no server update supplied");
      }
      const auto server = flatten(*input.server_update);
      if (l2_norm(server) == 0.0) {
        // A zero server step leaves nothing to trust; keep the model where it is.
        return finish(server, std::vector<double>(flat.size(), 0.0), std::nullopt);
      }
      auto result = fltrust_detailed(flat, server);
      double total = 0.0;
      for (double t : result.trust_scores) total += t;
      std::vector<double> weights(flat.size(), 0.0);
      if (total > 0.0) {
        for (std::size_t k = 0; k < weights.size(); ++k) weights[k] = result.trust_scores[k] / total;
      }
      return finish(std::move(result.aggregate), std::move(weights), std::nullopt);
    }
    case AggregatorKind::Flame: {
      if (input.rng == nullptr) throw std::invalid_argument("flame: no random stream supplied");
      auto result = flame_detailed(flat, spec.flame_noise_factor, *input.rng);
      std::vector<double> weights(flat.size(), 0.0);
      for (auto k : result.survivors) weights[k] = 1.0 / static_cast<double>(result.survivors.size());
      return finish(std::move(result.aggregate), std::move(weights), std::nullopt);
    }
    case AggregatorKind::FedTruthLayer:
      break;
  }
  throw std::logic_error("aggregate: unhandled aggregator kind");
}

}  // namespace truthfl
