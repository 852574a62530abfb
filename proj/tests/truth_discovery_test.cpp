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
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "truthfl/truth_discovery.hpp"

namespace truthfl {
namespace {

std::vector<ParamVector> random_updates(std::mt19937_64& rng, int n, Eigen::Index dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<ParamVector> out;
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v[i] = normal(rng);
    out.emplace_back(v);
  }
  return out;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// One application of the coordinate-descent map on scalars, written out
// longhand: p = d / sum d, a = -ln p / sum(-ln p), T = sum a u.
double scalar_step(double x, const std::vector<double>& u) {
  std::vector<double> d;
  for (double uk : u) d.push_back(std::abs(x - uk));
  const double total = sum(d);
  std::vector<double> g;
  for (double dk : d) g.push_back(-std::log(std::max(dk / total, 1e-12)));
  const double gs = sum(g);
  double t = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) t += g[k] / gs * u[k];
  return t;
}

TEST(UpdatePerformances, Examples) {
  const std::vector<ParamVector> u{ParamVector{1.0}, ParamVector{3.0}};
  const auto p = update_performances(ParamVector{0.0}, u, DistanceKind::Euclidean);
  EXPECT_DOUBLE_EQ(p[0], 0.25);
  EXPECT_DOUBLE_EQ(p[1], 0.75);

  const std::vector<ParamVector> same{ParamVector{2.0}, ParamVector{2.0}, ParamVector{2.0}};
  for (double pk : update_performances(ParamVector{2.0}, same, DistanceKind::Euclidean)) {
    EXPECT_DOUBLE_EQ(pk, 1.0 / 3);
  }

  const std::vector<ParamVector> twos{ParamVector{2.0}, ParamVector{2.0}};
  const auto half = update_performances(ParamVector{0.0}, twos, DistanceKind::Euclidean);
  EXPECT_DOUBLE_EQ(half[0], 0.5);
  EXPECT_DOUBLE_EQ(half[1], 0.5);
}

TEST(UpdatePerformances, ZeroDistanceIsFlooredAndRenormalized) {
  const std::vector<ParamVector> u{ParamVector{0.0}, ParamVector{1.0}, ParamVector{0.0}};
  const auto p = update_performances(ParamVector{0.0}, u, DistanceKind::Euclidean);
  EXPECT_NEAR(sum(p), 1.0, 1e-15);
  EXPECT_GT(p[0], 0.0);
  EXPECT_EQ(p[0], p[2]);
  EXPECT_NEAR(p[1], 1.0, 1e-11);
}

TEST(UpdatePerformances, DimensionMismatch) {
  const std::vector<ParamVector> u{ParamVector{1.0, 2.0}};
  EXPECT_THROW(update_performances(ParamVector{0.0}, u, DistanceKind::Euclidean), DimensionError);
}

TEST(PerformancesToWeights, Examples) {
  const std::vector<double> p{0.25, 0.75};
  const auto inv = performances_to_weights(p, CoefficientFunction::Inverse);
  EXPECT_NEAR(inv[0], 0.75, 1e-15);
  EXPECT_NEAR(inv[1], 0.25, 1e-15);

  // -ln 0.25 = 1.3862944, -ln 0.75 = 0.2876821, normalized by their sum.
  const auto neglog = performances_to_weights(p, CoefficientFunction::NegLog);
  EXPECT_NEAR(neglog[0], 0.8281, 1e-4);
  EXPECT_NEAR(neglog[1], 0.1719, 1e-4);

  const std::vector<double> uniform(5, 0.2);
  for (auto g : {CoefficientFunction::Inverse, CoefficientFunction::NegLog}) {
    for (double a : performances_to_weights(uniform, g)) EXPECT_NEAR(a, 0.2, 1e-15);
  }
}

TEST(PerformancesToWeights, RejectsNonPositive) {
  const std::vector<double> p{0.0, 1.0};
  EXPECT_THROW(performances_to_weights(p, CoefficientFunction::Inverse), std::invalid_argument);
}

TEST(EstimateTruth, SingleUpdate) {
  const std::vector<ParamVector> u{ParamVector{1.5, -2.0}};
  const auto est = estimate_truth(u, FedTruthConfig{});
  EXPECT_EQ(est.truth, u[0]);
  ASSERT_EQ(est.weights.size(), 1u);
  EXPECT_DOUBLE_EQ(est.weights[0], 1.0);
  EXPECT_LE(est.iterations, 2);
}

TEST(EstimateTruth, IdenticalUpdates) {
  const std::vector<ParamVector> u(4, ParamVector{0.5, 1.0, -3.0});
  const auto est = estimate_truth(u, FedTruthConfig{});
  EXPECT_EQ(est.truth, u[0]);
  for (double a : est.weights) EXPECT_DOUBLE_EQ(a, 0.25);
  EXPECT_TRUE(est.converged);
}

TEST(EstimateTruth, Errors) {
  const std::vector<ParamVector> none;
  EXPECT_THROW(estimate_truth(none, FedTruthConfig{}), std::invalid_argument);
  const std::vector<ParamVector> mixed{ParamVector{1.0}, ParamVector{1.0, 2.0}};
  EXPECT_THROW(estimate_truth(mixed, FedTruthConfig{}), DimensionError);
  FedTruthConfig bad;
  bad.epsilon = 0.0;
  const std::vector<ParamVector> one{ParamVector{1.0}};
  EXPECT_THROW(estimate_truth(one, bad), std::invalid_argument);
}

TEST(EstimateTruth, ScalarFixedPointMatchesGridOracle) {
  const std::vector<double> values{0.0, 1.0, 10.0};
  // Grid oracle over [0, 10] at step 1e-4 for the point the iteration maps to itself.
  double best_x = 0.0;
  double best_gap = INFINITY;
  for (int i = 0; i <= 100000; ++i) {
    const double x = i * 1e-4;
    const double gap = std::abs(x - scalar_step(x, values));
    if (gap < best_gap) {
      best_gap = gap;
      best_x = x;
    }
  }
  EXPECT_NEAR(best_x, 0.73047, 1e-3);

  std::vector<ParamVector> u;
  for (double v : values) u.push_back(ParamVector{v});
  FedTruthConfig cfg;
  cfg.epsilon = 1e-12;
  cfg.max_iterations = 1000;
  const auto est = estimate_truth(u, cfg);
  EXPECT_TRUE(est.converged);
  EXPECT_NEAR(est.truth[0], best_x, 1e-3);
  EXPECT_NEAR(est.truth[0], 0.7304688179, 1e-9);
}

TEST(EstimateTruth, FedAvgInitUsesSampleCounts) {
  const std::vector<ParamVector> u{ParamVector{0.0}, ParamVector{4.0}};
  FedTruthConfig cfg;
  cfg.init = TruthInit::FedAvgWeighted;
  cfg.max_iterations = 1;
  const std::vector<double> counts{3.0, 1.0};
  const auto est = estimate_truth(u, cfg, counts);
  // Symmetric two-point problems stay at their midpoint from any start, so
  // just check the run consumed the counts without error and kept weights valid.
  EXPECT_NEAR(sum(est.weights), 1.0, 1e-12);
  EXPECT_THROW(estimate_truth(u, cfg), std::invalid_argument);
}

TEST(EstimateTruthProperties, WeightsAndPerformancesAreDistributions) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto u = random_updates(rng, 2 + trial % 9, 1 + trial % 13);
    for (auto kind : {DistanceKind::Euclidean, DistanceKind::Manhattan, DistanceKind::Cosine, DistanceKind::Angular,
                      DistanceKind::CustomHalfHalf}) {
      FedTruthConfig cfg;
      cfg.distance = kind;
      const auto est = estimate_truth(u, cfg);
      EXPECT_NEAR(sum(est.weights), 1.0, 1e-12);
      EXPECT_NEAR(sum(est.performances), 1.0, 1e-12);
      for (double a : est.weights) EXPECT_GE(a, 0.0);
      for (double p : est.performances) EXPECT_GE(p, 0.0);
      EXPECT_LE(est.iterations, cfg.max_iterations);
    }
  }
}

TEST(EstimateTruthProperties, ConvergedEstimateSatisfiesClosedForms) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto u = random_updates(rng, 3 + trial % 8, 1 + trial % 20);
    for (auto g : {CoefficientFunction::NegLog, CoefficientFunction::Inverse}) {
      FedTruthConfig cfg;
      cfg.coefficient = g;
      cfg.epsilon = 1e-13;
      cfg.max_iterations = 5000;
      const auto est = estimate_truth(u, cfg);
      ASSERT_TRUE(est.converged);
      std::vector<double> d;
      for (const auto& uk : u) d.push_back((est.truth.values() - uk.values()).norm());
      std::vector<double> shaped;
      for (double dk : d) shaped.push_back(g == CoefficientFunction::NegLog ? dk : std::sqrt(dk));
      const double total = sum(shaped);
      std::vector<double> g_vals;
      for (std::size_t k = 0; k < u.size(); ++k) {
        const double p = shaped[k] / total;
        g_vals.push_back(g == CoefficientFunction::NegLog ? -std::log(p) : 1.0 / p);
      }
      const double gs = sum(g_vals);
      for (std::size_t k = 0; k < u.size(); ++k) {
        EXPECT_NEAR(est.performances[k], shaped[k] / total, 1e-9);
        EXPECT_NEAR(est.weights[k], g_vals[k] / gs, 1e-9);
      }
    }
  }
}

TEST(EstimateTruthProperties, WeightsAreAntiMonotoneInDistance) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 300; ++trial) {
    const auto u = random_updates(rng, 2 + trial % 9, 1 + trial % 11);
    const auto est = estimate_truth(u, FedTruthConfig{});
    std::vector<double> d;
    for (const auto& uk : u) d.push_back((est.truth.values() - uk.values()).norm());
    for (std::size_t i = 0; i < u.size(); ++i) {
      for (std::size_t j = 0; j < u.size(); ++j) {
        if (d[i] > d[j]) EXPECT_LE(est.weights[i], est.weights[j]);
      }
    }
  }
}

TEST(EstimateTruthProperties, ConvergenceBudget) {
  std::mt19937_64 rng(13);
  long total = 0;
  int worst = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto u = random_updates(rng, 10, 100);
    const auto est = estimate_truth(u, FedTruthConfig{});
    total += est.iterations;
    worst = std::max(worst, est.iterations);
  }
  EXPECT_LE(static_cast<double>(total) / 300.0, 40.0);
  EXPECT_LE(worst, 100);
}

TEST(EstimateTruthLayered, SingleLayerMatchesFlatBitForBit) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const auto flat = random_updates(rng, 7, 9);
    std::vector<LayeredUpdate> layered;
    for (const auto& v : flat) layered.emplace_back(std::vector<Layer>{{"w", v}});
    const auto a = estimate_truth(flat, FedTruthConfig{});
    const auto b = estimate_truth_layered(layered, FedTruthConfig{});
    EXPECT_EQ(b.truth.layer(0).params, a.truth);
    EXPECT_EQ(b.per_layer[0].weights, a.weights);
    EXPECT_EQ(b.total_iterations(), a.iterations);
  }
}

TEST(EstimateTruthLayered, IdenticalLayerGetsUniformWeights) {
  std::mt19937_64 rng(19);
  const auto other = random_updates(rng, 5, 4);
  std::vector<LayeredUpdate> layered;
  for (const auto& v : other) layered.emplace_back(std::vector<Layer>{{"a", ParamVector{1.0, 2.0}}, {"b", v}});
  const auto est = estimate_truth_layered(layered, FedTruthConfig{});
  for (double w : est.per_layer[0].weights) EXPECT_DOUBLE_EQ(w, 0.2);
  EXPECT_EQ(est.total_iterations(), est.per_layer[0].iterations + est.per_layer[1].iterations);
}

TEST(EstimateTruthLayered, LayerMismatch) {
  std::vector<LayeredUpdate> layered{LayeredUpdate({{"a", ParamVector{1.0}}}),
                                     LayeredUpdate({{"b", ParamVector{1.0}}})};
  EXPECT_THROW(estimate_truth_layered(layered, FedTruthConfig{}), DimensionError);
}

TEST(ResilienceGap, Examples) {
  const std::vector<ParamVector> same(4, ParamVector{1.0, 1.0});
  EXPECT_DOUBLE_EQ(resilience_gap(same, 1, ParamVector{1.0, 1.0}), 0.0);
  const std::vector<ParamVector> two{ParamVector{0.0}, ParamVector{2.0}};
  EXPECT_DOUBLE_EQ(resilience_gap(two, 0, ParamVector{1.0}), -2.0);
  EXPECT_THROW(resilience_gap(two, 1, ParamVector{1.0}), std::invalid_argument);
}

TEST(ResilienceGap, FedTruthAggregateIsResilient) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const auto u = random_updates(rng, 10, 20);
    const auto est = estimate_truth(u, FedTruthConfig{});
    for (int f = 0; f <= 4; ++f) EXPECT_LE(resilience_gap(u, f, est.truth), 1e-9);
  }
}

TEST(ResilienceGap, SamplesSubsetsForLargeN) {
  std::mt19937_64 rng(29);
  const auto u = random_updates(rng, 20, 5);
  const auto est = estimate_truth(u, FedTruthConfig{});
  EXPECT_LE(resilience_gap(u, 5, est.truth, 1), 1e-9);
  EXPECT_EQ(resilience_gap(u, 5, est.truth, 1), resilience_gap(u, 5, est.truth, 1));
}

TEST(CoefficientNames, RoundTrip) {
  for (auto g : {CoefficientFunction::Inverse, CoefficientFunction::NegLog}) {
    EXPECT_EQ(parse_coefficient(to_string(g)), g);
  }
  for (auto i : {TruthInit::SimpleAverage, TruthInit::FedAvgWeighted}) EXPECT_EQ(parse_truth_init(to_string(i)), i);
}

}  // namespace
}  // namespace truthfl
