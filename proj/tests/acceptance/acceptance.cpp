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
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support/gradcheck.hpp"
#include "support/oracles.hpp"
#include "truthfl/aggregators.hpp"
#include "truthfl/cli.hpp"
#include "truthfl/config.hpp"
#include "truthfl/simulator.hpp"
#include "truthfl/truth_discovery.hpp"

namespace fs = std::filesystem;
using namespace truthfl;

namespace {

const fs::path kConfigs = fs::path(TRUTHFL_SOURCE_DIR) / "configs";
const std::vector<std::uint64_t> kSeeds{1, 2, 3};

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(double v, int precision = 3) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

std::string list(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + fmt(v[i]);
  return out + "]";
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RoundReport final_round(const std::string& file, std::uint64_t seed, std::vector<std::string> overrides) {
  overrides.push_back("seed=" + std::to_string(seed));
  return run_experiment(load_config(kConfigs / file, overrides).experiment).back();
}

std::vector<double> final_main(const std::string& file, const std::vector<std::string>& overrides) {
  std::vector<double> out;
  for (auto s : kSeeds) out.push_back(final_round(file, s, overrides).main_accuracy);
  return out;
}

std::vector<ParamVector> instance_with_outliers(std::mt19937_64& rng, int n, int dim, int outliers) {
  auto u = testing::random_updates(rng, n, dim, false);
  std::uniform_real_distribution<double> scale(5.0, 50.0);
  for (int k = n - outliers; k < n; ++k) {
    u[static_cast<std::size_t>(k)] = ParamVector::from_expression(scale(rng) * u[static_cast<std::size_t>(k)].values());
  }
  return u;
}

Outcome resilience() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  double worst = -INFINITY;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto u = testing::random_updates(rng, 10, 20, false);
    const auto truth = estimate_truth(u, FedTruthConfig{}).truth;
    for (int f = 1; f <= 4; ++f) worst = std::max(worst, resilience_gap(u, f, truth));
  }
  const double t = seconds_since(t0);
  // Reported only: the same check with f members scaled by 5 to 50.
  double outlier_worst = -INFINITY;
  for (int trial = 0; trial < 200; ++trial) {
    const int f = 1 + trial % 4;
    const auto u = instance_with_outliers(rng, 10, 20, f);
    outlier_worst = std::max(outlier_worst, resilience_gap(u, f, estimate_truth(u, FedTruthConfig{}).truth));
  }
  return {worst <= 1e-9 && t < 60.0, "worst gap " + fmt(worst) + ", " + fmt(t) + " s; with f scaled outliers " +
                                         fmt(outlier_worst) + " (not graded)"};
}

double closed_form_residual(const std::vector<ParamVector>& u, const TruthEstimate& est, CoefficientFunction g) {
  std::vector<double> d;
  for (const auto& v : u) d.push_back(distance(DistanceKind::Euclidean, v, est.truth));
  double norm = 0.0;
  for (double x : d) norm += g == CoefficientFunction::NegLog ? x : std::sqrt(x);
  double worst = 0.0;
  std::vector<double> a;
  double a_sum = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double p = (g == CoefficientFunction::NegLog ? d[k] : std::sqrt(d[k])) / norm;
    worst = std::max(worst, std::abs(p - est.performances[k]));
    a.push_back(coefficient(g, std::max(p, kPerformanceFloor)));
    a_sum += a.back();
  }
  for (std::size_t k = 0; k < u.size(); ++k) worst = std::max(worst, std::abs(a[k] / a_sum - est.weights[k]));
  for (auto& x : a) x /= a_sum;
  const auto recomputed = weighted_sum(u, a);
  worst = std::max(worst, (recomputed.values() - est.truth.values()).cwiseAbs().maxCoeff());
  return worst;
}

Outcome fixed_point() {
  std::mt19937_64 rng(103);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto u = instance_with_outliers(rng, 3 + trial % 10, 1 + trial % 20, trial % 3);
    for (auto g : {CoefficientFunction::NegLog, CoefficientFunction::Inverse}) {
      FedTruthConfig cfg;
      cfg.coefficient = g;
      cfg.epsilon = 1e-13;
      cfg.max_iterations = 100000;
      worst = std::max(worst, closed_form_residual(u, estimate_truth(u, cfg), g));
    }
  }

  // Grid oracle: the candidate in [0, 10] minimizing sum_k -log(p_k) d_k with
  // p_k = d_k / sum d.
  const std::vector<double> values{0.0, 1.0, 10.0};
  double oracle = 0.0, best = INFINITY;
  for (int i = 0; i <= 100000; ++i) {
    const double x = i * 1e-4;
    double total = 0.0;
    for (double v : values) total += std::abs(x - v);
    double objective = 0.0;
    for (double v : values) {
      const double d = std::abs(x - v);
      if (d > 0.0) objective += -std::log(d / total) * d;
    }
    if (objective < best) {
      best = objective;
      oracle = x;
    }
  }
  const std::vector<ParamVector> scalars{ParamVector{0.0}, ParamVector{1.0}, ParamVector{10.0}};
  const double truth = estimate_truth(scalars, FedTruthConfig{}).truth[0];
  const bool closed_ok = worst <= 1e-9;
  const bool grid_ok = std::abs(truth - oracle) <= 1e-3;
  return {closed_ok && grid_ok, "closed-form residual " + fmt(worst) + (closed_ok ? " ok" : " too large") +
                                    "; scalar truth " + fmt(truth, 10) + " vs grid oracle " + fmt(oracle, 10)};
}

Outcome convergence() {
  std::mt19937_64 rng(107);
  double total = 0.0;
  int max_iters = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto u = instance_with_outliers(rng, 10, 20, trial % 5);
    const int it = estimate_truth(u, FedTruthConfig{}).iterations;
    total += it;
    max_iters = std::max(max_iters, it);
  }
  const double mean = total / 1000.0;
  return {mean <= 40.0 && max_iters <= 100, "mean " + fmt(mean) + ", max " + std::to_string(max_iters)};
}

Outcome byzantine() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto ft = final_main("byzantine_boost.yaml", {"aggregator.kind=fedtruth"});
  const auto fa = final_main("byzantine_boost.yaml", {"aggregator.kind=fedavg"});
  const double t = seconds_since(t0);
  bool ok = t < 120.0;
  for (std::size_t i = 0; i < kSeeds.size(); ++i) ok = ok && ft[i] >= 0.90 && fa[i] <= 0.70;
  return {ok, "fedtruth " + list(ft) + ", fedavg " + list(fa) + ", " + fmt(t) + " s"};
}

Outcome gaussian() {
  const auto ft0 = final_main("default.yaml", {"aggregator.kind=fedtruth"});
  const auto ftn = final_main("gaussian_noise.yaml", {"aggregator.kind=fedtruth"});
  const auto fa0 = final_main("default.yaml", {"aggregator.kind=fedavg"});
  const auto fan = final_main("gaussian_noise.yaml", {"aggregator.kind=fedavg"});
  bool ok = true;
  for (std::size_t i = 0; i < kSeeds.size(); ++i) ok = ok && ftn[i] >= ft0[i] - 0.02 && fan[i] <= fa0[i] - 0.15;
  return {ok, "fedtruth clean " + list(ft0) + " noisy " + list(ftn) + "; fedavg clean " + list(fa0) + " noisy " +
                  list(fan)};
}

struct BackdoorRuns {
  std::vector<double> cos_main, cos_bd, euc_bd, avg_bd;
};

BackdoorRuns backdoor_runs() {
  BackdoorRuns r;
  for (auto s : kSeeds) {
    const auto cos = final_round("dba_backdoor.yaml", s, {"aggregator.kind=fedtruth", "aggregator.distance=cosine"});
    r.cos_main.push_back(cos.main_accuracy);
    r.cos_bd.push_back(cos.backdoor_accuracy.value_or(NAN));
    r.euc_bd.push_back(final_round("dba_backdoor.yaml", s, {"aggregator.kind=fedtruth", "aggregator.distance=euclidean"})
                           .backdoor_accuracy.value_or(NAN));
    r.avg_bd.push_back(final_round("dba_backdoor.yaml", s, {"aggregator.kind=fedavg"}).backdoor_accuracy.value_or(NAN));
  }
  return r;
}

Outcome backdoor(const BackdoorRuns& r) {
  bool ok = true;
  for (std::size_t i = 0; i < kSeeds.size(); ++i) ok = ok && r.cos_bd[i] <= 0.10 && r.cos_main[i] >= 0.85 && r.avg_bd[i] >= 0.60;
  return {ok, "cosine fedtruth main " + list(r.cos_main) + " backdoor " + list(r.cos_bd) + "; fedavg backdoor " +
                  list(r.avg_bd)};
}

Outcome distance_contrast(const BackdoorRuns& r) {
  const auto euc = final_main("byzantine_boost.yaml", {"aggregator.kind=fedtruth", "aggregator.distance=euclidean"});
  const auto cos = final_main("byzantine_boost.yaml", {"aggregator.kind=fedtruth", "aggregator.distance=cosine"});
  bool boost_ok = true, dba_ok = true;
  for (std::size_t i = 0; i < kSeeds.size(); ++i) {
    boost_ok = boost_ok && euc[i] - cos[i] >= 0.20;
    dba_ok = dba_ok && r.euc_bd[i] - r.cos_bd[i] >= 0.30;
  }
  return {boost_ok && dba_ok, std::string("boosting: euclidean ") + list(euc) + " cosine " + list(cos) +
                                  (boost_ok ? " ok" : " short") + "; dba backdoor: euclidean " + list(r.euc_bd) +
                                  " cosine " + list(r.cos_bd) + (dba_ok ? " ok" : " short")};
}

Outcome non_iid() {
  bool ok = true;
  std::string detail;
  for (double bias : {0.1, 0.5, 0.8, 0.95}) {
    std::ostringstream b;
    b << bias;
    const auto acc = final_main("byzantine_boost.yaml", {"aggregator.kind=fedtruth", "dataset.noniid_bias=" + b.str()});
    const double floor = bias == 0.95 ? 0.70 : 0.85;
    for (double a : acc) ok = ok && a >= floor;
    detail += (detail.empty() ? "" : ", ") + ("bias " + b.str() + " " + list(acc));
  }
  return {ok, detail};
}

Outcome layers() {
  bool ok = true;
  std::string detail = "iterations layer/flat:";
  for (auto s : kSeeds) {
    double flat = 0.0, layered = 0.0;
    for (const auto& r : run_experiment(
             load_config(kConfigs / "mlp_layers.yaml", {"aggregator.kind=fedtruth", "seed=" + std::to_string(s)}).experiment)) {
      flat += r.iterations.value_or(0);
    }
    for (const auto& r : run_experiment(load_config(kConfigs / "mlp_layers.yaml",
                                                    {"aggregator.kind=fedtruth_layer", "seed=" + std::to_string(s)})
                                            .experiment)) {
      layered += r.iterations.value_or(0);
    }
    ok = ok && layered >= flat;
    detail += " " + fmt(layered, 6) + "/" + fmt(flat, 6);
  }
  std::mt19937_64 rng(109);
  int identical = 0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<LayeredUpdate> u;
    for (const auto& v : testing::random_updates(rng, 3 + trial % 8, 1 + trial % 30, false)) {
      u.emplace_back(std::vector<Layer>{{"W", v}});
    }
    const std::vector<double> counts(u.size(), 1.0);
    const auto a = aggregate(AggregatorSpec{AggregatorKind::FedTruth}, AggregationInput{u, counts});
    const auto b = aggregate(AggregatorSpec{AggregatorKind::FedTruthLayer}, AggregationInput{u, counts});
    if (a.aggregate == b.aggregate) ++identical;
  }
  ok = ok && identical == 200;
  return {ok, detail + "; single-layer bit-identical " + std::to_string(identical) + "/200"};
}

Outcome baseline_oracles() {
  std::mt19937_64 rng(113);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 9;
    const auto u = testing::random_updates(rng, n, 1 + trial % 8, trial % 2 == 0);
    const int k = trial % ((n - 1) / 2 + 1);
    const auto med = coordinate_median(u);
    const auto trim = trimmed_mean(u, k);
    for (Eigen::Index i = 0; i < u[0].size(); ++i) {
      if (med[i] != testing::naive_median(u, i) || trim[i] != testing::naive_trimmed(u, i, k)) ++mismatches;
    }
  }
  int krum_mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 3 + trial % 6;
    const int f = trial % (n - 2);
    const auto u = testing::random_updates(rng, n, 1 + trial % 5, trial % 3 == 0);
    if (krum_select(u, f) != testing::naive_krum(u, f)) ++krum_mismatches;
  }
  return {mismatches == 0 && krum_mismatches == 0,
          "median/trimmed mismatches " + std::to_string(mismatches) + ", krum mismatches " +
              std::to_string(krum_mismatches)};
}

Outcome gradients() {
  SynthSpec spec;
  spec.n_samples = 60;
  spec.n_features = 10;
  spec.n_classes = 3;
  RandomStream rng(127);
  const auto ds = synth_blobs(spec, rng);
  const auto lr = testing::gradient_check(init_model(ModelSpec{ModelKind::LogReg, 10, 3}, 1), ds, 0.0, 100, 2);
  const auto mlp = testing::gradient_check(init_model(ModelSpec{ModelKind::Mlp, 10, 3, 8}, 3), ds, 0.0, 100, 4);
  return {lr.max_relative_error <= 1e-5 && mlp.max_relative_error <= 1e-5,
          "h " + fmt(std::cbrt(std::numeric_limits<double>::epsilon())) + ", max relative error logreg " + fmt(lr.max_relative_error) + ", mlp " + fmt(mlp.max_relative_error)};
}

std::string csv_without_timing(const fs::path& p) {
  std::ifstream in(p);
  std::string line, out;
  bool header = true;
  while (std::getline(in, line)) {
    if (!header) {
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string c;
      while (std::getline(ss, c, ',')) cells.push_back(c);
      if (cells.size() > 8) cells[8].clear();
      line.clear();
      for (std::size_t i = 0; i < cells.size(); ++i) line += (i ? "," : "") + cells[i];
    }
    header = false;
    out += line + "\n";
  }
  return out;
}

Outcome determinism() {
  const auto root = fs::temp_directory_path() / "truthfl_acceptance_determinism";
  fs::remove_all(root);
  setenv(kOutputRootEnv, root.c_str(), 1);
  std::ostringstream sink;
  int rc = 0;
  for (const char* name : {"first", "second"}) {
    rc |= run_command(kConfigs / "dba_backdoor.yaml", {"fl.rounds=20", std::string("output.name=") + name}, sink, sink);
  }
  unsetenv(kOutputRootEnv);
  if (rc != 0) return {false, "run failed: " + sink.str()};
  const auto a = csv_without_timing(root / "first.csv");
  const auto b = csv_without_timing(root / "second.csv");
  return {!a.empty() && a == b, a == b ? "CSV identical apart from agg_time_s" : "CSV differs"};
}

Outcome scaling() {
  const auto rows = bench_aggregation({10, 100, 1000}, 10000, 1, {AggregatorKind::Krum, AggregatorKind::FedTruth});
  std::vector<double> ratios;
  for (int n : {10, 100, 1000}) {
    double krum = 0.0, truth = 0.0;
    for (const auto& r : rows) {
      if (r.n_clients != n) continue;
      (r.aggregator == AggregatorKind::Krum ? krum : truth) = r.mean_seconds;
    }
    ratios.push_back(krum / truth);
  }
  return {ratios[0] < ratios[1] && ratios[1] < ratios[2], "krum/fedtruth time ratio at n=10,100,1000 " + list(ratios)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"resilient averaging", resilience},
      {"fixed-point oracle", fixed_point},
      {"convergence budget", convergence},
      {"byzantine boosting trend", byzantine},
      {"gaussian noise trend", gaussian},
  };
  int failed = 0;
  int index = 0;
  auto report = [&](const std::string& name, const Outcome& o) {
    ++index;
    if (!o.pass) ++failed;
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", index, name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  };
  for (const auto& [name, fn] : criteria) report(name, fn());
  const auto bd = backdoor_runs();
  report("dba backdoor trend", backdoor(bd));
  report("distance contrast", distance_contrast(bd));
  report("non-iid robustness", non_iid());
  report("layer agreement and cost", layers());
  report("baseline oracles", baseline_oracles());
  report("gradient check", gradients());
  report("determinism", determinism());
  report("scaling ordering", scaling());
  std::printf("%d of %d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
