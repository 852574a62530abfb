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
#include "truthfl/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "truthfl/config.hpp"
#include "truthfl/report.hpp"
#include "truthfl/rng.hpp"

namespace truthfl {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path.string() + "'");
  return f;
}

std::string short_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

struct Cell {
  AggregatorKind aggregator;
  int adversaries;
  double bias;
  DistanceKind distance;
  std::uint64_t seed;

  std::string stem() const {
    return std::string(to_string(aggregator)) + "_adv" + std::to_string(adversaries) + "_bias" +
           short_double(bias) + "_" + std::string(to_string(distance)) + "_seed" + std::to_string(seed);
  }
};

std::vector<Cell> expand(const SweepSpec& s) {
  std::vector<Cell> cells;
  for (auto agg : s.aggregators)
    for (int adv : s.adversaries)
      for (double bias : s.biases)
        for (auto dist : s.distances)
          for (auto seed : s.seeds) cells.push_back({agg, adv, bias, dist, seed});
  return cells;
}

}  // namespace

std::filesystem::path output_root() {
  const char* env = std::getenv(kOutputRootEnv);
  return (env && *env) ? std::filesystem::path(env) : std::filesystem::path("results");
}

int run_command(const std::filesystem::path& config_path, const std::vector<std::string>& overrides,
                std::ostream& out, std::ostream& err) {
  try {
    const auto loaded = load_config(config_path, overrides);
    const auto reports = run_experiment(loaded.experiment);
    const auto root = output_root();
    const auto csv_path = root / (loaded.name + ".csv");
    const auto json_path = root / (loaded.name + ".json");
    {
      auto f = open_output(csv_path);
      write_round_csv(f, loaded.experiment, reports);
    }
    const auto summary = summary_json(loaded.experiment, reports);
    {
      auto f = open_output(json_path);
      f << summary.dump(2) << '\n';
    }
    out << "wrote " << csv_path.string() << " and " << json_path.string() << '\n';
    out << "final main_acc " << format_double(reports.back().main_accuracy);
    if (reports.back().backdoor_accuracy) out << ", backdoor_acc " << format_double(*reports.back().backdoor_accuracy);
    out << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int sweep_command(const std::filesystem::path& sweep_path, std::ostream& out, std::ostream& err) {
  SweepSpec spec;
  try {
    spec = load_sweep(sweep_path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  const auto dir = output_root() / spec.name;
  const auto cells = expand(spec);
  std::ostringstream merged;
  merged << "aggregator,n_adversaries,bias,distance,seed,round,main_acc,backdoor_acc,agg_time_s,iters\n";
  nlohmann::json status = nlohmann::json::array();
  std::vector<std::string> written;
  int failures = 0;

  for (const auto& cell : cells) {
    nlohmann::json entry{{"cell", cell.stem()}};
    try {
      auto overrides = spec.overrides;
      overrides.push_back("aggregator.kind=" + std::string(to_string(cell.aggregator)));
      overrides.push_back("attack.n_adversaries=" + std::to_string(cell.adversaries));
      overrides.push_back("dataset.noniid_bias=" + format_double(cell.bias));
      overrides.push_back("aggregator.distance=" + std::string(to_string(cell.distance)));
      overrides.push_back("seed=" + std::to_string(cell.seed));
      const auto loaded = load_config(spec.base_config, overrides);
      const auto reports = run_experiment(loaded.experiment);

      auto f = open_output(dir / (cell.stem() + ".csv"));
      write_round_csv(f, loaded.experiment, reports);
      for (const auto& r : reports) {
        merged << to_string(cell.aggregator) << ',' << cell.adversaries << ',' << format_double(cell.bias) << ','
               << to_string(cell.distance) << ',' << cell.seed << ',' << r.round << ','
               << format_double(r.main_accuracy) << ','
               << (r.backdoor_accuracy ? format_double(*r.backdoor_accuracy) : "") << ','
               << format_double(r.aggregation_time_s) << ',' << (r.iterations ? std::to_string(*r.iterations) : "")
               << '\n';
      }
      entry["status"] = "ok";
      entry["summary"] = summary_json(loaded.experiment, reports);
      written.push_back(cell.stem());
      out << "cell " << cell.stem() << ": final main_acc " << format_double(reports.back().main_accuracy) << '\n';
    } catch (const std::exception& e) {
      ++failures;
      entry["status"] = "failed";
      entry["error"] = e.what();
      err << "cell " << cell.stem() << " failed: " << e.what() << '\n';
    }
    status.push_back(entry);
  }

  try {
    {
      auto f = open_output(dir / "merged.csv");
      f << merged.str();
    }
    {
      auto f = open_output(dir / "cells.json");
      f << status.dump(2) << '\n';
    }
    if (spec.gnuplot && !written.empty()) {
      auto f = open_output(dir / "plot.gp");
      f << "set datafile separator ','\nset key outside\nset xlabel 'round'\nset ylabel 'main accuracy'\n"
           "set yrange [0:1]\nplot ";
      for (std::size_t i = 0; i < written.size(); ++i) {
        f << (i ? ", \\\n     " : "") << "'" << written[i] << ".csv' using 1:7 with lines title '" << written[i] << "'";
      }
      f << '\n';
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  out << cells.size() - static_cast<std::size_t>(failures) << "/" << cells.size() << " cells written to "
      << dir.string() << '\n';
  return failures == 0 ? 0 : 1;
}

std::vector<AggregatorKind> all_aggregators() {
  return {AggregatorKind::FedTruth, AggregatorKind::FedTruthLayer, AggregatorKind::FedAvg,
          AggregatorKind::Krum,     AggregatorKind::Median,        AggregatorKind::TrimmedMean,
          AggregatorKind::FLTrust,  AggregatorKind::Flame};
}

std::vector<BenchRow> bench_aggregation(const std::vector<int>& n_clients, int dim, int repetitions,
                                        const std::vector<AggregatorKind>& kinds, std::uint64_t seed) {
  if (dim <= 0 || repetitions <= 0) throw std::invalid_argument("bench: dim and repetitions must be positive");
  std::vector<BenchRow> rows;
  for (int n : n_clients) {
    if (n <= 0) throw std::invalid_argument("bench: client counts must be positive");
    auto rng = derive_stream(seed, stream_tag::kBench, static_cast<std::uint64_t>(n));
    std::normal_distribution<double> normal(0.0, 1.0);
    // Two layers so the layer-wise variant has something to split.
    const int first = dim / 2 > 0 ? dim / 2 : dim;
    auto draw = [&] {
      Eigen::VectorXd a(first);
      for (auto& x : a) x = normal(rng);
      std::vector<Layer> layers{{"l0", ParamVector(a)}};
      if (dim - first > 0) {
        Eigen::VectorXd b(dim - first);
        for (auto& x : b) x = normal(rng);
        layers.push_back({"l1", ParamVector(b)});
      }
      return LayeredUpdate(std::move(layers));
    };
    std::vector<LayeredUpdate> updates;
    updates.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) updates.push_back(draw());
    const LayeredUpdate server = draw();
    const std::vector<double> counts(static_cast<std::size_t>(n), 1.0);

    for (auto kind : kinds) {
      AggregatorSpec spec;
      spec.kind = kind;
      try {
        spec.validate(n);
      } catch (const std::invalid_argument&) {
        continue;  // rule undefined at this n (e.g. Krum with n < 3)
      }
      double total = 0.0;
      for (int r = 0; r < repetitions; ++r) {
        auto agg_rng = derive_stream(seed, stream_tag::kAggregatorNoise, static_cast<std::uint64_t>(r));
        AggregationInput input{updates, counts, &server, &agg_rng};
        total += aggregate(spec, input).wall_time_s;
      }
      rows.push_back({kind, n, dim, total / repetitions});
    }
  }
  return rows;
}

int bench_command(const std::vector<int>& n_clients, int dim, int repetitions,
                  const std::vector<AggregatorKind>& kinds, std::ostream& out, std::ostream& err) {
  try {
    const auto rows = bench_aggregation(n_clients, dim, repetitions, kinds);
    std::ostringstream csv;
    csv << "aggregator,n_clients,dim,mean_seconds\n";
    char line[128];
    std::snprintf(line, sizeof line, "%-16s %10s %8s %14s\n", "aggregator", "n_clients", "dim", "mean_seconds");
    out << line;
    for (const auto& r : rows) {
      const std::string name(to_string(r.aggregator));
      std::snprintf(line, sizeof line, "%-16s %10d %8d %14.6f\n", name.c_str(), r.n_clients, r.dim, r.mean_seconds);
      out << line;
      csv << name << ',' << r.n_clients << ',' << r.dim << ',' << format_double(r.mean_seconds) << '\n';
    }
    const auto path = output_root() / "bench.csv";
    auto f = open_output(path);
    f << csv.str();
    out << "wrote " << path.string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace truthfl
