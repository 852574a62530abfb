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
#include "truthfl/report.hpp"

#include <cstdio>

namespace truthfl {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> round_csv_header(int clients_per_round) {
  std::vector<std::string> cols{"round",  "aggregator", "distance",   "coefficient", "n_adversaries",
                                "attack", "main_acc",   "backdoor_acc", "agg_time_s", "iters"};
  for (int i = 0; i < clients_per_round; ++i) cols.push_back("weight_c" + std::to_string(i));
  return cols;
}

void write_round_csv(std::ostream& out, const ExperimentConfig& cfg, const std::vector<RoundReport>& reports) {
  const auto header = round_csv_header(cfg.fl.clients_per_round);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& r : reports) {
    out << r.round << ',' << to_string(cfg.aggregator.kind) << ',' << to_string(cfg.aggregator.fedtruth.distance)
        << ',' << to_string(cfg.aggregator.fedtruth.coefficient) << ',' << r.adversaries.size() << ','
        << to_string(cfg.attack.kind) << ',' << format_double(r.main_accuracy) << ',';
    if (r.backdoor_accuracy) out << format_double(*r.backdoor_accuracy);
    out << ',' << format_double(r.aggregation_time_s) << ',';
    if (r.iterations) out << *r.iterations;
    for (int i = 0; i < cfg.fl.clients_per_round; ++i) {
      out << ',';
      if (static_cast<std::size_t>(i) < r.weights.size()) out << format_double(r.weights[static_cast<std::size_t>(i)]);
    }
    out << '\n';
  }
}

nlohmann::json summary_json(const ExperimentConfig& cfg, const std::vector<RoundReport>& reports) {
  nlohmann::json j;
  j["aggregator"] = std::string(to_string(cfg.aggregator.kind));
  j["distance"] = std::string(to_string(cfg.aggregator.fedtruth.distance));
  j["coefficient"] = std::string(to_string(cfg.aggregator.fedtruth.coefficient));
  j["attack"] = std::string(to_string(cfg.attack.kind));
  j["n_adversaries"] = cfg.n_adversaries;
  j["seed"] = cfg.master_seed;
  j["rounds"] = reports.size();
  if (reports.empty()) return j;

  const auto& last = reports.back();
  j["final_main_acc"] = last.main_accuracy;
  j["final_backdoor_acc"] = last.backdoor_accuracy ? nlohmann::json(*last.backdoor_accuracy) : nlohmann::json();

  double time_sum = 0.0;
  double iter_sum = 0.0;
  int iter_rounds = 0;
  for (const auto& r : reports) {
    time_sum += r.aggregation_time_s;
    if (r.iterations) {
      iter_sum += *r.iterations;
      ++iter_rounds;
    }
  }
  j["mean_agg_time_s"] = time_sum / static_cast<double>(reports.size());
  j["mean_iterations"] = iter_rounds ? nlohmann::json(iter_sum / iter_rounds) : nlohmann::json();
  return j;
}

}  // namespace truthfl
