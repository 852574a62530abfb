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
#include "truthfl/simulator.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "truthfl/rng.hpp"

namespace truthfl {

namespace {

struct PreparedData {
  std::vector<Dataset> clients;
  Dataset root;
  Dataset test;
  std::optional<Dataset> backdoor_test;
  std::optional<Dataset> edge_pool;
};

std::pair<Dataset, Dataset> load_pool_and_test(const ExperimentConfig& cfg) {
  const auto& d = cfg.dataset;
  if (d.source == DataSource::Idx) {
    return {load_idx(d.train_images, d.train_labels), load_idx(d.test_images, d.test_labels)};
  }
  auto pool_rng = derive_stream(cfg.master_seed, stream_tag::kData, 0);
  auto test_rng = derive_stream(cfg.master_seed, stream_tag::kData, 1);
  SynthSpec test_spec = d.synth;
  test_spec.n_samples = d.synth_test_samples;
  Dataset pool = synth_blobs(d.synth, pool_rng);
  Dataset test = synth_blobs(test_spec, test_rng);
  return {std::move(pool), std::move(test)};
}

TriggerSpec full_trigger(const BackdoorSpec& b) {
  return {b.trigger_features, b.trigger_value, b.target_label};
}

PreparedData prepare_data(const ExperimentConfig& cfg) {
  auto [pool, test] = load_pool_and_test(cfg);
  if (pool.n_features() != cfg.model.n_features || pool.n_classes() > cfg.model.n_classes) {
    throw std::invalid_argument("dataset shape (" + std::to_string(pool.n_features()) + " features, " +
                                std::to_string(pool.n_classes()) + " classes) does not fit the model");
  }

  // The root split is carved for every aggregator so that client data does
  // not depend on which rule runs.
  auto root_rng = derive_stream(cfg.master_seed, stream_tag::kPartition, 1);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(pool.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), root_rng);
  const auto root_size = std::max<Eigen::Index>(
      1, static_cast<Eigen::Index>(std::llround(cfg.fltrust_root_fraction * static_cast<double>(pool.size()))));
  if (root_size >= pool.size()) throw std::invalid_argument("fltrust_root_fraction leaves no client data");
  std::vector<Eigen::Index> root_rows(order.begin(), order.begin() + root_size);
  std::vector<Eigen::Index> rest_rows(order.begin() + root_size, order.end());
  std::sort(root_rows.begin(), root_rows.end());
  std::sort(rest_rows.begin(), rest_rows.end());
  Dataset root = pool.subset(root_rows);
  Dataset rest = pool.subset(rest_rows);

  PartitionPlan plan{cfg.fl.total_clients, cfg.dataset.noniid_bias, cfg.dataset.samples_per_client};
  auto part_rng = derive_stream(cfg.master_seed, stream_tag::kPartition, 0);
  PreparedData out{partition_label_skew(rest, plan, part_rng), std::move(root), std::move(test), {}, {}};

  if (cfg.attack.kind == AttackKind::Backdoor) {
    const auto& b = cfg.attack.backdoor;
    if (b.kind == BackdoorKind::Trigger) {
      out.backdoor_test = backdoor_test_set(out.test, full_trigger(b));
    } else {
      out.edge_pool = make_edge_pool(rest, b.edge_source_label, b.target_label);
      out.backdoor_test = make_edge_pool(out.test, b.edge_source_label, b.target_label);
    }
  }
  return out;
}

LayeredUpdate scale(const LayeredUpdate& u, double factor) {
  if (factor == 1.0) return u;
  std::vector<Layer> out;
  for (const auto& layer : u.layers()) out.push_back({layer.name, boost_update(layer.params, factor)});
  return LayeredUpdate(std::move(out));
}

LayeredUpdate map_flat(const LayeredUpdate& u, const std::function<ParamVector(const ParamVector&)>& f) {
  return unflatten(f(flatten(u)), u.layout());
}

// Trains on `ds`, projecting onto the PGD ball around `global` after each
// epoch when a radius is configured.
ModelParams adversarial_train(const ModelParams& global, const Dataset& ds, TrainConfig cfg,
                              const std::optional<double>& pgd_radius) {
  if (!pgd_radius) return local_train(global, ds, cfg);
  const ParamVector ref = flatten(global.layers);
  const int epochs = cfg.local_epochs;
  cfg.local_epochs = 1;
  const std::uint64_t base_seed = cfg.seed;
  ModelParams w = global;
  for (int e = 0; e < epochs; ++e) {
    cfg.seed = splitmix64(base_seed ^ static_cast<std::uint64_t>(e));
    w = local_train(w, ds, cfg);
    w.layers = unflatten(pgd_project(flatten(w.layers), ref, *pgd_radius), w.layers.layout());
  }
  return w;
}

struct ClientResult {
  LayeredUpdate update;
  double samples;
};

ClientResult run_adversary(const ExperimentConfig& cfg, const PreparedData& data, const ModelParams& global,
                           int client, int adversary_slot, int n_adv_round, int round,
                           const TrainConfig& train) {
  const Dataset& own = data.clients[static_cast<std::size_t>(client)];
  const auto& attack = cfg.attack;
  const double boost = attack.round_boost(cfg.fl.clients_per_round, n_adv_round);

  switch (attack.kind) {
    case AttackKind::None:
      return {extract_update(global, local_train(global, own, train)), static_cast<double>(own.size())};
    case AttackKind::ModelBoost: {
      const auto delta = extract_update(global, local_train(global, own, train));
      return {scale(delta, boost), static_cast<double>(own.size())};
    }
    case AttackKind::GaussianNoise: {
      ModelParams local = local_train(global, own, train);
      auto rng = derive_stream(cfg.master_seed, stream_tag::kAttackNoise, static_cast<std::uint64_t>(round),
                               static_cast<std::uint64_t>(client));
      local.layers = map_flat(local.layers, [&](const ParamVector& v) { return gaussian_noise(v, attack.sigma, rng); });
      return {scale(extract_update(global, local), boost), static_cast<double>(own.size())};
    }
    case AttackKind::Backdoor:
      break;
  }

  const auto& b = attack.backdoor;
  auto poison_rng = derive_stream(cfg.master_seed, stream_tag::kPoison, static_cast<std::uint64_t>(round),
                                  static_cast<std::uint64_t>(client));
  Dataset poisoned = own;
  if (b.kind == BackdoorKind::Trigger) {
    TriggerSpec trigger = full_trigger(b);
    if (b.distributed && n_adv_round > 1) {
      trigger = dba_shards(trigger, n_adv_round)[static_cast<std::size_t>(adversary_slot)];
    }
    poisoned = apply_trigger(own, trigger, b.poison_fraction, poison_rng).data;
  } else {
    poisoned = edge_case_augment(own, *data.edge_pool, b.edge_ratio, poison_rng);
  }
  const auto delta_p = extract_update(global, adversarial_train(global, poisoned, train, attack.pgd_radius));
  const double samples = static_cast<double>(poisoned.size());
  if (attack.strategy != AttackStrategy::ConstrainAndScale) return {scale(delta_p, boost), samples};

  // Blending models and then differencing against the same global model is
  // the same as blending the updates.
  const auto delta_b = extract_update(global, local_train(global, own, train));
  return {unflatten(constrain_and_scale(flatten(delta_b), flatten(delta_p), attack.alpha, boost), delta_b.layout()),
          samples};
}

}  // namespace

std::string_view to_string(DataSource source) { return source == DataSource::Synth ? "synth" : "idx"; }

DataSource parse_data_source(std::string_view text) {
  if (text == "synth") return DataSource::Synth;
  if (text == "idx") return DataSource::Idx;
  throw std::invalid_argument("unknown dataset source '" + std::string(text) + "'");
}

void ExperimentConfig::validate() const {
  model.validate();
  fl.train.validate();
  attack.validate();
  if (fl.total_clients <= 0 || fl.clients_per_round <= 0 || fl.rounds <= 0) {
    throw std::invalid_argument("fl: total_clients, clients_per_round and rounds must be positive");
  }
  if (fl.clients_per_round > fl.total_clients) {
    throw std::invalid_argument("fl: clients_per_round must not exceed total_clients");
  }
  if (!(fl.server_lr >= 0.0) || !std::isfinite(fl.server_lr)) {
    throw std::invalid_argument("fl: server_lr must be finite and >= 0");
  }
  if (n_adversaries < 0 || n_adversaries > fl.clients_per_round) {
    throw std::invalid_argument("attack: n_adversaries must be in [0, clients_per_round]");
  }
  if (!allow_adversary_majority && 2 * n_adversaries >= fl.clients_per_round) {
    throw std::invalid_argument("attack: n_adversaries=" + std::to_string(n_adversaries) +
                                " is not below half of clients_per_round=" +
                                std::to_string(fl.clients_per_round) +
                                " (set attack.allow_majority=true to override)");
  }
  if (!(fltrust_root_fraction > 0.0 && fltrust_root_fraction < 1.0)) {
    throw std::invalid_argument("fltrust_root_fraction must be in (0, 1)");
  }
  if (dataset.source == DataSource::Synth) {
    if (dataset.synth.n_features != model.n_features || dataset.synth.n_classes != model.n_classes) {
      throw std::invalid_argument("dataset and model disagree on features or classes");
    }
    if (dataset.synth_test_samples <= 0) throw std::invalid_argument("dataset: test_samples must be positive");
  } else if (dataset.train_images.empty() || dataset.train_labels.empty() || dataset.test_images.empty() ||
             dataset.test_labels.empty()) {
    throw std::invalid_argument("dataset: idx source needs train and test image/label paths");
  }
  if (attack.kind == AttackKind::Backdoor && attack.backdoor.kind == BackdoorKind::Trigger) {
    TriggerSpec{attack.backdoor.trigger_features, attack.backdoor.trigger_value, attack.backdoor.target_label}
        .validate(model.n_features, model.n_classes);
    if (attack.backdoor.distributed && static_cast<int>(attack.backdoor.trigger_features.size()) < n_adversaries) {
      throw std::invalid_argument("attack: distributed trigger needs at least one feature per adversary");
    }
  }
  aggregator.fedtruth.validate();
  AggregatorSpec agg = aggregator;
  if (agg.kind == AggregatorKind::Krum && !agg.krum_f) agg.krum_f = n_adversaries;
  agg.validate(fl.clients_per_round);
  // The non-iid partition runs through its own checks.
  PartitionPlan{fl.total_clients, dataset.noniid_bias, dataset.samples_per_client}.validate();
}

Roster select_round_roster(int total_clients, int clients_per_round, int n_adversaries, int round_index,
                           std::uint64_t master_seed) {
  if (clients_per_round <= 0 || clients_per_round > total_clients) {
    throw std::invalid_argument("roster: need 0 < clients_per_round <= total_clients");
  }
  if (n_adversaries < 0 || n_adversaries > clients_per_round) {
    throw std::invalid_argument("roster: n_adversaries must be in [0, clients_per_round]");
  }
  auto rng = derive_stream(master_seed, stream_tag::kRoster, static_cast<std::uint64_t>(round_index));
  std::vector<int> pool(static_cast<std::size_t>(total_clients));
  std::iota(pool.begin(), pool.end(), 0);
  std::shuffle(pool.begin(), pool.end(), rng);
  Roster r;
  r.clients.assign(pool.begin(), pool.begin() + clients_per_round);
  std::shuffle(r.clients.begin(), r.clients.end(), rng);
  r.adversaries.assign(r.clients.begin(), r.clients.begin() + n_adversaries);
  std::sort(r.clients.begin(), r.clients.end());
  std::sort(r.adversaries.begin(), r.adversaries.end());
  return r;
}

ModelParams apply_global_update(const ModelParams& w, const LayeredUpdate& delta, double eta) {
  if (!same_layout(w.layers, delta)) throw DimensionError("apply_global_update: layout mismatch");
  std::vector<Layer> out;
  for (std::size_t i = 0; i < delta.layer_count(); ++i) {
    const auto& layer = w.layers.layer(i);
    out.push_back({layer.name, ParamVector::from_expression(layer.params.values() -
                                                            eta * delta.layer(i).params.values())});
  }
  return {w.spec, LayeredUpdate(std::move(out))};
}

LayeredUpdate fltrust_server_step(const Dataset& root_ds, const ModelParams& w, const TrainConfig& cfg) {
  if (root_ds.empty()) throw std::invalid_argument("fltrust_server_step: empty root split");
  return extract_update(w, local_train(w, root_ds, cfg));
}

std::vector<RoundReport> run_experiment(const ExperimentConfig& cfg, const RoundObserver& observer) {
  cfg.validate();
  const PreparedData data = prepare_data(cfg);
  AggregatorSpec agg = cfg.aggregator;
  if (agg.kind == AggregatorKind::Krum && !agg.krum_f) agg.krum_f = cfg.n_adversaries;

  ModelParams global = init_model(cfg.model, derive_seed(cfg.master_seed, stream_tag::kModelInit));
  std::vector<RoundReport> reports;
  reports.reserve(static_cast<std::size_t>(cfg.fl.rounds));

  for (int round = 1; round <= cfg.fl.rounds; ++round) {
    const Roster roster = select_round_roster(cfg.fl.total_clients, cfg.fl.clients_per_round, cfg.n_adversaries,
                                              round, cfg.master_seed);
    const int n_adv = static_cast<int>(roster.adversaries.size());
    std::vector<LayeredUpdate> updates;
    std::vector<double> counts;
    int adversary_slot = 0;
    for (int client : roster.clients) {
      TrainConfig train = cfg.fl.train;
      train.seed = derive_seed(cfg.master_seed, stream_tag::kBatching, static_cast<std::uint64_t>(round),
                               static_cast<std::uint64_t>(client));
      const bool adversarial = std::binary_search(roster.adversaries.begin(), roster.adversaries.end(), client);
      if (adversarial && cfg.attack.kind != AttackKind::None) {
        auto r = run_adversary(cfg, data, global, client, adversary_slot, n_adv, round, train);
        updates.push_back(std::move(r.update));
        counts.push_back(r.samples);
      } else {
        const Dataset& own = data.clients[static_cast<std::size_t>(client)];
        updates.push_back(extract_update(global, local_train(global, own, train)));
        counts.push_back(static_cast<double>(own.size()));
      }
      if (adversarial) ++adversary_slot;
    }

    std::optional<LayeredUpdate> server_update;
    if (agg.kind == AggregatorKind::FLTrust) {
      TrainConfig train = cfg.fl.train;
      train.seed = derive_seed(cfg.master_seed, stream_tag::kServer, static_cast<std::uint64_t>(round));
      server_update = fltrust_server_step(data.root, global, train);
    }
    auto agg_rng = derive_stream(cfg.master_seed, stream_tag::kAggregatorNoise, static_cast<std::uint64_t>(round));
    AggregationInput input{updates, counts, server_update ? &*server_update : nullptr, &agg_rng};
    AggregationOutcome outcome = aggregate(agg, input);
    if (observer) observer(RoundTrace{round, updates, counts, &outcome.aggregate, &global});

    try {
      global = apply_global_update(global, outcome.aggregate, cfg.fl.server_lr);
    } catch (const std::invalid_argument& e) {
      throw NonFiniteModelError(round, e.what());
    }

    RoundReport report;
    report.round = round;
    report.main_accuracy = evaluate(global, data.test).accuracy;
    if (data.backdoor_test && !data.backdoor_test->empty()) {
      report.backdoor_accuracy = evaluate(global, *data.backdoor_test).accuracy;
    }
    report.aggregation_time_s = outcome.wall_time_s;
    report.iterations = outcome.iterations;
    report.weights = std::move(outcome.weights);
    report.roster = roster.clients;
    report.adversaries = roster.adversaries;
    reports.push_back(std::move(report));
  }
  return reports;
}

}  // namespace truthfl
