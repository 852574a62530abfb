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
#include "truthfl/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace truthfl {

namespace {

// Reads optional keys from one YAML map and remembers which were consumed,
// so leftovers can be reported as typos.
class Section {
 public:
  Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) throw ConfigError(where() + "expected a mapping");
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    const YAML::Node v = get(key);
    if (!v) return;
    try {
      out = v.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(where(key) + "cannot parse value '" + scalar_text(v) + "'");
    }
  }

  template <typename T, typename Parse>
  void read_enum(const std::string& key, T& out, Parse parse) {
    std::string text;
    read(key, text);
    if (text.empty()) return;
    try {
      out = parse(text);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(where(key) + e.what());
    }
  }

  // "auto" / "off" map to nullopt.
  void read_optional(const std::string& key, std::optional<double>& out, const char* none_word) {
    const YAML::Node v = get(key);
    if (!v) return;
    if (v.IsScalar() && v.Scalar() == none_word) {
      out.reset();
      return;
    }
    double x = 0.0;
    read(key, x);
    out = x;
  }

  void read_optional(const std::string& key, std::optional<int>& out) {
    const YAML::Node v = get(key);
    if (!v) return;
    if (v.IsScalar() && v.Scalar() == "auto") {
      out.reset();
      return;
    }
    int x = 0;
    read(key, x);
    out = x;
  }

  Section child(const std::string& key) {
    return Section(get(key), path_.empty() ? key : path_ + "." + key);
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!used_.count(key)) throw ConfigError("unknown config key '" + (path_.empty() ? key : path_ + "." + key) + "'");
    }
  }

 private:
  YAML::Node get(const std::string& key) {
    used_.insert(key);
    if (!node_ || !node_.IsMap()) return YAML::Node(YAML::NodeType::Undefined);
    const YAML::Node v = node_[key];
    if (!v || v.IsNull()) return YAML::Node(YAML::NodeType::Undefined);
    return v;
  }

  static std::string scalar_text(const YAML::Node& v) {
    if (v.IsScalar()) return v.Scalar();
    std::ostringstream os;
    os << v;
    return os.str();
  }

  std::string where(const std::string& key = "") const {
    std::string p = path_;
    if (!key.empty()) p = p.empty() ? key : p + "." + key;
    return p.empty() ? "config: " : p + ": ";
  }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> used_;
};

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw ConfigError("bad override key '" + path + "'");
    parts.push_back(part);
  }
  if (parts.empty()) throw ConfigError("empty override key");
  return parts;
}

YAML::Node load_yaml_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  try {
    return YAML::Load(in);
  } catch (const YAML::Exception& e) {
    throw ConfigError("cannot parse '" + path.string() + "': " + e.what());
  }
}

template <typename T, typename Parse>
std::vector<T> read_list(const YAML::Node& node, const std::string& key, Parse parse) {
  if (!node.IsSequence()) throw ConfigError("sweep: '" + key + "' must be a list");
  std::vector<T> out;
  for (const auto& item : node) {
    try {
      out.push_back(parse(item));
    } catch (const std::exception& e) {
      throw ConfigError("sweep: bad entry in '" + key + "': " + e.what());
    }
  }
  if (out.empty()) throw ConfigError("sweep: '" + key + "' must not be empty");
  return out;
}

}  // namespace

void set_dotted(YAML::Node& root, const std::string& path, const std::string& value) {
  const auto parts = split_path(path);
  YAML::Node parsed;
  try {
    parsed = YAML::Load(value);
  } catch (const YAML::Exception& e) {
    throw ConfigError("cannot parse override value '" + value + "': " + e.what());
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  // yaml-cpp nodes are handles, so walking with reset() keeps writes in place.
  std::vector<YAML::Node> chain{root};
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node next = chain.back()[parts[i]];
    if (!next || next.IsNull()) {
      chain.back()[parts[i]] = YAML::Node(YAML::NodeType::Map);
      next = chain.back()[parts[i]];
    } else if (!next.IsMap()) {
      throw ConfigError("override '" + path + "': '" + parts[i] + "' is not a section");
    }
    chain.push_back(next);
  }
  chain.back()[parts.back()] = parsed;
}

void apply_override(YAML::Node& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' must look like key=value");
  }
  set_dotted(root, assignment.substr(0, eq), assignment.substr(eq + 1));
}

ExperimentConfig config_from_yaml(const YAML::Node& root) {
  ExperimentConfig cfg;
  Section top(root, "");
  top.read("seed", cfg.master_seed);
  std::string name;
  {
    Section out = top.child("output");
    out.read("name", name);
    out.finish();
  }

  Section ds = top.child("dataset");
  auto& d = cfg.dataset;
  ds.read_enum("source", d.source, parse_data_source);
  ds.read("n_samples", d.synth.n_samples);
  ds.read("n_features", d.synth.n_features);
  ds.read("n_classes", d.synth.n_classes);
  ds.read("spread", d.synth.spread);
  ds.read("separation", d.synth.separation);
  ds.read("quiet_features", d.synth.quiet_features);
  ds.read("test_samples", d.synth_test_samples);
  ds.read("train_images", d.train_images);
  ds.read("train_labels", d.train_labels);
  ds.read("test_images", d.test_images);
  ds.read("test_labels", d.test_labels);
  ds.read("noniid_bias", d.noniid_bias);
  ds.read("samples_per_client", d.samples_per_client);
  ds.finish();

  Section model = top.child("model");
  model.read_enum("kind", cfg.model.kind, parse_model_kind);
  cfg.model.n_features = d.synth.n_features;
  cfg.model.n_classes = d.synth.n_classes;
  model.read("hidden_units", cfg.model.hidden_units);
  model.finish();

  Section fl = top.child("fl");
  fl.read("total_clients", cfg.fl.total_clients);
  fl.read("clients_per_round", cfg.fl.clients_per_round);
  fl.read("rounds", cfg.fl.rounds);
  fl.read("server_lr", cfg.fl.server_lr);
  fl.read("local_epochs", cfg.fl.train.local_epochs);
  fl.read("batch_size", cfg.fl.train.batch_size);
  fl.read("learning_rate", cfg.fl.train.learning_rate);
  fl.read("weight_decay", cfg.fl.train.weight_decay);
  fl.finish();

  Section at = top.child("attack");
  auto& a = cfg.attack;
  at.read_enum("kind", a.kind, parse_attack_kind);
  at.read_enum("strategy", a.strategy, parse_attack_strategy);
  at.read("n_adversaries", cfg.n_adversaries);
  at.read("allow_majority", cfg.allow_adversary_majority);
  at.read_optional("boosting_factor", a.boosting_factor, "auto");
  at.read("sigma", a.sigma);
  at.read("alpha", a.alpha);
  at.read_optional("pgd_radius", a.pgd_radius, "off");
  Section bd = at.child("backdoor");
  bd.read_enum("kind", a.backdoor.kind, parse_backdoor_kind);
  bd.read("trigger_features", a.backdoor.trigger_features);
  bd.read("trigger_value", a.backdoor.trigger_value);
  bd.read("target_label", a.backdoor.target_label);
  bd.read("poison_fraction", a.backdoor.poison_fraction);
  bd.read("distributed", a.backdoor.distributed);
  bd.read("edge_ratio", a.backdoor.edge_ratio);
  bd.read("edge_source_label", a.backdoor.edge_source_label);
  bd.finish();
  at.finish();

  Section ag = top.child("aggregator");
  auto& g = cfg.aggregator;
  ag.read_enum("kind", g.kind, parse_aggregator_kind);
  ag.read_enum("distance", g.fedtruth.distance, parse_distance_kind);
  ag.read_enum("coefficient", g.fedtruth.coefficient, parse_coefficient);
  ag.read_enum("init", g.fedtruth.init, parse_truth_init);
  ag.read("epsilon", g.fedtruth.epsilon);
  ag.read("max_iterations", g.fedtruth.max_iterations);
  ag.read_optional("trim_k", g.trim_k);
  ag.read_optional("krum_f", g.krum_f);
  ag.read("flame_noise_factor", g.flame_noise_factor);
  ag.read("fltrust_root_fraction", cfg.fltrust_root_fraction);
  ag.finish();

  top.finish();
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  return cfg;
}

LoadedConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  YAML::Node root = load_yaml_file(path);
  for (const auto& o : overrides) apply_override(root, o);
  LoadedConfig out{config_from_yaml(root), path.stem().string(), root};
  if (root.IsMap() && root["output"] && root["output"]["name"]) out.name = root["output"]["name"].as<std::string>();
  return out;
}

void SweepSpec::validate() const {
  if (aggregators.empty() || adversaries.empty() || biases.empty() || distances.empty() || seeds.empty()) {
    throw ConfigError("sweep: every axis needs at least one value");
  }
  if (max_cells <= 0) throw ConfigError("sweep: max_cells must be positive");
  if (cell_count() > static_cast<std::size_t>(max_cells)) {
    throw ConfigError("sweep: " + std::to_string(cell_count()) + " cells exceed max_cells=" +
                      std::to_string(max_cells));
  }
}

SweepSpec load_sweep(const std::filesystem::path& path) {
  const YAML::Node root = load_yaml_file(path);
  if (!root.IsMap()) throw ConfigError("sweep: '" + path.string() + "' must be a mapping");
  static const std::set<std::string> known{"base", "name", "set", "aggregators", "adversaries",
                                           "biases", "distances", "seeds", "max_cells", "gnuplot"};
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (!known.count(key)) throw ConfigError("sweep: unknown key '" + key + "'");
  }
  if (!root["base"]) throw ConfigError("sweep: missing 'base' config path");

  SweepSpec s;
  s.base_config = root["base"].as<std::string>();
  if (s.base_config.is_relative()) s.base_config = path.parent_path() / s.base_config;
  s.name = root["name"] ? root["name"].as<std::string>() : path.stem().string();
  if (root["set"]) {
    if (!root["set"].IsMap()) throw ConfigError("sweep: 'set' must map keys to values");
    for (const auto& kv : root["set"]) {
      std::ostringstream v;
      v << kv.second;
      s.overrides.push_back(kv.first.as<std::string>() + "=" + v.str());
    }
  }
  if (root["max_cells"]) s.max_cells = root["max_cells"].as<int>();
  if (root["gnuplot"]) s.gnuplot = root["gnuplot"].as<bool>();

  if (!root["aggregators"]) throw ConfigError("sweep: 'aggregators' is required");
  s.aggregators = read_list<AggregatorKind>(root["aggregators"], "aggregators", [](const YAML::Node& n) {
    return parse_aggregator_kind(n.as<std::string>());
  });

  const ExperimentConfig base = load_config(s.base_config, s.overrides).experiment;
  if (root["adversaries"]) {
    s.adversaries = read_list<int>(root["adversaries"], "adversaries", [](const YAML::Node& n) { return n.as<int>(); });
  } else {
    s.adversaries = {base.n_adversaries};
  }
  if (root["biases"]) {
    s.biases = read_list<double>(root["biases"], "biases", [](const YAML::Node& n) { return n.as<double>(); });
  } else {
    s.biases = {base.dataset.noniid_bias};
  }
  if (root["distances"]) {
    s.distances = read_list<DistanceKind>(root["distances"], "distances", [](const YAML::Node& n) {
      return parse_distance_kind(n.as<std::string>());
    });
  } else {
    s.distances = {base.aggregator.fedtruth.distance};
  }
  if (root["seeds"]) {
    s.seeds = read_list<std::uint64_t>(root["seeds"], "seeds", [](const YAML::Node& n) { return n.as<std::uint64_t>(); });
  } else {
    s.seeds = {base.master_seed};
  }
  s.validate();
  return s;
}

}  // namespace truthfl
