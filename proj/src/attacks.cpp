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
#include "truthfl/attacks.hpp"

#include <random>

namespace truthfl {

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::None: return "none";
    case AttackKind::ModelBoost: return "model_boost";
    case AttackKind::GaussianNoise: return "gaussian_noise";
    case AttackKind::Backdoor: return "backdoor";
  }
  return "unknown";
}

AttackKind parse_attack_kind(std::string_view text) {
  for (auto kind : {AttackKind::None, AttackKind::ModelBoost, AttackKind::GaussianNoise,
                    AttackKind::Backdoor}) {
    if (text == to_string(kind)) return kind;
  }
  throw std::invalid_argument("unknown attack kind '" + std::string(text) + "'");
}

std::string_view to_string(AttackStrategy strategy) {
  switch (strategy) {
    case AttackStrategy::Base: return "base";
    case AttackStrategy::WithBoosting: return "with_boosting";
    case AttackStrategy::ConstrainAndScale: return "constrain_and_scale";
  }
  return "unknown";
}

AttackStrategy parse_attack_strategy(std::string_view text) {
  for (auto s : {AttackStrategy::Base, AttackStrategy::WithBoosting,
                 AttackStrategy::ConstrainAndScale}) {
    if (text == to_string(s)) return s;
  }
  throw std::invalid_argument("unknown attack strategy '" + std::string(text) + "'");
}

std::string_view to_string(BackdoorKind kind) {
  return kind == BackdoorKind::Trigger ? "trigger" : "edge_case";
}

BackdoorKind parse_backdoor_kind(std::string_view text) {
  if (text == "trigger") return BackdoorKind::Trigger;
  if (text == "edge_case") return BackdoorKind::EdgeCase;
  throw std::invalid_argument("unknown backdoor kind '" + std::string(text) + "'");
}

void AttackSpec::validate() const {
  if (!(sigma >= 0.0)) throw std::invalid_argument("attack: sigma must be >= 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("attack: alpha must be in [0, 1]");
  if (boosting_factor && !(*boosting_factor > 0.0)) {
    throw std::invalid_argument("attack: boosting factor must be > 0");
  }
  if (pgd_radius && !(*pgd_radius >= 0.0)) throw std::invalid_argument("attack: pgd radius must be >= 0");
  if (kind == AttackKind::GaussianNoise && strategy == AttackStrategy::ConstrainAndScale) {
    // There is no poisoned dataset to blend against.
    throw std::invalid_argument("attack: constrain_and_scale needs a backdoor attack");
  }
  if (kind == AttackKind::Backdoor) {
    const auto& b = backdoor;
    if (b.kind == BackdoorKind::Trigger && b.trigger_features.empty()) {
      throw std::invalid_argument("attack: trigger needs at least one feature index");
    }
    if (!(b.poison_fraction >= 0.0 && b.poison_fraction <= 1.0)) {
      throw std::invalid_argument("attack: poison_fraction must be in [0, 1]");
    }
    if (!(b.edge_ratio >= 0.0)) throw std::invalid_argument("attack: edge_ratio must be >= 0");
  }
}

double AttackSpec::round_boost(int clients_in_round, int adversaries_in_round) const {
  const bool boosts = kind == AttackKind::ModelBoost || strategy != AttackStrategy::Base;
  if (!boosts || adversaries_in_round == 0) return 1.0;
  return boosting_factor ? *boosting_factor : truthfl::boosting_factor(clients_in_round, adversaries_in_round);
}

double boosting_factor(int clients_in_round, int adversaries_in_round) {
  if (adversaries_in_round <= 0 || adversaries_in_round > clients_in_round) {
    throw std::invalid_argument("boosting_factor: need 0 < C_adv <= C_t");
  }
  return static_cast<double>(clients_in_round) / static_cast<double>(adversaries_in_round);
}

ParamVector boost_update(const ParamVector& delta, double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("boost_update: factor must be > 0");
  return ParamVector(factor * delta.values());
}

ParamVector gaussian_noise(const ParamVector& model, double sigma, RandomStream& rng) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("gaussian_noise: sigma must be >= 0");
  if (sigma == 0.0) return model;
  std::normal_distribution<double> normal(0.0, sigma);
  Eigen::VectorXd out = model.values();
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += normal(rng);
  return ParamVector(std::move(out));
}

ParamVector constrain_and_scale(const ParamVector& benign, const ParamVector& poisoned, double alpha,
                                double factor) {
  if (benign.size() != poisoned.size()) throw DimensionError("constrain_and_scale: length mismatch");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("constrain_and_scale: alpha must be in [0, 1]");
  if (!(factor > 0.0)) throw std::invalid_argument("constrain_and_scale: factor must be > 0");
  if (alpha == 1.0 && factor == 1.0) return benign;
  if (alpha == 0.0 && factor == 1.0) return poisoned;
  return ParamVector(factor * (alpha * benign.values() + (1.0 - alpha) * poisoned.values()));
}

ParamVector pgd_project(const ParamVector& local, const ParamVector& global_ref, double radius) {
  if (local.size() != global_ref.size()) throw DimensionError("pgd_project: length mismatch");
  if (!(radius >= 0.0)) throw std::invalid_argument("pgd_project: radius must be >= 0");
  const Eigen::VectorXd offset = local.values() - global_ref.values();
  const double norm = l2_norm(offset);
  if (norm <= radius) return local;
  return ParamVector(global_ref.values() + (radius / norm) * offset);
}

}  // namespace truthfl
