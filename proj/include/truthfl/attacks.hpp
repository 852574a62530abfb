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
#ifndef TRUTHFL_ATTACKS_HPP_
#define TRUTHFL_ATTACKS_HPP_

#include <optional>
#include <string_view>
#include <vector>

#include "truthfl/numeric.hpp"
#include "truthfl/rng.hpp"

namespace truthfl {

enum class AttackKind { None, ModelBoost, GaussianNoise, Backdoor };
enum class AttackStrategy { Base, WithBoosting, ConstrainAndScale };
enum class BackdoorKind { Trigger, EdgeCase };

std::string_view to_string(AttackKind kind);
AttackKind parse_attack_kind(std::string_view text);
std::string_view to_string(AttackStrategy strategy);
AttackStrategy parse_attack_strategy(std::string_view text);
std::string_view to_string(BackdoorKind kind);
BackdoorKind parse_backdoor_kind(std::string_view text);

struct BackdoorSpec {
  BackdoorKind kind = BackdoorKind::Trigger;
  std::vector<int> trigger_features;
  double trigger_value = 1.0;
  int target_label = 0;
  double poison_fraction = 0.5;  // share of an adversary's rows that get the trigger
  bool distributed = true;       // DBA: adversary i plants only shard i
  double edge_ratio = 0.2;
  int edge_source_label = 1;     // class whose shifted samples form the edge pool
};

struct AttackSpec {
  AttackKind kind = AttackKind::None;
  AttackStrategy strategy = AttackStrategy::Base;
  std::optional<double> boosting_factor;  // nullopt: C_t / C_adv,t
  double sigma = 1.0;
  double alpha = 0.5;
  std::optional<double> pgd_radius;  // nullopt: projection off
  BackdoorSpec backdoor;

  void validate() const;
  /// Factor applied to adversarial updates this round, or 1 when the
  /// configuration does not boost.
  double round_boost(int clients_in_round, int adversaries_in_round) const;
};

/// C_t / C_adv,t.
double boosting_factor(int clients_in_round, int adversaries_in_round);

ParamVector boost_update(const ParamVector& delta, double factor);

/// model + z with z_i ~ N(0, sigma^2) drawn from `rng`.
ParamVector gaussian_noise(const ParamVector& model, double sigma, RandomStream& rng);

/// factor * (alpha * benign + (1 - alpha) * poisoned).
ParamVector constrain_and_scale(const ParamVector& benign, const ParamVector& poisoned, double alpha,
                                double factor);

/// Projection of `local` onto the L2 ball of `radius` around `global_ref`.
ParamVector pgd_project(const ParamVector& local, const ParamVector& global_ref, double radius);

}  // namespace truthfl

#endif  // TRUTHFL_ATTACKS_HPP_
