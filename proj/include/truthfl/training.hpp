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
#ifndef TRUTHFL_TRAINING_HPP_
#define TRUTHFL_TRAINING_HPP_

#include <cstdint>
#include <string_view>
#include <utility>

#include "truthfl/data.hpp"
#include "truthfl/numeric.hpp"

namespace truthfl {

enum class ModelKind { LogReg, Mlp };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

struct ModelSpec {
  ModelKind kind = ModelKind::LogReg;
  int n_features = 20;
  int n_classes = 2;
  int hidden_units = 16;  // Mlp only, ReLU activation

  void validate() const;
};

/// Model weights in layer form. Weight matrices are stored row-major as
/// (out x in): LogReg has layers {W, b}, Mlp has {W1, b1, W2, b2}.
struct ModelParams {
  ModelSpec spec;
  LayeredUpdate layers;
};

struct TrainConfig {
  int local_epochs = 1;
  int batch_size = 20;
  double learning_rate = 0.1;
  /// L2 penalty on weight matrices (biases excluded).
  double weight_decay = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Glorot-uniform weights, zero biases.
ModelParams init_model(const ModelSpec& spec, std::uint64_t seed);

/// Row-wise class probabilities (max-subtracted softmax).
Eigen::MatrixXd predict_proba(const ModelParams& params, const Eigen::MatrixXd& features);

/// Mean cross-entropy plus 0.5 * weight_decay * sum of squared weights, and
/// its gradient in the same layer layout as the parameters.
std::pair<double, LayeredUpdate> loss_and_gradient(const ModelParams& params, const Dataset& ds,
                                                   double weight_decay = 0.0);

ModelParams local_train(const ModelParams& params, const Dataset& ds, const TrainConfig& cfg);

struct Evaluation {
  double accuracy = 0.0;
  double mean_loss = 0.0;
};

Evaluation evaluate(const ModelParams& params, const Dataset& ds);

/// global - local, layer by layer.
LayeredUpdate extract_update(const ModelParams& global, const ModelParams& local);

}  // namespace truthfl

#endif  // TRUTHFL_TRAINING_HPP_
