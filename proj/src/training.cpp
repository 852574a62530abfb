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
#include "truthfl/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "truthfl/rng.hpp"

namespace truthfl {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kProbabilityFloor = 1e-15;

// Working form of the parameters: one (W, b) pair per dense layer.
struct Dense {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

std::vector<std::pair<int, int>> layer_shapes(const ModelSpec& spec) {
  if (spec.kind == ModelKind::LogReg) return {{spec.n_classes, spec.n_features}};
  return {{spec.hidden_units, spec.n_features}, {spec.n_classes, spec.hidden_units}};
}

std::pair<std::string, std::string> layer_names(const ModelSpec& spec, std::size_t i) {
  if (spec.kind == ModelKind::LogReg) return {"W", "b"};
  const auto suffix = std::to_string(i + 1);
  return {"W" + suffix, "b" + suffix};
}

Dense unpack(const ModelParams& params) {
  const auto shapes = layer_shapes(params.spec);
  if (params.layers.layer_count() != 2 * shapes.size()) {
    throw DimensionError("model: layer count does not match spec");
  }
  Dense d;
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    const auto [rows, cols] = shapes[i];
    const auto& w = params.layers.layer(2 * i).params.values();
    const auto& b = params.layers.layer(2 * i + 1).params.values();
    if (w.size() != static_cast<Eigen::Index>(rows) * cols || b.size() != rows) {
      throw DimensionError("model: layer shape does not match spec");
    }
    d.weights.emplace_back(Eigen::Map<const RowMajorMatrix>(w.data(), rows, cols));
    d.biases.push_back(b);
  }
  return d;
}

LayeredUpdate pack(const ModelSpec& spec, const Dense& d) {
  std::vector<Layer> layers;
  for (std::size_t i = 0; i < d.weights.size(); ++i) {
    const auto [wname, bname] = layer_names(spec, i);
    const RowMajorMatrix w = d.weights[i];
    layers.push_back({wname, ParamVector(Eigen::Map<const Eigen::VectorXd>(w.data(), w.size()))});
    layers.push_back({bname, ParamVector(d.biases[i])});
  }
  return LayeredUpdate(std::move(layers));
}

void softmax_rows(Eigen::MatrixXd& logits) {
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    auto row = logits.row(i);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
}

struct Forward {
  std::vector<Eigen::MatrixXd> activations;  // input of each dense layer
  std::vector<Eigen::MatrixXd> pre;          // pre-activation of each hidden layer
  Eigen::MatrixXd probs;
};

template <typename Rows>
Forward forward(const Dense& d, const Rows& x) {
  Forward f;
  Eigen::MatrixXd h = x;
  for (std::size_t i = 0; i < d.weights.size(); ++i) {
    Eigen::MatrixXd z = h * d.weights[i].transpose();
    z.rowwise() += d.biases[i].transpose();
    f.activations.push_back(std::move(h));
    if (i + 1 < d.weights.size()) {
      f.pre.push_back(z);
      h = z.cwiseMax(0.0);
    } else {
      softmax_rows(z);
      f.probs = std::move(z);
    }
  }
  return f;
}

double cross_entropy(const Eigen::MatrixXd& probs, const std::vector<int>& labels,
                     std::span<const Eigen::Index> rows) {
  double acc = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double p = probs(static_cast<Eigen::Index>(i), labels[static_cast<std::size_t>(rows[i])]);
    acc += -std::log(std::max(p, kProbabilityFloor));
  }
  return acc / static_cast<double>(rows.size());
}

// Gradient of the mean loss over `rows`, written into `grad` (same shapes as `d`).
double backward(const Dense& d, const Dataset& ds, std::span<const Eigen::Index> rows,
                double weight_decay, Dense& grad) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), ds.n_features());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = ds.features().row(rows[i]);
  }
  const Forward f = forward(d, x);
  double loss = cross_entropy(f.probs, ds.labels(), rows);

  const double m = static_cast<double>(rows.size());
  Eigen::MatrixXd delta = f.probs;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    delta(static_cast<Eigen::Index>(i), ds.labels()[static_cast<std::size_t>(rows[i])]) -= 1.0;
  }
  delta /= m;

  grad.weights.resize(d.weights.size());
  grad.biases.resize(d.biases.size());
  for (std::size_t li = d.weights.size(); li-- > 0;) {
    grad.weights[li] = delta.transpose() * f.activations[li];
    grad.biases[li] = delta.colwise().sum().transpose();
    if (li > 0) {
      Eigen::MatrixXd back = delta * d.weights[li];
      delta = back.cwiseProduct((f.pre[li - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  if (weight_decay > 0.0) {
    for (std::size_t li = 0; li < d.weights.size(); ++li) {
      grad.weights[li] += weight_decay * d.weights[li];
      loss += 0.5 * weight_decay * d.weights[li].squaredNorm();
    }
  }
  return loss;
}

std::vector<Eigen::Index> all_rows(const Dataset& ds) {
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(ds.size()));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  return rows;
}

void require_compatible(const ModelParams& params, const Dataset& ds, const char* what) {
  if (ds.empty()) throw std::invalid_argument(std::string(what) + ": empty dataset");
  if (ds.n_features() != params.spec.n_features) {
    throw DimensionError(std::string(what) + ": dataset has " + std::to_string(ds.n_features()) +
                         " features, model expects " + std::to_string(params.spec.n_features));
  }
  if (ds.n_classes() > params.spec.n_classes) {
    throw DimensionError(std::string(what) + ": dataset has more classes than the model");
  }
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::LogReg ? "logreg" : "mlp";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "logreg") return ModelKind::LogReg;
  if (text == "mlp") return ModelKind::Mlp;
  throw std::invalid_argument("unknown model kind '" + std::string(text) + "'");
}

void ModelSpec::validate() const {
  if (n_features <= 0 || n_classes < 2) {
    throw std::invalid_argument("model: n_features must be positive and n_classes >= 2");
  }
  if (kind == ModelKind::Mlp && hidden_units <= 0) {
    throw std::invalid_argument("model: hidden_units must be positive");
  }
}

void TrainConfig::validate() const {
  if (local_epochs <= 0) throw std::invalid_argument("train: local_epochs must be positive");
  if (batch_size <= 0) throw std::invalid_argument("train: batch_size must be positive");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("train: learning_rate must be finite and >= 0");
  }
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw std::invalid_argument("train: weight_decay must be finite and >= 0");
  }
}

ModelParams init_model(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  RandomStream rng(seed);
  Dense d;
  for (const auto& [rows, cols] : layer_shapes(spec)) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> uniform(-limit, limit);
    RowMajorMatrix w(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = uniform(rng);
    }
    d.weights.emplace_back(w);
    d.biases.push_back(Eigen::VectorXd::Zero(rows));
  }
  return {spec, pack(spec, d)};
}

Eigen::MatrixXd predict_proba(const ModelParams& params, const Eigen::MatrixXd& features) {
  if (features.cols() != params.spec.n_features) {
    throw DimensionError("predict_proba: feature count mismatch");
  }
  return forward(unpack(params), features).probs;
}

std::pair<double, LayeredUpdate> loss_and_gradient(const ModelParams& params, const Dataset& ds,
                                                   double weight_decay) {
  require_compatible(params, ds, "loss_and_gradient");
  const Dense d = unpack(params);
  Dense grad;
  const auto rows = all_rows(ds);
  const double loss = backward(d, ds, rows, weight_decay, grad);
  return {loss, pack(params.spec, grad)};
}

ModelParams local_train(const ModelParams& params, const Dataset& ds, const TrainConfig& cfg) {
  cfg.validate();
  require_compatible(params, ds, "local_train");
  Dense d = unpack(params);
  RandomStream rng(cfg.seed);
  auto order = all_rows(ds);
  Dense grad;
  for (int epoch = 0; epoch < cfg.local_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t len = std::min(static_cast<std::size_t>(cfg.batch_size), order.size() - start);
      backward(d, ds, std::span<const Eigen::Index>(order.data() + start, len), cfg.weight_decay, grad);
      for (std::size_t li = 0; li < d.weights.size(); ++li) {
        d.weights[li] -= cfg.learning_rate * grad.weights[li];
        d.biases[li] -= cfg.learning_rate * grad.biases[li];
      }
    }
  }
  return {params.spec, pack(params.spec, d)};
}

Evaluation evaluate(const ModelParams& params, const Dataset& ds) {
  require_compatible(params, ds, "evaluate");
  const Eigen::MatrixXd probs = predict_proba(params, ds.features());
  const auto rows = all_rows(ds);
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    Eigen::Index best = 0;
    probs.row(i).maxCoeff(&best);
    if (best == ds.labels()[static_cast<std::size_t>(i)]) ++correct;
  }
  return {static_cast<double>(correct) / static_cast<double>(ds.size()),
          cross_entropy(probs, ds.labels(), rows)};
}

LayeredUpdate extract_update(const ModelParams& global, const ModelParams& local) {
  if (!same_layout(global.layers, local.layers)) {
    throw DimensionError("extract_update: models have different layouts");
  }
  std::vector<Layer> out;
  for (std::size_t i = 0; i < global.layers.layer_count(); ++i) {
    const auto& g = global.layers.layer(i);
    out.push_back({g.name, ParamVector::from_expression(g.params.values() -
                                                        local.layers.layer(i).params.values())});
  }
  return LayeredUpdate(std::move(out));
}

}  // namespace truthfl
