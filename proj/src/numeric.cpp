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
#include "truthfl/numeric.hpp"

#include <set>

namespace truthfl {
namespace {

void require_finite(const Eigen::VectorXd& values) {
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw std::invalid_argument("ParamVector: non-finite entry at index " +
                                  std::to_string(i));
    }
  }
}

}  // namespace

ParamVector::ParamVector(Eigen::VectorXd values) : values_(std::move(values)) {
  if (values_.size() == 0) throw std::invalid_argument("ParamVector: empty");
  require_finite(values_);
}

ParamVector::ParamVector(std::initializer_list<double> values)
    : ParamVector(Eigen::Map<const Eigen::VectorXd>(values.begin(),
                                                    static_cast<Eigen::Index>(values.size()))) {}

ParamVector ParamVector::zeros(Eigen::Index size) {
  return ParamVector(Eigen::VectorXd::Zero(size));
}

LayeredUpdate::LayeredUpdate(std::vector<Layer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw std::invalid_argument("LayeredUpdate: no layers");
  std::set<std::string_view> seen;
  for (const auto& layer : layers_) {
    if (!seen.insert(layer.name).second) {
      throw std::invalid_argument("LayeredUpdate: duplicate layer name '" + layer.name + "'");
    }
  }
}

const ParamVector& LayeredUpdate::params(std::string_view name) const {
  for (const auto& layer : layers_) {
    if (layer.name == name) return layer.params;
  }
  throw std::out_of_range("LayeredUpdate: no layer named '" + std::string(name) + "'");
}

Eigen::Index LayeredUpdate::total_size() const noexcept {
  Eigen::Index total = 0;
  for (const auto& layer : layers_) total += layer.params.size();
  return total;
}

LayerLayout LayeredUpdate::layout() const {
  LayerLayout out;
  out.reserve(layers_.size());
  for (const auto& layer : layers_) out.emplace_back(layer.name, layer.params.size());
  return out;
}

bool operator==(const LayeredUpdate& a, const LayeredUpdate& b) {
  if (a.layers_.size() != b.layers_.size()) return false;
  for (std::size_t i = 0; i < a.layers_.size(); ++i) {
    if (a.layers_[i].name != b.layers_[i].name) return false;
    if (!(a.layers_[i].params == b.layers_[i].params)) return false;
  }
  return true;
}

std::string_view to_string(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::Euclidean: return "euclidean";
    case DistanceKind::Manhattan: return "manhattan";
    case DistanceKind::Cosine: return "cosine";
    case DistanceKind::Angular: return "angular";
    case DistanceKind::CustomHalfHalf: return "custom";
  }
  return "unknown";
}

DistanceKind parse_distance_kind(std::string_view text) {
  if (text == "euclidean") return DistanceKind::Euclidean;
  if (text == "manhattan") return DistanceKind::Manhattan;
  if (text == "cosine") return DistanceKind::Cosine;
  if (text == "angular") return DistanceKind::Angular;
  if (text == "custom" || text == "custom_half_half") return DistanceKind::CustomHalfHalf;
  throw std::invalid_argument("unknown distance kind '" + std::string(text) + "'");
}

ParamVector flatten(const LayeredUpdate& update) {
  Eigen::VectorXd flat(update.total_size());
  Eigen::Index offset = 0;
  for (const auto& layer : update.layers()) {
    flat.segment(offset, layer.params.size()) = layer.params.values();
    offset += layer.params.size();
  }
  return ParamVector(std::move(flat));
}

LayeredUpdate unflatten(const ParamVector& flat, const LayerLayout& layout) {
  Eigen::Index total = 0;
  for (const auto& [name, size] : layout) total += size;
  if (total != flat.size()) {
    throw DimensionError("unflatten: layout covers " + std::to_string(total) +
                         " entries, vector has " + std::to_string(flat.size()));
  }
  std::vector<Layer> layers;
  layers.reserve(layout.size());
  Eigen::Index offset = 0;
  for (const auto& [name, size] : layout) {
    layers.push_back({name, ParamVector(flat.values().segment(offset, size))});
    offset += size;
  }
  return LayeredUpdate(std::move(layers));
}

bool same_layout(const LayeredUpdate& a, const LayeredUpdate& b) {
  return a.layout() == b.layout();
}

void require_same_dimension(std::span<const ParamVector> updates, std::string_view what) {
  if (updates.empty()) throw std::invalid_argument(std::string(what) + ": empty input");
  const auto n = updates.front().size();
  for (const auto& u : updates) {
    if (u.size() != n) {
      throw DimensionError(std::string(what) + ": length " + std::to_string(u.size()) +
                           " vs " + std::to_string(n));
    }
  }
}

ParamVector weighted_sum(std::span<const ParamVector> updates,
                         std::span<const double> weights) {
  require_same_dimension(updates, "weighted_sum");
  if (weights.size() != updates.size()) {
    throw DimensionError("weighted_sum: " + std::to_string(updates.size()) + " updates, " +
                         std::to_string(weights.size()) + " weights");
  }
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(updates.front().size());
  for (std::size_t k = 0; k < updates.size(); ++k) {
    if (!std::isfinite(weights[k])) throw std::invalid_argument("weighted_sum: non-finite weight");
    acc.noalias() += weights[k] * updates[k].values();
  }
  return ParamVector(std::move(acc));
}

LayeredUpdate weighted_sum(std::span<const LayeredUpdate> updates,
                           std::span<const double> weights) {
  if (updates.empty()) throw std::invalid_argument("weighted_sum: empty input");
  const auto& first = updates.front();
  for (const auto& u : updates) {
    if (!same_layout(u, first)) throw DimensionError("weighted_sum: layer structure mismatch");
  }
  std::vector<Layer> layers;
  for (std::size_t l = 0; l < first.layer_count(); ++l) {
    std::vector<ParamVector> column;
    column.reserve(updates.size());
    for (const auto& u : updates) column.push_back(u.layer(l).params);
    layers.push_back({first.layer(l).name, weighted_sum(column, weights)});
  }
  return LayeredUpdate(std::move(layers));
}

}  // namespace truthfl
