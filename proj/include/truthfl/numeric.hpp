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
#ifndef TRUTHFL_NUMERIC_HPP_
#define TRUTHFL_NUMERIC_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace truthfl {

/// Raised when vectors that must agree in length do not.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-empty vector of finite doubles. The common currency for model
/// updates, aggregates and model parameters once flattened.
class ParamVector {
 public:
  explicit ParamVector(Eigen::VectorXd values);
  ParamVector(std::initializer_list<double> values);

  template <typename Derived>
  static ParamVector from_expression(const Eigen::MatrixBase<Derived>& expr) {
    return ParamVector(Eigen::VectorXd(expr));
  }

  static ParamVector zeros(Eigen::Index size);

  const Eigen::VectorXd& values() const noexcept { return values_; }
  Eigen::Index size() const noexcept { return values_.size(); }
  double operator[](Eigen::Index i) const { return values_[i]; }

  friend bool operator==(const ParamVector& a, const ParamVector& b) {
    return a.values_.size() == b.values_.size() && a.values_ == b.values_;
  }

 private:
  Eigen::VectorXd values_;
};

struct Layer {
  std::string name;
  ParamVector params;
};

/// (name, length) pairs in declared order.
using LayerLayout = std::vector<std::pair<std::string, Eigen::Index>>;

/// Ordered, uniquely named layers. Each layer is a ParamVector, so empty
/// layers are rejected when the ParamVector is built.
class LayeredUpdate {
 public:
  explicit LayeredUpdate(std::vector<Layer> layers);

  const std::vector<Layer>& layers() const noexcept { return layers_; }
  std::size_t layer_count() const noexcept { return layers_.size(); }
  const Layer& layer(std::size_t i) const { return layers_.at(i); }
  const ParamVector& params(std::string_view name) const;
  Eigen::Index total_size() const noexcept;
  LayerLayout layout() const;

  friend bool operator==(const LayeredUpdate& a, const LayeredUpdate& b);

 private:
  std::vector<Layer> layers_;
};

enum class DistanceKind { Euclidean, Manhattan, Cosine, Angular, CustomHalfHalf };

std::string_view to_string(DistanceKind kind);
DistanceKind parse_distance_kind(std::string_view text);

ParamVector flatten(const LayeredUpdate& update);
LayeredUpdate unflatten(const ParamVector& flat, const LayerLayout& layout);
bool same_layout(const LayeredUpdate& a, const LayeredUpdate& b);

/// Element-wise sum of w_k * u_k, accumulated in ascending k.
ParamVector weighted_sum(std::span<const ParamVector> updates,
                         std::span<const double> weights);

/// Per-layer weighted sum over a list of identically shaped updates.
LayeredUpdate weighted_sum(std::span<const LayeredUpdate> updates,
                           std::span<const double> weights);

// Expression-level kernels. All loops run in ascending index order so the
// rounding of every reduction is fixed.

template <typename DerivedA, typename DerivedB>
double dot(const Eigen::MatrixBase<DerivedA>& u,
           const Eigen::MatrixBase<DerivedB>& v) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) acc += u.coeff(i) * v.coeff(i);
  return acc;
}

template <typename Derived>
double l2_norm(const Eigen::MatrixBase<Derived>& u) {
  return std::sqrt(dot(u, u));
}

template <typename DerivedA, typename DerivedB>
double euclidean_distance(const Eigen::MatrixBase<DerivedA>& u,
                          const Eigen::MatrixBase<DerivedB>& v) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const double diff = u.coeff(i) - v.coeff(i);
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

template <typename DerivedA, typename DerivedB>
double manhattan_distance(const Eigen::MatrixBase<DerivedA>& u,
                          const Eigen::MatrixBase<DerivedB>& v) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) acc += std::abs(u.coeff(i) - v.coeff(i));
  return acc;
}

/// Cosine similarity; 0 when either side is the zero vector.
template <typename DerivedA, typename DerivedB>
double cosine_similarity(const Eigen::MatrixBase<DerivedA>& u,
                         const Eigen::MatrixBase<DerivedB>& v) {
  const double nu = l2_norm(u);
  const double nv = l2_norm(v);
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return dot(u, v) / (nu * nv);
}

template <typename DerivedA, typename DerivedB>
double cosine_distance(const Eigen::MatrixBase<DerivedA>& u,
                       const Eigen::MatrixBase<DerivedB>& v) {
  return std::max(0.0, 1.0 - cosine_similarity(u, v));
}

template <typename DerivedA, typename DerivedB>
double angular_distance(const Eigen::MatrixBase<DerivedA>& u,
                        const Eigen::MatrixBase<DerivedB>& v) {
  const double s = std::clamp(cosine_similarity(u, v), -1.0, 1.0);
  return std::acos(s) / std::numbers::pi;
}

template <typename DerivedA, typename DerivedB>
double distance(DistanceKind kind, const Eigen::MatrixBase<DerivedA>& u,
                const Eigen::MatrixBase<DerivedB>& v) {
  if (u.size() != v.size()) {
    throw DimensionError("distance: length " + std::to_string(u.size()) +
                         " vs " + std::to_string(v.size()));
  }
  switch (kind) {
    case DistanceKind::Euclidean:
      return euclidean_distance(u, v);
    case DistanceKind::Manhattan:
      return manhattan_distance(u, v);
    case DistanceKind::Cosine:
      return cosine_distance(u, v);
    case DistanceKind::Angular:
      return angular_distance(u, v);
    case DistanceKind::CustomHalfHalf:
      // Unnormalized mix; the Euclidean term carries the scale of the data.
      return 0.5 * angular_distance(u, v) + 0.5 * euclidean_distance(u, v);
  }
  throw std::logic_error("distance: unknown kind");
}

inline double distance(DistanceKind kind, const ParamVector& u, const ParamVector& v) {
  return distance(kind, u.values(), v.values());
}

inline double l2_norm(const ParamVector& u) { return l2_norm(u.values()); }

/// Throws DimensionError unless every vector has the same length as the first.
void require_same_dimension(std::span<const ParamVector> updates, std::string_view what);

}  // namespace truthfl

#endif  // TRUTHFL_NUMERIC_HPP_
