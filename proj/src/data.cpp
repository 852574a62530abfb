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
#include "truthfl/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <string>

namespace truthfl {

Dataset::Dataset(Eigen::MatrixXd features, std::vector<int> labels, int n_classes)
    : features_(std::move(features)), labels_(std::move(labels)), n_classes_(n_classes) {
  if (n_classes_ < 2) throw std::invalid_argument("Dataset: need at least 2 classes");
  if (static_cast<Eigen::Index>(labels_.size()) != features_.rows()) {
    throw std::invalid_argument("Dataset: " + std::to_string(features_.rows()) + " rows but " +
                                std::to_string(labels_.size()) + " labels");
  }
  for (int y : labels_) {
    if (y < 0 || y >= n_classes_) {
      throw std::invalid_argument("Dataset: label " + std::to_string(y) + " out of range");
    }
  }
}

Dataset Dataset::subset(std::span<const Eigen::Index> rows) const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), features_.cols());
  std::vector<int> y;
  y.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = features_.row(rows[i]);
    y.push_back(labels_[static_cast<std::size_t>(rows[i])]);
  }
  return Dataset(std::move(x), std::move(y), n_classes_);
}

std::vector<std::vector<Eigen::Index>> Dataset::rows_by_class() const {
  std::vector<std::vector<Eigen::Index>> out(static_cast<std::size_t>(n_classes_));
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    out[static_cast<std::size_t>(labels_[i])].push_back(static_cast<Eigen::Index>(i));
  }
  return out;
}

Dataset concatenate(const Dataset& a, const Dataset& b) {
  if (a.n_features() != b.n_features() && !a.empty() && !b.empty()) {
    throw std::invalid_argument("concatenate: feature count mismatch");
  }
  Eigen::MatrixXd x(a.size() + b.size(), std::max(a.n_features(), b.n_features()));
  if (!a.empty()) x.topRows(a.size()) = a.features();
  if (!b.empty()) x.bottomRows(b.size()) = b.features();
  std::vector<int> y = a.labels();
  y.insert(y.end(), b.labels().begin(), b.labels().end());
  return Dataset(std::move(x), std::move(y), std::max(a.n_classes(), b.n_classes()));
}

Dataset synth_blobs(const SynthSpec& spec, RandomStream& rng) {
  if (spec.n_samples <= 0 || spec.n_features <= 0 || spec.n_classes < 2 || !(spec.spread > 0.0)) {
    throw std::invalid_argument("synth_blobs: sizes must be positive, classes >= 2, spread > 0");
  }
  if (spec.quiet_features < 0 || spec.quiet_features >= spec.n_features) {
    throw std::invalid_argument("synth_blobs: quiet_features must leave at least one active feature");
  }
  const int active = spec.n_features - spec.quiet_features;
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(spec.n_classes, spec.n_features);
  for (int c = 0; c < spec.n_classes; ++c) {
    for (int j = 0; j < active; ++j) {
      means(c, j) = 0.5 + (j % spec.n_classes == c ? 0.5 : -0.5) * spec.separation;
    }
  }
  std::normal_distribution<double> normal(0.0, spec.spread);
  Eigen::MatrixXd x(spec.n_samples, spec.n_features);
  std::vector<int> y(static_cast<std::size_t>(spec.n_samples));
  for (int i = 0; i < spec.n_samples; ++i) {
    const int c = i % spec.n_classes;
    y[static_cast<std::size_t>(i)] = c;
    for (int j = 0; j < spec.n_features; ++j) {
      x(i, j) = std::clamp(means(c, j) + normal(rng), 0.0, 1.0);
    }
  }
  return Dataset(std::move(x), std::move(y), spec.n_classes);
}

namespace {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset,
                        const std::filesystem::path& path) {
  if (offset + 4 > bytes.size()) throw IdxFormatError(path.string() + ": truncated header");
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::ofstream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                         static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(bytes, 4);
}

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

}  // namespace

Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path) {
  const auto images = read_bytes(images_path);
  const auto labels = read_bytes(labels_path);

  const auto image_magic = read_be32(images, 0, images_path);
  if (image_magic != kImageMagic) {
    throw IdxFormatError(images_path.string() + ": bad image magic");
  }
  const auto label_magic = read_be32(labels, 0, labels_path);
  if (label_magic != kLabelMagic) {
    throw IdxFormatError(labels_path.string() + ": bad label magic");
  }

  const std::uint64_t count = read_be32(images, 4, images_path);
  const std::uint64_t rows = read_be32(images, 8, images_path);
  const std::uint64_t cols = read_be32(images, 12, images_path);
  const std::uint64_t label_count = read_be32(labels, 4, labels_path);
  if (count != label_count) {
    throw IdxFormatError("IDX count mismatch: " + std::to_string(count) + " images vs " +
                         std::to_string(label_count) + " labels");
  }
  const std::uint64_t pixels = rows * cols;
  if (images.size() < 16 + count * pixels) throw IdxFormatError(images_path.string() + ": truncated");
  if (labels.size() < 8 + count) throw IdxFormatError(labels_path.string() + ": truncated");

  Eigen::MatrixXd x(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(pixels));
  std::vector<int> y(count);
  int max_label = 1;
  for (std::uint64_t i = 0; i < count; ++i) {
    for (std::uint64_t p = 0; p < pixels; ++p) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) =
          images[16 + i * pixels + p] / 255.0;
    }
    y[i] = labels[8 + i];
    max_label = std::max(max_label, y[i]);
  }
  return Dataset(std::move(x), std::move(y), max_label + 1);
}

void write_idx(const Dataset& ds, const std::filesystem::path& images_path,
               const std::filesystem::path& labels_path, int rows, int cols) {
  if (static_cast<Eigen::Index>(rows) * cols != ds.n_features()) {
    throw std::invalid_argument("write_idx: rows * cols must equal the feature count");
  }
  std::ofstream images(images_path, std::ios::binary);
  std::ofstream labels(labels_path, std::ios::binary);
  if (!images || !labels) throw std::runtime_error("write_idx: cannot open output files");
  write_be32(images, kImageMagic);
  write_be32(images, static_cast<std::uint32_t>(ds.size()));
  write_be32(images, static_cast<std::uint32_t>(rows));
  write_be32(images, static_cast<std::uint32_t>(cols));
  write_be32(labels, kLabelMagic);
  write_be32(labels, static_cast<std::uint32_t>(ds.size()));
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    for (Eigen::Index j = 0; j < ds.n_features(); ++j) {
      const double v = std::clamp(ds.features()(i, j), 0.0, 1.0);
      images.put(static_cast<char>(static_cast<std::uint8_t>(std::lround(v * 255.0))));
    }
    labels.put(static_cast<char>(static_cast<std::uint8_t>(ds.labels()[static_cast<std::size_t>(i)])));
  }
}

void PartitionPlan::validate() const {
  if (n_clients <= 0) throw std::invalid_argument("partition: n_clients must be positive");
  if (samples_per_client <= 0) throw std::invalid_argument("partition: samples_per_client must be positive");
  if (!(bias >= 0.0 && bias <= 1.0)) throw std::invalid_argument("partition: bias must be in [0, 1]");
}

std::vector<Dataset> partition_label_skew(const Dataset& ds, const PartitionPlan& plan,
                                          RandomStream& rng) {
  plan.validate();
  const int n_classes = ds.n_classes();
  auto pools = ds.rows_by_class();
  for (int c = 0; c < n_classes; ++c) {
    if (pools[static_cast<std::size_t>(c)].empty()) {
      throw std::invalid_argument("partition: class " + std::to_string(c) + " has no samples");
    }
    std::shuffle(pools[static_cast<std::size_t>(c)].begin(), pools[static_cast<std::size_t>(c)].end(), rng);
  }
  std::vector<std::size_t> cursor(static_cast<std::size_t>(n_classes), 0);
  auto draw_from = [&](int c) {
    auto& pool = pools[static_cast<std::size_t>(c)];
    auto& pos = cursor[static_cast<std::size_t>(c)];
    if (pos == pool.size()) {
      std::shuffle(pool.begin(), pool.end(), rng);
      pos = 0;
    }
    return pool[pos++];
  };

  std::bernoulli_distribution from_primary(plan.bias);
  std::uniform_int_distribution<int> other(0, n_classes - 2);
  std::vector<Dataset> clients;
  clients.reserve(static_cast<std::size_t>(plan.n_clients));
  for (int k = 0; k < plan.n_clients; ++k) {
    const int primary = plan.primary_label(k, n_classes);
    std::vector<Eigen::Index> rows;
    rows.reserve(static_cast<std::size_t>(plan.samples_per_client));
    for (int s = 0; s < plan.samples_per_client; ++s) {
      int c = primary;
      if (!from_primary(rng)) {
        c = other(rng);
        if (c >= primary) ++c;
      }
      rows.push_back(draw_from(c));
    }
    clients.push_back(ds.subset(rows));
  }
  return clients;
}

void TriggerSpec::validate(Eigen::Index n_features, int n_classes) const {
  if (feature_indices.empty()) throw std::invalid_argument("trigger: no feature indices");
  std::set<int> seen;
  for (int j : feature_indices) {
    if (j < 0 || j >= n_features) {
      throw std::invalid_argument("trigger: feature index " + std::to_string(j) + " out of range");
    }
    if (!seen.insert(j).second) throw std::invalid_argument("trigger: duplicate feature index");
  }
  if (target_label < 0 || target_label >= n_classes) {
    throw std::invalid_argument("trigger: target label out of range");
  }
}

PoisonedDataset apply_trigger(const Dataset& ds, const TriggerSpec& trigger, double fraction,
                              RandomStream& rng) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw std::invalid_argument("apply_trigger: fraction must be in [0, 1]");
  trigger.validate(ds.n_features(), ds.n_classes());
  const auto n = ds.size();
  const auto count = static_cast<Eigen::Index>(std::llround(fraction * static_cast<double>(n)));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Eigen::Index> chosen(order.begin(), order.begin() + count);
  std::sort(chosen.begin(), chosen.end());

  Eigen::MatrixXd x = ds.features();
  std::vector<int> y = ds.labels();
  for (auto row : chosen) {
    for (int j : trigger.feature_indices) x(row, j) = trigger.trigger_value;
    y[static_cast<std::size_t>(row)] = trigger.target_label;
  }
  return {Dataset(std::move(x), std::move(y), ds.n_classes()), std::move(chosen)};
}

Dataset backdoor_test_set(const Dataset& ds, const TriggerSpec& trigger) {
  trigger.validate(ds.n_features(), ds.n_classes());
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    if (ds.labels()[static_cast<std::size_t>(i)] != trigger.target_label) rows.push_back(i);
  }
  Dataset base = ds.subset(rows);
  Eigen::MatrixXd x = base.features();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (int j : trigger.feature_indices) x(i, j) = trigger.trigger_value;
  }
  return Dataset(std::move(x), std::vector<int>(rows.size(), trigger.target_label), ds.n_classes());
}

std::vector<TriggerSpec> dba_shards(const TriggerSpec& trigger, int n_adversaries) {
  if (n_adversaries < 1) throw std::invalid_argument("dba_shards: need at least one adversary");
  const int total = static_cast<int>(trigger.feature_indices.size());
  if (total < n_adversaries) {
    throw std::invalid_argument("dba_shards: " + std::to_string(total) + " trigger indices for " +
                                std::to_string(n_adversaries) + " adversaries");
  }
  std::vector<TriggerSpec> shards;
  const int base = total / n_adversaries;
  const int extra = total % n_adversaries;
  int offset = 0;
  for (int i = 0; i < n_adversaries; ++i) {
    const int size = base + (i < extra ? 1 : 0);
    TriggerSpec shard{{trigger.feature_indices.begin() + offset,
                       trigger.feature_indices.begin() + offset + size},
                      trigger.trigger_value, trigger.target_label};
    shards.push_back(std::move(shard));
    offset += size;
  }
  return shards;
}

Dataset make_edge_pool(const Dataset& ds, int source_label, int target_label) {
  if (source_label < 0 || source_label >= ds.n_classes() || target_label < 0 ||
      target_label >= ds.n_classes()) {
    throw std::invalid_argument("make_edge_pool: label out of range");
  }
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    if (ds.labels()[static_cast<std::size_t>(i)] == source_label) rows.push_back(i);
  }
  Dataset picked = ds.subset(rows);
  Eigen::MatrixXd x = (1.0 - picked.features().array()).matrix();
  return Dataset(std::move(x), std::vector<int>(rows.size(), target_label), ds.n_classes());
}

Dataset edge_case_augment(const Dataset& client_ds, const Dataset& edge_ds, double ratio,
                          RandomStream& rng) {
  if (!(ratio >= 0.0)) throw std::invalid_argument("edge_case_augment: ratio must be >= 0");
  if (ratio == 0.0) return client_ds;
  if (edge_ds.empty()) throw std::invalid_argument("edge_case_augment: empty edge set with positive ratio");
  const std::set<int> targeted(edge_ds.labels().begin(), edge_ds.labels().end());
  Eigen::Index matching = 0;
  for (int y : client_ds.labels()) matching += targeted.count(y) ? 1 : 0;
  const auto count = static_cast<Eigen::Index>(std::floor(ratio * static_cast<double>(matching)));
  if (count == 0) return client_ds;

  std::vector<Eigen::Index> picks;
  picks.reserve(static_cast<std::size_t>(count));
  if (count <= edge_ds.size()) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(edge_ds.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    picks.assign(order.begin(), order.begin() + count);
  } else {
    std::uniform_int_distribution<Eigen::Index> any(0, edge_ds.size() - 1);
    for (Eigen::Index i = 0; i < count; ++i) picks.push_back(any(rng));
  }
  return concatenate(client_ds, edge_ds.subset(picks));
}

}  // namespace truthfl
