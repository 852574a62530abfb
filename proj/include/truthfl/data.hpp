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
#ifndef TRUTHFL_DATA_HPP_
#define TRUTHFL_DATA_HPP_

#include <Eigen/Dense>

#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "truthfl/rng.hpp"

namespace truthfl {

/// Row-major sample matrix with aligned class labels.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd features, std::vector<int> labels, int n_classes);

  const Eigen::MatrixXd& features() const noexcept { return features_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  int n_classes() const noexcept { return n_classes_; }
  Eigen::Index size() const noexcept { return features_.rows(); }
  Eigen::Index n_features() const noexcept { return features_.cols(); }
  bool empty() const noexcept { return features_.rows() == 0; }

  Dataset subset(std::span<const Eigen::Index> rows) const;
  /// Row indices per class, ascending.
  std::vector<std::vector<Eigen::Index>> rows_by_class() const;

 private:
  Eigen::MatrixXd features_;
  std::vector<int> labels_;
  int n_classes_;
};

/// Rows of `a` followed by rows of `b`.
Dataset concatenate(const Dataset& a, const Dataset& b);

struct SynthSpec {
  int n_samples = 1000;
  int n_features = 20;
  int n_classes = 2;
  double spread = 0.3;
  /// Gap between a class's own features (mean 0.5 + separation/2) and the
  /// rest (0.5 - separation/2).
  double separation = 0.3;
  /// Trailing features held at mean 0 for every class, like the dark border
  /// of a digit image. They carry no class signal.
  int quiet_features = 0;
};

/// Balanced Gaussian blobs clamped to [0, 1]. Class c owns the active
/// features j with j mod n_classes == c.
Dataset synth_blobs(const SynthSpec& spec, RandomStream& rng);

class IdxFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses an IDX image/label file pair (big-endian, magic 0x00000803 and
/// 0x00000801). Pixel bytes are scaled to [0, 1] by 1/255.
Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path);

/// Writes `ds` as IDX with images of shape rows x cols (rows * cols must
/// equal the feature count). Features are quantized to round(255 x).
void write_idx(const Dataset& ds, const std::filesystem::path& images_path,
               const std::filesystem::path& labels_path, int rows, int cols);

struct PartitionPlan {
  int n_clients = 20;
  double bias = 0.8;
  int samples_per_client = 100;

  void validate() const;
  int primary_label(int client, int n_classes) const { return client % n_classes; }
};

/// Label-skew split: each draw comes from the client's primary label with
/// probability `bias`, otherwise from a uniformly chosen other label. Rows
/// are handed out without replacement until a class runs dry, then reused.
std::vector<Dataset> partition_label_skew(const Dataset& ds, const PartitionPlan& plan,
                                          RandomStream& rng);

struct TriggerSpec {
  std::vector<int> feature_indices;
  double trigger_value = 1.0;
  int target_label = 0;

  void validate(Eigen::Index n_features, int n_classes) const;
};

struct PoisonedDataset {
  Dataset data;
  std::vector<Eigen::Index> poisoned_rows;  // ascending
};

/// Stamps the trigger onto round(fraction * n) uniformly chosen rows and
/// relabels them to the target.
PoisonedDataset apply_trigger(const Dataset& ds, const TriggerSpec& trigger, double fraction,
                              RandomStream& rng);

/// Every row whose label differs from the target, stamped and relabeled.
/// Accuracy on this set is the backdoor success rate.
Dataset backdoor_test_set(const Dataset& ds, const TriggerSpec& trigger);

/// Contiguous, disjoint, covering split of the trigger's indices; shard
/// sizes differ by at most one.
std::vector<TriggerSpec> dba_shards(const TriggerSpec& trigger, int n_adversaries);

/// Samples of `source_label` with inverted contrast (x -> 1 - x) labeled as
/// `target_label`: a shifted pool that stands in for natural edge cases.
Dataset make_edge_pool(const Dataset& ds, int source_label, int target_label);

/// Appends floor(ratio * m) rows of `edge_ds`, where m counts the client's
/// rows whose label appears in `edge_ds`.
Dataset edge_case_augment(const Dataset& client_ds, const Dataset& edge_ds, double ratio,
                          RandomStream& rng);

}  // namespace truthfl

#endif  // TRUTHFL_DATA_HPP_
