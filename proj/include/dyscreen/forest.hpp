#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dyscreen/types.hpp"

namespace dyscreen {

inline constexpr std::uint64_t kDefaultSeed = 20190101;

/// Gains closer than this are treated as equal (tie-break applies); gains at or below it are
/// not an improvement.
inline constexpr double kGainTolerance = 1e-12;

struct TrainConfig {
  int n_trees = 200;
  int max_depth = 0;  ///< 0 means unlimited
  int mtry = 0;       ///< 0 means floor(log2(F)) + 1
  std::uint64_t seed = kDefaultSeed;
  std::optional<double> min_node_weight;  ///< default: smallest instance weight
  unsigned threads = 0;                   ///< 0 = all cores; does not affect the model

  int resolved_mtry(std::size_t feature_count) const;
  /// Throws DataError unless n_trees >= 1, max_depth >= 0, 1 <= mtry <= F.
  void validate(std::size_t feature_count) const;
};

/// Column-major numeric matrix, one column per feature.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static FeatureMatrix from_rows(std::span<const std::vector<double>> rows);
  static FeatureMatrix from_dataset(const Dataset& dataset);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double at(std::size_t row, std::size_t col) const { return data_[col * rows_ + row]; }
  double& at(std::size_t row, std::size_t col) { return data_[col * rows_ + row]; }
  std::span<const double> column(std::size_t col) const {
    return {data_.data() + col * rows_, rows_};
  }
  std::vector<double> row(std::size_t r) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Instance weights that give each class a total mass of N/2.
struct ClassWeights {
  double dys = 1.0;
  double nodys = 1.0;

  double of(Label label) const { return label == Label::Dyslexia ? dys : nodys; }
  friend bool operator==(const ClassWeights&, const ClassWeights&) = default;
};

ClassWeights class_weights(std::size_t n, std::size_t n_dys);
ClassWeights class_weights(const Dataset& dataset);

/// Binary Gini impurity from weighted class masses. Throws std::invalid_argument when both are 0.
double gini(double positive_mass, double negative_mass);

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;  ///< rows with value <= threshold go left
  double gain = 0.0;       ///< parent impurity minus weighted child impurity

  friend bool operator==(const Split&, const Split&) = default;
};

/// Exhaustive scan over the candidate features of the rows in `sample`, thresholds at midpoints
/// of adjacent distinct values. `weights[i]` belongs to `sample[i]`. Ties within kGainTolerance go
/// to the lowest feature index, then the lowest threshold. nullopt if nothing beats kGainTolerance.
std::optional<Split> best_split(const FeatureMatrix& x, std::span<const std::uint8_t> positive,
                                std::span<const std::size_t> sample, std::span<const double> weights,
                                std::span<const std::size_t> candidate_features);

struct TreeNode {
  std::int32_t feature = -1;  ///< -1 for leaves
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;  ///< leaves: positive weight fraction

  bool is_leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  /// Node 0 is the root. Throws ModelFormatError on dangling links or bad leaf values.
  explicit DecisionTree(std::vector<TreeNode> nodes);

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  double predict(std::span<const double> x) const;
  /// Index of the leaf `x` lands in.
  std::size_t leaf_for(std::span<const double> x) const;
  int depth() const;
  std::size_t leaf_count() const;
  std::size_t max_feature_index() const;

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

 private:
  std::vector<TreeNode> nodes_;
};

/// Grows one tree on `sample` (row indices, duplicates allowed) with per-entry weights.
/// Candidate features at each node come from the tree's own RNG stream seeded by `tree_seed`.
DecisionTree build_tree(const FeatureMatrix& x, std::span<const std::uint8_t> positive,
                        std::span<const std::size_t> sample, std::span<const double> weights,
                        const TrainConfig& config, std::uint64_t tree_seed);

/// Distinct rows of one bootstrap resample and how often each was drawn.
struct BootstrapSample {
  std::vector<std::size_t> rows;
  std::vector<std::uint32_t> multiplicity;
};

/// n uniform draws with replacement from [0, n).
BootstrapSample bootstrap(std::size_t n, std::uint64_t stream_seed);

/// Seeds used by train() for tree i.
std::uint64_t bootstrap_seed(std::uint64_t seed, std::size_t tree_index);
std::uint64_t tree_seed(std::uint64_t seed, std::size_t tree_index);

struct ForestModel {
  AgeVariant variant = AgeVariant::full();
  std::vector<DecisionTree> trees;
  double threshold = 0.5;
  TrainConfig config;
  ClassWeights weights;
};

/// Requires a labeled dataset with both classes.
ForestModel train(const Dataset& dataset, const TrainConfig& config);

/// Mean positive-leaf fraction over trees. Throws DataError on length mismatch.
double predict_score(const ForestModel& model, std::span<const double> features);
std::vector<double> predict_scores(const ForestModel& model, const Dataset& dataset);
/// Dyslexia iff score >= model.threshold.
Label classify(const ForestModel& model, std::span<const double> features);
inline Label classify_score(double score, double threshold) {
  return score >= threshold ? Label::Dyslexia : Label::NoDyslexia;
}

}  // namespace dyscreen
