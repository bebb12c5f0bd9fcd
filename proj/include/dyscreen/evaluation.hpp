#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dyscreen/forest.hpp"
#include "dyscreen/metrics.hpp"

namespace dyscreen {

/// Random disjoint cover of [0, n) by k folds whose sizes differ by at most one; the n mod k
/// larger folds come last. Throws DataError when k == 0 or k > n.
std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t k, std::uint64_t seed);

struct CvOptions {
  std::size_t k = 10;
  std::uint64_t seed = kDefaultSeed;
  std::optional<double> fixed_threshold;  ///< skip calibration, evaluate at this threshold
  double grid_step = kDefaultGridStep;
  int max_partition_attempts = 32;
};

struct MetricSet {
  double accuracy = 0;
  double precision_dys = 0, recall_dys = 0;
  double precision_nodys = 0, recall_nodys = 0;
  double balanced_accuracy = 0;
};

struct EvaluationReport {
  std::size_t n = 0;
  std::size_t n_dys = 0;
  std::size_t fold_count = 0;
  std::vector<std::size_t> fold_sizes;
  double threshold = 0.5;
  bool threshold_calibrated = false;
  MetricSet weighted;  ///< class-balanced instance weights
  MetricSet raw;
  ConfusionCounts confusion;
  double roc_auc = 0;
  /// Raw accuracy of always predicting the majority class.
  double majority_baseline_accuracy = 0;
  std::vector<PrPoint> pr_curve;
  std::vector<RocPoint> roc_curve;
  std::vector<double> scores;  ///< pooled held-out scores, dataset order
  std::vector<std::uint8_t> labels;
};

/// k-fold CV: train on k-1 folds, score the held-out fold, pool the scores, calibrate one threshold
/// on the pool (unless fixed), and compute metrics. Re-draws the partition (bounded) when some
/// training split lacks a class.
EvaluationReport cross_validate(const Dataset& dataset, const TrainConfig& config,
                                const CvOptions& options);

/// Builds a report from already pooled scores.
EvaluationReport evaluate_scores(std::vector<double> scores, std::vector<std::uint8_t> labels,
                                 std::optional<double> fixed_threshold,
                                 double grid_step = kDefaultGridStep);

nlohmann::json report_to_json(const EvaluationReport& report, bool include_curves = true);
std::string report_table(const EvaluationReport& report);
/// One row per curve point: `curve,threshold,x,y` with x/y = recall/precision or fpr/tpr.
std::string curves_csv(const EvaluationReport& report);

struct SweepCell {
  int max_depth = 0;
  int mtry = 0;
  double roc_auc = 0;
  double accuracy = 0;  ///< weighted (balanced) accuracy
  double threshold = 0;
};

/// cross_validate for each (depth, mtry) pair, depth-major. All cells share the partition seed.
std::vector<SweepCell> sweep(const Dataset& dataset, const std::vector<int>& depths,
                             const std::vector<int>& mtrys, const TrainConfig& base,
                             const CvOptions& options);

/// Share of the population predicted at risk: flag_rate * take_rate * true_positive_share.
double estimate_prevalence(double flag_rate, double take_rate, double true_positive_share = 1.0);

}  // namespace dyscreen
