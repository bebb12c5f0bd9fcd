#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dyscreen {

/// Weighted masses plus raw counts of a thresholded binary prediction.
struct ConfusionCounts {
  double tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t tp_n = 0, fp_n = 0, tn_n = 0, fn_n = 0;

  double positive_mass() const { return tp + fn; }
  double negative_mass() const { return tn + fp; }

  // weighted rates; 0 when the denominator is 0
  double recall_pos() const;
  double recall_neg() const;
  double precision_pos() const;
  double precision_neg() const;
  double accuracy() const;
  double fnr() const { return 1.0 - recall_pos(); }
  double fpr() const { return 1.0 - recall_neg(); }

  /// Same statistics on the raw counts.
  ConfusionCounts raw() const;
};

/// Labels are 1 for the positive (dyslexia) class. Empty `weights` means all ones.
/// Positive prediction iff score >= t.
ConfusionCounts confusion_at(std::span<const double> scores, std::span<const std::uint8_t> labels,
                             std::span<const double> weights, double t);

/// Weighted P(s_pos > s_neg) + 0.5 P(s_pos == s_neg). Throws std::invalid_argument for one class.
double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels,
               std::span<const double> weights = {});

struct PrPoint {
  double threshold;
  double precision;
  double recall;
};

/// One point per distinct score, thresholds ascending.
std::vector<PrPoint> pr_curve(std::span<const double> scores, std::span<const std::uint8_t> labels,
                              std::span<const double> weights = {});

struct RocPoint {
  double threshold;
  double fpr;
  double tpr;
};

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels,
                                std::span<const double> weights = {});

inline constexpr double kDefaultGridStep = 0.005;

/// Candidate thresholds: the grid {step*i} strictly inside (0,1) plus midpoints of adjacent
/// distinct scores, sorted ascending without duplicates.
std::vector<double> threshold_candidates(std::span<const double> scores,
                                         double grid_step = kDefaultGridStep);

/// Candidate minimizing |FNR - FPR|; ties (within 1e-12) go to the smaller threshold.
double calibrate_threshold(std::span<const double> scores, std::span<const std::uint8_t> labels,
                           std::span<const double> weights = {},
                           double grid_step = kDefaultGridStep);

}  // namespace dyscreen
