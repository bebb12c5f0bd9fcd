#include "dyscreen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dyscreen {
namespace {

double ratio(double num, double den) { return den > 0 ? num / den : 0.0; }

void check_lengths(std::span<const double> scores, std::span<const std::uint8_t> labels,
                   std::span<const double> weights) {
  if (scores.size() != labels.size()) throw std::invalid_argument("scores and labels differ in length");
  if (!weights.empty() && weights.size() != scores.size())
    throw std::invalid_argument("weights must be empty or match the scores");
  for (double w : weights)
    if (!(w >= 0) || !std::isfinite(w)) throw std::invalid_argument("weights must be finite and non-negative");
}

double weight_at(std::span<const double> weights, std::size_t i) { return weights.empty() ? 1.0 : weights[i]; }

/// Scores sorted ascending with per-entry positive/negative masses.
struct SortedScores {
  std::vector<double> score;
  std::vector<double> pos;
  std::vector<double> neg;
  double pos_total = 0;
  double neg_total = 0;

  SortedScores(std::span<const double> scores, std::span<const std::uint8_t> labels, std::span<const double> weights) {
    check_lengths(scores, labels, weights);
    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
    for (auto i : idx) {
      const double w = weight_at(weights, i);
      score.push_back(scores[i]);
      pos.push_back(labels[i] ? w : 0.0);
      neg.push_back(labels[i] ? 0.0 : w);
      (labels[i] ? pos_total : neg_total) += w;
    }
  }

  void require_both(const char* what) const {
    if (!(pos_total > 0) || !(neg_total > 0))
      throw std::invalid_argument(std::string(what) + " needs both classes present");
  }

  /// Distinct scores ascending with the masses scoring >= each of them.
  struct Level {
    double threshold, pos_at_or_above, neg_at_or_above;
  };
  std::vector<Level> levels() const {
    std::vector<Level> out;
    double pos_above = pos_total, neg_above = neg_total;
    for (std::size_t i = 0; i < score.size();) {
      std::size_t j = i;
      double gp = 0, gn = 0;
      while (j < score.size() && score[j] == score[i]) {
        gp += pos[j];
        gn += neg[j];
        ++j;
      }
      out.push_back({score[i], pos_above, neg_above});
      pos_above -= gp;
      neg_above -= gn;
      i = j;
    }
    return out;
  }
};

}  // namespace

double ConfusionCounts::recall_pos() const { return ratio(tp, tp + fn); }
double ConfusionCounts::recall_neg() const { return ratio(tn, tn + fp); }
double ConfusionCounts::precision_pos() const { return ratio(tp, tp + fp); }
double ConfusionCounts::precision_neg() const { return ratio(tn, tn + fn); }
double ConfusionCounts::accuracy() const { return ratio(tp + tn, tp + tn + fp + fn); }

ConfusionCounts ConfusionCounts::raw() const {
  ConfusionCounts c = *this;
  c.tp = static_cast<double>(tp_n);
  c.fp = static_cast<double>(fp_n);
  c.tn = static_cast<double>(tn_n);
  c.fn = static_cast<double>(fn_n);
  return c;
}

ConfusionCounts confusion_at(std::span<const double> scores, std::span<const std::uint8_t> labels,
                             std::span<const double> weights, double t) {
  check_lengths(scores, labels, weights);
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double w = weight_at(weights, i);
    const bool predicted = scores[i] >= t;
    if (labels[i]) {
      if (predicted) { c.tp += w; ++c.tp_n; }
      else { c.fn += w; ++c.fn_n; }
    } else {
      if (predicted) { c.fp += w; ++c.fp_n; }
      else { c.tn += w; ++c.tn_n; }
    }
  }
  return c;
}

double roc_auc(std::span<const double> scores, std::span<const std::uint8_t> labels, std::span<const double> weights) {
  SortedScores s(scores, labels, weights);
  s.require_both("roc_auc");
  double below_neg = 0, area = 0;
  for (std::size_t i = 0; i < s.score.size();) {
    std::size_t j = i;
    double gp = 0, gn = 0;
    while (j < s.score.size() && s.score[j] == s.score[i]) {
      gp += s.pos[j];
      gn += s.neg[j];
      ++j;
    }
    area += gp * below_neg + 0.5 * gp * gn;
    below_neg += gn;
    i = j;
  }
  return area / (s.pos_total * s.neg_total);
}

std::vector<PrPoint> pr_curve(std::span<const double> scores, std::span<const std::uint8_t> labels,
                              std::span<const double> weights) {
  SortedScores s(scores, labels, weights);
  s.require_both("pr_curve");
  std::vector<PrPoint> out;
  for (const auto& l : s.levels())
    out.push_back({l.threshold, ratio(l.pos_at_or_above, l.pos_at_or_above + l.neg_at_or_above),
                   l.pos_at_or_above / s.pos_total});
  return out;
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels,
                                std::span<const double> weights) {
  SortedScores s(scores, labels, weights);
  s.require_both("roc_curve");
  std::vector<RocPoint> out;
  for (const auto& l : s.levels())
    out.push_back({l.threshold, l.neg_at_or_above / s.neg_total, l.pos_at_or_above / s.pos_total});
  return out;
}

std::vector<double> threshold_candidates(std::span<const double> scores, double grid_step) {
  if (!(grid_step > 0 && grid_step < 1)) throw std::invalid_argument("threshold grid step must lie in (0, 1)");
  std::vector<double> out;
  const double inverse = 1.0 / grid_step;
  const bool integral = std::abs(inverse - std::round(inverse)) < 1e-9;
  for (int i = 1;; ++i) {
    const double t = integral ? i / std::round(inverse) : i * grid_step;
    if (!(t < 1.0)) break;
    out.push_back(t);
  }
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) out.push_back(sorted[i] + (sorted[i + 1] - sorted[i]) / 2.0);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double calibrate_threshold(std::span<const double> scores, std::span<const std::uint8_t> labels,
                           std::span<const double> weights, double grid_step) {
  SortedScores s(scores, labels, weights);
  s.require_both("calibrate_threshold");
  // suffix masses: entries at index >= i
  const std::size_t n = s.score.size();
  std::vector<double> pos_suffix(n + 1, 0.0), neg_suffix(n + 1, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    pos_suffix[i] = pos_suffix[i + 1] + s.pos[i];
    neg_suffix[i] = neg_suffix[i + 1] + s.neg[i];
  }
  const auto candidates = threshold_candidates(scores, grid_step);
  std::vector<double> objective(candidates.size());
  double best = INFINITY;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const auto first = static_cast<std::size_t>(std::lower_bound(s.score.begin(), s.score.end(), candidates[c]) -
                                                s.score.begin());
    const double fnr = 1.0 - pos_suffix[first] / s.pos_total;
    const double fpr = neg_suffix[first] / s.neg_total;
    objective[c] = std::abs(fnr - fpr);
    best = std::min(best, objective[c]);
  }
  for (std::size_t c = 0; c < candidates.size(); ++c)
    if (objective[c] <= best + 1e-12) return candidates[c];
  return candidates.front();
}

}  // namespace dyscreen
