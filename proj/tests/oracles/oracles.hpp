#pragma once
// Brute-force reference implementations used only by tests. They share no code with the
// library paths they check: every quantity is recomputed from scratch per candidate, with exact
// rationals wherever the inputs are integer-weighted.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace oracle {

using Rational = boost::multiprecision::cpp_rational;

inline Rational exact_gini(const Rational& pos, const Rational& neg) {
  const Rational total = pos + neg;
  if (total == 0) return 0;
  const Rational p = pos / total, q = neg / total;
  return 1 - p * p - q * q;
}

struct SplitResult {
  std::size_t feature;
  double threshold;
  Rational gain;
};

/// rows[i][f] feature values, positive[i] labels, weights[i] positive integers.
inline std::optional<SplitResult> best_split(const std::vector<std::vector<double>>& rows,
                                             const std::vector<std::uint8_t>& positive,
                                             const std::vector<long>& weights,
                                             const std::vector<std::size_t>& candidates) {
  Rational pos_total = 0, neg_total = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) (positive[i] ? pos_total : neg_total) += weights[i];
  const Rational total = pos_total + neg_total;
  const Rational parent = exact_gini(pos_total, neg_total);

  std::optional<SplitResult> best;
  for (std::size_t f : candidates) {
    std::vector<double> values;
    for (const auto& r : rows) values.push_back(r[f]);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t v = 0; v + 1 < values.size(); ++v) {
      const double lo = values[v], hi = values[v + 1];
      Rational lp = 0, ln = 0, rp = 0, rn = 0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const bool left = rows[i][f] <= lo;
        if (positive[i]) (left ? lp : rp) += weights[i];
        else (left ? ln : rn) += weights[i];
      }
      const Rational gain = parent - (lp + ln) / total * exact_gini(lp, ln) - (rp + rn) / total * exact_gini(rp, rn);
      if (gain <= 0) continue;
      const double threshold = (lo + hi) / 2.0;
      const bool better = !best || gain > best->gain ||
                          (gain == best->gain && (f < best->feature || (f == best->feature && threshold < best->threshold)));
      if (better) best = SplitResult{f, threshold, gain};
    }
  }
  return best;
}

/// Weighted pair counting: P(s_pos > s_neg) + 1/2 P(tie).
inline Rational auc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels,
                    const std::vector<long>& weights) {
  Rational num = 0, pos = 0, neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) (labels[i] ? pos : neg) += weights[i];
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      const Rational w = Rational(weights[i]) * weights[j];
      if (scores[i] > scores[j]) num += w;
      else if (scores[i] == scores[j]) num += w / 2;
    }
  }
  return num / (pos * neg);
}

struct Confusion {
  Rational tp = 0, fp = 0, tn = 0, fn = 0;
};

inline Confusion confusion(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels,
                           const std::vector<long>& weights, double t) {
  Confusion c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool flagged = scores[i] >= t;
    if (labels[i]) (flagged ? c.tp : c.fn) += weights[i];
    else (flagged ? c.fp : c.tn) += weights[i];
  }
  return c;
}

/// Exhaustive scan over the 0.005 grid and score midpoints, exact |FNR - FPR|, smaller t on ties.
inline double calibrate(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels,
                        const std::vector<long>& weights) {
  std::vector<double> candidates;
  for (int i = 1; i <= 199; ++i) candidates.push_back(i / 200.0);
  for (double a : scores) {
    // midpoint between a and the next larger distinct score
    std::optional<double> next;
    for (double b : scores)
      if (b > a && (!next || b < *next)) next = b;
    if (next) candidates.push_back(a + (*next - a) / 2.0);
  }
  std::optional<Rational> best;
  double best_t = 0;
  for (double t : candidates) {
    const auto c = confusion(scores, labels, weights, t);
    Rational diff = c.fn / (c.tp + c.fn) - c.fp / (c.fp + c.tn);
    if (diff < 0) diff = -diff;
    if (!best || diff < *best || (diff == *best && t < best_t)) {
      best = diff;
      best_t = t;
    }
  }
  return best_t;
}

inline double entropy(double pos, double neg) {
  double h = 0;
  const double n = pos + neg;
  if (pos > 0) h -= pos / n * std::log2(pos / n);
  if (neg > 0) h -= neg / n * std::log2(neg / n);
  return h;
}

/// Max entropy reduction over every "value <= v" partition.
inline double info_gain(const std::vector<double>& values, const std::vector<std::uint8_t>& labels) {
  double pos = 0;
  for (auto l : labels) pos += l;
  const double n = static_cast<double>(values.size());
  const double parent = entropy(pos, n - pos);
  double best = 0;
  for (double v : values) {
    double lp = 0, ln = 0, rp = 0, rn = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i] <= v) (labels[i] ? lp : ln) += 1;
      else (labels[i] ? rp : rn) += 1;
    }
    if (rp + rn == 0) continue;
    const double cond = (lp + ln) / n * entropy(lp, ln) + (rp + rn) / n * entropy(rp, rn);
    best = std::max(best, parent - cond);
  }
  return best;
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

}  // namespace oracle
