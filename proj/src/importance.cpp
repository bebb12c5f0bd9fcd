#include "dyscreen/importance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dyscreen/error.hpp"

namespace dyscreen {
namespace {

constexpr std::array<const char*, kMeasuresPerQuestion> kTypeNames = {"Clicks", "Hits", "Misses",
                                                                       "Score", "Accuracy", "Missrate"};

std::vector<std::uint8_t> positive_labels(const Dataset& dataset) {
  dataset.require_labeled();
  std::vector<std::uint8_t> out(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) out[i] = dataset.records[i].participant.label == Label::Dyslexia;
  return out;
}

double mean(const std::vector<double>& gains, std::size_t begin, std::size_t count, std::size_t stride = 1) {
  double sum = 0;
  for (std::size_t i = 0; i < count; ++i) sum += gains[begin + i * stride];
  return sum / static_cast<double>(count);
}

void normalize(std::vector<ImportanceEntry>& entries) {
  double top = 0;
  for (const auto& e : entries) top = std::max(top, e.mean_gain);
  for (auto& e : entries) e.percent = top > 0 ? 100.0 * e.mean_gain / top : 0.0;
}

}  // namespace

double entropy_bits(double positive, double negative) {
  const double total = positive + negative;
  if (!(total > 0)) return 0.0;
  double h = 0;
  for (double c : {positive, negative}) {
    if (c > 0) {
      const double p = c / total;
      h -= p * std::log2(p);
    }
  }
  return h;
}

double info_gain(std::span<const double> values, std::span<const std::uint8_t> positive) {
  if (values.size() != positive.size()) throw std::invalid_argument("info_gain: values and labels differ in length");
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  std::vector<std::pair<double, std::uint8_t>> rows(n);
  double pos_total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    rows[i] = {values[i], positive[i]};
    pos_total += positive[i];
  }
  const double neg_total = static_cast<double>(n) - pos_total;
  const double parent = entropy_bits(pos_total, neg_total);
  std::sort(rows.begin(), rows.end());

  double best_conditional = parent;
  double left_pos = 0, left_n = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    left_pos += rows[i].second;
    left_n += 1;
    if (!(rows[i + 1].first > rows[i].first)) continue;
    const double right_n = static_cast<double>(n) - left_n;
    const double right_pos = pos_total - left_pos;
    const double conditional = (left_n / static_cast<double>(n)) * entropy_bits(left_pos, left_n - left_pos) +
                               (right_n / static_cast<double>(n)) * entropy_bits(right_pos, right_n - right_pos);
    best_conditional = std::min(best_conditional, conditional);
  }
  return std::clamp(parent - best_conditional, 0.0, parent);
}

double info_gain(const Dataset& dataset, std::size_t feature_index) {
  if (feature_index >= dataset.variant.feature_count()) throw DataError("feature index out of range");
  const auto labels = positive_labels(dataset);
  std::vector<double> column(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) column[i] = dataset.records[i].features[feature_index];
  return info_gain(column, labels);
}

std::vector<double> feature_gains(const Dataset& dataset) {
  const auto labels = positive_labels(dataset);
  const std::size_t f = dataset.variant.feature_count();
  std::vector<double> gains(f);
  std::vector<double> column(dataset.size());
  for (std::size_t c = 0; c < f; ++c) {
    for (std::size_t i = 0; i < dataset.size(); ++i) column[i] = dataset.records[i].features[c];
    gains[c] = info_gain(column, labels);
  }
  return gains;
}

std::vector<ImportanceEntry> question_importance(const Dataset& dataset) {
  const auto gains = feature_gains(dataset);
  std::vector<ImportanceEntry> out;
  for (int q : dataset.variant.qids())
    out.push_back({"Q" + std::to_string(q), mean(gains, dataset.variant.block_offset(q), kMeasuresPerQuestion), 0});
  out.push_back({"Demog.", mean(gains, 0, kDemographicCount), 0});
  normalize(out);
  return out;
}

std::vector<ImportanceEntry> type_importance(const Dataset& dataset) {
  const auto gains = feature_gains(dataset);
  std::vector<ImportanceEntry> out;
  const std::size_t questions = dataset.variant.question_count();
  for (std::size_t m = 0; m < kMeasuresPerQuestion; ++m)
    out.push_back({kTypeNames[m], mean(gains, kDemographicCount + m, questions, kMeasuresPerQuestion), 0});
  out.push_back({"Demography", mean(gains, 0, kDemographicCount), 0});
  normalize(out);
  return out;
}

std::vector<ImportanceEntry> ranked(std::vector<ImportanceEntry> entries) {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.percent > b.percent; });
  return entries;
}

std::vector<int> top_questions(const std::vector<ImportanceEntry>& question_entries, std::size_t count) {
  std::vector<int> out;
  for (const auto& e : ranked(question_entries)) {
    if (out.size() == count) break;
    if (e.group.size() > 1 && e.group[0] == 'Q') out.push_back(std::stoi(e.group.substr(1)));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace dyscreen
