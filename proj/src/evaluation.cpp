#include "dyscreen/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "dyscreen/error.hpp"
#include "dyscreen/rng.hpp"

namespace dyscreen {

using nlohmann::json;

std::vector<std::vector<std::size_t>> kfold_partition(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k == 0) throw DataError("k must be at least 1");
  if (k > n) throw DataError("cannot split " + std::to_string(n) + " records into " + std::to_string(k) + " folds");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);

  const std::size_t base = n / k;
  const std::size_t larger = n % k;
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t at = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = base + (f >= k - larger ? 1 : 0);
    folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(at), perm.begin() + static_cast<std::ptrdiff_t>(at + size));
    std::sort(folds[f].begin(), folds[f].end());
    at += size;
  }
  return folds;
}

namespace {

MetricSet metric_set(const ConfusionCounts& c) {
  MetricSet m;
  m.accuracy = c.accuracy();
  m.precision_dys = c.precision_pos();
  m.recall_dys = c.recall_pos();
  m.precision_nodys = c.precision_neg();
  m.recall_nodys = c.recall_neg();
  m.balanced_accuracy = (m.recall_dys + m.recall_nodys) / 2.0;
  return m;
}

json metric_json(const MetricSet& m) {
  return {{"accuracy", m.accuracy},
          {"balanced_accuracy", m.balanced_accuracy},
          {"precision_dys", m.precision_dys},
          {"recall_dys", m.recall_dys},
          {"precision_nodys", m.precision_nodys},
          {"recall_nodys", m.recall_nodys}};
}

bool training_splits_have_both_classes(const std::vector<std::vector<std::size_t>>& folds,
                                       const std::vector<std::uint8_t>& positive, std::size_t total_pos) {
  const std::size_t total_neg = positive.size() - total_pos;
  for (const auto& fold : folds) {
    std::size_t fold_pos = 0;
    for (auto i : fold) fold_pos += positive[i];
    const std::size_t fold_neg = fold.size() - fold_pos;
    if (total_pos - fold_pos == 0 || total_neg - fold_neg == 0) return false;
  }
  return true;
}

}  // namespace

EvaluationReport evaluate_scores(std::vector<double> scores, std::vector<std::uint8_t> labels,
                                 std::optional<double> fixed_threshold, double grid_step) {
  const std::size_t n = scores.size();
  const std::size_t n_dys = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
  const ClassWeights cw = class_weights(n, n_dys);
  std::vector<double> weights(n);
  for (std::size_t i = 0; i < n; ++i) weights[i] = labels[i] ? cw.dys : cw.nodys;

  EvaluationReport r;
  r.n = n;
  r.n_dys = n_dys;
  r.threshold_calibrated = !fixed_threshold;
  r.threshold = fixed_threshold ? *fixed_threshold : calibrate_threshold(scores, labels, weights, grid_step);
  r.confusion = confusion_at(scores, labels, weights, r.threshold);
  r.weighted = metric_set(r.confusion);
  r.raw = metric_set(r.confusion.raw());
  r.roc_auc = roc_auc(scores, labels, weights);
  r.majority_baseline_accuracy =
      static_cast<double>(std::max(n_dys, n - n_dys)) / static_cast<double>(n);
  r.pr_curve = pr_curve(scores, labels, weights);
  r.roc_curve = roc_curve(scores, labels, weights);
  r.scores = std::move(scores);
  r.labels = std::move(labels);
  return r;
}

EvaluationReport cross_validate(const Dataset& dataset, const TrainConfig& config, const CvOptions& options) {
  dataset.require_labeled();
  const std::size_t n = dataset.size();
  if (options.k < 2) throw DataError("cross validation needs k >= 2");
  std::vector<std::uint8_t> positive(n);
  for (std::size_t i = 0; i < n; ++i) positive[i] = dataset.records[i].participant.label == Label::Dyslexia;
  const std::size_t total_pos = static_cast<std::size_t>(std::count(positive.begin(), positive.end(), std::uint8_t{1}));
  if (total_pos == 0 || total_pos == n) throw DataError("cross validation needs both classes; dataset has one");

  std::vector<std::vector<std::size_t>> folds;
  bool found = false;
  for (int attempt = 0; attempt < options.max_partition_attempts && !found; ++attempt) {
    const std::uint64_t seed = attempt == 0 ? options.seed : derive_seed(options.seed, static_cast<std::uint64_t>(attempt), 2);
    folds = kfold_partition(n, options.k, seed);
    found = training_splits_have_both_classes(folds, positive, total_pos);
  }
  if (!found)
    throw DataError("no " + std::to_string(options.k) + "-fold partition with both classes in every training split after " +
                    std::to_string(options.max_partition_attempts) + " attempts");

  std::vector<double> scores(n, 0.0);
  std::vector<char> in_fold(n);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::fill(in_fold.begin(), in_fold.end(), 0);
    for (auto i : folds[f]) in_fold[i] = 1;
    Dataset training{dataset.variant, {}};
    training.records.reserve(n - folds[f].size());
    for (std::size_t i = 0; i < n; ++i)
      if (!in_fold[i]) training.records.push_back(dataset.records[i]);
    TrainConfig fold_config = config;
    fold_config.seed = derive_seed(config.seed, f, 3);
    const ForestModel model = train(training, fold_config);
    for (auto i : folds[f]) scores[i] = predict_score(model, dataset.records[i].features);
  }

  EvaluationReport report = evaluate_scores(std::move(scores), std::move(positive), options.fixed_threshold, options.grid_step);
  report.fold_count = folds.size();
  for (const auto& f : folds) report.fold_sizes.push_back(f.size());
  return report;
}

json report_to_json(const EvaluationReport& r, bool include_curves) {
  json out = {{"n", r.n},
              {"n_dys", r.n_dys},
              {"fold_count", r.fold_count},
              {"fold_sizes", r.fold_sizes},
              {"threshold", r.threshold},
              {"threshold_calibrated", r.threshold_calibrated},
              {"roc_auc", r.roc_auc},
              {"weighted", metric_json(r.weighted)},
              {"raw", metric_json(r.raw)},
              {"majority_baseline_accuracy", r.majority_baseline_accuracy},
              {"confusion",
               {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"tn", r.confusion.tn}, {"fn", r.confusion.fn},
                {"tp_n", r.confusion.tp_n}, {"fp_n", r.confusion.fp_n}, {"tn_n", r.confusion.tn_n},
                {"fn_n", r.confusion.fn_n}}}};
  if (include_curves) {
    json pr = json::array();
    for (const auto& p : r.pr_curve) pr.push_back({{"threshold", p.threshold}, {"precision", p.precision}, {"recall", p.recall}});
    out["pr_curve"] = std::move(pr);
  }
  return out;
}

std::string report_table(const EvaluationReport& r) {
  char buf[256];
  std::ostringstream out;
  std::snprintf(buf, sizeof buf, "records %zu (dyslexia %zu, %.1f%%), folds %zu", r.n, r.n_dys,
                100.0 * static_cast<double>(r.n_dys) / static_cast<double>(r.n), r.fold_count);
  out << buf << '\n';
  if (!r.fold_sizes.empty()) {
    out << "fold sizes";
    for (auto s : r.fold_sizes) out << ' ' << s;
    out << '\n';
  }
  std::snprintf(buf, sizeof buf, "threshold %.4g (%s)   ROC AUC %.3f", r.threshold,
                r.threshold_calibrated ? "calibrated" : "fixed", r.roc_auc);
  out << buf << '\n';
  out << "               weighted     raw\n";
  auto row = [&](const char* name, double w, double raw) {
    std::snprintf(buf, sizeof buf, "%-14s %7.1f %8.1f\n", name, 100.0 * w, 100.0 * raw);
    out << buf;
  };
  row("accuracy", r.weighted.accuracy, r.raw.accuracy);
  row("recall dys", r.weighted.recall_dys, r.raw.recall_dys);
  row("precision dys", r.weighted.precision_dys, r.raw.precision_dys);
  row("recall nodys", r.weighted.recall_nodys, r.raw.recall_nodys);
  row("precision nod.", r.weighted.precision_nodys, r.raw.precision_nodys);
  std::snprintf(buf, sizeof buf, "majority-class baseline accuracy %.1f%%\n", 100.0 * r.majority_baseline_accuracy);
  out << buf;
  return out.str();
}

std::string curves_csv(const EvaluationReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "curve,threshold,x,y\n";
  for (const auto& p : r.pr_curve) out << "pr," << p.threshold << ',' << p.recall << ',' << p.precision << '\n';
  for (const auto& p : r.roc_curve) out << "roc," << p.threshold << ',' << p.fpr << ',' << p.tpr << '\n';
  return out.str();
}

std::vector<SweepCell> sweep(const Dataset& dataset, const std::vector<int>& depths, const std::vector<int>& mtrys,
                             const TrainConfig& base, const CvOptions& options) {
  if (depths.empty() || mtrys.empty()) throw DataError("sweep needs at least one depth and one mtry");
  std::vector<SweepCell> cells;
  for (int depth : depths) {
    for (int mtry : mtrys) {
      TrainConfig cfg = base;
      cfg.max_depth = depth;
      cfg.mtry = mtry;
      const auto report = cross_validate(dataset, cfg, options);
      cells.push_back({depth, mtry, report.roc_auc, report.weighted.accuracy, report.threshold});
    }
  }
  return cells;
}

double estimate_prevalence(double flag_rate, double take_rate, double true_positive_share) {
  for (double v : {flag_rate, take_rate, true_positive_share})
    if (!(v >= 0.0 && v <= 1.0)) throw DataError("rates must lie in [0, 1]");
  return flag_rate * take_rate * true_positive_share;
}

}  // namespace dyscreen
