// Acceptance run: one PASS/FAIL/SKIP line per criterion. Exit status 1 if any fails.
// Criterion 8 needs the archived study data: set DYSCREEN_ARCHIVED_A1 to its dataset CSV.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>

#include "dyscreen/dataset_io.hpp"
#include "dyscreen/evaluation.hpp"
#include "dyscreen/features.hpp"
#include "dyscreen/importance.hpp"
#include "dyscreen/metrics.hpp"
#include "dyscreen/model_io.hpp"
#include "dyscreen/synth.hpp"
#include "oracles/oracles.hpp"
#include "support/session_gen.hpp"

using namespace dyscreen;

namespace {

// Time budgets in seconds and numeric tolerances.
constexpr double kBudgetLayout = 1;
constexpr double kBudgetMeasures = 10;
constexpr double kBudgetDuplication = 30;
constexpr double kBudgetOracles = 60;
constexpr double kBudgetSeparable = 300;
constexpr double kBudgetDeterminism = 120;
constexpr double kBudgetPlateau = 600;

constexpr double kIdentityTolerance = 1e-12;
constexpr double kOracleTolerance = 1e-9;
constexpr double kSeparableRecall = 0.98;
constexpr double kSeparableAuc = 0.99;
constexpr double kNullAucLow = 0.45, kNullAucHigh = 0.55;
constexpr double kPlateauSlack = 0.01;

constexpr std::uint64_t kSynthSeed = 7;

struct Outcome {
  enum Kind { Pass, Fail, Skip } kind = Pass;
  std::string detail;
};

struct Failures {
  std::ostringstream text;
  int count = 0;
  void add(const std::string& what) {
    if (count++ < 3) text << (count > 1 ? "; " : "") << what;
  }
  Outcome outcome(const std::string& ok_detail) const {
    if (count == 0) return {Outcome::Pass, ok_detail};
    return {Outcome::Fail, std::to_string(count) + " violation(s): " + text.str()};
  }
};

__attribute__((format(printf, 1, 2))) std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

int g_failed = 0;

void criterion(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {Outcome::Fail, std::string("exception: ") + e.what()};
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (o.kind == Outcome::Pass && elapsed > budget_s) {
    o.kind = Outcome::Fail;
    o.detail += " [over budget]";
  }
  const char* tag = o.kind == Outcome::Pass ? "PASS" : o.kind == Outcome::Fail ? "FAIL" : "SKIP";
  if (o.kind == Outcome::Fail) ++g_failed;
  std::printf("criterion %d %-40s %s  %7.2fs / %4.0fs  %s\n", id, title, tag, elapsed, budget_s, o.detail.c_str());
  std::fflush(stdout);
}

const QuestionManifest& manifest() {
  static const auto m = QuestionManifest::load(DYSCREEN_SOURCE_DIR "/data/manifest.json");
  return m;
}

Outcome feature_layout() {
  struct Range {
    int first_q, last_q, first_feature, last_feature;
  };
  static constexpr Range ranges[] = {
      {1, 4, 5, 28},      {5, 9, 29, 58},     {10, 13, 59, 82},   {14, 17, 83, 106},  {18, 21, 107, 130},
      {22, 22, 131, 136}, {23, 23, 137, 142}, {24, 24, 143, 148}, {25, 25, 149, 154}, {26, 26, 155, 160},
      {27, 27, 161, 166}, {28, 28, 167, 172}, {29, 29, 173, 178}, {30, 30, 179, 184}, {31, 31, 185, 190},
      {32, 32, 191, 196},
  };
  Failures f;
  const auto full = AgeVariant::full();
  for (const auto& r : ranges) {
    const auto first = full.block_offset(r.first_q) + 1;
    const auto last = full.feature_index(r.last_q, Measure::Missrate) + 1;
    if (first != static_cast<std::size_t>(r.first_feature) || last != static_cast<std::size_t>(r.last_feature))
      f.add(fmt("Q%d-Q%d -> %zu-%zu", r.first_q, r.last_q, first, last));
  }
  const std::pair<AgeVariant, std::size_t> counts[] = {{AgeVariant::full(), 196},
                                                       {AgeVariant::young7_8(), 118},
                                                       {AgeVariant::mid9_11(), 166},
                                                       {AgeVariant::teen12_17(), 190}};
  for (const auto& [v, n] : counts) {
    if (v.feature_count() != n) f.add(fmt("%s has %zu features", v.label().c_str(), v.feature_count()));
    if (v.feature_columns().size() != n) f.add(v.label() + " column list length");
  }
  return f.outcome("16 ranges, counts 196/118/166/190");
}

Outcome measure_identities() {
  Failures f;
  const AgeVariant variants[] = {AgeVariant::full(), AgeVariant::young7_8(), AgeVariant::mid9_11(), AgeVariant::teen12_17()};
  std::size_t blocks = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto& v = variants[s % 4];
    const auto log = testing_support::random_session(manifest(), v, 1'000'000 + s, 16);
    const auto fv = extract_features(log, manifest());
    for (int q : v.qids()) {
      const auto at = [&](Measure m) { return fv.values[v.feature_index(q, m)]; };
      const double clicks = at(Measure::Clicks), hits = at(Measure::Hits), misses = at(Measure::Misses);
      const double acc = at(Measure::Accuracy), miss = at(Measure::Missrate);
      ++blocks;
      if (hits + misses > clicks) f.add(fmt("session %llu Q%d hits+misses > clicks", (unsigned long long)s, q));
      if (std::abs(acc * clicks - hits) > kIdentityTolerance * std::max(1.0, hits))
        f.add(fmt("session %llu Q%d accuracy*clicks != hits", (unsigned long long)s, q));
      if (std::abs(miss * clicks - misses) > kIdentityTolerance * std::max(1.0, misses))
        f.add(fmt("session %llu Q%d missrate*clicks != misses", (unsigned long long)s, q));
    }
  }
  return f.outcome(fmt("1000 sessions, %zu question blocks", blocks));
}

Outcome duplication_oracle() {
  Failures f;
  Rng rng(515);
  std::size_t nodes = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(12);
    const std::size_t features = 1 + rng.below(5);
    const int levels = 2 + static_cast<int>(rng.below(6));
    std::vector<std::vector<double>> rows, dup_rows;
    std::vector<std::uint8_t> y, dup_y;
    std::vector<double> w;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> r;
      for (std::size_t c = 0; c < features; ++c) r.push_back(static_cast<double>(rng.below(levels)) * 0.5);
      const auto label = static_cast<std::uint8_t>(rng.below(2));
      const auto weight = 1 + rng.below(5);
      rows.push_back(r);
      y.push_back(label);
      w.push_back(static_cast<double>(weight));
      for (std::uint64_t k = 0; k < weight; ++k) {
        dup_rows.push_back(r);
        dup_y.push_back(label);
      }
    }
    TrainConfig cfg;
    cfg.mtry = 1 + static_cast<int>(rng.below(features));
    cfg.min_node_weight = 1.0;
    const auto seed = rng.next();
    std::vector<std::size_t> sample(n), dup_sample(dup_rows.size());
    std::iota(sample.begin(), sample.end(), std::size_t{0});
    std::iota(dup_sample.begin(), dup_sample.end(), std::size_t{0});
    const auto a = build_tree(FeatureMatrix::from_rows(rows), y, sample, w, cfg, seed);
    const auto b = build_tree(FeatureMatrix::from_rows(dup_rows), dup_y, dup_sample,
                              std::vector<double>(dup_rows.size(), 1.0), cfg, seed);
    nodes += a.nodes().size();
    if (!(a == b)) f.add(fmt("dataset %d differs", trial));
  }
  return f.outcome(fmt("200 datasets, %zu nodes compared", nodes));
}

Outcome split_metric_oracles() {
  Failures f;
  Rng rng(4242);
  auto random_case = [&](std::size_t n, int levels) {
    std::vector<double> v;
    std::vector<std::uint8_t> y;
    std::vector<long> w;
    for (std::size_t i = 0; i < n; ++i) {
      v.push_back(static_cast<double>(rng.below(levels)) / levels);
      y.push_back(static_cast<std::uint8_t>(i < 2 ? i : rng.below(2)));
      w.push_back(1 + static_cast<long>(rng.below(6)));
    }
    return std::tuple{v, y, w};
  };
  for (int trial = 0; trial < 100; ++trial) {
    // best_split on up to 10 rows, 1-3 features
    const std::size_t n = 2 + rng.below(9), features = 1 + rng.below(3);
    std::vector<std::vector<double>> rows;
    std::vector<std::uint8_t> y;
    std::vector<long> w;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> r;
      for (std::size_t c = 0; c < features; ++c) r.push_back(static_cast<double>(rng.below(5)) * 0.25);
      rows.push_back(r);
      y.push_back(static_cast<std::uint8_t>(rng.below(2)));
      w.push_back(1 + static_cast<long>(rng.below(6)));
    }
    std::vector<std::size_t> candidates(features), sample(n);
    std::iota(candidates.begin(), candidates.end(), std::size_t{0});
    std::iota(sample.begin(), sample.end(), std::size_t{0});
    const auto want = oracle::best_split(rows, y, w, candidates);
    const auto got = best_split(FeatureMatrix::from_rows(rows), y, sample, std::vector<double>(w.begin(), w.end()), candidates);
    if (want.has_value() != got.has_value()) {
      f.add(fmt("best_split %d presence", trial));
    } else if (got && (got->feature != want->feature || got->threshold != want->threshold ||
                       std::abs(got->gain - oracle::to_double(want->gain)) > kOracleTolerance)) {
      f.add(fmt("best_split %d", trial));
    }

    const auto [gv, gy, gw] = random_case(2 + rng.below(9), 4);
    if (std::abs(info_gain(gv, gy) - oracle::info_gain(gv, gy)) > kOracleTolerance) f.add(fmt("info_gain %d", trial));

    const auto [sv, sy, sw] = random_case(2 + rng.below(9), 5);
    const std::vector<double> swd(sw.begin(), sw.end());
    if (std::abs(roc_auc(sv, sy, swd) - oracle::to_double(oracle::auc(sv, sy, sw))) > kOracleTolerance)
      f.add(fmt("roc_auc %d", trial));
    if (calibrate_threshold(sv, sy, swd) != oracle::calibrate(sv, sy, sw)) f.add(fmt("calibrate_threshold %d", trial));
  }
  return f.outcome("4 x 100 instances");
}

Outcome separable_end_to_end() {
  SynthOptions o;
  o.n = 2000;
  o.prevalence = 0.108;
  o.seed = kSynthSeed;
  o.separation = 1.0;
  const auto separable = synth_generate(o);
  // dyslexia rows have zero hits everywhere; check no other row does, so the supports are disjoint
  for (const auto& r : separable.records) {
    if (r.participant.label == Label::Dyslexia) continue;
    bool all_zero = true;
    for (int q : separable.variant.qids()) all_zero = all_zero && r.features[separable.variant.feature_index(q, Measure::Hits)] == 0;
    if (all_zero) return {Outcome::Fail, "generated supports overlap"};
  }
  const TrainConfig cfg;  // 200 trees
  const CvOptions cv;     // 10 folds
  const auto sep = cross_validate(separable, cfg, cv);
  o.separation = 0.0;
  const auto null = cross_validate(synth_generate(o), cfg, cv);
  Failures f;
  if (sep.weighted.recall_dys < kSeparableRecall) f.add(fmt("recall %.4f", sep.weighted.recall_dys));
  if (sep.roc_auc < kSeparableAuc) f.add(fmt("separable AUC %.4f", sep.roc_auc));
  if (null.roc_auc < kNullAucLow || null.roc_auc > kNullAucHigh) f.add(fmt("null AUC %.4f", null.roc_auc));
  return f.outcome(fmt("recall %.4f, AUC %.4f; null AUC %.4f", sep.weighted.recall_dys, sep.roc_auc, null.roc_auc));
}

Outcome monotonic_deterministic() {
  SynthOptions o;
  o.n = 1500;
  o.seed = kSynthSeed;
  const auto ds = synth_generate(o);
  Failures f;

  TrainConfig serial;
  serial.threads = 1;
  TrainConfig parallel;
  parallel.threads = 4;
  const auto a = serialize_model(train(ds, serial));
  const auto b = serialize_model(train(ds, serial));
  const auto c = serialize_model(train(ds, parallel));
  if (a != b) f.add("model bytes differ between serial runs");
  if (a != c) f.add("model bytes differ between serial and parallel training");

  const auto model = deserialize_model(a);
  const auto scores = predict_scores(model, ds);
  std::vector<double> grid;
  for (int i = 0; i <= 200; ++i) grid.push_back(i / 200.0);
  grid.insert(grid.end(), scores.begin(), scores.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<std::uint8_t> prev(scores.size(), 1);
  for (double t : grid) {
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const bool flagged = classify_score(scores[i], t) == Label::Dyslexia;
      if (flagged && !prev[i]) f.add(fmt("record %zu flagged again at t=%g", i, t));
      prev[i] = flagged;
    }
  }

  CvOptions cv;
  cv.k = 5;
  TrainConfig small = serial;
  small.n_trees = 60;
  const auto r1 = report_to_json(cross_validate(ds, small, cv)).dump();
  small.threads = 4;
  const auto r2 = report_to_json(cross_validate(ds, small, cv)).dump();
  if (r1 != r2) f.add("report JSON differs between runs");
  return f.outcome(fmt("%zu model bytes, %zu thresholds, report %zu bytes", a.size(), grid.size(), r1.size()));
}

Outcome plateau() {
  SynthOptions o;
  o.n = 2000;
  o.seed = kSynthSeed;
  o.separation = 0.05;
  const auto cells = sweep(synth_generate(o), {20, 100}, {0}, TrainConfig{}, CvOptions{});
  const double at20 = cells[0].roc_auc, at100 = cells[1].roc_auc;
  if (at20 >= at100 - kPlateauSlack) return {Outcome::Pass, fmt("ROC depth 20 %.4f, depth 100 %.4f", at20, at100)};
  return {Outcome::Fail, fmt("ROC depth 20 %.4f < depth 100 %.4f - %.2f", at20, at100, kPlateauSlack)};
}

Outcome archived_a1() {
  const char* path = std::getenv("DYSCREEN_ARCHIVED_A1");
  if (!path || !*path) return {Outcome::Skip, "archived data not available (set DYSCREEN_ARCHIVED_A1)"};
  const auto a1 = read_dataset_csv(std::filesystem::path(path), AgeVariant::full());
  Failures f;
  auto within = [&](const char* name, double got, double want, double tol) {
    if (std::abs(got - want) > tol) f.add(fmt("%s %.3f vs %.3f +- %.3f", name, got, want, tol));
  };
  CvOptions cv;
  cv.fixed_threshold = 0.24;
  const auto r = cross_validate(a1, TrainConfig{}, cv);
  within("balanced accuracy", 100 * r.weighted.accuracy, 79.4, 2.0);
  within("recall dys", 100 * r.weighted.recall_dys, 80.4, 3.0);
  within("precision dys", 100 * r.weighted.precision_dys, 79.7, 3.0);
  within("ROC", r.roc_auc, 0.871, 0.015);
  within("identity", 100 * (r.weighted.recall_dys + r.weighted.recall_nodys) / 2, 100 * r.weighted.accuracy, 0.1);
  within("majority baseline", 100 * r.majority_baseline_accuracy, 89.2, 0.1);

  const auto cell = sweep(a1, {20}, {14}, TrainConfig{}, CvOptions{});
  within("sweep depth 20 / mtry 14 ROC", cell[0].roc_auc, 0.875, 0.01);

  const auto questions = question_importance(a1);
  std::vector<double> q_only;
  for (const auto& e : questions)
    if (e.group != "Demog.") q_only.push_back(e.percent);
  std::vector<double> sorted = q_only;
  std::sort(sorted.begin(), sorted.end());
  const double median = (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]) / 2;
  for (int q = 1; q <= 9; ++q)
    if (!(q_only[static_cast<std::size_t>(q - 1)] > median)) f.add(fmt("Q%d not above the median", q));
  const auto types = type_importance(a1);
  const auto lowest = std::min_element(types.begin(), types.end(), [](auto& x, auto& y) { return x.percent < y.percent; });
  if (lowest->group != "Demography") f.add("lowest type group is " + lowest->group);
  return f.outcome(fmt("accuracy %.1f, recall %.1f, precision %.1f, ROC %.3f, sweep ROC %.3f", 100 * r.weighted.accuracy,
                       100 * r.weighted.recall_dys, 100 * r.weighted.precision_dys, r.roc_auc, cell[0].roc_auc));
}

}  // namespace

int main() {
  criterion(1, "feature layout", kBudgetLayout, feature_layout);
  criterion(2, "measure identities", kBudgetMeasures, measure_identities);
  criterion(3, "weighted vs duplicated tree", kBudgetDuplication, duplication_oracle);
  criterion(4, "split/gain/AUC/threshold oracles", kBudgetOracles, split_metric_oracles);
  criterion(5, "separable synthetic end to end", kBudgetSeparable, separable_end_to_end);
  criterion(6, "monotonicity and determinism", kBudgetDeterminism, monotonic_deterministic);
  criterion(7, "depth plateau", kBudgetPlateau, plateau);
  criterion(8, "archived A1 reproduction", 3600, archived_a1);
  std::printf("%s\n", g_failed == 0 ? "acceptance: all criteria passed or skipped" : "acceptance: FAILED");
  return g_failed == 0 ? 0 : 1;
}
