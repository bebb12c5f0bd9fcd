#include "dyscreen/forest.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dyscreen/error.hpp"
#include "dyscreen/parallel.hpp"
#include "dyscreen/rng.hpp"

namespace dyscreen {

int TrainConfig::resolved_mtry(std::size_t feature_count) const {
  if (mtry > 0) return mtry;
  return static_cast<int>(std::bit_width(feature_count));  // floor(log2 F) + 1
}

void TrainConfig::validate(std::size_t feature_count) const {
  if (n_trees < 1) throw DataError("n_trees must be >= 1");
  if (max_depth < 0) throw DataError("max_depth must be >= 0 (0 = unlimited)");
  const int m = resolved_mtry(feature_count);
  if (m < 1 || static_cast<std::size_t>(m) > feature_count)
    throw DataError("mtry " + std::to_string(m) + " outside [1, " + std::to_string(feature_count) + "]");
  if (min_node_weight && !(*min_node_weight > 0)) throw DataError("min_node_weight must be positive");
}

FeatureMatrix FeatureMatrix::from_rows(std::span<const std::vector<double>> rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  FeatureMatrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw DataError("ragged feature rows");
    for (std::size_t c = 0; c < cols; ++c) m.at(r, c) = rows[r][c];
  }
  return m;
}

FeatureMatrix FeatureMatrix::from_dataset(const Dataset& dataset) {
  const std::size_t cols = dataset.variant.feature_count();
  FeatureMatrix m(dataset.size(), cols);
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    const auto& f = dataset.records[r].features;
    if (f.size() != cols) throw DataError("record " + std::to_string(r) + " has the wrong feature count");
    for (std::size_t c = 0; c < cols; ++c) m.at(r, c) = f[c];
  }
  return m;
}

std::vector<double> FeatureMatrix::row(std::size_t r) const {
  std::vector<double> out(cols_);
  for (std::size_t c = 0; c < cols_; ++c) out[c] = at(r, c);
  return out;
}

ClassWeights class_weights(std::size_t n, std::size_t n_dys) {
  if (n_dys == 0 || n_dys >= n) throw DataError("class weights need both classes present");
  const double total = static_cast<double>(n);
  return {total / (2.0 * static_cast<double>(n_dys)), total / (2.0 * static_cast<double>(n - n_dys))};
}

ClassWeights class_weights(const Dataset& dataset) {
  dataset.require_labeled();
  return class_weights(dataset.size(), dataset.count(Label::Dyslexia));
}

double gini(double positive_mass, double negative_mass) {
  if (positive_mass < 0 || negative_mass < 0) throw std::invalid_argument("gini: negative class mass");
  const double total = positive_mass + negative_mass;
  if (!(total > 0)) throw std::invalid_argument("gini: both class masses are zero");
  const double p = positive_mass / total;
  const double q = negative_mass / total;
  return 1.0 - p * p - q * q;
}

namespace {

double node_gini(double pos, double neg) {
  pos = std::max(pos, 0.0);
  neg = std::max(neg, 0.0);
  const double total = pos + neg;
  if (!(total > 0)) return 0.0;
  const double p = pos / total;
  const double q = neg / total;
  return 1.0 - p * p - q * q;
}

/// true when `cand` should replace `best` under the gain/feature/threshold ordering.
bool better_split(const Split& cand, const std::optional<Split>& best) {
  if (!best) return true;
  if (cand.gain > best->gain + kGainTolerance) return true;
  if (cand.gain < best->gain - kGainTolerance) return false;
  if (cand.feature != best->feature) return cand.feature < best->feature;
  return cand.threshold < best->threshold;
}

double midpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid < hi ? mid : lo;
}

/// Reusable scan state for one tree (or one best_split call).
class SplitScanner {
 public:
  SplitScanner(const FeatureMatrix& x, std::span<const std::uint8_t> positive, std::span<const std::size_t> sample,
               std::span<const double> weights)
      : x_(x), positive_(positive), sample_(sample), weights_(weights) {}

  /// Best threshold for one feature over sample positions `positions`, given the node's masses.
  std::optional<Split> scan(std::size_t feature, std::span<const std::uint32_t> positions, double pos_total,
                            double neg_total) {
    const auto column = x_.column(feature);
    buffer_.clear();
    for (auto p : positions) buffer_.emplace_back(column[sample_[p]], p);
    std::sort(buffer_.begin(), buffer_.end());

    const double total = pos_total + neg_total;
    const double parent = node_gini(pos_total, neg_total);
    std::optional<Split> best;
    double left_pos = 0, left_neg = 0;
    for (std::size_t i = 0; i + 1 < buffer_.size(); ++i) {
      const auto p = buffer_[i].second;
      const double w = weights_[p];
      if (positive_[sample_[p]]) left_pos += w;
      else left_neg += w;
      const double v = buffer_[i].first;
      const double next = buffer_[i + 1].first;
      if (!(next > v)) continue;
      const double right_pos = pos_total - left_pos;
      const double right_neg = neg_total - left_neg;
      const double left_w = left_pos + left_neg;
      const double right_w = right_pos + right_neg;
      const double gain = parent - (left_w / total) * node_gini(left_pos, left_neg) -
                          (right_w / total) * node_gini(right_pos, right_neg);
      if (!best || gain > best->gain + kGainTolerance) best = Split{feature, midpoint(v, next), gain};
    }
    if (best && best->gain <= kGainTolerance) return std::nullopt;
    return best;
  }

 private:
  const FeatureMatrix& x_;
  std::span<const std::uint8_t> positive_;
  std::span<const std::size_t> sample_;
  std::span<const double> weights_;
  std::vector<std::pair<double, std::uint32_t>> buffer_;
};

std::pair<double, double> masses(std::span<const std::uint32_t> positions, std::span<const std::uint8_t> positive,
                                 std::span<const std::size_t> sample, std::span<const double> weights) {
  double pos = 0, neg = 0;
  for (auto p : positions) {
    if (positive[sample[p]]) pos += weights[p];
    else neg += weights[p];
  }
  return {pos, neg};
}

void check_inputs(const FeatureMatrix& x, std::span<const std::uint8_t> positive, std::span<const std::size_t> sample,
                  std::span<const double> weights) {
  if (positive.size() != x.rows()) throw std::invalid_argument("label count differs from matrix rows");
  if (weights.size() != sample.size()) throw std::invalid_argument("one weight per sample entry required");
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (sample[i] >= x.rows()) throw std::invalid_argument("sample row out of range");
    if (!(weights[i] > 0) || !std::isfinite(weights[i])) throw std::invalid_argument("weights must be positive");
  }
}

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, std::span<const std::uint8_t> positive, std::span<const std::size_t> sample,
              std::span<const double> weights, const TrainConfig& config, std::uint64_t seed)
      : x_(x),
        positive_(positive),
        sample_(sample),
        weights_(weights),
        scanner_(x, positive, sample, weights),
        rng_(seed),
        max_depth_(config.max_depth),
        mtry_(static_cast<std::size_t>(config.resolved_mtry(x.cols()))),
        min_weight_(config.min_node_weight ? *config.min_node_weight
                                           : *std::min_element(weights.begin(), weights.end())),
        order_(sample.size()),
        features_(x.cols()) {
    std::iota(order_.begin(), order_.end(), 0u);
  }

  DecisionTree build() {
    grow(0, order_.size(), 0);
    return DecisionTree(std::move(nodes_));
  }

 private:
  std::int32_t grow(std::size_t begin, std::size_t end, int depth) {
    const auto positions = std::span<const std::uint32_t>(order_).subspan(begin, end - begin);
    const auto [pos, neg] = masses(positions, positive_, sample_, weights_);
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(TreeNode{-1, 0.0, -1, -1, pos / (pos + neg)});

    if (pos == 0 || neg == 0) return id;
    if (max_depth_ > 0 && depth >= max_depth_) return id;
    if (pos + neg < min_weight_) return id;

    // mtry draws without replacement; keep drawing past mtry until some feature splits
    std::iota(features_.begin(), features_.end(), std::size_t{0});
    std::optional<Split> best;
    for (std::size_t j = 0; j < features_.size(); ++j) {
      if (j >= mtry_ && best) break;
      const std::size_t pick = j + static_cast<std::size_t>(rng_.below(features_.size() - j));
      std::swap(features_[j], features_[pick]);
      if (auto s = scanner_.scan(features_[j], positions, pos, neg); s && better_split(*s, best)) best = s;
    }
    if (!best) return id;

    const auto column = x_.column(best->feature);
    const double threshold = best->threshold;
    auto mid = std::stable_partition(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                                     order_.begin() + static_cast<std::ptrdiff_t>(end),
                                     [&](std::uint32_t p) { return column[sample_[p]] <= threshold; });
    const auto split_at = static_cast<std::size_t>(mid - order_.begin());

    const auto left = grow(begin, split_at, depth + 1);
    const auto right = grow(split_at, end, depth + 1);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = static_cast<std::int32_t>(best->feature);
    node.threshold = threshold;
    node.left = left;
    node.right = right;
    node.value = pos / (pos + neg);
    return id;
  }

  const FeatureMatrix& x_;
  std::span<const std::uint8_t> positive_;
  std::span<const std::size_t> sample_;
  std::span<const double> weights_;
  SplitScanner scanner_;
  Rng rng_;
  int max_depth_;
  std::size_t mtry_;
  double min_weight_;
  std::vector<std::uint32_t> order_;
  std::vector<std::size_t> features_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

std::optional<Split> best_split(const FeatureMatrix& x, std::span<const std::uint8_t> positive,
                                std::span<const std::size_t> sample, std::span<const double> weights,
                                std::span<const std::size_t> candidate_features) {
  check_inputs(x, positive, sample, weights);
  std::vector<std::uint32_t> positions(sample.size());
  std::iota(positions.begin(), positions.end(), 0u);
  const auto [pos, neg] = masses(positions, positive, sample, weights);
  if (!(pos + neg > 0)) return std::nullopt;
  SplitScanner scanner(x, positive, sample, weights);
  std::optional<Split> best;
  for (auto f : candidate_features) {
    if (f >= x.cols()) throw std::invalid_argument("candidate feature out of range");
    if (auto s = scanner.scan(f, positions, pos, neg); s && better_split(*s, best)) best = s;
  }
  return best;
}

DecisionTree::DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw ModelFormatError("tree has no nodes");
  const auto n = static_cast<std::int32_t>(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& node = nodes_[i];
    if (node.is_leaf()) {
      if (!(node.value >= 0.0 && node.value <= 1.0)) throw ModelFormatError("leaf fraction outside [0,1]");
    } else {
      // children are created after their parent
      const auto self = static_cast<std::int32_t>(i);
      if (node.left <= self || node.left >= n || node.right <= self || node.right >= n)
        throw ModelFormatError("tree node has dangling child links");
    }
  }
}

std::size_t DecisionTree::leaf_for(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& node = nodes_[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right);
  }
  return i;
}

double DecisionTree::predict(std::span<const double> x) const { return nodes_[leaf_for(x)].value; }

int DecisionTree::depth() const {
  std::vector<int> d(nodes_.size(), 0);
  int out = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    out = std::max(out, d[i]);
    if (!nodes_[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
  }
  return out;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const auto& n) { return n.is_leaf(); }));
}

std::size_t DecisionTree::max_feature_index() const {
  std::size_t out = 0;
  for (const auto& n : nodes_)
    if (!n.is_leaf()) out = std::max(out, static_cast<std::size_t>(n.feature));
  return out;
}

DecisionTree build_tree(const FeatureMatrix& x, std::span<const std::uint8_t> positive,
                        std::span<const std::size_t> sample, std::span<const double> weights,
                        const TrainConfig& config, std::uint64_t seed) {
  if (sample.empty()) throw std::invalid_argument("build_tree needs a non-empty sample");
  check_inputs(x, positive, sample, weights);
  config.validate(x.cols());
  return TreeBuilder(x, positive, sample, weights, config, seed).build();
}

BootstrapSample bootstrap(std::size_t n, std::uint64_t stream_seed) {
  Rng rng(stream_seed);
  std::vector<std::uint32_t> counts(n, 0);
  for (std::size_t i = 0; i < n; ++i) ++counts[rng.below(n)];
  BootstrapSample out;
  for (std::size_t r = 0; r < n; ++r) {
    if (counts[r] == 0) continue;
    out.rows.push_back(r);
    out.multiplicity.push_back(counts[r]);
  }
  return out;
}

std::uint64_t bootstrap_seed(std::uint64_t seed, std::size_t tree_index) { return derive_seed(seed, tree_index, 0); }
std::uint64_t tree_seed(std::uint64_t seed, std::size_t tree_index) { return derive_seed(seed, tree_index, 1); }

ForestModel train(const Dataset& dataset, const TrainConfig& config) {
  dataset.require_labeled();
  const std::size_t n = dataset.size();
  const std::size_t n_dys = dataset.count(Label::Dyslexia);
  if (n_dys == 0 || n_dys == n) throw DataError("training needs both classes; dataset has a single class");

  const std::size_t features = dataset.variant.feature_count();
  config.validate(features);
  ForestModel model;
  model.variant = dataset.variant;
  model.weights = class_weights(n, n_dys);
  model.config = config;
  model.config.mtry = config.resolved_mtry(features);
  if (!model.config.min_node_weight) model.config.min_node_weight = std::min(model.weights.dys, model.weights.nodys);

  const FeatureMatrix x = FeatureMatrix::from_dataset(dataset);
  std::vector<std::uint8_t> positive(n);
  for (std::size_t i = 0; i < n; ++i) positive[i] = dataset.records[i].participant.label == Label::Dyslexia;

  model.trees.resize(static_cast<std::size_t>(config.n_trees));
  parallel_for(model.trees.size(), config.threads, [&](std::size_t i) {
    const auto sample = bootstrap(n, bootstrap_seed(config.seed, i));
    std::vector<double> weights(sample.rows.size());
    for (std::size_t j = 0; j < sample.rows.size(); ++j)
      weights[j] = (positive[sample.rows[j]] ? model.weights.dys : model.weights.nodys) * sample.multiplicity[j];
    model.trees[i] = build_tree(x, positive, sample.rows, weights, model.config, tree_seed(config.seed, i));
  });
  return model;
}

double predict_score(const ForestModel& model, std::span<const double> features) {
  if (features.size() != model.variant.feature_count())
    throw DataError("feature vector has " + std::to_string(features.size()) + " values, model variant " +
                    model.variant.label() + " expects " + std::to_string(model.variant.feature_count()));
  if (model.trees.empty()) throw DataError("model has no trees");
  double sum = 0;
  for (const auto& tree : model.trees) sum += tree.predict(features);
  return sum / static_cast<double>(model.trees.size());
}

std::vector<double> predict_scores(const ForestModel& model, const Dataset& dataset) {
  std::vector<double> out;
  out.reserve(dataset.size());
  for (const auto& r : dataset.records) out.push_back(predict_score(model, r.features));
  return out;
}

Label classify(const ForestModel& model, std::span<const double> features) {
  return classify_score(predict_score(model, features), model.threshold);
}

}  // namespace dyscreen
