#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>

#include "gm/errors.hpp"
#include "gm/learn.hpp"
#include "gm/rng.hpp"

namespace gm {

int Tree::predict(std::span<const double> row) const {
  int at = 0;
  while (nodes[at].feature >= 0) {
    at = row[nodes[at].feature] <= nodes[at].threshold ? nodes[at].left
                                                       : nodes[at].right;
  }
  return nodes[at].prediction;
}

int Tree::depth() const {
  if (nodes.empty()) return 0;
  std::vector<std::pair<int, int>> stack{{0, 0}};
  int deepest = 0;
  while (!stack.empty()) {
    auto [at, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (nodes[at].feature >= 0) {
      stack.push_back({nodes[at].left, d + 1});
      stack.push_back({nodes[at].right, d + 1});
    }
  }
  return deepest;
}

namespace {

struct TreeBuilder {
  const Matrix& X;
  const std::vector<int>& y;
  const std::vector<double>& sample_weight;
  const RfParams& params;
  Rng& rng;
  std::vector<TreeNode> nodes;
  std::vector<int> feature_pool;

  TreeBuilder(const Matrix& X_, const std::vector<int>& y_,
              const std::vector<double>& w_, const RfParams& p_, Rng& rng_)
      : X(X_), y(y_), sample_weight(w_), params(p_), rng(rng_) {
    feature_pool.resize(X[0].size());
    std::iota(feature_pool.begin(), feature_pool.end(), 0);
  }

  int make_leaf(double wpos, double wneg) {
    TreeNode node;
    node.prediction = wpos > wneg ? 1 : 0;  // tie goes to the negative class
    nodes.push_back(node);
    return static_cast<int>(nodes.size()) - 1;
  }

  static double gini_sum(double wpos, double wneg) {
    double total = wpos + wneg;
    if (total <= 0.0) return 0.0;
    double p = wpos / total;
    double q = wneg / total;
    return total * (1.0 - p * p - q * q);
  }

  int build(std::vector<int> rows, int depth) {
    double wpos = 0.0, wneg = 0.0;
    for (int r : rows) (y[r] == 1 ? wpos : wneg) += sample_weight[r];

    bool pure = wpos == 0.0 || wneg == 0.0;
    if (depth >= params.max_depth || pure ||
        static_cast<int>(rows.size()) < 2 * params.min_leaf) {
      return make_leaf(wpos, wneg);
    }

    // Fresh uniform subset of ceil(feature_fraction * d) features.
    const int d = static_cast<int>(X[0].size());
    int subset = static_cast<int>(
        std::ceil(params.feature_fraction * static_cast<double>(d)));
    subset = std::clamp(subset, 1, d);
    for (int i = 0; i < subset; ++i) {
      int j = i + static_cast<int>(rng.next_below(d - i));
      std::swap(feature_pool[i], feature_pool[j]);
    }
    std::vector<int> candidates(feature_pool.begin(),
                                feature_pool.begin() + subset);
    std::sort(candidates.begin(), candidates.end());

    int best_feature = -1;
    double best_threshold = 0.0;
    double best_score = gini_sum(wpos, wneg);
    std::vector<std::pair<double, int>> ordered(rows.size());
    for (int f : candidates) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        ordered[i] = {X[rows[i]][f], rows[i]};
      }
      std::sort(ordered.begin(), ordered.end());
      double lpos = 0.0, lneg = 0.0;
      for (std::size_t i = 0; i + 1 < ordered.size(); ++i) {
        int r = ordered[i].second;
        (y[r] == 1 ? lpos : lneg) += sample_weight[r];
        if (ordered[i].first == ordered[i + 1].first) continue;
        int left_count = static_cast<int>(i) + 1;
        int right_count = static_cast<int>(ordered.size()) - left_count;
        if (left_count < params.min_leaf || right_count < params.min_leaf) {
          continue;
        }
        double score = gini_sum(lpos, lneg) + gini_sum(wpos - lpos, wneg - lneg);
        if (score < best_score) {
          best_score = score;
          best_feature = f;
          best_threshold = 0.5 * (ordered[i].first + ordered[i + 1].first);
        }
      }
    }
    if (best_feature < 0) return make_leaf(wpos, wneg);

    std::vector<int> left_rows, right_rows;
    for (int r : rows) {
      (X[r][best_feature] <= best_threshold ? left_rows : right_rows)
          .push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    nodes.emplace_back();
    int self = static_cast<int>(nodes.size()) - 1;
    nodes[self].feature = best_feature;
    nodes[self].threshold = best_threshold;
    int left = build(std::move(left_rows), depth + 1);
    int right = build(std::move(right_rows), depth + 1);
    nodes[self].left = left;
    nodes[self].right = right;
    return self;
  }
};

}  // namespace

TrainedModel fit_rf(const Matrix& X, const std::vector<int>& y,
                    const ClassifierConfig& cfg) {
  cfg.validate();
  if (X.empty() || X.size() != y.size()) {
    throw ValidationError("fit_rf: bad training input");
  }
  bool has_pos = false, has_neg = false;
  for (int v : y) (v == 1 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) {
    throw ValidationError("fit_rf: training labels contain a single class");
  }

  const std::size_t n = X.size();
  double n_pos = 0.0, n_neg = 0.0;
  for (int v : y) (v == 1 ? n_pos : n_neg) += 1.0;
  // Balanced class weights from the full training set, shared by all trees.
  std::vector<double> sample_weight(n);
  for (std::size_t i = 0; i < n; ++i) {
    sample_weight[i] = static_cast<double>(n) /
                       (2.0 * (y[i] == 1 ? n_pos : n_neg));
  }

  TrainedModel model;
  model.kind = ClassifierKind::rf;
  model.seed = cfg.seed;
  model.standardized = false;
  model.forest.reserve(cfg.rf.trees);

  for (int t = 0; t < cfg.rf.trees; ++t) {
    Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(t));
    std::vector<int> rows(n);
    if (cfg.rf.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) {
        rows[i] = static_cast<int>(rng.next_below(n));
      }
    } else {
      std::iota(rows.begin(), rows.end(), 0);
    }
    TreeBuilder builder(X, y, sample_weight, cfg.rf, rng);
    builder.build(std::move(rows), 0);
    Tree tree;
    tree.nodes = std::move(builder.nodes);
    model.forest.push_back(std::move(tree));
  }
  return model;
}

}  // namespace gm
