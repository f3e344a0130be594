#include <algorithm>
#include <cmath>
#include <cstddef>

#include "gm/errors.hpp"
#include "gm/eval.hpp"
#include "gm/parallel.hpp"

namespace gm {

namespace {

// Per-fold precomputation for the lin-classifier search. Holds the full
// standardized Gram (+ intercept column) so each mask solve only gathers a
// submatrix; the arithmetic matches fit_lin summation order exactly, so a
// mask's score here equals cross_validate's for the same mask.
struct FoldData {
  bool degenerate = false;     // training split empty or single-class
  int n_train = 0;
  std::vector<char> constant;  // per column: constant across training rows
  Matrix z_test;               // standardized test rows
  std::vector<int> test_y;
  std::vector<double> gram;    // (d+1)^2 row-major, intercept index d
  std::vector<double> xty;     // d+1
};

struct Candidate {
  bool valid = false;
  double f1_mean = -1.0;
  double f1_std = 0.0;
  int bits = 0;
  FeatureMask mask = 0;
};

// Total order: greater mean, then fewer features, then lower std, then
// lower mask value. Strict for distinct masks, so reduction order of the
// parallel chunks cannot change the winner.
bool better(const Candidate& a, const Candidate& b) {
  if (!b.valid) return a.valid;
  if (!a.valid) return false;
  if (a.f1_mean != b.f1_mean) return a.f1_mean > b.f1_mean;
  if (a.bits != b.bits) return a.bits < b.bits;
  if (a.f1_std != b.f1_std) return a.f1_std < b.f1_std;
  return a.mask < b.mask;
}

FoldData build_fold(const EvalDataset& data, const std::vector<int>& folds,
                    int fold, bool standardize) {
  FoldData out;
  const int d = static_cast<int>(data.X[0].size());
  Matrix train_x, test_x;
  std::vector<int> train_y;
  for (std::size_t i = 0; i < data.X.size(); ++i) {
    if (folds[i] == fold) {
      test_x.push_back(data.X[i]);
      out.test_y.push_back(data.y[i]);
    } else {
      train_x.push_back(data.X[i]);
      train_y.push_back(data.y[i]);
    }
  }
  bool has_pos = false, has_neg = false;
  for (int v : train_y) (v == 1 ? has_pos : has_neg) = true;
  out.degenerate = train_y.empty() || !has_pos || !has_neg;
  if (out.degenerate) return out;

  out.n_train = static_cast<int>(train_x.size());
  Matrix z_train;
  if (standardize) {
    Standardizer st = standardize_fit(train_x);
    z_train = standardize_apply(st, train_x);
    out.z_test = standardize_apply(st, test_x);
  } else {
    z_train = std::move(train_x);
    out.z_test = std::move(test_x);
  }

  out.constant.assign(d, 0);
  for (int c = 0; c < d; ++c) {
    double lo = z_train[0][c], hi = z_train[0][c];
    for (const auto& row : z_train) {
      lo = std::min(lo, row[c]);
      hi = std::max(hi, row[c]);
    }
    out.constant[c] = lo == hi;
  }

  const int w = d + 1;
  out.gram.assign(static_cast<std::size_t>(w) * w, 0.0);
  out.xty.assign(w, 0.0);
  auto value = [&](int row, int col) {
    return col < d ? z_train[row][col] : 1.0;
  };
  for (int a = 0; a < w; ++a) {
    for (int b = 0; b <= a; ++b) {
      double sum = 0.0;
      for (int r = 0; r < out.n_train; ++r) sum += value(r, a) * value(r, b);
      out.gram[a * w + b] = sum;
      out.gram[b * w + a] = sum;
    }
    double sum = 0.0;
    for (int r = 0; r < out.n_train; ++r) sum += value(r, a) * train_y[r];
    out.xty[a] = sum;
  }
  return out;
}

// Scratch buffers reused across the masks of one chunk.
struct Workspace {
  std::vector<int> active;
  std::vector<double> gram;
  std::vector<double> rhs;
  std::vector<double> beta;
  std::vector<double> f1;
};

double score_mask(const std::vector<FoldData>& fold_data, int d,
                  FeatureMask mask, const ClassifierConfig& cfg, Workspace& ws,
                  double* f1_std_out) {
  ws.f1.assign(fold_data.size(), 0.0);
  for (std::size_t f = 0; f < fold_data.size(); ++f) {
    const FoldData& fd = fold_data[f];
    if (fd.degenerate) continue;
    ws.active.clear();
    for (int c = 0; c < d; ++c) {
      if ((mask >> c & 1) && !fd.constant[c]) ws.active.push_back(c);
    }
    const int k = static_cast<int>(ws.active.size()) + 1;
    const int w = d + 1;
    ws.gram.resize(static_cast<std::size_t>(k) * k);
    ws.rhs.resize(k);
    ws.beta.assign(k, 0.0);
    for (int a = 0; a < k; ++a) {
      int ga = a < k - 1 ? ws.active[a] : d;
      for (int b = 0; b < k; ++b) {
        int gb = b < k - 1 ? ws.active[b] : d;
        ws.gram[a * k + b] = fd.gram[ga * w + gb];
      }
      ws.rhs[a] = fd.xty[ga];
    }
    detail::solve_normal_equations(ws.gram, ws.rhs, k, ws.beta.data());

    long tp = 0, fp = 0, fn = 0;
    for (std::size_t r = 0; r < fd.z_test.size(); ++r) {
      double score = ws.beta[k - 1];
      for (int a = 0; a < k - 1; ++a) {
        score += ws.beta[a] * fd.z_test[r][ws.active[a]];
      }
      int pred = score >= cfg.lin_threshold ? 1 : 0;
      if (pred == 1) {
        (fd.test_y[r] == 1 ? tp : fp) += 1;
      } else if (fd.test_y[r] == 1) {
        fn += 1;
      }
    }
    long denom = 2 * tp + fp + fn;
    ws.f1[f] = denom == 0
                   ? 0.0
                   : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  }
  double mean = 0.0;
  for (double v : ws.f1) mean += v;
  mean /= ws.f1.size();
  double var = 0.0;
  for (double v : ws.f1) var += (v - mean) * (v - mean);
  var /= ws.f1.size();
  *f1_std_out = std::sqrt(var);
  return mean;
}

}  // namespace

SearchResult feature_search(const EvalDataset& data, const FoldPlan& plan,
                            const SearchConfig& cfg) {
  if (data.X.empty()) throw ValidationError("feature_search: empty dataset");
  const int d = static_cast<int>(data.X[0].size());
  if (d < 1) throw ValidationError("feature_search: no feature columns");
  if (d > cfg.max_features && !cfg.allow_large) {
    throw ValidationError(
        "feature_search: " + std::to_string(d) + " features exceed the 2^" +
        std::to_string(cfg.max_features) +
        " search guard; pass the large-search override to proceed");
  }
  if (d > 40) {
    throw ValidationError("feature_search: more than 40 features is unsupported");
  }
  if (cfg.classifier.kind != ClassifierKind::lin) {
    throw ValidationError("feature_search: the exhaustive search uses the lin "
                          "classifier");
  }
  cfg.classifier.validate();

  std::vector<int> folds = row_folds(plan, data.participants);
  std::vector<FoldData> fold_data;
  fold_data.reserve(plan.k);
  for (int f = 0; f < plan.k; ++f) {
    fold_data.push_back(build_fold(data, folds, f, cfg.classifier.standardize));
  }

  const FeatureMask total = (FeatureMask{1} << d) - 1;
  const FeatureMask chunk_size = 4096;
  const std::size_t chunks =
      static_cast<std::size_t>((total + chunk_size - 1) / chunk_size);
  std::vector<Candidate> chunk_best(chunks);

  parallel_for(chunks, cfg.jobs, [&](std::size_t chunk) {
    Workspace ws;
    Candidate best;
    FeatureMask lo = 1 + chunk * chunk_size;
    FeatureMask hi = std::min<FeatureMask>(total, lo + chunk_size - 1);
    for (FeatureMask mask = lo; mask <= hi; ++mask) {
      Candidate cand;
      cand.valid = true;
      cand.mask = mask;
      cand.bits = mask_size(mask);
      cand.f1_mean = score_mask(fold_data, d, mask, cfg.classifier, ws,
                                &cand.f1_std);
      if (better(cand, best)) best = cand;
    }
    chunk_best[chunk] = best;
  });

  Candidate winner;
  for (const Candidate& c : chunk_best) {
    if (better(c, winner)) winner = c;
  }

  SearchResult result;
  result.masks_evaluated = total;
  // The definitive report comes from the ordinary cross-validation path; the
  // engine's score for the winning mask matches it exactly.
  result.best = cross_validate(cfg.classifier, data, plan, winner.mask);
  return result;
}

}  // namespace gm
