#include <algorithm>
#include <cmath>
#include <set>

#include "gm/errors.hpp"
#include "gm/eval.hpp"
#include "gm/rng.hpp"

namespace gm {

std::vector<int> mask_indices(FeatureMask mask) {
  std::vector<int> out;
  for (int i = 0; mask != 0; ++i, mask >>= 1) {
    if (mask & 1) out.push_back(i);
  }
  return out;
}

int mask_size(FeatureMask mask) {
  int n = 0;
  for (; mask != 0; mask >>= 1) n += mask & 1;
  return n;
}

std::optional<double> default_label_threshold(const std::string& label) {
  static const std::map<std::string, double> table = {
      {"phq8", 7.0},          {"gad7", 7.0},
      {"pss", 17.0},          {"sss8", 6.0},
      {"neuroticism", 17.0},  {"extraversion", 16.0},
      {"agreeableness", 25.0}, {"conscientiousness", 20.0},
      {"openness", 27.0}};
  auto it = table.find(label);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

BinarizedLabels binarize(const std::vector<double>& scores, double threshold) {
  BinarizedLabels out;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) {
      out.warnings.push_back("row " + std::to_string(i) +
                             ": missing score, sample excluded");
      continue;
    }
    out.kept_rows.push_back(i);
    out.classes.push_back(scores[i] > threshold ? 1 : 0);
  }
  bool has_pos = false, has_neg = false;
  for (int c : out.classes) (c == 1 ? has_pos : has_neg) = true;
  if (!out.classes.empty() && (!has_pos || !has_neg)) {
    out.warnings.push_back(
        "binarization is degenerate: every kept sample falls in one class");
  }
  return out;
}

double balanced_threshold(const std::vector<double>& scores) {
  std::set<double> candidates;
  std::vector<double> usable;
  for (double s : scores) {
    if (!std::isnan(s)) {
      candidates.insert(s);
      usable.push_back(s);
    }
  }
  if (usable.empty()) {
    throw ValidationError("balanced_threshold: no usable scores");
  }
  double best_threshold = *candidates.begin();
  long best_gap = static_cast<long>(usable.size()) + 1;
  for (double t : candidates) {  // ascending: ties keep the lowest threshold
    long n1 = 0;
    for (double s : usable) n1 += s > t ? 1 : 0;
    long n0 = static_cast<long>(usable.size()) - n1;
    long gap = std::labs(n1 - n0);
    if (gap < best_gap) {
      best_gap = gap;
      best_threshold = t;
    }
  }
  return best_threshold;
}

FoldPlan make_folds(const std::vector<std::string>& participants,
                    const std::vector<int>& classes, int k,
                    std::uint64_t seed) {
  if (k < 2) throw ValidationError("make_folds: need at least 2 folds");
  if (participants.size() != classes.size()) {
    throw ValidationError("make_folds: participants/classes length mismatch");
  }
  // Participant class = class of its first sample; first-appearance order
  // keeps the shuffle deterministic.
  std::vector<std::string> order[2];
  std::map<std::string, int> seen;
  for (std::size_t i = 0; i < participants.size(); ++i) {
    auto [it, inserted] = seen.emplace(participants[i], classes[i]);
    if (inserted) order[classes[i] == 1 ? 1 : 0].push_back(participants[i]);
  }
  if (order[0].empty() || order[1].empty()) {
    throw ValidationError(
        "make_folds: both classes need at least one participant");
  }
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  for (int c = 0; c < 2; ++c) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(c));
    rng.shuffle(order[c]);
    for (std::size_t i = 0; i < order[c].size(); ++i) {
      plan.assignments[order[c][i]] = static_cast<int>(i % k);
    }
  }
  return plan;
}

std::vector<int> row_folds(const FoldPlan& plan,
                           const std::vector<std::string>& participants) {
  std::vector<int> folds(participants.size());
  for (std::size_t i = 0; i < participants.size(); ++i) {
    auto it = plan.assignments.find(participants[i]);
    if (it == plan.assignments.end()) {
      throw ValidationError("fold plan is missing participant '" +
                            participants[i] + "'");
    }
    folds[i] = it->second;
  }
  return folds;
}

double f1_score(const std::vector<int>& truth,
                const std::vector<int>& predicted) {
  if (truth.size() != predicted.size()) {
    throw ValidationError("f1_score: length mismatch");
  }
  long tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] == 1) {
      (truth[i] == 1 ? tp : fp) += 1;
    } else if (truth[i] == 1) {
      fn += 1;
    }
  }
  long denom = 2 * tp + fp + fn;
  if (denom == 0) return 0.0;
  return 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

std::vector<std::string> polarity_report(const Matrix& fold_coefficients) {
  if (fold_coefficients.empty()) return {};
  const std::size_t n_features = fold_coefficients[0].size();
  std::vector<double> eps(fold_coefficients.size(), 0.0);
  for (std::size_t f = 0; f < fold_coefficients.size(); ++f) {
    for (double c : fold_coefficients[f]) {
      eps[f] = std::max(eps[f], std::abs(c));
    }
    eps[f] *= 1e-3;
  }
  std::vector<std::string> tokens(n_features);
  for (std::size_t j = 0; j < n_features; ++j) {
    bool all_pos = true, all_neg = true, all_zero = true;
    for (std::size_t f = 0; f < fold_coefficients.size(); ++f) {
      double c = fold_coefficients[f][j];
      all_pos = all_pos && c > eps[f];
      all_neg = all_neg && c < -eps[f];
      all_zero = all_zero && std::abs(c) <= eps[f];
    }
    tokens[j] = all_pos ? "+" : all_neg ? "¬" : all_zero ? "/" : "?";
  }
  return tokens;
}

EvalReport cross_validate(const ClassifierConfig& cfg, const EvalDataset& data,
                          const FoldPlan& plan, FeatureMask mask) {
  if (data.X.empty()) throw ValidationError("cross_validate: empty dataset");
  if (data.X.size() != data.y.size() ||
      data.X.size() != data.participants.size()) {
    throw ValidationError("cross_validate: misaligned dataset columns");
  }
  const int d = static_cast<int>(data.X[0].size());
  std::vector<int> columns = mask_indices(mask);
  if (columns.empty()) {
    throw ValidationError("cross_validate: mask selects no features");
  }
  if (columns.back() >= d) {
    throw ValidationError("cross_validate: mask selects a feature beyond " +
                          std::to_string(d) + " columns");
  }
  std::vector<int> folds = row_folds(plan, data.participants);

  EvalReport report;
  report.mask = mask;
  report.config = cfg;
  report.per_fold_f1.assign(plan.k, 0.0);

  bool linear_kind = cfg.kind != ClassifierKind::rf;
  if (linear_kind) {
    report.fold_coefficients.assign(plan.k,
                                    std::vector<double>(columns.size(), 0.0));
  }

  for (int f = 0; f < plan.k; ++f) {
    Matrix train_x, test_x;
    std::vector<int> train_y, test_y;
    for (std::size_t i = 0; i < data.X.size(); ++i) {
      std::vector<double> row(columns.size());
      for (std::size_t c = 0; c < columns.size(); ++c) {
        row[c] = data.X[i][columns[c]];
      }
      if (folds[i] == f) {
        test_x.push_back(std::move(row));
        test_y.push_back(data.y[i]);
      } else {
        train_x.push_back(std::move(row));
        train_y.push_back(data.y[i]);
      }
    }
    bool has_pos = false, has_neg = false;
    for (int v : train_y) (v == 1 ? has_pos : has_neg) = true;
    if (train_y.empty() || !has_pos || !has_neg) {
      report.per_fold_f1[f] = 0.0;
      report.degenerate_folds.push_back(f);
      continue;
    }
    TrainedModel model = fit_classifier(cfg, train_x, train_y);
    report.per_fold_f1[f] = f1_score(test_y, predict(model, test_x));
    if (linear_kind) report.fold_coefficients[f] = model.coefficients;
  }

  double mean = 0.0;
  for (double v : report.per_fold_f1) mean += v;
  mean /= report.per_fold_f1.size();
  double var = 0.0;
  for (double v : report.per_fold_f1) var += (v - mean) * (v - mean);
  var /= report.per_fold_f1.size();
  report.f1_mean = mean;
  report.f1_std = std::sqrt(var);

  if (linear_kind) {
    report.polarity = polarity_report(report.fold_coefficients);
    report.notation.reserve(columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
      std::string name = columns[j] < static_cast<int>(data.feature_names.size())
                             ? data.feature_names[columns[j]]
                             : "f" + std::to_string(columns[j]);
      report.notation.push_back(name + report.polarity[j]);
    }
  }
  return report;
}

}  // namespace gm
