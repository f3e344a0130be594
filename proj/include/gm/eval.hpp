#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gm/learn.hpp"

namespace gm {

// Bit i selects feature column i. Search space is capped well below 64 bits.
using FeatureMask = std::uint64_t;

std::vector<int> mask_indices(FeatureMask mask);
int mask_size(FeatureMask mask);

// Built-in binarization threshold for the supported questionnaire labels
// (phq8, gad7, pss, sss8 and the big-five traits); nullopt for other labels.
std::optional<double> default_label_threshold(const std::string& label);

struct BinarizedLabels {
  std::vector<int> classes;            // aligned with kept_rows
  std::vector<std::size_t> kept_rows;  // row indices with a usable score
  std::vector<std::string> warnings;
};

// class = 1 iff score > threshold; NaN scores are dropped with a warning.
BinarizedLabels binarize(const std::vector<double>& scores, double threshold);

// Exhaustive scan over observed score values minimizing |n1 - n0|
// (ties broken toward the lowest threshold).
double balanced_threshold(const std::vector<double>& scores);

struct FoldPlan {
  int k = 3;
  std::map<std::string, int> assignments;  // participant id -> fold index
  std::uint64_t seed = 0;
};

// Stratified participant-independent folds: participants are shuffled per
// class with a seeded generator and dealt round-robin, so per-class
// participant counts differ by at most 1 across folds.
FoldPlan make_folds(const std::vector<std::string>& participants,
                    const std::vector<int>& classes, int k,
                    std::uint64_t seed);

// Per-row fold index; throws when a participant is missing from the plan.
std::vector<int> row_folds(const FoldPlan& plan,
                           const std::vector<std::string>& participants);

// F1 of the positive class; 0 when the ratio is undefined (no positive
// truth and no positive predictions).
double f1_score(const std::vector<int>& truth,
                const std::vector<int>& predicted);

struct EvalDataset {
  std::vector<std::string> feature_names;
  Matrix X;
  std::vector<int> y;
  std::vector<std::string> participants;
};

struct EvalReport {
  FeatureMask mask = 0;
  std::vector<double> per_fold_f1;
  double f1_mean = 0.0;
  double f1_std = 0.0;                // population std over folds
  std::vector<int> degenerate_folds;  // folds whose training split had 1 class
  Matrix fold_coefficients;           // linear kinds: per fold, masked columns
  std::vector<std::string> polarity;  // per masked feature: + ¬ / ?
  std::vector<std::string> notation;  // feature name with polarity suffix
  ClassifierConfig config;
};

// Train on the other folds, test on each fold, aggregate F1 mean and
// population std. Standardization is fitted on training rows only.
EvalReport cross_validate(const ClassifierConfig& cfg, const EvalDataset& data,
                          const FoldPlan& plan, FeatureMask mask);

// Per-feature polarity across folds. Within fold f, eps_f = 1e-3 * max |coef|;
// "+" when every fold's coefficient > eps_f, "¬" when every one < -eps_f,
// "/" when every |coef| <= eps_f, "?" otherwise.
std::vector<std::string> polarity_report(const Matrix& fold_coefficients);

struct SearchConfig {
  ClassifierConfig classifier;  // kind lin unless overridden
  int max_features = 25;        // 2^25 guard
  bool allow_large = false;
  int jobs = 1;
};

struct SearchResult {
  EvalReport best;
  std::uint64_t masks_evaluated = 0;
};

// Evaluates every non-empty feature mask with one shared fold plan and
// returns the best by (f1_mean desc, fewer features, lower f1_std, lower
// mask value). Deterministic at any job count.
SearchResult feature_search(const EvalDataset& data, const FoldPlan& plan,
                            const SearchConfig& cfg);

}  // namespace gm
