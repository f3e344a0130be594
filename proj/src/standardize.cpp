#include <algorithm>
#include <cmath>

#include "gm/errors.hpp"
#include "gm/learn.hpp"

namespace gm {

const char* to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::lin: return "lin";
    case ClassifierKind::logreg: return "log";
    case ClassifierKind::svm: return "svm";
    case ClassifierKind::rf: return "rf";
  }
  return "?";
}

ClassifierKind classifier_from_string(const std::string& s) {
  if (s == "lin") return ClassifierKind::lin;
  if (s == "log") return ClassifierKind::logreg;
  if (s == "svm") return ClassifierKind::svm;
  if (s == "rf") return ClassifierKind::rf;
  throw ValidationError("unknown classifier '" + s + "' (lin|log|svm|rf)");
}

void ClassifierConfig::validate() const {
  if (rf.trees <= 0 || rf.max_depth <= 0 || rf.min_leaf <= 0) {
    throw ValidationError("rf parameters must be positive");
  }
  if (!(rf.feature_fraction > 0.0) || rf.feature_fraction > 1.0) {
    throw ValidationError("rf feature_fraction must be in (0, 1]");
  }
  if (!(svm_c > 0.0)) throw ValidationError("svm C must be positive");
  if (logistic_max_iter <= 0 || !(logistic_tolerance > 0.0)) {
    throw ValidationError("logistic solver settings must be positive");
  }
}

Standardizer standardize_fit(const Matrix& train) {
  if (train.empty()) throw ValidationError("standardize_fit: empty matrix");
  const std::size_t cols = train[0].size();
  Standardizer s;
  s.mean.assign(cols, 0.0);
  s.stddev.assign(cols, 1.0);
  const double n = static_cast<double>(train.size());
  for (std::size_t c = 0; c < cols; ++c) {
    double lo = train[0][c], hi = train[0][c];
    double sum = 0.0;
    for (const auto& row : train) {
      lo = std::min(lo, row[c]);
      hi = std::max(hi, row[c]);
      sum += row[c];
    }
    if (lo == hi) {
      // Constant column: mean is the constant itself, std treated as 1, so
      // training z-scores are exactly zero.
      s.mean[c] = lo;
      s.stddev[c] = 1.0;
      continue;
    }
    double mean = sum / n;
    double acc = 0.0;
    for (const auto& row : train) {
      double d = row[c] - mean;
      acc += d * d;
    }
    s.mean[c] = mean;
    s.stddev[c] = std::sqrt(acc / n);
  }
  return s;
}

Matrix standardize_apply(const Standardizer& s, const Matrix& rows) {
  Matrix out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (row.size() != s.mean.size()) {
      throw ValidationError("standardize_apply: column count mismatch");
    }
    std::vector<double> z(row.size());
    for (std::size_t c = 0; c < row.size(); ++c) {
      z[c] = (row[c] - s.mean[c]) / s.stddev[c];
    }
    out.push_back(std::move(z));
  }
  return out;
}

}  // namespace gm
