#include <algorithm>
#include <cmath>

#include "gm/errors.hpp"
#include "gm/learn.hpp"

namespace gm::detail {

void solve_normal_equations(std::vector<double>& gram, std::vector<double>& rhs,
                            int k, double* beta) {
  // LDLT in place: L fills the strict lower triangle, D the diagonal.
  // Exactly collinear columns surface as (near-)zero pivots and get beta 0.
  double max_diag = 1.0;
  for (int j = 0; j < k; ++j) {
    max_diag = std::max(max_diag, std::abs(gram[j * k + j]));
  }
  const double tol = 1e-11 * max_diag;
  std::vector<char> dead(k, 0);

  for (int j = 0; j < k; ++j) {
    double d = gram[j * k + j];
    for (int s = 0; s < j; ++s) {
      double l = gram[j * k + s];
      d -= l * l * gram[s * k + s];
    }
    dead[j] = std::abs(d) <= tol;
    gram[j * k + j] = d;
    for (int i = j + 1; i < k; ++i) {
      double v = gram[i * k + j];
      for (int s = 0; s < j; ++s) {
        v -= gram[i * k + s] * gram[j * k + s] * gram[s * k + s];
      }
      gram[i * k + j] = dead[j] ? 0.0 : v / d;
    }
  }

  // Forward solve L y = rhs.
  for (int j = 0; j < k; ++j) {
    double v = rhs[j];
    for (int s = 0; s < j; ++s) v -= gram[j * k + s] * rhs[s];
    rhs[j] = v;
  }
  // Scale by D, then back solve L^T beta = y.
  for (int j = 0; j < k; ++j) {
    rhs[j] = dead[j] ? 0.0 : rhs[j] / gram[j * k + j];
  }
  for (int j = k - 1; j >= 0; --j) {
    double v = rhs[j];
    for (int i = j + 1; i < k; ++i) v -= gram[i * k + j] * rhs[i];
    rhs[j] = dead[j] ? 0.0 : v;
  }
  std::copy(rhs.begin(), rhs.begin() + k, beta);
}

}  // namespace gm::detail

namespace gm {

namespace {

void check_training_input(const Matrix& X, const std::vector<int>& y) {
  if (X.empty()) throw ValidationError("fit: empty training matrix");
  if (X.size() != y.size()) {
    throw ValidationError("fit: row/label count mismatch");
  }
  for (const auto& row : X) {
    if (row.size() != X[0].size()) {
      throw ValidationError("fit: ragged training matrix");
    }
  }
  for (int v : y) {
    if (v != 0 && v != 1) throw ValidationError("fit: labels must be 0 or 1");
  }
}

}  // namespace

TrainedModel fit_lin(const Matrix& X, const std::vector<int>& y,
                     const ClassifierConfig& cfg) {
  cfg.validate();
  check_training_input(X, y);
  const int n = static_cast<int>(X.size());
  const int d = static_cast<int>(X[0].size());

  TrainedModel model;
  model.kind = ClassifierKind::lin;
  model.seed = cfg.seed;
  model.decision_threshold = cfg.lin_threshold;
  model.standardized = cfg.standardize;

  Matrix Z;
  const Matrix* work = &X;
  if (cfg.standardize) {
    model.standardizer = standardize_fit(X);
    Z = standardize_apply(model.standardizer, X);
    work = &Z;
  }

  // Constant columns carry no information; give them coefficient 0.
  std::vector<int> active;
  for (int c = 0; c < d; ++c) {
    double lo = (*work)[0][c], hi = (*work)[0][c];
    for (const auto& row : *work) {
      lo = std::min(lo, row[c]);
      hi = std::max(hi, row[c]);
    }
    if (lo != hi) active.push_back(c);
  }

  const int k = static_cast<int>(active.size()) + 1;  // + intercept
  std::vector<double> gram(static_cast<std::size_t>(k) * k, 0.0);
  std::vector<double> rhs(k, 0.0);
  auto value = [&](int row, int col) {
    return col < k - 1 ? (*work)[row][active[col]] : 1.0;
  };
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b <= a; ++b) {
      double sum = 0.0;
      for (int r = 0; r < n; ++r) sum += value(r, a) * value(r, b);
      gram[a * k + b] = sum;
      gram[b * k + a] = sum;
    }
    double sum = 0.0;
    for (int r = 0; r < n; ++r) sum += value(r, a) * y[r];
    rhs[a] = sum;
  }

  std::vector<double> beta(k, 0.0);
  detail::solve_normal_equations(gram, rhs, k, beta.data());

  model.coefficients.assign(d, 0.0);
  for (std::size_t i = 0; i < active.size(); ++i) {
    model.coefficients[active[i]] = beta[i];
  }
  model.intercept = beta[k - 1];
  return model;
}

double decision_value(const TrainedModel& model, std::span<const double> row) {
  if (model.kind == ClassifierKind::rf) {
    int positive = 0;
    for (const auto& tree : model.forest) {
      positive += tree.predict(row) == 1 ? 1 : 0;
    }
    return model.forest.empty()
               ? 0.0
               : static_cast<double>(positive) / model.forest.size();
  }
  double score = model.intercept;
  for (std::size_t c = 0; c < model.coefficients.size(); ++c) {
    double v = row[c];
    if (model.standardized) {
      v = (v - model.standardizer.mean[c]) / model.standardizer.stddev[c];
    }
    score += model.coefficients[c] * v;
  }
  return score;
}

int predict(const TrainedModel& model, std::span<const double> row) {
  if (model.kind == ClassifierKind::rf) {
    int positive = 0;
    for (const auto& tree : model.forest) {
      positive += tree.predict(row) == 1 ? 1 : 0;
    }
    int negative = static_cast<int>(model.forest.size()) - positive;
    return positive > negative ? 1 : 0;  // ties go to the negative class
  }
  return decision_value(model, row) >= model.decision_threshold ? 1 : 0;
}

std::vector<int> predict(const TrainedModel& model, const Matrix& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(predict(model, row));
  return out;
}

TrainedModel fit_classifier(const ClassifierConfig& cfg, const Matrix& X,
                            const std::vector<int>& y) {
  switch (cfg.kind) {
    case ClassifierKind::lin: return fit_lin(X, y, cfg);
    case ClassifierKind::logreg: return fit_log(X, y, cfg);
    case ClassifierKind::svm: return fit_svm(X, y, cfg);
    case ClassifierKind::rf: return fit_rf(X, y, cfg);
  }
  throw ValidationError("unknown classifier kind");
}

}  // namespace gm
