#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>

#include "gm/errors.hpp"
#include "gm/learn.hpp"
#include "gm/rng.hpp"

namespace gm {

std::vector<double> svm_sample_weights(const std::vector<int>& y, double c) {
  const double n = static_cast<double>(y.size());
  double n_pos = 0.0, n_neg = 0.0;
  for (int v : y) (v == 1 ? n_pos : n_neg) += 1.0;
  std::vector<double> weights(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    double n_class = y[i] == 1 ? n_pos : n_neg;
    weights[i] = c * n / (2.0 * n_class);
  }
  return weights;
}

double svm_primal_objective(const std::vector<double>& coefficients,
                            double intercept, const Matrix& X,
                            const std::vector<int>& y,
                            const std::vector<double>& sample_weights) {
  double obj = 0.5 * intercept * intercept;
  for (double w : coefficients) obj += 0.5 * w * w;
  for (std::size_t i = 0; i < X.size(); ++i) {
    double score = intercept;
    for (std::size_t c = 0; c < coefficients.size(); ++c) {
      score += coefficients[c] * X[i][c];
    }
    double target = y[i] == 1 ? 1.0 : -1.0;
    obj += sample_weights[i] * std::max(0.0, 1.0 - target * score);
  }
  return obj;
}

TrainedModel fit_svm(const Matrix& X, const std::vector<int>& y,
                     const ClassifierConfig& cfg) {
  cfg.validate();
  if (X.empty() || X.size() != y.size()) {
    throw ValidationError("fit_svm: bad training input");
  }
  bool has_pos = false, has_neg = false;
  for (int v : y) (v == 1 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) {
    throw ValidationError("fit_svm: training labels contain a single class");
  }

  TrainedModel model;
  model.kind = ClassifierKind::svm;
  model.seed = cfg.seed;
  model.decision_threshold = 0.0;
  model.standardized = cfg.standardize;

  Matrix Z;
  const Matrix* work = &X;
  if (cfg.standardize) {
    model.standardizer = standardize_fit(X);
    Z = standardize_apply(model.standardizer, X);
    work = &Z;
  }
  const std::size_t n = work->size();
  const std::size_t d = (*work)[0].size();

  std::vector<double> weights = svm_sample_weights(y, cfg.svm_c);
  std::vector<double> targets(n);
  for (std::size_t i = 0; i < n; ++i) targets[i] = y[i] == 1 ? 1.0 : -1.0;

  // Dual coordinate descent on the L1-loss dual with the bias folded in as a
  // regularized constant-1 feature:
  //   min_a 0.5 a^T Q a - 1^T a,  0 <= a_i <= C_i,  Q_ij = t_i t_j (x_i.x_j+1)
  std::vector<double> q_diag(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 1.0;  // the bias coordinate
    for (double v : (*work)[i]) s += v * v;
    q_diag[i] = s;
  }

  std::vector<double> alpha(n, 0.0);
  std::vector<double> w(d, 0.0);
  double bias = 0.0;

  std::vector<double> best_w = w;
  double best_bias = bias;
  double best_obj = svm_primal_objective(w, bias, *work, y, weights);
  std::vector<double> trace{best_obj};

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng::stream(cfg.seed, 0x73766dULL);

  const int max_epochs = 4000;
  const double tol = 1e-10;
  int epoch = 0;
  for (; epoch < max_epochs; ++epoch) {
    rng.shuffle(order);
    double max_violation = 0.0;
    for (std::size_t idx : order) {
      double score = bias;
      for (std::size_t c = 0; c < d; ++c) score += w[c] * (*work)[idx][c];
      double g = targets[idx] * score - 1.0;
      double pg = g;
      if (alpha[idx] <= 0.0) {
        pg = std::min(g, 0.0);
      } else if (alpha[idx] >= weights[idx]) {
        pg = std::max(g, 0.0);
      }
      max_violation = std::max(max_violation, std::abs(pg));
      if (std::abs(pg) > 1e-14) {
        double next =
            std::clamp(alpha[idx] - g / q_diag[idx], 0.0, weights[idx]);
        double delta = (next - alpha[idx]) * targets[idx];
        for (std::size_t c = 0; c < d; ++c) w[c] += delta * (*work)[idx][c];
        bias += delta;
        alpha[idx] = next;
      }
    }
    double obj = svm_primal_objective(w, bias, *work, y, weights);
    if (obj < best_obj) {
      best_obj = obj;
      best_w = w;
      best_bias = bias;
    }
    trace.push_back(best_obj);
    if (max_violation < tol) {
      ++epoch;
      break;
    }
  }

  model.coefficients = std::move(best_w);
  model.intercept = best_bias;
  model.iterations = epoch;
  model.objective_trace = std::move(trace);
  return model;
}

}  // namespace gm
