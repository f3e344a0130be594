#include <algorithm>
#include <cmath>
#include <deque>

#include "gm/errors.hpp"
#include "gm/learn.hpp"

namespace gm {

namespace {

double sigmoid(double z) {
  if (z >= 0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  double e = std::exp(z);
  return e / (1.0 + e);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

double logistic_objective(const std::vector<double>& params, const Matrix& X,
                          const std::vector<int>& y,
                          std::vector<double>* grad) {
  const int n = static_cast<int>(X.size());
  const int d = static_cast<int>(params.size()) - 1;
  if (grad) grad->assign(params.size(), 0.0);
  double nll = 0.0;
  for (int i = 0; i < n; ++i) {
    double score = params[d];
    for (int c = 0; c < d; ++c) score += params[c] * X[i][c];
    double target = y[i] == 1 ? 1.0 : -1.0;
    double z = target * score;
    nll += std::max(-z, 0.0) + std::log1p(std::exp(-std::abs(z)));
    if (grad) {
      double residual = sigmoid(score) - y[i];
      for (int c = 0; c < d; ++c) (*grad)[c] += residual * X[i][c];
      (*grad)[d] += residual;
    }
  }
  if (grad) {
    for (double& g : *grad) g /= n;
  }
  return nll / n;
}

TrainedModel fit_log(const Matrix& X, const std::vector<int>& y,
                     const ClassifierConfig& cfg) {
  cfg.validate();
  if (X.empty() || X.size() != y.size()) {
    throw ValidationError("fit_log: bad training input");
  }
  bool has_pos = false, has_neg = false;
  for (int v : y) (v == 1 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) {
    throw ValidationError("fit_log: training labels contain a single class");
  }

  TrainedModel model;
  model.kind = ClassifierKind::logreg;
  model.seed = cfg.seed;
  model.decision_threshold = 0.0;  // probability 0.5 on the linear score
  model.standardized = cfg.standardize;

  Matrix Z;
  const Matrix* work = &X;
  if (cfg.standardize) {
    model.standardizer = standardize_fit(X);
    Z = standardize_apply(model.standardizer, X);
    work = &Z;
  }
  const int d = static_cast<int>((*work)[0].size());

  std::vector<double> params(d + 1, 0.0);
  std::vector<double> grad;
  double value = logistic_objective(params, *work, y, &grad);

  // L-BFGS two-loop recursion with backtracking Armijo line search.
  const int memory = 10;
  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;

  int iter = 0;
  for (; iter < cfg.logistic_max_iter; ++iter) {
    if (max_abs(grad) < cfg.logistic_tolerance) break;

    std::vector<double> direction = grad;
    std::vector<double> alpha(s_hist.size());
    for (int h = static_cast<int>(s_hist.size()) - 1; h >= 0; --h) {
      alpha[h] = rho_hist[h] * dot(s_hist[h], direction);
      for (std::size_t c = 0; c < direction.size(); ++c) {
        direction[c] -= alpha[h] * y_hist[h][c];
      }
    }
    if (!s_hist.empty()) {
      double gamma = dot(s_hist.back(), y_hist.back()) /
                     dot(y_hist.back(), y_hist.back());
      for (double& v : direction) v *= gamma;
    }
    for (std::size_t h = 0; h < s_hist.size(); ++h) {
      double beta = rho_hist[h] * dot(y_hist[h], direction);
      for (std::size_t c = 0; c < direction.size(); ++c) {
        direction[c] += (alpha[h] - beta) * s_hist[h][c];
      }
    }
    for (double& v : direction) v = -v;  // descent direction

    double slope = dot(grad, direction);
    if (slope > -1e-16) {
      // Not a descent direction; restart from steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      direction = grad;
      for (double& v : direction) v = -v;
      slope = -dot(grad, grad);
      if (slope > -1e-30) break;
    }

    double step = 1.0;
    std::vector<double> trial(params.size());
    double trial_value = value;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t c = 0; c < params.size(); ++c) {
        trial[c] = params[c] + step * direction[c];
      }
      trial_value = logistic_objective(trial, *work, y, nullptr);
      if (trial_value <= value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no further progress at machine precision

    std::vector<double> new_grad;
    double new_value = logistic_objective(trial, *work, y, &new_grad);

    std::vector<double> s_vec(params.size()), y_vec(params.size());
    for (std::size_t c = 0; c < params.size(); ++c) {
      s_vec[c] = trial[c] - params[c];
      y_vec[c] = new_grad[c] - grad[c];
    }
    double sy = dot(s_vec, y_vec);
    if (sy > 1e-12) {
      s_hist.push_back(std::move(s_vec));
      y_hist.push_back(std::move(y_vec));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    params = std::move(trial);
    grad = std::move(new_grad);
    value = new_value;
  }

  model.coefficients.assign(params.begin(), params.end() - 1);
  model.intercept = params.back();
  model.iterations = iter;
  model.gradient_max_norm = max_abs(grad);
  return model;
}

}  // namespace gm
