#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gm {

enum class ClassifierKind { lin, logreg, svm, rf };

const char* to_string(ClassifierKind kind);
ClassifierKind classifier_from_string(const std::string& s);

struct RfParams {
  int trees = 40;
  int max_depth = 5;
  int min_leaf = 3;
  double feature_fraction = 0.8;
  bool bootstrap = true;
};

struct ClassifierConfig {
  ClassifierKind kind = ClassifierKind::lin;
  std::uint64_t seed = 0;
  bool standardize = true;  // lin/log/svm consume z-scores; rf always raw
  double lin_threshold = 0.5;
  int logistic_max_iter = 500;
  double logistic_tolerance = 1e-6;  // max-norm of the mean-NLL gradient
  double svm_c = 1.0;
  RfParams rf;

  void validate() const;
};

// Per-column mean/std fitted on training rows. Constant columns get std 1 so
// their training z-scores are exactly zero.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;
};

using Matrix = std::vector<std::vector<double>>;

Standardizer standardize_fit(const Matrix& train);
Matrix standardize_apply(const Standardizer& s, const Matrix& rows);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int prediction = -1;  // valid at leaves
};

struct Tree {
  std::vector<TreeNode> nodes;  // node 0 is the root

  int predict(std::span<const double> row) const;
  int depth() const;
};

struct TrainedModel {
  ClassifierKind kind = ClassifierKind::lin;
  bool standardized = false;
  Standardizer standardizer;  // empty when standardized is false
  std::uint64_t seed = 0;

  // lin / log / svm
  std::vector<double> coefficients;
  double intercept = 0.0;
  double decision_threshold = 0.5;  // fitted-value cut for lin, 0 for svm

  // rf
  std::vector<Tree> forest;

  // diagnostics
  int iterations = 0;
  double gradient_max_norm = 0.0;       // logistic, at exit
  std::vector<double> objective_trace;  // svm best-iterate primal objective
};

// Raw-feature prediction; the model applies its own standardizer.
int predict(const TrainedModel& model, std::span<const double> row);
std::vector<int> predict(const TrainedModel& model, const Matrix& rows);

// Linear score (or rf positive-vote share) after standardization.
double decision_value(const TrainedModel& model, std::span<const double> row);

// Ordinary least squares onto {0,1} targets, classification at >= 0.5.
// Constant columns get coefficient 0.
TrainedModel fit_lin(const Matrix& X, const std::vector<int>& y,
                     const ClassifierConfig& cfg);

// Unregularized maximum-likelihood logistic regression via L-BFGS.
TrainedModel fit_log(const Matrix& X, const std::vector<int>& y,
                     const ClassifierConfig& cfg);

// Linear soft-margin SVM (hinge + L2) with balanced class weights
// C_k = C * n / (2 * n_k), solved by dual coordinate descent.
TrainedModel fit_svm(const Matrix& X, const std::vector<int>& y,
                     const ClassifierConfig& cfg);

// Class-weighted CART ensemble with bootstrap resampling and a fresh feature
// subset per node, deterministic given the seed.
TrainedModel fit_rf(const Matrix& X, const std::vector<int>& y,
                    const ClassifierConfig& cfg);

TrainedModel fit_classifier(const ClassifierConfig& cfg, const Matrix& X,
                            const std::vector<int>& y);

// Mean negative log-likelihood and, when grad is non-null, its gradient.
// params layout: [coefficients..., intercept]; X must already be in the
// model's feature space (standardized when the model standardizes).
double logistic_objective(const std::vector<double>& params, const Matrix& X,
                          const std::vector<int>& y,
                          std::vector<double>* grad);

// Primal objective 0.5*||w||^2 (incl. the regularized bias) + weighted hinge.
double svm_primal_objective(const std::vector<double>& coefficients,
                            double intercept, const Matrix& X,
                            const std::vector<int>& y,
                            const std::vector<double>& sample_weights);

// Balanced per-sample weights C_i = C * n / (2 * n_class(i)).
std::vector<double> svm_sample_weights(const std::vector<int>& y, double c);

std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const std::string& text);

}  // namespace gm

namespace gm::detail {

// In-place LDLT solve of the (symmetric PSD) normal equations G beta = b.
// Zero pivots (exactly collinear columns) get coefficient 0.
void solve_normal_equations(std::vector<double>& gram, std::vector<double>& rhs,
                            int k, double* beta);

}  // namespace gm::detail
