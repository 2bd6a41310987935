#pragma once

#include "kc/numcore/matrix.hpp"
#include "kc/numcore/rng.hpp"

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

namespace kc::selection {

enum class LossKind { Squared, Logistic };

std::string_view to_string(LossKind kind) noexcept;
LossKind loss_kind_from_string(std::string_view name);

/// Logistic when y only takes the values 0 and 1, squared otherwise.
LossKind default_loss_for(const Vector& y);

struct LassoOptions {
  double tolerance = 1e-8;
  std::size_t max_sweeps = 10000;
  /// Record the penalized objective after every sweep.
  bool record_objective = false;
};

struct LassoFit {
  Vector coefficients;
  double intercept = 0.0;
  double lambda = 0.0;
  LossKind loss = LossKind::Squared;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;
};

/// Penalized objective: (1/2n)||y - b0 - Xb||^2 + lambda ||b||_1 for squared
/// loss, (1/n) sum[log(1 + e^eta) - y eta] + lambda ||b||_1 for logistic.
double lasso_objective(const Vector& y, const Matrix& design, double intercept, const Vector& coefficients,
                       double lambda, LossKind loss);

/// Cyclic coordinate descent solver with the per-design quantities cached,
/// so fits along a lambda path reuse one factorization of the problem.
///
/// Squared loss runs exact soft-threshold updates on the centered Gram
/// matrix. Logistic loss minimizes the weighted quadratic model of the
/// log-likelihood at each iterate by coordinate descent and backtracks along
/// that step until the penalized objective does not increase; when no step
/// length qualifies it takes the step of the 1/4 curvature majorizer instead.
/// Either way the objective is non-increasing from one sweep to the next.
/// The intercept is never penalized.
class LassoSolver {
 public:
  LassoSolver(Vector y, Matrix design, LossKind loss, LassoOptions options = {});

  /// Smallest lambda at which every coefficient is zero.
  double lambda_max() const noexcept { return lambda_max_; }
  Eigen::Index dim() const noexcept { return design_.cols(); }
  Eigen::Index rows() const noexcept { return design_.rows(); }
  LossKind loss() const noexcept { return loss_; }

  LassoFit fit(double lambda, const LassoFit* warm_start = nullptr) const;
  /// Fits each lambda in order, warm-starting from the previous solution.
  std::vector<LassoFit> path(const std::vector<double>& lambdas) const;

 private:
  LassoFit fit_squared(double lambda, const LassoFit* warm) const;
  LassoFit fit_logistic(double lambda, const LassoFit* warm) const;
  Vector majorization_step(const Vector& theta, const Vector& eta, double lambda) const;

  Vector y_;
  Matrix design_;
  LossKind loss_;
  LassoOptions options_;
  Vector column_mean_;
  double y_mean_ = 0.0;
  Matrix gram_;       // centered X^T X / n
  Vector cross_;      // centered X^T y / n
  double y_var_ = 0.0;
  Matrix raw_gram_;   // [1 X]^T [1 X] / n, logistic only
  Eigen::MatrixXd columns_;  // column-major copy of the design, logistic only
  double lambda_max_ = 0.0;
};

/// Errors: NonBinaryLabels for logistic loss with y outside {0, 1}.
LassoFit fit_lasso(const Vector& y, const Matrix& design, double lambda, LossKind loss,
                   const LassoOptions& options = {});

/// max_j |x_j^T (y - mean(y))| / n.
double lambda_max(const Vector& y, const Matrix& design);

/// Log-spaced grid from lambda_max down to lambda_max * ratio.
std::vector<double> lambda_grid(double lambda_max, std::size_t count = 50, double ratio = 1e-3);

struct CrossValidation {
  std::vector<double> lambdas;
  std::vector<double> mean_loss;
  std::size_t best_index = 0;

  double best_lambda() const { return lambdas.at(best_index); }
};

/// 5-fold cross-validation over the 50-point grid. Fold assignment comes
/// from a permutation drawn from `rng`. Held-out loss is mean squared error
/// or mean binary cross-entropy. Ties go to the larger lambda.
CrossValidation cross_validate_lambda(const Vector& y, const Matrix& design, LossKind loss, RngStream& rng,
                                      std::size_t folds = 5, std::size_t grid_size = 50);

double select_lambda(const Vector& y, const Matrix& design, LossKind loss, RngStream& rng);

}  // namespace kc::selection
