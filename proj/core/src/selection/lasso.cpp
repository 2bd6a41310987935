#include "kc/selection/lasso.hpp"

#include "kc/numcore/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace kc::selection {
namespace {

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// log(1 + e^eta), stable for large |eta|.
double softplus(double eta) {
  return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

double sigmoid(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

bool is_binary(const Vector& y) {
  return (y.array() == 0.0 || y.array() == 1.0).all();
}

double penalty(const Vector& b, double lambda) { return lambda * b.lpNorm<1>(); }

}  // namespace

std::string_view to_string(LossKind kind) noexcept {
  return kind == LossKind::Logistic ? "logistic" : "squared";
}

LossKind loss_kind_from_string(std::string_view name) {
  if (name == "logistic") return LossKind::Logistic;
  if (name == "squared") return LossKind::Squared;
  throw Error(ErrorCode::InvalidArgument, "unknown loss kind '" + std::string(name) + "'");
}

LossKind default_loss_for(const Vector& y) { return is_binary(y) ? LossKind::Logistic : LossKind::Squared; }

double lasso_objective(const Vector& y, const Matrix& design, double intercept, const Vector& coefficients,
                       double lambda, LossKind loss) {
  const Vector eta = (design * coefficients).array() + intercept;
  const double n = static_cast<double>(y.size());
  double data_term = 0.0;
  if (loss == LossKind::Squared) {
    data_term = 0.5 * (y - eta).squaredNorm() / n;
  } else {
    for (Eigen::Index i = 0; i < y.size(); ++i) data_term += softplus(eta(i)) - y(i) * eta(i);
    data_term /= n;
  }
  return data_term + penalty(coefficients, lambda);
}

double lambda_max(const Vector& y, const Matrix& design) {
  const Vector yc = y.array() - y.mean();
  const Matrix xc = design.rowwise() - design.colwise().mean();
  return (xc.transpose() * yc).cwiseAbs().maxCoeff() / static_cast<double>(y.size());
}

LassoSolver::LassoSolver(Vector y, Matrix design, LossKind loss, LassoOptions options)
    : y_(std::move(y)), design_(std::move(design)), loss_(loss), options_(options) {
  if (design_.rows() != y_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "LassoSolver: design rows differ from response length");
  }
  if (design_.rows() < 2 || design_.cols() == 0) {
    throw Error(ErrorCode::InsufficientData, "LassoSolver: need at least two rows and one column");
  }
  if (loss_ == LossKind::Logistic) {
    if (!is_binary(y_)) throw Error(ErrorCode::NonBinaryLabels, "LassoSolver: logistic loss needs y in {0, 1}");
    const double mean = y_.mean();
    if (mean == 0.0 || mean == 1.0) {
      throw Error(ErrorCode::DegenerateData, "LassoSolver: labels are all identical");
    }
  }
  const double n = static_cast<double>(design_.rows());
  column_mean_ = design_.colwise().mean().transpose();
  y_mean_ = y_.mean();
  const Matrix xc = design_.rowwise() - column_mean_.transpose();
  const Vector yc = y_.array() - y_mean_;
  gram_ = xc.transpose() * xc / n;
  cross_ = xc.transpose() * yc / n;
  y_var_ = yc.squaredNorm() / n;
  lambda_max_ = cross_.cwiseAbs().maxCoeff();

  if (loss_ == LossKind::Logistic) {
    const Eigen::Index p = design_.cols();
    raw_gram_.resize(p + 1, p + 1);
    raw_gram_(0, 0) = 1.0;
    raw_gram_.block(0, 1, 1, p) = column_mean_.transpose();
    raw_gram_.block(1, 0, p, 1) = column_mean_;
    raw_gram_.block(1, 1, p, p) = design_.transpose() * design_ / n;
    columns_ = design_;
  }
}

LassoFit LassoSolver::fit(double lambda, const LassoFit* warm_start) const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::InvalidArgument, "fit_lasso: lambda must be finite and non-negative");
  }
  if (warm_start != nullptr && warm_start->coefficients.size() != design_.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "fit_lasso: warm start has the wrong length");
  }
  return loss_ == LossKind::Squared ? fit_squared(lambda, warm_start) : fit_logistic(lambda, warm_start);
}

std::vector<LassoFit> LassoSolver::path(const std::vector<double>& lambdas) const {
  std::vector<LassoFit> fits;
  fits.reserve(lambdas.size());
  for (double lambda : lambdas) fits.push_back(fit(lambda, fits.empty() ? nullptr : &fits.back()));
  return fits;
}

LassoFit LassoSolver::fit_squared(double lambda, const LassoFit* warm) const {
  const Eigen::Index p = design_.cols();
  LassoFit out;
  out.lambda = lambda;
  out.loss = LossKind::Squared;
  out.coefficients = warm ? warm->coefficients : Vector::Zero(p);
  Vector& b = out.coefficients;
  Vector grad = cross_ - gram_ * b;  // negative gradient of the smooth part

  auto objective = [&] { return 0.5 * (y_var_ - 2.0 * cross_.dot(b) + b.dot(gram_ * b)) + penalty(b, lambda); };

  for (std::size_t sweep = 1; sweep <= options_.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double h = gram_(j, j);
      if (h <= 0.0) continue;
      const double updated = soft_threshold(h * b(j) + grad(j), lambda) / h;
      const double delta = updated - b(j);
      if (delta != 0.0) {
        b(j) = updated;
        grad.noalias() -= gram_.row(j).transpose() * delta;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    out.iterations = sweep;
    if (options_.record_objective) out.objective_trace.push_back(objective());
    if (max_change < options_.tolerance) {
      out.converged = true;
      break;
    }
  }
  out.intercept = y_mean_ - column_mean_.dot(b);
  return out;
}

LassoFit LassoSolver::fit_logistic(double lambda, const LassoFit* warm) const {
  const Eigen::Index p = design_.cols();
  const Eigen::Index rows = design_.rows();
  const double n = static_cast<double>(rows);
  LassoFit out;
  out.lambda = lambda;
  out.loss = LossKind::Logistic;

  // theta(0) is the intercept, theta(1..p) the coefficients.
  Vector theta(p + 1);
  if (warm) {
    theta(0) = warm->intercept;
    theta.tail(p) = warm->coefficients;
  } else {
    theta.setZero();
    theta(0) = std::log(y_mean_ / (1.0 - y_mean_));
  }

  Vector eta = (design_ * theta.tail(p)).array() + theta(0);
  auto data_loss = [&](const Vector& e) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) total += softplus(e(i)) - y_(i) * e(i);
    return total / n;
  };
  double current = data_loss(eta) + penalty(theta.tail(p), lambda);

  Vector root_weight(rows), base(rows), shift(rows), grad(p + 1);
  Eigen::MatrixXd scaled(rows, p + 1);
  Eigen::MatrixXd hessian(p + 1, p + 1);
  Vector next(p + 1);
  std::vector<char> active(static_cast<std::size_t>(p + 1), 0);
  constexpr std::size_t kInnerCap = 10000;
  constexpr double kWeightFloor = 1e-5;
  constexpr double kRefreshContraction = 0.25;
  double last_change = std::numeric_limits<double>::infinity();
  double previous_change = std::numeric_limits<double>::infinity();
  bool refresh = true;

  for (std::size_t sweep = 1; sweep <= options_.max_sweeps; ++sweep) {
    // Quadratic model of the log-likelihood at theta: exact gradient and the
    // weighted Hessian [1 X]^T W [1 X] / n with w = p(1-p). The Hessian is
    // re-formed only when the previous step contracted poorly.
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double mu = sigmoid(eta(i));
      base(i) = y_(i) - mu;
      if (refresh) root_weight(i) = std::sqrt(std::max(mu * (1.0 - mu), kWeightFloor));
    }
    if (refresh) {
      scaled.col(0) = root_weight;
      scaled.rightCols(p).noalias() = root_weight.asDiagonal() * columns_;
      hessian.setZero();
      hessian.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose(), 1.0 / n);
      for (Eigen::Index c = 1; c <= p; ++c) hessian.col(c).head(c) = hessian.row(c).head(c).transpose();
      refresh = false;
    }
    grad(0) = base.sum() / n;
    grad.tail(p).noalias() = columns_.transpose() * base / n;
    next = theta;
    const double inner_tolerance = std::max(0.1 * options_.tolerance, 1e-3 * std::min(last_change, 1.0));

    // grad holds the negated model gradient at `next`.
    auto update = [&](Eigen::Index j) {
      const double hj = hessian(j, j);
      if (hj <= 0.0) return 0.0;
      const double old = next(j);
      const double raw = hj * old + grad(j);
      const double updated = j == 0 ? raw / hj : soft_threshold(raw, lambda) / hj;
      const double delta = updated - old;
      if (delta != 0.0) {
        next(j) = updated;
        grad.noalias() -= delta * hessian.col(j);
      }
      return std::abs(delta);
    };
    for (std::size_t inner = 0; inner < kInnerCap; ++inner) {
      double change = 0.0;
      for (Eigen::Index j = 0; j <= p; ++j) {
        change = std::max(change, update(j));
        active[static_cast<std::size_t>(j)] = j == 0 || next(j) != 0.0;
      }
      if (change < inner_tolerance) break;
      for (std::size_t pass = 0; pass < kInnerCap; ++pass) {
        double active_change = 0.0;
        for (Eigen::Index j = 0; j <= p; ++j) {
          if (active[static_cast<std::size_t>(j)]) active_change = std::max(active_change, update(j));
        }
        if (active_change < inner_tolerance) break;
      }
    }

    // Backtrack along the model step until the penalized objective does not
    // increase; fall back to a majorization step if no step length works.
    const Vector direction = next - theta;
    shift.noalias() = design_ * direction.tail(p);
    shift.array() += direction(0);
    double step = 1.0;
    bool accepted = false;
    Vector trial_eta(rows);
    double trial = current;
    for (int halvings = 0; halvings < 40; ++halvings, step *= 0.5) {
      trial_eta = eta + step * shift;
      trial = data_loss(trial_eta) + penalty(theta.tail(p) + step * direction.tail(p), lambda);
      if (trial <= current) {
        accepted = true;
        break;
      }
    }
    double max_change = 0.0;
    if (accepted) {
      max_change = step * direction.cwiseAbs().maxCoeff();
      theta += step * direction;
      eta = trial_eta;
      current = trial;
    } else {
      next = majorization_step(theta, eta, lambda);
      max_change = (next - theta).cwiseAbs().maxCoeff();
      theta = next;
      eta = (design_ * theta.tail(p)).array() + theta(0);
      current = data_loss(eta) + penalty(theta.tail(p), lambda);
    }
    if (!accepted || step < 1.0 || max_change > kRefreshContraction * std::min(previous_change, last_change)) {
      refresh = true;
    }
    previous_change = last_change;
    last_change = max_change;
    out.iterations = sweep;
    if (options_.record_objective) out.objective_trace.push_back(current);
    if (max_change < options_.tolerance) {
      out.converged = true;
      break;
    }
  }
  out.intercept = theta(0);
  out.coefficients = theta.tail(p);
  return out;
}

Vector LassoSolver::majorization_step(const Vector& theta, const Vector& eta, double lambda) const {
  // Minimizes g^T d + (1/8) d^T H d + lambda ||b + d_b||_1, an upper bound
  // of the penalized objective that touches it at theta.
  const Eigen::Index p = design_.cols();
  const double n = static_cast<double>(design_.rows());
  Vector residual(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) residual(i) = sigmoid(eta(i)) - y_(i);
  Vector grad(p + 1);
  grad(0) = residual.sum() / n;
  grad.tail(p).noalias() = design_.transpose() * residual / n;
  Vector next = theta;
  for (std::size_t inner = 0; inner < 1000; ++inner) {
    double change = 0.0;
    for (Eigen::Index j = 0; j <= p; ++j) {
      const double h = 0.25 * raw_gram_(j, j);
      if (h <= 0.0) continue;
      const double target = next(j) - grad(j) / h;
      const double updated = j == 0 ? target : soft_threshold(target, lambda / h);
      const double delta = updated - next(j);
      if (delta != 0.0) {
        next(j) = updated;
        grad.noalias() += (0.25 * delta) * raw_gram_.row(j).transpose();
        change = std::max(change, std::abs(delta));
      }
    }
    if (change < 0.1 * options_.tolerance) break;
  }
  return next;
}

LassoFit fit_lasso(const Vector& y, const Matrix& design, double lambda, LossKind loss, const LassoOptions& options) {
  return LassoSolver(y, design, loss, options).fit(lambda);
}

std::vector<double> lambda_grid(double lambda_max, std::size_t count, double ratio) {
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    grid[i] = lambda_max * std::pow(ratio, t);
  }
  return grid;
}

CrossValidation cross_validate_lambda(const Vector& y, const Matrix& design, LossKind loss, RngStream& rng,
                                      std::size_t folds, std::size_t grid_size) {
  const auto n = static_cast<std::size_t>(y.size());
  if (n < 20) throw Error(ErrorCode::InsufficientData, "select_lambda: need at least 20 rows");
  if (folds < 2) throw Error(ErrorCode::InvalidArgument, "select_lambda: need at least 2 folds");

  CrossValidation cv;
  cv.lambdas = lambda_grid(LassoSolver(y, design, loss).lambda_max(), grid_size);
  cv.mean_loss.assign(grid_size, 0.0);

  const auto order = rng.permutation(n);
  std::vector<std::size_t> fold_of(n);
  for (std::size_t i = 0; i < n; ++i) fold_of[order[i]] = i % folds;

  for (std::size_t fold = 0; fold < folds; ++fold) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < n; ++i) (fold_of[i] == fold ? test : train).push_back(i);
    const LassoSolver solver(take_rows(y, train), take_rows(design, train), loss);
    const Matrix x_test = take_rows(design, test);
    const Vector y_test = take_rows(y, test);
    const auto fits = solver.path(cv.lambdas);
    for (std::size_t k = 0; k < fits.size(); ++k) {
      const Vector eta = (x_test * fits[k].coefficients).array() + fits[k].intercept;
      double held_out = 0.0;
      for (Eigen::Index i = 0; i < eta.size(); ++i) {
        held_out += loss == LossKind::Squared ? (y_test(i) - eta(i)) * (y_test(i) - eta(i))
                                              : softplus(eta(i)) - y_test(i) * eta(i);
      }
      cv.mean_loss[k] += held_out / static_cast<double>(eta.size()) / static_cast<double>(folds);
    }
  }
  cv.best_index = static_cast<std::size_t>(
      std::min_element(cv.mean_loss.begin(), cv.mean_loss.end()) - cv.mean_loss.begin());
  return cv;
}

double select_lambda(const Vector& y, const Matrix& design, LossKind loss, RngStream& rng) {
  return cross_validate_lambda(y, design, loss, rng).best_lambda();
}

}  // namespace kc::selection
