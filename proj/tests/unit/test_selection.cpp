#include "kc/numcore/error.hpp"
#include "kc/numcore/rng.hpp"
#include "kc/selection/beta_phi.hpp"
#include "kc/selection/filter.hpp"
#include "kc/selection/lasso.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

using namespace kc;
using namespace kc::selection;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no kc::Error thrown";
  return ErrorCode::InvalidArgument;
}

Vector binary_response(const Matrix& x, const Vector& beta, RngStream& rng) {
  Vector y(x.rows());
  const Vector eta = x * beta;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    y(i) = rng.uniform() < 1.0 / (1.0 + std::exp(-eta(i))) ? 1.0 : 0.0;
  }
  return y;
}

// Largest violation of the lasso subgradient conditions at a fitted point.
double kkt_violation(const Vector& y, const Matrix& x, const LassoFit& fit) {
  const double n = static_cast<double>(y.size());
  const Vector eta = (x * fit.coefficients).array() + fit.intercept;
  Vector residual = y - eta;
  if (fit.loss == LossKind::Logistic) residual = y.array() - 1.0 / (1.0 + (-eta.array()).exp());
  const Vector score = x.transpose() * residual / n;
  double worst = std::abs(residual.sum() / n);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double b = fit.coefficients(j);
    if (b != 0.0) {
      worst = std::max(worst, std::abs(score(j) - fit.lambda * (b > 0 ? 1.0 : -1.0)));
    } else {
      worst = std::max(worst, std::abs(score(j)) - fit.lambda);
    }
  }
  return worst;
}

double brute_tau(const Vector& w, double q) {
  std::vector<double> candidates;
  for (double v : w) {
    if (v != 0.0) candidates.push_back(std::abs(v));
  }
  std::sort(candidates.begin(), candidates.end());
  for (double t : candidates) {
    double neg = 0, pos = 0;
    for (double v : w) {
      neg += v <= -t;
      pos += v >= t;
    }
    if ((1.0 + neg) / std::max(1.0, pos) <= q) return t;
  }
  return kInfiniteThreshold;
}

Vector random_w(RngStream& rng, Eigen::Index p) {
  Vector w(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    w(j) = std::round(rng.normal() * 3.0 + 1.5);
  }
  return w;
}

}  // namespace

TEST(Lasso, NullModelAboveLambdaMax) {
  RngStream rng(200, 0);
  const Matrix x = gaussian_draws(rng, 60, 5);
  const Vector y = gaussian_draws(rng, 60, 1).col(0) + x.col(0);
  const double lmax = lambda_max(y, x);
  const Eigen::VectorXd centered = y.array() - y.mean();
  EXPECT_NEAR(lmax, (x.transpose() * centered).cwiseAbs().maxCoeff() / 60.0, 1e-14);
  const auto fit = fit_lasso(y, x, lmax, LossKind::Squared);
  EXPECT_TRUE((fit.coefficients.array() == 0.0).all());
  EXPECT_TRUE((fit_lasso(y, x, 2.0 * lmax, LossKind::Squared).coefficients.array() == 0.0).all());
}

TEST(Lasso, OrthonormalSingleColumnSoftThreshold) {
  const Eigen::Index n = 8;
  Matrix x(n, 1);
  x << 1, -1, 1, -1, 1, -1, 1, -1;
  Vector y(n);
  y << 3, -1, 2, 0.5, 1, -2, 0, 1;
  const double lambda = 0.3;
  const double ybar = y.mean();
  const double z = x.col(0).dot((y.array() - ybar).matrix()) / n;
  const double expected = (z > 0 ? 1.0 : -1.0) * std::max(std::abs(z) - lambda, 0.0);
  const auto fit = fit_lasso(y, x, lambda, LossKind::Squared);
  EXPECT_NEAR(fit.coefficients(0), expected, 1e-10);
  EXPECT_NEAR(fit.intercept, ybar, 1e-10);
}

TEST(Lasso, KktHoldsAtSolution) {
  RngStream rng(201, 0);
  for (auto loss : {LossKind::Squared, LossKind::Logistic}) {
    for (int trial = 0; trial < 10; ++trial) {
      const Matrix x = gaussian_draws(rng, 120, 8);
      Vector beta = Vector::Zero(8);
      beta(0) = 1.5;
      beta(3) = -1.0;
      const Vector y = loss == LossKind::Squared ? Vector(x * beta + gaussian_draws(rng, 120, 1).col(0))
                                                 : binary_response(x, beta, rng);
      const double lambda = lambda_max(y, x) * rng.uniform(0.05, 0.5);
      const auto fit = fit_lasso(y, x, lambda, loss);
      ASSERT_TRUE(fit.converged);
      EXPECT_LE(kkt_violation(y, x, fit), 1e-6) << to_string(loss) << " trial " << trial;
    }
  }
}

TEST(Lasso, ObjectiveTraceNonIncreasing) {
  RngStream rng(202, 0);
  LassoOptions options;
  options.record_objective = true;
  for (auto loss : {LossKind::Squared, LossKind::Logistic}) {
    for (int trial = 0; trial < 10; ++trial) {
      Matrix x = gaussian_draws(rng, 80, 12);
      x.col(1) = x.col(0) + 0.1 * x.col(1);
      const Vector beta = gaussian_draws(rng, 12, 1).col(0);
      const Vector y = loss == LossKind::Squared ? Vector(x * beta) : binary_response(x, beta, rng);
      const auto fit = fit_lasso(y, x, lambda_max(y, x) * 0.01, loss, options);
      ASSERT_FALSE(fit.objective_trace.empty());
      for (std::size_t i = 1; i < fit.objective_trace.size(); ++i) {
        EXPECT_LE(fit.objective_trace[i], fit.objective_trace[i - 1] + 1e-12);
      }
      EXPECT_NEAR(fit.objective_trace.back(),
                  lasso_objective(y, x, fit.intercept, fit.coefficients, fit.lambda, loss), 1e-10);
    }
  }
}

TEST(Lasso, LogisticRejectsNonBinaryLabels) {
  Matrix x = Matrix::Identity(3, 2);
  Vector y(3);
  y << 0, 1, 0.5;
  EXPECT_EQ(code_of([&] { fit_lasso(y, x, 0.1, LossKind::Logistic); }), ErrorCode::NonBinaryLabels);
}

TEST(Lasso, DefaultLossAndNames) {
  Vector binary(3), real(3);
  binary << 0, 1, 1;
  real << 0, 1, 2;
  EXPECT_EQ(default_loss_for(binary), LossKind::Logistic);
  EXPECT_EQ(default_loss_for(real), LossKind::Squared);
  for (auto k : {LossKind::Squared, LossKind::Logistic}) EXPECT_EQ(loss_kind_from_string(to_string(k)), k);
}

TEST(Lasso, GridIsLogSpacedAndDecreasing) {
  const auto grid = lambda_grid(2.0, 50, 1e-3);
  ASSERT_EQ(grid.size(), 50u);
  EXPECT_DOUBLE_EQ(grid.front(), 2.0);
  EXPECT_NEAR(grid.back(), 2e-3, 1e-15);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    EXPECT_NEAR(std::log(grid[i - 1] / grid[i]), std::log(1e3) / 49.0, 1e-12);
  }
}

TEST(Lasso, PathMatchesColdFits) {
  RngStream rng(203, 0);
  const Matrix x = gaussian_draws(rng, 100, 6);
  const Vector y = binary_response(x, Vector::Constant(6, 0.7), rng);
  LassoSolver solver(y, x, LossKind::Logistic);
  const auto grid = lambda_grid(solver.lambda_max(), 10);
  const auto path = solver.path(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto cold = solver.fit(grid[i]);
    const double a = lasso_objective(y, x, path[i].intercept, path[i].coefficients, grid[i], LossKind::Logistic);
    const double b = lasso_objective(y, x, cold.intercept, cold.coefficients, grid[i], LossKind::Logistic);
    EXPECT_NEAR(a, b, 1e-8);
  }
}

TEST(SelectLambda, PureNoisePrefersNullModel) {
  std::vector<std::size_t> index;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RngStream rng(204, seed);
    const Matrix x = gaussian_draws(rng, 100, 10);
    const Vector y = gaussian_draws(rng, 100, 1).col(0);
    const auto cv = cross_validate_lambda(y, x, LossKind::Squared, rng);
    index.push_back(cv.best_index);
  }
  std::nth_element(index.begin(), index.begin() + 10, index.end());
  EXPECT_LT(index[10], 5u);
}

TEST(SelectLambda, StrongSignalRetained) {
  RngStream rng(205, 0);
  const Matrix x = gaussian_draws(rng, 200, 10);
  const Vector y = 2.0 * x.col(4) + 0.5 * gaussian_draws(rng, 200, 1).col(0);
  RngStream cv_rng(205, 1);
  const double lambda = select_lambda(y, x, LossKind::Squared, cv_rng);
  EXPECT_GT(std::abs(fit_lasso(y, x, lambda, LossKind::Squared).coefficients(4)), 0.0);
  RngStream again(205, 1);
  EXPECT_EQ(lambda, select_lambda(y, x, LossKind::Squared, again));
}

TEST(ComputeW, Examples) {
  Vector b(4);
  b << 0.5, -0.2, 0.1, -0.3;
  const Vector w = compute_w(b);
  ASSERT_EQ(w.size(), 2);
  EXPECT_NEAR(w(0), 0.4, 1e-15);
  EXPECT_NEAR(w(1), -0.1, 1e-15);
  EXPECT_TRUE((compute_w(Vector::Zero(6)).array() == 0.0).all());
}

TEST(ComputeW, ColumnSwapFlipsSign) {
  RngStream rng(206, 0);
  const Eigen::Index p = 4;
  const Matrix x = gaussian_draws(rng, 150, 2 * p);
  Vector beta = Vector::Zero(2 * p);
  beta(0) = 1.0;
  beta(1) = -0.8;
  beta(p + 2) = 0.6;
  const Vector y = binary_response(x, beta, rng);
  const double lambda = lambda_max(y, x) * 0.1;
  const Vector w = compute_w(fit_lasso(y, x, lambda, LossKind::Logistic));
  for (Eigen::Index j = 0; j < p; ++j) {
    Matrix swapped = x;
    swapped.col(j).swap(swapped.col(j + p));
    const Vector ws = compute_w(fit_lasso(y, swapped, lambda, LossKind::Logistic));
    for (Eigen::Index k = 0; k < p; ++k) {
      EXPECT_NEAR(ws(k), k == j ? -w(k) : w(k), 1e-6) << "swap " << j << " entry " << k;
    }
  }
}

TEST(ComputeW, ScaleEquivariance) {
  RngStream rng(207, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector b = gaussian_draws(rng, 20, 1).col(0);
    const double c = rng.uniform(0.1, 10.0);
    const Vector w = compute_w(b);
    const Vector wc = compute_w(Vector(c * b));
    EXPECT_LT((wc - c * w).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(knockoff_threshold(w, 0.3).selected, knockoff_threshold(wc, 0.3).selected);
  }
}

TEST(Threshold, HandExamples) {
  Vector w(4);
  w << 3, 2, 1, -1;
  const auto a = knockoff_threshold(w, 0.5);
  EXPECT_EQ(a.tau, 2.0);
  EXPECT_EQ(a.selected, (IndexSet{0, 1}));

  Vector ten(10);
  ten << 10, 9, 8, 7, 6, 5, 4, 3, 2, 1;
  const auto b = knockoff_threshold(ten, 0.1);
  EXPECT_EQ(b.tau, 1.0);
  EXPECT_EQ(b.selected.size(), 10u);

  Vector pair(2);
  pair << 1, -1;
  const auto c = knockoff_threshold(pair, 0.1);
  EXPECT_TRUE(std::isinf(c.tau));
  EXPECT_TRUE(c.selected.empty());
}

TEST(Threshold, InvalidLevel) {
  const Vector w = Vector::Ones(3);
  for (double q : {0.0, 1.0, -0.1, 1.5}) {
    EXPECT_EQ(code_of([&] { knockoff_threshold(w, q); }), ErrorCode::InvalidLevel);
  }
}

TEST(Threshold, SelfConsistentAgainstEnumeration) {
  RngStream rng(208, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const Vector w = random_w(rng, 30);
    const double q = rng.uniform(0.05, 0.6);
    const auto th = knockoff_threshold(w, q);
    EXPECT_EQ(th.tau, brute_tau(w, q));
    if (std::isfinite(th.tau)) {
      EXPECT_LE(knockoff_ratio(w, th.tau), q);
      for (double v : w) {
        const double t = std::abs(v);
        if (v != 0.0 && t < th.tau) EXPECT_GT(knockoff_ratio(w, t), q);
      }
    }
    for (std::size_t j : th.selected) {
      EXPECT_GE(w(static_cast<Eigen::Index>(j)), th.tau);
      EXPECT_GT(w(static_cast<Eigen::Index>(j)), 0.0);
    }
  }
}

TEST(Threshold, NestedInLevel) {
  RngStream rng(209, 0);
  for (int trial = 0; trial < 300; ++trial) {
    const Vector w = random_w(rng, 25);
    double q1 = rng.uniform(0.01, 0.98), q2 = rng.uniform(0.01, 0.98);
    if (q1 > q2) std::swap(q1, q2);
    const auto small = knockoff_threshold(w, q1).selected;
    const auto large = knockoff_threshold(w, q2).selected;
    EXPECT_TRUE(std::includes(large.begin(), large.end(), small.begin(), small.end()));
  }
}

TEST(Threshold, ZeroWeightsNeverSelected) {
  Vector w(5);
  w << 0, 0, 5, 4, 3;
  const auto th = knockoff_threshold(w, 0.5);
  for (std::size_t j : th.selected) EXPECT_NE(w(static_cast<Eigen::Index>(j)), 0.0);
}

TEST(L1Baseline, NullAndDense) {
  RngStream rng(210, 0);
  const Matrix x = gaussian_draws(rng, 200, 6);
  const Vector y = x * Vector::LinSpaced(6, 0.2, 1.2) + gaussian_draws(rng, 200, 1).col(0);
  EXPECT_TRUE(l1_baseline_select(y, x, lambda_max(y, x), LossKind::Squared).empty());
  EXPECT_EQ(l1_baseline_select(y, x, 1e-6, LossKind::Squared).size(), 6u);
}

TEST(BetaPhi, OrthonormalGram) {
  const Eigen::Index n = 4;
  Matrix z(n, 2);
  z << 1, 1, 1, -1, -1, 1, -1, -1;
  Vector y(n);
  y << 1.0, 2.0, -0.5, 3.0;
  const auto effect = estimate_beta_phi(z, y);
  const Vector expected = z.transpose() * y / static_cast<double>(n);
  EXPECT_LT((effect.beta_phi - expected).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_NEAR(effect.gram_condition, 1.0, 1e-12);
}

TEST(BetaPhi, MatchesDenseInverse) {
  RngStream rng(211, 0);
  const Matrix z = gaussian_draws(rng, 200, 5);
  const Vector y = gaussian_draws(rng, 200, 1).col(0);
  const Eigen::MatrixXd gram = z.transpose() * z / 200.0;
  const Eigen::VectorXd oracle = gram.inverse() * (z.transpose() * y / 200.0);
  EXPECT_LT((estimate_beta_phi(z, y).beta_phi - oracle).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(BetaPhi, NoiselessRecovery) {
  RngStream rng(212, 0);
  const Matrix z = gaussian_draws(rng, 300, 4);
  Vector beta(4);
  beta << 1.0, -2.0, 0.5, 0.0;
  EXPECT_LT((estimate_beta_phi(z, z * beta).beta_phi - beta).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(BetaPhi, DuplicatedColumnIsSingular) {
  RngStream rng(213, 0);
  Matrix z = gaussian_draws(rng, 50, 3);
  z.col(2) = z.col(0);
  EXPECT_EQ(code_of([&] { estimate_beta_phi(z, Vector::Ones(50)); }), ErrorCode::SingularGram);
}

TEST(SelectionJson, InfiniteTauAsString) {
  SelectionResult r;
  r.w = Vector::Zero(2);
  r.q = 0.1;
  const auto j = nlohmann::json::parse(selection_to_json(r));
  EXPECT_EQ(j.at("tau"), "inf");
  EXPECT_EQ(j.at("q"), 0.1);
  EXPECT_TRUE(j.at("selected").empty());
  EXPECT_TRUE(std::isinf(selection_from_json(selection_to_json(r)).tau));
}

TEST(SelectionJson, FiniteRoundTrip) {
  SelectionResult r;
  r.w = Vector(3);
  r.w << 0.1, -0.25, 1.0 / 3.0;
  r.tau = 1.0 / 3.0;
  r.selected = {2};
  r.q = 0.2;
  const auto back = selection_from_json(selection_to_json(r));
  EXPECT_EQ(back.w, r.w);
  EXPECT_EQ(back.tau, r.tau);
  EXPECT_EQ(back.selected, r.selected);
  EXPECT_EQ(back.q, r.q);
}
