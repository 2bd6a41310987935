#include "kc/bench/synthetic.hpp"
#include "kc/knockoff/knockoff.hpp"
#include "kc/knockoff/learned_sampler.hpp"
#include "kc/numcore/error.hpp"
#include "kc/numcore/linalg.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

using namespace kc;
using namespace kc::knockoff;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

Covariance as_cov(const Matrix& m) { return Covariance{m, 0.0}; }

Matrix equicorrelation(Eigen::Index p, double rho) {
  Matrix m = Matrix::Constant(p, p, rho);
  m.diagonal().setOnes();
  return m;
}

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

}  // namespace

TEST(EquicorrelatedS, IdentityGivesOnes) {
  const Vector s = equicorrelated_s(as_cov(Matrix::Identity(4, 4)));
  EXPECT_LT((s - Vector::Ones(4)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(EquicorrelatedS, EquicorrelationNominalIsOne) {
  const Matrix sigma = equicorrelation(4, 0.5);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle{Eigen::MatrixXd(sigma)};
  EXPECT_NEAR(std::min(2.0 * oracle.eigenvalues().minCoeff(), 1.0), 1.0, 1e-12);
  const Vector s = equicorrelated_s(as_cov(sigma));
  for (Eigen::Index j = 0; j < 4; ++j) {
    EXPECT_LE(s(j), 1.0);
    EXPECT_GT(s(j), 0.999);
  }
}

TEST(EquicorrelatedS, NearSingularRejected) {
  Matrix u(2, 2);
  u << 1, 1, 1, -1;
  u /= std::sqrt(2.0);
  Vector ev(2);
  ev << 2.0 - 1e-12, 1e-12;
  const Matrix sigma = u * ev.asDiagonal() * u.transpose();
  EXPECT_EQ(code_of([&] { equicorrelated_s(as_cov(sigma)); }), ErrorCode::DegenerateCovariance);
}

TEST(EquicorrelatedS, JointTargetFactorsForRandomCorrelations) {
  RngStream rng(100, 0);
  for (int trial = 0; trial < 100; ++trial) {
    RngStream child = rng.child(static_cast<std::uint64_t>(trial));
    const auto p = 2 + child.uniform_index(15);
    const Matrix sigma = bench::random_correlation(p, child);
    const Vector s = equicorrelated_s(as_cov(sigma));
    const double bound = std::min(2.0 * min_eigenvalue(sigma), 1.0);
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      EXPECT_GE(s(j), 0.0);
      EXPECT_LE(s(j), bound + 1e-12);
    }
    EXPECT_NO_THROW(cholesky_spd(joint_target(sigma, s))) << "trial " << trial;
  }
}

TEST(JointTarget, BlockStructure) {
  const Matrix sigma = equicorrelation(2, 0.3);
  Vector s(2);
  s << 0.5, 0.25;
  const Matrix g = joint_target(sigma, s);
  ASSERT_EQ(g.rows(), 4);
  EXPECT_EQ(g.topLeftCorner(2, 2), sigma);
  EXPECT_EQ(g.bottomRightCorner(2, 2), sigma);
  EXPECT_DOUBLE_EQ(g(0, 2), 0.5);
  EXPECT_DOUBLE_EQ(g(1, 3), 0.75);
  EXPECT_DOUBLE_EQ(g(0, 3), 0.3);
}

TEST(GaussianKnockoffs, IdentityCovarianceGivesIndependentStandardNormals) {
  RngStream data(101, 0), draws(101, 1);
  const std::size_t p = 4;
  const Matrix z = gaussian_draws(data, 20000, p);
  const auto pair = sample_gaussian_knockoffs(z, as_cov(Matrix::Identity(p, p)), Vector::Ones(p), draws);
  const Matrix joint = empirical_covariance(hstack(z, pair.knockoffs));
  EXPECT_LT(max_abs(joint.bottomRightCorner(p, p) - Matrix::Identity(p, p)), 0.05);
  EXPECT_LT(max_abs(joint.topRightCorner(p, p)), 0.05);
  EXPECT_LT(max_abs(pair.knockoffs.colwise().mean()), 0.05);
}

TEST(GaussianKnockoffs, JointCovarianceMatchesTarget) {
  RngStream rng(102, 0);
  const std::size_t p = 10;
  RngStream sigma_rng = rng.child(0), data_rng = rng.child(1), ko_rng = rng.child(2);
  const Matrix sigma = bench::random_correlation(p, sigma_rng);
  const Matrix z = bench::sample_gaussian(sigma, 20000, data_rng);
  const Vector s = equicorrelated_s(as_cov(sigma));
  const auto pair = sample_gaussian_knockoffs(z, as_cov(sigma), s, ko_rng);
  EXPECT_EQ(pair.knockoffs.rows(), z.rows());
  EXPECT_EQ(pair.knockoffs.cols(), z.cols());
  EXPECT_LT(max_abs(empirical_covariance(hstack(z, pair.knockoffs)) - joint_target(sigma, s)), 0.05);
  EXPECT_LT(exchangeability_diagnostic(pair), 0.05);
}

TEST(GaussianKnockoffs, MarginalMomentsMatchOriginals) {
  RngStream rng(103, 0);
  const std::size_t p = 6, n = 10000;
  RngStream sigma_rng = rng.child(0), data_rng = rng.child(1), ko_rng = rng.child(2);
  const Matrix sigma = bench::random_correlation(p, sigma_rng);
  const Matrix z = bench::sample_gaussian(sigma, n, data_rng);
  const auto pair = sample_gaussian_knockoffs(z, as_cov(sigma), equicorrelated_s(as_cov(sigma)), ko_rng);
  const double se_mean = 3.0 * std::sqrt(2.0 / n);
  const double se_var = 3.0 * std::sqrt(2.0 * 2.0 / n);
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(p); ++j) {
    const double mz = z.col(j).mean(), mk = pair.knockoffs.col(j).mean();
    const double vz = (z.col(j).array() - mz).square().sum() / (n - 1.0);
    const double vk = (pair.knockoffs.col(j).array() - mk).square().sum() / (n - 1.0);
    EXPECT_NEAR(mz, mk, se_mean);
    EXPECT_NEAR(vz, vk, se_var);
  }
}

TEST(GaussianKnockoffs, DeterministicGivenSeed) {
  RngStream data(104, 0);
  const Matrix z = gaussian_draws(data, 200, 3);
  const Matrix sigma = equicorrelation(3, 0.2);
  const Vector s = equicorrelated_s(as_cov(sigma));
  RngStream a(7, 7), b(7, 7);
  EXPECT_EQ(sample_gaussian_knockoffs(z, as_cov(sigma), s, a).knockoffs,
            sample_gaussian_knockoffs(z, as_cov(sigma), s, b).knockoffs);
}

TEST(GaussianKnockoffs, DimensionMismatchRejected) {
  RngStream rng(105, 0);
  const Matrix z = gaussian_draws(rng, 20, 3);
  EXPECT_EQ(code_of([&] { sample_gaussian_knockoffs(z, as_cov(Matrix::Identity(4, 4)), Vector::Ones(4), rng); }),
            ErrorCode::DimensionMismatch);
}

TEST(GaussianKnockoffs, LabelsPlayNoRole) {
  // No response enters the sampler: drawing labels between two identically
  // seeded calls, then scrambling them, leaves the knockoffs unchanged.
  RngStream rng(106, 0);
  RngStream sigma_rng = rng.child(0), data_rng = rng.child(1), label_rng = rng.child(2);
  const Matrix sigma = bench::random_correlation(5, sigma_rng);
  const Matrix z = bench::sample_gaussian(sigma, 300, data_rng);
  const Vector s = equicorrelated_s(as_cov(sigma));
  RngStream a(55, 0);
  const Matrix first = sample_gaussian_knockoffs(z, as_cov(sigma), s, a).knockoffs;
  const auto truth = bench::generate_sparse_beta(5, 2, 5.0, 300, label_rng);
  Vector y = bench::generate_labels(z, truth, label_rng);
  std::reverse(y.begin(), y.end());
  RngStream b(55, 0);
  EXPECT_EQ(first, sample_gaussian_knockoffs(z, as_cov(sigma), s, b).knockoffs);
}

TEST(Tanh, Examples) {
  Matrix m(1, 3);
  m << 0.0, 100.0, 1.0;
  const Matrix t = bound_with_tanh(m);
  EXPECT_EQ(t(0, 0), 0.0);
  EXPECT_GT(t(0, 1), 0.999);
  EXPECT_LE(t(0, 1), 1.0);
  const double e2 = std::exp(2.0);
  EXPECT_NEAR(t(0, 2), (e2 - 1.0) / (e2 + 1.0), 1e-15);
  EXPECT_NEAR(t(0, 2), 0.7615941559557649, 1e-15);
}

TEST(Tanh, CompositionContracts) {
  RngStream rng(107, 0);
  const Matrix x = gaussian_draws(rng, 200, 4) * 3.0;
  const Matrix once = bound_with_tanh(x), twice = bound_with_tanh(once);
  EXPECT_TRUE((twice.cwiseAbs().array() <= once.cwiseAbs().array()).all());
  EXPECT_TRUE((once.cwiseAbs().array() < 1.0).all());
}

TEST(Diagnostic, IdentityCopyScoresMaxS) {
  RngStream rng(108, 0);
  const std::size_t p = 5;
  RngStream sigma_rng = rng.child(0), data_rng = rng.child(1);
  const Matrix sigma = bench::random_correlation(p, sigma_rng);
  const Matrix z = bench::sample_gaussian(sigma, 5000, data_rng);
  KnockoffPair pair;
  pair.originals = z;
  pair.knockoffs = z;
  pair.s = equicorrelated_s(as_cov(sigma));
  EXPECT_NEAR(exchangeability_diagnostic(pair), pair.s.maxCoeff(), 1e-12);
}

TEST(Diagnostic, TooFewRowsRejected) {
  RngStream rng(109, 0);
  KnockoffPair pair;
  pair.originals = gaussian_draws(rng, 50, 3);
  pair.knockoffs = gaussian_draws(rng, 50, 3);
  pair.s = Vector::Ones(3);
  EXPECT_EQ(code_of([&] { exchangeability_diagnostic(pair); }), ErrorCode::PreconditionViolated);
}

TEST(Pair, SaveLoadRoundTrip) {
  RngStream rng(110, 0);
  KnockoffPair pair;
  pair.originals = gaussian_draws(rng, 12, 3);
  pair.knockoffs = gaussian_draws(rng, 12, 3);
  pair.s = Vector::Constant(3, 0.4);
  pair.kind = SamplerKind::Learned;
  pair.seed = 99;
  const auto dir = std::filesystem::temp_directory_path() / "kc_unit_pair";
  std::filesystem::remove_all(dir);
  save_pair(dir, pair);
  const auto back = load_pair(dir);
  EXPECT_EQ(back.originals, pair.originals);
  EXPECT_EQ(back.knockoffs, pair.knockoffs);
  EXPECT_EQ(back.s, pair.s);
  EXPECT_EQ(back.kind, SamplerKind::Learned);
  EXPECT_EQ(back.seed, 99u);
  std::filesystem::remove_all(dir);
}

TEST(SamplerKind, NamesRoundTrip) {
  for (auto k : {SamplerKind::GaussianSecondOrder, SamplerKind::Learned}) {
    EXPECT_EQ(sampler_kind_from_string(to_string(k)), k);
  }
  EXPECT_EQ(code_of([] { sampler_kind_from_string("bogus"); }), ErrorCode::FormatError);
}

TEST(LearnedSampler, InsufficientData) {
  RngStream rng(111, 0);
  const Matrix z = gaussian_draws(rng, 5, 10);
  EXPECT_EQ(code_of([&] { train_learned_sampler(z, rng); }), ErrorCode::InsufficientData);
}

class LearnedGaussian : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    RngStream data(112, 0);
    z_ = new Matrix(gaussian_draws(data, kRows, kDim));
    RngStream train(112, 1);
    sampler_ = new LearnedSampler(train_learned_sampler(*z_, train));
  }
  static void TearDownTestSuite() {
    delete z_;
    delete sampler_;
  }
  static constexpr std::size_t kRows = 4000, kDim = 5;
  static inline Matrix* z_ = nullptr;
  static inline LearnedSampler* sampler_ = nullptr;
};

TEST_F(LearnedGaussian, ReportAndWeightsFinite) {
  EXPECT_TRUE(std::isfinite(sampler_->report.final_loss));
  EXPECT_TRUE(std::isfinite(sampler_->report.second_moment_gap));
  EXPECT_FALSE(sampler_->report.epoch_loss.empty());
  EXPECT_EQ(sampler_->dim(), static_cast<Eigen::Index>(kDim));
}

TEST_F(LearnedGaussian, DiagnosticWithinTwiceGaussianSampler) {
  RngStream draw(112, 2);
  const auto learned = sample_learned(*sampler_, *z_, draw);
  const Matrix sigma = empirical_covariance(*z_);
  const Vector d = sigma.diagonal().cwiseSqrt().cwiseInverse();
  const Matrix corr = d.asDiagonal() * sigma * d.asDiagonal();
  const Vector s = equicorrelated_s(as_cov(corr));
  RngStream draw2(112, 3);
  const auto gaussian = sample_gaussian_knockoffs(*z_, as_cov(corr), s, draw2);
  const double g = exchangeability_diagnostic(gaussian);
  const double l = exchangeability_diagnostic(learned);
  EXPECT_LE(l, 2.0 * g) << "learned " << l << " gaussian " << g;
}

TEST_F(LearnedGaussian, KnockoffMeansNearZero) {
  RngStream draw(112, 4);
  const auto pair = sample_learned(*sampler_, *z_, draw);
  EXPECT_LT(max_abs(pair.knockoffs.colwise().mean()), 0.05);
}

TEST_F(LearnedGaussian, SamplingDeterministicAndGuarded) {
  RngStream a(9, 9), b(9, 9);
  EXPECT_EQ(sample_learned(*sampler_, *z_, a).knockoffs, sample_learned(*sampler_, *z_, b).knockoffs);
  RngStream c(9, 10);
  const Matrix wrong = gaussian_draws(c, 20, kDim + 1);
  EXPECT_EQ(code_of([&] { sample_learned(*sampler_, wrong, c); }), ErrorCode::DimensionMismatch);
}

TEST(LearnedSampler, TrainingDeterministic) {
  RngStream data(113, 0);
  const Matrix z = gaussian_draws(data, 300, 3);
  LearnedSamplerOptions options;
  options.epochs = 10;
  RngStream a(113, 1), b(113, 1);
  const auto first = train_learned_sampler(z, a, options);
  const auto second = train_learned_sampler(z, b, options);
  EXPECT_EQ(first.report.epoch_loss, second.report.epoch_loss);
  RngStream d1(1, 1), d2(1, 1);
  EXPECT_EQ(sample_learned(first, z, d1).knockoffs, sample_learned(second, z, d2).knockoffs);
}
