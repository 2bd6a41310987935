#include "kc/numcore/covariance.hpp"
#include "kc/numcore/error.hpp"
#include "kc/numcore/io.hpp"
#include "kc/numcore/kcmx.hpp"
#include "kc/numcore/linalg.hpp"
#include "kc/numcore/matrix.hpp"
#include "kc/numcore/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <set>
#include <sstream>

using namespace kc;

namespace {

Matrix random_spd(RngStream& rng, Eigen::Index p) {
  const Matrix a = gaussian_draws(rng, static_cast<std::size_t>(p + 3), static_cast<std::size_t>(p));
  Matrix m = a.transpose() * a / static_cast<double>(p + 3);
  m.diagonal().array() += 0.1;
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

TEST(Cholesky, IdentityFactorsToIdentity) {
  const Matrix eye = Matrix::Identity(3, 3);
  EXPECT_TRUE(cholesky_spd(eye).isApprox(eye, 1e-15));
}

TEST(Cholesky, TwoByTwoExample) {
  Matrix m(2, 2);
  m << 4, 2, 2, 3;
  const Matrix l = cholesky_spd(m);
  Matrix expected(2, 2);
  expected << 2, 0, 1, std::sqrt(2.0);
  EXPECT_NEAR((l - expected).cwiseAbs().maxCoeff(), 0.0, 1e-14);
  EXPECT_NEAR((l * l.transpose() - m).norm() / m.norm(), 0.0, 1e-10);
}

TEST(Cholesky, IndefiniteMatrixRejected) {
  Matrix m(2, 2);
  m << 1, 2, 2, 1;
  EXPECT_EQ(code_of([&] { cholesky_spd(m); }), ErrorCode::NotPositiveDefinite);
}

TEST(Cholesky, PivotAtFloorRejected) {
  Matrix m = Matrix::Identity(2, 2);
  m(1, 1) = 1e-12;
  EXPECT_EQ(code_of([&] { cholesky_spd(m); }), ErrorCode::NotPositiveDefinite);
}

TEST(Cholesky, RoundTripRandomLowerFactors) {
  RngStream rng(1, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = static_cast<Eigen::Index>(1 + rng.uniform_index(12));
    Matrix l = Matrix::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) l(i, j) = rng.normal();
      l(i, i) = rng.uniform(0.5, 2.0);
    }
    const Matrix back = cholesky_spd(l * l.transpose());
    EXPECT_LT((back - l).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Cholesky, SolveMatchesDenseInverse) {
  RngStream rng(2, 0);
  const Matrix m = random_spd(rng, 6);
  const Vector b = gaussian_draws(rng, 6, 1).col(0);
  const Vector x = cholesky_solve(cholesky_spd(m), b);
  const Eigen::VectorXd oracle = Eigen::MatrixXd(m).inverse() * b;
  EXPECT_LT((x - oracle).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(MinEigenvalue, Identity) { EXPECT_NEAR(min_eigenvalue(Matrix::Identity(5, 5)), 1.0, 1e-12); }

TEST(MinEigenvalue, Diagonal) {
  Matrix m = Matrix::Zero(3, 3);
  m.diagonal() << 3.0, 0.2, 7.0;
  EXPECT_NEAR(min_eigenvalue(m), 0.2, 1e-12);
}

TEST(MinEigenvalue, EquicorrelationClosedForm) {
  Matrix m = Matrix::Constant(4, 4, 0.5);
  m.diagonal().setOnes();
  EXPECT_NEAR(min_eigenvalue(m), 0.5, 1e-9);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle{Eigen::MatrixXd(m)};
  EXPECT_NEAR(min_eigenvalue(m), oracle.eigenvalues().minCoeff(), 1e-9);
}

TEST(MinEigenvalue, MatchesEigenSolverOnRandomMatrices) {
  RngStream rng(3, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const Matrix m = random_spd(rng, static_cast<Eigen::Index>(2 + rng.uniform_index(20)));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> oracle{Eigen::MatrixXd(m)};
    const Vector all = symmetric_eigenvalues(m);
    EXPECT_NEAR(all(0), oracle.eigenvalues()(0), 1e-9);
    EXPECT_LT((all - oracle.eigenvalues()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(MinEigenvalue, BelowEveryRayleighQuotient) {
  RngStream rng(4, 0);
  const Matrix m = random_spd(rng, 8);
  const double lo = min_eigenvalue(m);
  for (int i = 0; i < 100; ++i) {
    const Vector v = gaussian_draws(rng, 8, 1).col(0);
    EXPECT_LE(lo, v.dot(m * v) / v.dot(v) + 1e-12);
  }
}

TEST(ShrinkCovariance, StandardNormalNearIdentity) {
  RngStream rng(5, 0);
  const Matrix x = gaussian_draws(rng, 50000, 3);
  const auto cov = shrink_covariance(x, 0.0);
  EXPECT_LT((cov.sigma - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 0.05);
}

TEST(ShrinkCovariance, FullShrinkageIsDiagonal) {
  RngStream rng(6, 0);
  Matrix x = gaussian_draws(rng, 200, 4);
  x.col(1) += x.col(0);
  const Matrix s = empirical_covariance(x);
  const auto cov = shrink_covariance(x, 1.0);
  EXPECT_LT((cov.sigma - Matrix(s.diagonal().asDiagonal())).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ShrinkCovariance, EmpiricalMatchesOneOverNMinusOne) {
  RngStream rng(7, 0);
  const Matrix x = gaussian_draws(rng, 30, 3);
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  const Eigen::MatrixXd oracle = centered.transpose() * centered / 29.0;
  EXPECT_LT((empirical_covariance(x) - oracle).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ShrinkCovariance, ConstantColumnIsDegenerate) {
  Matrix x(5, 2);
  x << 1, 3, 2, 3, 3, 3, 4, 3, 5, 3;
  EXPECT_EQ(code_of([&] { shrink_covariance(x, 0.05); }), ErrorCode::DegenerateData);
}

TEST(ShrinkCovariance, SymmetricAndPositiveDefinite) {
  RngStream rng(8, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = 2 + rng.uniform_index(10);
    Matrix x = gaussian_draws(rng, p + 1, p);  // n close to p: S is near singular
    x.col(0) = x.col(1) * 2.0 + 0.01 * x.col(0);
    const auto cov = shrink_covariance(x, 1e-3);
    EXPECT_TRUE(is_symmetric(cov.sigma, 1e-12));
    EXPECT_NO_THROW(cholesky_spd(cov.sigma));
  }
}

TEST(Standardize, SimpleColumn) {
  Matrix m(3, 1);
  m << 1, 2, 3;
  const auto s = standardize_columns(m);
  EXPECT_NEAR(s.values(0, 0), -1.0, 1e-12);
  EXPECT_NEAR(s.values(1, 0), 0.0, 1e-12);
  EXPECT_NEAR(s.values(2, 0), 1.0, 1e-12);
  EXPECT_NEAR(s.map.mean(0), 2.0, 1e-12);
}

TEST(Standardize, IdempotentAndUnitMoments) {
  RngStream rng(9, 0);
  Matrix m = gaussian_draws(rng, 40, 5);
  m.col(2) = m.col(2) * 7.0 + Vector::Constant(40, 3.0);
  const Matrix once = standardize_columns(m).values;
  for (Eigen::Index j = 0; j < 5; ++j) {
    EXPECT_NEAR(once.col(j).mean(), 0.0, 1e-10);
    EXPECT_NEAR(std::sqrt(once.col(j).squaredNorm() / 39.0), 1.0, 1e-10);
  }
  EXPECT_LT((standardize_columns(once).values - once).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Standardize, IdenticalColumnsMapIdentically) {
  RngStream rng(10, 0);
  Matrix m(20, 2);
  m.col(0) = gaussian_draws(rng, 20, 1).col(0);
  m.col(1) = m.col(0);
  const auto s = standardize_columns(m);
  EXPECT_EQ(s.values.col(0), s.values.col(1));
}

TEST(Standardize, InvertRestoresInput) {
  RngStream rng(11, 0);
  const Matrix m = gaussian_draws(rng, 15, 3) * 4.0;
  const auto s = standardize_columns(m);
  EXPECT_LT((s.map.invert(s.values) - m).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Standardize, ZeroVarianceColumnRejected) {
  Matrix m(3, 2);
  m << 1, 5, 2, 5, 3, 5;
  EXPECT_EQ(code_of([&] { standardize_columns(m); }), ErrorCode::DegenerateData);
}

TEST(Rng, SameSeedAndStreamAreBitIdentical) {
  RngStream a(42, 7), b(42, 7);
  EXPECT_EQ(gaussian_draws(a, 50, 3), gaussian_draws(b, 50, 3));
  RngStream c(42, 7), d(42, 7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(c.next_u64(), d.next_u64());
}

TEST(Rng, StreamsAndSeedsAreDistinct) {
  RngStream a(42, 1), b(42, 2), c(43, 1);
  const Matrix ma = gaussian_draws(a, 10, 1), mb = gaussian_draws(b, 10, 1), mc = gaussian_draws(c, 10, 1);
  EXPECT_NE(ma, mb);
  EXPECT_NE(ma, mc);
}

TEST(Rng, ChildDoesNotAdvanceParent) {
  RngStream a(5, 0), b(5, 0);
  RngStream child = a.child(3);
  child.next_u64();
  EXPECT_EQ(a.next_u64(), b.next_u64());
  RngStream c1 = b.child(3), c2 = RngStream(5, 0).child(3);
  EXPECT_EQ(c1.next_u64(), c2.next_u64());
}

TEST(Rng, NormalMomentsWithinMonteCarloBound) {
  RngStream rng(12, 0);
  const Matrix x = gaussian_draws(rng, 100000, 1);
  const double mean = x.mean();
  const double var = (x.array() - mean).square().sum() / (x.size() - 1.0);
  EXPECT_NEAR(mean, 0.0, 0.02);
  EXPECT_NEAR(var, 1.0, 0.02);
}

TEST(Rng, UniformRangeAndIndexBounds) {
  RngStream rng(13, 0);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    ASSERT_LT(rng.uniform_index(7), 7u);
  }
  EXPECT_NEAR(sum / 20000.0, 0.5, 0.01);
}

TEST(Rng, PermutationAndSampling) {
  RngStream rng(14, 0);
  auto perm = rng.permutation(50);
  std::set<std::size_t> seen(perm.begin(), perm.end());
  EXPECT_EQ(seen.size(), 50u);
  EXPECT_EQ(*seen.rbegin(), 49u);
  const auto pick = rng.sample_without_replacement(30, 10);
  std::set<std::size_t> distinct(pick.begin(), pick.end());
  EXPECT_EQ(distinct.size(), 10u);
  EXPECT_LT(*distinct.rbegin(), 30u);
}

TEST(Rng, MixSeedSeparatesKeys) {
  EXPECT_NE(mix_seed(1, 2), mix_seed(2, 1));
  EXPECT_EQ(mix_seed(1, 2), mix_seed(1, 2));
}

TEST(MatrixHelpers, TakeAndStack) {
  Matrix m(3, 2);
  m << 1, 2, 3, 4, 5, 6;
  const Matrix r = take_rows(m, {2, 0});
  EXPECT_EQ(r(0, 0), 5);
  EXPECT_EQ(r(1, 1), 2);
  const Matrix c = take_cols(m, {1});
  EXPECT_EQ(c(2, 0), 6);
  const Matrix h = hstack(m, c);
  EXPECT_EQ(h.cols(), 3);
  EXPECT_EQ(h(1, 2), 4);
}

TEST(Kcmx, ByteLayoutIsLittleEndianRowMajor) {
  Matrix m(2, 3);
  m << 1.5, -2, 3, 4, 5, 6.25;
  std::ostringstream out;
  write_kcmx(out, m);
  const std::string bytes = out.str();
  ASSERT_EQ(bytes.size(), 4u + 8u + 6u * 8u);
  EXPECT_EQ(bytes.substr(0, 4), "KCMX");
  const unsigned char* u = reinterpret_cast<const unsigned char*>(bytes.data());
  EXPECT_EQ(u[4] | (u[5] << 8) | (u[6] << 16) | (u[7] << 24), 2);
  EXPECT_EQ(u[8] | (u[9] << 8) | (u[10] << 16) | (u[11] << 24), 3);
  const double expected[] = {1.5, -2, 3, 4, 5, 6.25};
  for (int i = 0; i < 6; ++i) {
    std::uint64_t bits = 0;
    for (int b = 7; b >= 0; --b) bits = (bits << 8) | u[12 + 8 * i + b];
    double v;
    std::memcpy(&v, &bits, sizeof v);
    EXPECT_EQ(v, expected[i]);
  }
}

TEST(Kcmx, RoundTripThroughFile) {
  RngStream rng(15, 0);
  const Matrix m = gaussian_draws(rng, 7, 4);
  const auto path = std::filesystem::temp_directory_path() / "kc_unit_roundtrip.kcmx";
  save_kcmx(path, m);
  EXPECT_EQ(load_kcmx(path), m);
  std::filesystem::remove(path);
}

TEST(Kcmx, CorruptInputsRejected) {
  std::istringstream bad_magic(std::string("KCMY") + std::string(8, '\0'));
  EXPECT_EQ(code_of([&] { read_kcmx(bad_magic); }), ErrorCode::FormatError);
  Matrix m = Matrix::Ones(2, 2);
  std::ostringstream out;
  write_kcmx(out, m);
  std::istringstream truncated(out.str().substr(0, out.str().size() - 3));
  EXPECT_EQ(code_of([&] { read_kcmx(truncated); }), ErrorCode::FormatError);
  EXPECT_EQ(code_of([&] { load_kcmx("/nonexistent/kc.kcmx"); }), ErrorCode::IoError);
}

TEST(Io, AtomicWriteReplacesContent) {
  const auto path = std::filesystem::temp_directory_path() / "kc_unit_atomic.txt";
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  EXPECT_EQ(read_file(path), "second");
  std::filesystem::remove(path);
}
