#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "sgm/eksm.hpp"
#include "sgm/sbm.hpp"

using namespace sgm;

namespace {

SparseSymMatrix diag(std::vector<double> d) { return SparseSymMatrix::diagonal(d); }

PencilOperator sbm_pencil(std::uint64_t seed) {
  SbmParams p{3, 50, 0.3, 0.05, 0.05, 0.3};
  const auto g = sample(p, seed);
  auto [a, b] = shifted_pair(g, {});
  return PencilOperator(std::move(a), std::move(b));
}

double relative_error(const Vector& x, const Eigen::VectorXd& ref) {
  return (oracle::to_eigen(x) - ref).norm() / ref.norm();
}

} // namespace

TEST(AOrthonormalize, EuclideanNormalization) {
  const auto r = a_orthonormalize(std::span<const Vector>{}, Vector{3, 4}, SparseSymMatrix::identity(2));
  ASSERT_TRUE(r);
  EXPECT_NEAR((*r)[0], 0.6, 1e-15);
  EXPECT_NEAR((*r)[1], 0.8, 1e-15);
}

TEST(AOrthonormalize, ProjectsOutBasis) {
  const std::vector<Vector> basis{{1, 0}};
  const auto r = a_orthonormalize(std::span<const Vector>(basis), Vector{1, 1}, SparseSymMatrix::identity(2));
  ASSERT_TRUE(r);
  EXPECT_NEAR((*r)[0], 0.0, 1e-15);
  EXPECT_NEAR((*r)[1], 1.0, 1e-15);
}

TEST(AOrthonormalize, WeightedNorm) {
  const auto r = a_orthonormalize(std::span<const Vector>{}, Vector{1, 0}, diag({4, 1}));
  ASSERT_TRUE(r);
  EXPECT_NEAR((*r)[0], 0.5, 1e-15);
  EXPECT_NEAR((*r)[1], 0.0, 1e-15);
}

TEST(AOrthonormalize, DependentVectorBreaksDown) {
  const std::vector<Vector> basis{{1, 0}};
  EXPECT_FALSE(a_orthonormalize(std::span<const Vector>(basis), Vector{2, 0}, SparseSymMatrix::identity(2)));
  EXPECT_FALSE(a_orthonormalize(std::span<const Vector>{}, Vector{0, 0}, SparseSymMatrix::identity(2)));
}

TEST(Eksm, EqualMatricesReturnInput) {
  const auto a = diag({2, 3, 5});
  const PencilOperator p(a, a);
  const Vector y{1, -2, 0.5};
  const auto r = eksm_solve(p, y);
  EXPECT_TRUE(r.converged);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(r.x[i], y[i], 1e-12);
}

TEST(Eksm, CommutingDiagonalPencil) {
  const PencilOperator p(diag({1, 4}), diag({4, 1}));
  const auto x = eksm_apply_inv_sqrt(p, Vector{1, 1});
  EXPECT_NEAR(x[0], 0.5, 1e-10);
  EXPECT_NEAR(x[1], 2.0, 1e-10);
}

TEST(Eksm, RejectsZeroAndMismatchedInput) {
  const PencilOperator p(diag({1, 4}), diag({4, 1}));
  EXPECT_THROW(eksm_solve(p, Vector{0, 0}), std::invalid_argument);
  EXPECT_THROW(eksm_solve(p, Vector{1, 0, 0}), DimensionError);
}

TEST(Eksm, MatchesDenseOracleOnSbmGraph) {
  const auto p = sbm_pencil(11);
  const Eigen::MatrixXd a = oracle::dense(p.a()), b = oracle::dense(p.b());
  Rng rng(5);
  for (int rep = 0; rep < 3; ++rep) {
    const Vector y = rng.normal_vector(p.size());
    const auto r = eksm_solve(p, y);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(relative_error(r.x, oracle::inv_sqrt_apply(a, b, oracle::to_eigen(y))), 1e-8);
  }
}

TEST(Eksm, BasisIsAOrthonormalAndProjectionIsExact) {
  const auto p = sbm_pencil(3);
  const Eigen::MatrixXd a = oracle::dense(p.a()), b = oracle::dense(p.b());
  const Vector y = Rng(1).normal_vector(p.size());
  double worst_orth = 0.0, worst_proj = 0.0;
  EksmOptions opt;
  opt.observer = [&](const EksmState& st) {
    Eigen::MatrixXd v(static_cast<Eigen::Index>(p.size()), static_cast<Eigen::Index>(st.basis.size()));
    for (std::size_t j = 0; j < st.basis.size(); ++j) v.col(static_cast<Eigen::Index>(j)) = oracle::to_eigen(st.basis[j]);
    const Eigen::MatrixXd gram = v.transpose() * a * v;
    worst_orth = std::max(worst_orth, (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff());
    worst_proj = std::max(worst_proj, (v.transpose() * b * v - *st.projected).cwiseAbs().maxCoeff());
  };
  eksm_solve(p, y, opt);
  EXPECT_LE(worst_orth, 1e-10);
  EXPECT_LE(worst_proj, 1e-10);
}

TEST(Eksm, IterateSolvesProjectedEquation) {
  // Coefficients c of x_s satisfy H^{1/2} c = ||y||_A e1.
  const auto p = sbm_pencil(4);
  const Eigen::MatrixXd a = oracle::dense(p.a());
  const Vector y = Rng(2).normal_vector(p.size());
  const double ya = std::sqrt(oracle::to_eigen(y).dot(a * oracle::to_eigen(y)));
  double worst = 0.0;
  EksmOptions opt;
  opt.observer = [&](const EksmState& st) {
    const Eigen::MatrixXd h = *st.projected;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const Eigen::MatrixXd h_half = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(h.rows());
    rhs(0) = ya;
    worst = std::max(worst, (h_half * st.coefficients - rhs).norm() / ya);
  };
  eksm_solve(p, y, opt);
  EXPECT_LE(worst, 1e-10);
}

TEST(Eksm, ErrorDecaysGeometrically) {
  const auto p = sbm_pencil(11);
  const Eigen::MatrixXd a = oracle::dense(p.a()), b = oracle::dense(p.b());
  const Vector y = Rng(9).normal_vector(p.size());
  const Eigen::VectorXd ref = oracle::inv_sqrt_apply(a, b, oracle::to_eigen(y));
  std::vector<double> errors;
  EksmOptions opt;
  opt.tol = 1e-12;
  opt.observer = [&](const EksmState& st) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(ref.size());
    for (std::size_t j = 0; j < st.basis.size(); ++j)
      x += st.coefficients(static_cast<Eigen::Index>(j)) * oracle::to_eigen(st.basis[j]);
    errors.push_back((x - ref).norm() / ref.norm());
  };
  eksm_solve(p, y, opt);
  ASSERT_GE(errors.size(), 4u);
  // Least-squares slope of log error against the iteration index.
  const std::size_t m = errors.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t s = 0; s < m; ++s) {
    const double x = static_cast<double>(s), l = std::log10(std::max(errors[s], 1e-16));
    sx += x, sy += l, sxx += x * x, sxy += x * l;
  }
  const double slope = (static_cast<double>(m) * sxy - sx * sy) / (static_cast<double>(m) * sxx - sx * sx);
  EXPECT_LT(slope, -0.5);
  EXPECT_LE(errors.back(), 1e-9);
  EXPECT_LE(errors.back(), 1e-6 * errors.front());
}

TEST(Eksm, IterationLimitRaises) {
  const auto p = sbm_pencil(11);
  EksmOptions opt;
  opt.tol = 1e-14;
  opt.max_s = 1;
  try {
    eksm_solve(p, Rng(3).normal_vector(p.size()), opt);
    FAIL() << "expected NonConvergence";
  } catch (const NonConvergence& e) {
    EXPECT_EQ(e.iterations(), 2u);
    EXPECT_GT(e.residual(), opt.tol);
  }
}

TEST(Eksm, StallRuleReturnsBestIterate) {
  const auto p = sbm_pencil(11);
  const Eigen::MatrixXd a = oracle::dense(p.a()), b = oracle::dense(p.b());
  const Vector y = Rng(4).normal_vector(p.size());
  EksmOptions opt;
  opt.tol = 1e-300;
  opt.stall_window = 3;
  std::vector<double> gaps;
  opt.observer = [&](const EksmState& st) { gaps.push_back(st.gap); };
  const auto r = eksm_solve(p, y, opt);
  ASSERT_TRUE(r.stalled);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.gap, opt.stall_tol);
  EXPECT_EQ(r.gap, *std::min_element(gaps.begin() + 1, gaps.end()));
  EXPECT_LE(relative_error(r.x, oracle::inv_sqrt_apply(a, b, oracle::to_eigen(y))), 1e-8);

  opt.stall_window = 0;
  opt.max_s = r.iterations - 1;
  EXPECT_THROW(eksm_solve(p, y, opt), NonConvergence);
}
