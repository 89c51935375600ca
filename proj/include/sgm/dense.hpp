#ifndef SGM_DENSE_HPP
#define SGM_DENSE_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "sgm/errors.hpp"
#include "sgm/sparse.hpp"

namespace sgm {

/// Largest order for which dense oracles are built.
inline constexpr std::size_t kDenseOracleCap = 500;

/// Dense symmetric matrix; construction rejects asymmetry beyond 1e-12 relative.
class DenseSymMatrix {
public:
  DenseSymMatrix() = default;

  explicit DenseSymMatrix(Eigen::MatrixXd m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw DimensionError("DenseSymMatrix: matrix is not square");
    const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
    if ((m_ - m_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw std::invalid_argument("DenseSymMatrix: matrix is not symmetric");
    // Store the exactly symmetric part.
    m_ = 0.5 * (m_ + m_.transpose()).eval();
  }

  static DenseSymMatrix from_sparse(const SparseSymMatrix& s) {
    const auto n = static_cast<Eigen::Index>(s.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < s.size(); ++i) {
      auto cols = s.row_cols(i);
      auto vals = s.row_values(i);
      for (std::size_t p = 0; p < cols.size(); ++p)
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[p])) = vals[p];
    }
    return DenseSymMatrix(std::move(m));
  }

  static DenseSymMatrix identity(std::size_t n) {
    return DenseSymMatrix(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  const Eigen::MatrixXd& matrix() const noexcept { return m_; }
  double operator()(std::size_t i, std::size_t j) const {
    return m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }

  void apply(std::span<const double> x, std::span<double> y) const {
    require_same_size(x.size(), size(), "DenseSymMatrix::apply");
    require_same_size(y.size(), size(), "DenseSymMatrix::apply");
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    Eigen::Map<Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
    yv.noalias() = m_ * xv;
  }

private:
  Eigen::MatrixXd m_;
};

struct SymEigen {
  Eigen::VectorXd values;   ///< ascending
  Eigen::MatrixXd vectors;  ///< orthonormal columns
};

inline SymEigen dense_sym_eig(const DenseSymMatrix& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.matrix());
  if (es.info() != Eigen::Success) throw std::runtime_error("dense_sym_eig: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

/// V f(Lambda) V^T.
inline Eigen::MatrixXd apply_spectral_function(const SymEigen& e, const std::function<double(double)>& f) {
  Eigen::VectorXd fl(e.values.size());
  for (Eigen::Index i = 0; i < fl.size(); ++i) fl(i) = f(e.values(i));
  return e.vectors * fl.asDiagonal() * e.vectors.transpose();
}

namespace detail {
inline SymEigen require_positive_definite(const DenseSymMatrix& h, const char* where) {
  auto e = dense_sym_eig(h);
  if (e.values.size() > 0 && !(e.values(0) > 0.0))
    throw IndefiniteError(std::string(where) + ": matrix is not positive definite (min eigenvalue " +
                          std::to_string(e.values(0)) + ")");
  return e;
}
} // namespace detail

inline DenseSymMatrix dense_sqrt(const DenseSymMatrix& h) {
  auto e = detail::require_positive_definite(h, "dense_sqrt");
  return DenseSymMatrix(apply_spectral_function(e, [](double x) { return std::sqrt(x); }));
}

/// H^{-1/2} for SPD H; IndefiniteError when the smallest eigenvalue is <= 0.
inline DenseSymMatrix dense_inv_sqrt(const DenseSymMatrix& h) {
  auto e = detail::require_positive_definite(h, "dense_inv_sqrt");
  return DenseSymMatrix(apply_spectral_function(e, [](double x) { return 1.0 / std::sqrt(x); }));
}

/// A # B = A^{1/2} (A^{-1/2} B A^{-1/2})^{1/2} A^{1/2}.
inline DenseSymMatrix dense_geometric_mean(const DenseSymMatrix& a, const DenseSymMatrix& b) {
  if (a.size() != b.size()) throw DimensionError("dense_geometric_mean: order mismatch");
  if (a.size() > kDenseOracleCap) throw DimensionError("dense_geometric_mean: order exceeds dense oracle cap");
  auto ea = detail::require_positive_definite(a, "dense_geometric_mean(A)");
  detail::require_positive_definite(b, "dense_geometric_mean(B)");
  const Eigen::MatrixXd a_half = apply_spectral_function(ea, [](double x) { return std::sqrt(x); });
  const Eigen::MatrixXd a_inv_half = apply_spectral_function(ea, [](double x) { return 1.0 / std::sqrt(x); });
  const DenseSymMatrix inner(Eigen::MatrixXd(a_inv_half * b.matrix() * a_inv_half));
  const Eigen::MatrixXd inner_half = dense_sqrt(inner).matrix();
  Eigen::MatrixXd g = a_half * inner_half * a_half;
  g = 0.5 * (g + g.transpose()).eval();
  return DenseSymMatrix(std::move(g));
}

/**
 * The four alternative forms of the geometric mean,
 *   A (A^{-1}B)^{1/2},  (B A^{-1})^{1/2} A,  B (B^{-1}A)^{1/2},  (A B^{-1})^{1/2} B,
 * each computed with a general (Schur-based) principal square root of a
 * non-symmetric matrix. Independent of the eigen-route in dense_geometric_mean.
 */
inline std::array<Eigen::MatrixXd, 4> geometric_mean_representations(const DenseSymMatrix& a,
                                                                     const DenseSymMatrix& b) {
  if (a.size() != b.size()) throw DimensionError("geometric_mean_representations: order mismatch");
  const Eigen::MatrixXd& am = a.matrix();
  const Eigen::MatrixXd& bm = b.matrix();
  const Eigen::PartialPivLU<Eigen::MatrixXd> alu(am), blu(bm);
  const Eigen::MatrixXd a_inv_b = alu.solve(bm);
  const Eigen::MatrixXd b_inv_a = blu.solve(am);
  const Eigen::MatrixXd b_a_inv = alu.solve(bm).transpose();  // (A^{-1} B)^T = B A^{-1}
  const Eigen::MatrixXd a_b_inv = blu.solve(am).transpose();
  return {am * Eigen::MatrixXd(a_inv_b.sqrt()), Eigen::MatrixXd(b_a_inv.sqrt()) * am,
          bm * Eigen::MatrixXd(b_inv_a.sqrt()), Eigen::MatrixXd(a_b_inv.sqrt()) * bm};
}

/// Frobenius-relative distance ||X - Y||_F / ||Y||_F.
inline double relative_difference(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  const double ny = y.norm();
  return (x - y).norm() / (ny > 0.0 ? ny : 1.0);
}

} // namespace sgm

#endif // SGM_DENSE_HPP
