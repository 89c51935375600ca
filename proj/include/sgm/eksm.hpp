#ifndef SGM_EKSM_HPP
#define SGM_EKSM_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sgm/dense.hpp"
#include "sgm/errors.hpp"
#include "sgm/pcg.hpp"
#include "sgm/sparse.hpp"
#include "sgm/vector_ops.hpp"

namespace sgm {

/**
 * The SPD pencil (A, B) standing for M = A^{-1} B, with one IC(0)
 * preconditioner per matrix. Immutable after construction; solves allocate
 * their own scratch, so one pencil can serve many solvers concurrently.
 */
class PencilOperator {
public:
  PencilOperator(SparseSymMatrix a, SparseSymMatrix b, PcgOptions pcg = {})
      : a_(std::move(a)), b_(std::move(b)), pc_a_(incomplete_cholesky(a_)), pc_b_(incomplete_cholesky(b_)),
        pcg_(pcg) {
    if (a_.size() != b_.size()) throw DimensionError("PencilOperator: A and B differ in order");
  }

  std::size_t size() const noexcept { return a_.size(); }
  const SparseSymMatrix& a() const noexcept { return a_; }
  const SparseSymMatrix& b() const noexcept { return b_; }
  const IcPreconditioner& pc_a() const noexcept { return pc_a_; }
  const IcPreconditioner& pc_b() const noexcept { return pc_b_; }
  const PcgOptions& pcg_options() const noexcept { return pcg_; }

  Vector solve_a(std::span<const double> rhs) const { return pcg_solve(a_, rhs, pc_a_, pcg_); }
  Vector solve_b(std::span<const double> rhs) const { return pcg_solve(b_, rhs, pc_b_, pcg_); }
  Vector apply_a(std::span<const double> x) const { return spmv(a_, x); }
  Vector apply_b(std::span<const double> x) const { return spmv(b_, x); }

private:
  SparseSymMatrix a_;
  SparseSymMatrix b_;
  IcPreconditioner pc_a_;
  IcPreconditioner pc_b_;
  PcgOptions pcg_;
};

/// Relative threshold below which a projected vector counts as dependent.
inline constexpr double kBreakdownThreshold = 1e-12;

/**
 * Orthonormalizes `w` against the A-orthonormal columns `basis` in the inner
 * product <u, v>_A = u^T A v, using two passes of classical Gram-Schmidt.
 * `a_basis` holds A times each basis column. Returns the unit-A-norm vector
 * together with A times it, or nullopt on breakdown (w numerically inside
 * span(basis)).
 */
template <LinearOperator Op>
std::optional<std::pair<Vector, Vector>> a_orthonormalize(std::span<const Vector> basis,
                                                          std::span<const Vector> a_basis, Vector w,
                                                          const Op& a) {
  require_same_size(basis.size(), a_basis.size(), "a_orthonormalize");
  Vector aw(w.size());
  a.apply(w, aw);
  const double before = std::sqrt(std::max(dot(w, aw), 0.0));
  if (!(before > 0.0)) return std::nullopt;
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const double c = dot(a_basis[j], w);
      axpy(-c, basis[j], w);
      axpy(-c, a_basis[j], aw);
    }
  }
  // Recompute A w after projection rather than trusting the updated copy.
  a.apply(w, aw);
  const double after = std::sqrt(std::max(dot(w, aw), 0.0));
  if (!(after > kBreakdownThreshold * before)) return std::nullopt;
  scale(1.0 / after, w);
  scale(1.0 / after, aw);
  return std::make_pair(std::move(w), std::move(aw));
}

/// Convenience overload for an empty-or-given basis without cached products.
template <LinearOperator Op>
std::optional<Vector> a_orthonormalize(std::span<const Vector> basis, Vector w, const Op& a) {
  std::vector<Vector> ab;
  ab.reserve(basis.size());
  for (const auto& v : basis) {
    Vector t(v.size());
    a.apply(v, t);
    ab.push_back(std::move(t));
  }
  auto r = a_orthonormalize(basis, std::span<const Vector>(ab), std::move(w), a);
  if (!r) return std::nullopt;
  return std::move(r->first);
}

/// Snapshot handed to an iteration observer.
struct EksmState {
  std::span<const Vector> basis;    ///< V_s, A-orthonormal columns
  const Eigen::MatrixXd* projected;  ///< H_s = V_s^T B V_s
  std::span<const double> u;        ///< next positive-power frontier vector (empty when finished)
  std::span<const double> v;        ///< next negative-power frontier vector (empty when finished)
  Eigen::VectorXd coefficients;     ///< x_s = V_s * coefficients
  std::size_t s = 0;
  double gap = 0.0;
};

struct EksmOptions {
  double tol = 1e-10;      ///< ||x_{s+1} - x_s||_A / ||x_s||_A
  std::size_t max_s = 50;  ///< basis holds at most 2 * max_s vectors
  /// When nonzero, stop once this many steps pass without a new smallest gap
  /// and return the iterate that had it, provided that gap is <= stall_tol.
  std::size_t stall_window = 0;
  double stall_tol = 1e-6;
  std::function<void(const EksmState&)> observer;  ///< optional, called once per iteration
};

struct EksmResult {
  Vector x;
  std::size_t iterations = 0;
  std::size_t basis_size = 0;
  double gap = 0.0;          ///< last relative A-norm step
  bool converged = false;
  bool invariant_subspace = false;
  bool stalled = false;      ///< x is the best iterate of a stagnating run
};

/**
 * Extended Krylov approximation of x = (A^{-1}B)^{-1/2} y.
 *
 * The basis spans {y, My, M^{-1}y, M^2y, M^{-2}y, ...} with M = A^{-1}B and is
 * kept A-orthonormal, so the projection of M is H = V^T B V and the iterate
 * is x_s = V H^{-1/2} e_1 ||y||_A. Each step adds u = A^{-1} B v_p and
 * v = B^{-1} A v_m, where v_p and v_m are the two newest basis columns.
 *
 * Throws IndefiniteError when H stops being positive definite and
 * NonConvergence when max_s is reached. With inexact inner solves the gap can
 * level off above tol; see EksmOptions::stall_window.
 */
inline EksmResult eksm_solve(const PencilOperator& pencil, std::span<const double> y, const EksmOptions& opt = {}) {
  const std::size_t n = pencil.size();
  require_same_size(y.size(), n, "eksm_apply_inv_sqrt");
  if (!(norm2(y) > 0.0)) throw std::invalid_argument("eksm_apply_inv_sqrt: y must be nonzero");

  std::vector<Vector> basis, a_basis, b_basis;
  Eigen::MatrixXd h;
  Eigen::VectorXd coef, prev_coef, best_coef;
  double best_gap = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  EksmResult res;

  const Vector ay = pencil.apply_a(y);
  const double y_a_norm = std::sqrt(dot(y, ay));
  Vector u(y.begin(), y.end());
  Vector v = pencil.solve_b(ay);

  for (std::size_t s = 0; s <= opt.max_s; ++s) {
    const std::size_t block_start = basis.size();
    for (Vector* cand : {&u, &v}) {
      auto r = a_orthonormalize(std::span<const Vector>(basis), std::span<const Vector>(a_basis), std::move(*cand),
                                pencil.a());
      if (!r) continue;
      b_basis.push_back(pencil.apply_b(r->first));
      basis.push_back(std::move(r->first));
      a_basis.push_back(std::move(r->second));
    }
    if (basis.size() == block_start) {
      // Both candidates were dependent: range(V) is invariant under M and the
      // current iterate is exact up to the inner solves.
      res.invariant_subspace = true;
      res.converged = true;
      break;
    }

    // Only the new columns of H = V^T B V need computing; older entries are
    // unchanged because older basis vectors are.
    const auto m = static_cast<Eigen::Index>(basis.size());
    const auto first_new = static_cast<Eigen::Index>(block_start);
    h.conservativeResize(m, m);
    for (Eigen::Index j = first_new; j < m; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      for (Eigen::Index i = 0; i <= j; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const double hij = 0.5 * (dot(basis[ui], b_basis[uj]) + dot(basis[uj], b_basis[ui]));
        h(i, j) = hij;
        h(j, i) = hij;
      }
    }

    const auto eig = dense_sym_eig(DenseSymMatrix(h));
    if (!(eig.values(0) > 0.0)) throw IndefiniteError("eksm: projected matrix V^T B V is not positive definite");
    // H^{-1/2} e_1 = Q diag(lambda^{-1/2}) Q^T e_1
    const Eigen::VectorXd first_row = eig.vectors.row(0).transpose();
    coef = eig.vectors * (first_row.array() / eig.values.array().sqrt()).matrix() * y_a_norm;

    double gap = 1.0;
    if (prev_coef.size() > 0) {
      Eigen::VectorXd padded = Eigen::VectorXd::Zero(coef.size());
      padded.head(prev_coef.size()) = prev_coef;
      gap = (coef - padded).norm() / coef.norm();  // A-norm: V is A-orthonormal
    }
    res.iterations = s + 1;
    res.gap = gap;
    const bool converged = prev_coef.size() > 0 && gap <= opt.tol;
    if (prev_coef.size() > 0 && gap < best_gap) {
      best_gap = gap;
      best_coef = coef;
      since_best = 0;
    } else if (prev_coef.size() > 0) {
      ++since_best;
    }
    const bool stalled = !converged && opt.stall_window > 0 && since_best >= opt.stall_window &&
                         best_gap <= opt.stall_tol;
    const bool last = converged || stalled || s == opt.max_s;

    if (!last) {
      // Newest block: its first column drives the positive powers, its last
      // column the negative ones (they coincide after a partial breakdown).
      u = pencil.solve_a(b_basis[block_start]);
      v = pencil.solve_b(a_basis.back());
    }
    if (opt.observer) {
      EksmState st{basis, &h, last ? std::span<const double>{} : std::span<const double>(u),
                   last ? std::span<const double>{} : std::span<const double>(v), coef, s + 1, gap};
      opt.observer(st);
    }
    prev_coef = coef;
    if (last) {
      res.converged = converged || stalled;
      if (stalled) {
        res.stalled = true;
        res.gap = best_gap;
        prev_coef = best_coef;
      }
      break;
    }
  }

  res.basis_size = basis.size();
  res.x.assign(n, 0.0);
  for (std::size_t j = 0; j < basis.size() && static_cast<Eigen::Index>(j) < prev_coef.size(); ++j)
    axpy(prev_coef(static_cast<Eigen::Index>(j)), basis[j], res.x);
  if (!res.converged) throw NonConvergence("eksm did not converge", res.iterations, res.gap);
  return res;
}

/// x ~ (A^{-1}B)^{-1/2} y; see eksm_solve.
inline Vector eksm_apply_inv_sqrt(const PencilOperator& pencil, std::span<const double> y, double tol = 1e-10,
                                  std::size_t max_s = 50) {
  EksmOptions opt;
  opt.tol = tol;
  opt.max_s = max_s;
  return eksm_solve(pencil, y, opt).x;
}

} // namespace sgm

#endif // SGM_EKSM_HPP
