#ifndef SGM_PCG_HPP
#define SGM_PCG_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "sgm/errors.hpp"
#include "sgm/sparse.hpp"
#include "sgm/vector_ops.hpp"

namespace sgm {

enum class PreconditionerKind { incomplete_cholesky, diagonal };

/**
 * Zero-fill incomplete Cholesky factor M ~ L L^T, or its Jacobi fallback.
 *
 * The factor lives on the lower-triangular pattern of the input. When the
 * factorization meets a non-positive pivot the object degrades to the
 * diagonal preconditioner and kind() reports it.
 */
class IcPreconditioner {
public:
  IcPreconditioner() = default;

  PreconditionerKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return n_; }

  std::span<const std::size_t> lower_row_ptr() const noexcept { return row_ptr_; }
  std::span<const std::size_t> lower_col_idx() const noexcept { return col_idx_; }
  std::span<const double> lower_values() const noexcept { return values_; }

  /// Entry (i,j) of the lower factor (diagonal fallback: sqrt of the diagonal).
  double lower(std::size_t i, std::size_t j) const {
    if (kind_ == PreconditionerKind::diagonal) return i == j ? std::sqrt(diag_[i]) : 0.0;
    for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
      if (col_idx_[p] == j) return values_[p];
    return 0.0;
  }

  /// z = (L L^T)^{-1} r.
  void apply(std::span<const double> r, std::span<double> z) const {
    require_same_size(r.size(), n_, "IcPreconditioner::apply");
    require_same_size(z.size(), n_, "IcPreconditioner::apply");
    if (kind_ == PreconditionerKind::diagonal) {
      for (std::size_t i = 0; i < n_; ++i) z[i] = r[i] / diag_[i];
      return;
    }
    // Forward: L w = r. The diagonal is the last entry of each lower row.
    for (std::size_t i = 0; i < n_; ++i) {
      double s = r[i];
      const std::size_t last = row_ptr_[i + 1] - 1;
      for (std::size_t p = row_ptr_[i]; p < last; ++p) s -= values_[p] * z[col_idx_[p]];
      z[i] = s / values_[last];
    }
    // Backward: L^T z = w, scattering column updates.
    for (std::size_t i = n_; i-- > 0;) {
      const std::size_t last = row_ptr_[i + 1] - 1;
      z[i] /= values_[last];
      const double zi = z[i];
      for (std::size_t p = row_ptr_[i]; p < last; ++p) z[col_idx_[p]] -= values_[p] * zi;
    }
  }

  static IcPreconditioner make_diagonal(const SparseSymMatrix& m) {
    IcPreconditioner pc;
    pc.kind_ = PreconditionerKind::diagonal;
    pc.n_ = m.size();
    pc.diag_ = m.diagonal_values();
    for (auto& d : pc.diag_)
      if (!(d > 0.0)) d = 1.0;
    return pc;
  }

private:
  friend IcPreconditioner incomplete_cholesky(const SparseSymMatrix&);

  PreconditionerKind kind_ = PreconditionerKind::diagonal;
  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
  std::vector<double> diag_;
};

/// IC(0) on the pattern of `m`. Never throws for square input: a
/// non-positive diagonal entry or pivot yields the diagonal fallback.
inline IcPreconditioner incomplete_cholesky(const SparseSymMatrix& m) {
  const std::size_t n = m.size();
  const Vector d = m.diagonal_values();
  for (double x : d)
    if (!(x > 0.0)) return IcPreconditioner::make_diagonal(m);

  IcPreconditioner pc;
  pc.kind_ = PreconditionerKind::incomplete_cholesky;
  pc.n_ = n;
  pc.row_ptr_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = m.row_ptr()[i]; p < m.row_ptr()[i + 1]; ++p) {
      if (m.col_idx()[p] > i) break;
      pc.col_idx_.push_back(m.col_idx()[p]);
      pc.values_.push_back(m.values()[p]);
    }
    pc.row_ptr_[i + 1] = pc.col_idx_.size();
  }

  auto& rp = pc.row_ptr_;
  auto& ci = pc.col_idx_;
  auto& v = pc.values_;
  // Row-oriented left-looking IC(0): L_ij = (a_ij - sum_{c<j} L_ic L_jc) / L_jj
  // with the sum restricted to the common pattern of rows i and j.
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t last = rp[i + 1] - 1;
    for (std::size_t p = rp[i]; p <= last; ++p) {
      const std::size_t j = ci[p];
      double s = v[p];
      std::size_t a = rp[i], b = rp[j];
      const std::size_t ae = p, be = rp[j + 1] - 1;
      while (a < ae && b < be) {
        if (ci[a] == ci[b]) {
          s -= v[a++] * v[b++];
        } else if (ci[a] < ci[b]) {
          ++a;
        } else {
          ++b;
        }
      }
      if (j == i) {
        if (!(s > 0.0) || !std::isfinite(s)) return IcPreconditioner::make_diagonal(m);
        v[p] = std::sqrt(s);
      } else {
        v[p] = s / v[rp[j + 1] - 1];
      }
    }
  }
  return pc;
}

struct PcgOptions {
  double tol = 1e-10;          ///< relative residual ||Mx - b|| / ||b||
  std::size_t max_iter = 0;    ///< 0 means 10 * n
  /// When positive, also accept ||Mx - b|| <= backward_tol * (||M|| ||x|| + ||b||),
  /// the level reachable in floating point for nearly singular M. Needs an
  /// operator with norm_bound().
  double backward_tol = 0.0;
};

struct PcgResult {
  Vector x;
  std::size_t iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

/**
 * Preconditioned conjugate gradients for an SPD operator.
 *
 * Convergence is judged on the recomputed true residual, not only the
 * recursive one. Throws IndefiniteError when a search direction has
 * non-positive curvature; reports non-convergence through the result.
 */
template <LinearOperator Op>
PcgResult pcg(const Op& op, std::span<const double> b, const IcPreconditioner& pc, const PcgOptions& opt = {},
              std::span<const double> x0 = {}) {
  const std::size_t n = op.size();
  require_same_size(b.size(), n, "pcg");
  const std::size_t max_iter = opt.max_iter ? opt.max_iter : 10 * std::max<std::size_t>(n, 1);
  PcgResult res;
  res.x.assign(n, 0.0);
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }
  if (!x0.empty()) {
    require_same_size(x0.size(), n, "pcg initial guess");
    res.x.assign(x0.begin(), x0.end());
  }
  const double target = opt.tol * bnorm;
  double op_norm = 0.0;
  if constexpr (requires { op.norm_bound(); }) {
    if (opt.backward_tol > 0.0) op_norm = op.norm_bound();
  }
  auto acceptable = [&](double rn) {
    return rn <= target || (op_norm > 0.0 && rn <= opt.backward_tol * (op_norm * norm2(res.x) + bnorm));
  };

  Vector r(n), z(n), p(n), q(n);
  auto true_residual = [&] {
    op.apply(res.x, q);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
    return norm2(r);
  };
  double rnorm = true_residual();
  pc.apply(r, z);
  p = z;
  double rz = dot(r, z);

  std::size_t it = 0;
  while (true) {
    if (acceptable(rnorm)) {
      // Confirm against the true residual before declaring success.
      rnorm = true_residual();
      if (acceptable(rnorm)) {
        res.converged = true;
        break;
      }
      pc.apply(r, z);
      p = z;
      rz = dot(r, z);
    }
    if (it >= max_iter) break;
    op.apply(p, q);
    const double curvature = dot(p, q);
    if (!(curvature > 0.0)) {
      if (rnorm <= 10.0 * target) break;  // stagnated at roundoff level
      throw IndefiniteError("pcg: non-positive curvature, operator is not positive definite");
    }
    const double alpha = rz / curvature;
    axpy(alpha, p, res.x);
    axpy(-alpha, q, r);
    rnorm = norm2(r);
    ++it;
    if (acceptable(rnorm)) continue;
    pc.apply(r, z);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  res.iterations = it;
  res.relative_residual = rnorm / bnorm;
  return res;
}

/// Solution of M x = b; throws NonConvergence when the budget runs out.
template <LinearOperator Op>
Vector pcg_solve(const Op& op, std::span<const double> b, const IcPreconditioner& pc, const PcgOptions& opt = {},
                 std::span<const double> x0 = {}) {
  auto res = pcg(op, b, pc, opt, x0);
  if (!res.converged) throw NonConvergence("pcg did not converge", res.iterations, res.relative_residual);
  return std::move(res.x);
}

} // namespace sgm

#endif // SGM_PCG_HPP
