#ifndef SGM_IPM_HPP
#define SGM_IPM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sgm/eksm.hpp"
#include "sgm/errors.hpp"
#include "sgm/pcg.hpp"
#include "sgm/rng.hpp"
#include "sgm/sparse.hpp"
#include "sgm/vector_ops.hpp"

namespace sgm {

struct EigenPair {
  double value = 0.0;
  Vector vector;               ///< unit Euclidean norm
  double residual = 0.0;       ///< ||Op x - value x||_2, measured
  double raw_estimate = 0.0;   ///< 1 / (x_k^T y_k) from the last inverse step
  std::size_t iterations = 0;
  bool converged = true;       ///< false only when the last iterate was kept at max_iter
};

/// What inverse iteration does when max_iter is reached.
enum class OnMaxIter { raise, keep_last };

struct IpmOptions {
  double tol = 1e-8;           ///< ||x_{k+1} - x_k||_2, sign-aligned
  std::size_t max_iter = 500;
  std::uint64_t seed = 0;      ///< start vector
  EksmOptions eksm;            ///< inner solver for the geometric-mean pencil
  OnMaxIter on_max_iter = OnMaxIter::raise;
};

struct EigenPairs {
  std::vector<EigenPair> pairs;  ///< ascending by value
  bool deflation_warning = false;
};

/**
 * Inverse iteration restricted to the orthogonal complement of `deflate`.
 *
 * `apply_inverse` maps x to Op^{-1} x; `apply_forward` maps x to Op x and is
 * only used once at the end for the Rayleigh quotient and residual. The
 * deflation vectors must be Euclidean orthonormal.
 */
template <class Inverse, class Forward>
EigenPair inverse_iteration(std::size_t n, Inverse&& apply_inverse, Forward&& apply_forward,
                            std::span<const Vector> deflate, const IpmOptions& opt) {
  for (const auto& q : deflate) require_same_size(q.size(), n, "inverse_iteration deflation vector");
  Rng rng(opt.seed);
  Vector x = rng.normal_vector(n);
  project_out(deflate, x);
  if (!(normalize(x) > 0.0)) throw std::invalid_argument("inverse_iteration: deflation space is the whole space");

  EigenPair out;
  double step = 0.0;
  bool converged = false;
  for (std::size_t it = 1; it <= opt.max_iter; ++it) {
    Vector y = apply_inverse(std::span<const double>(x));
    project_out(deflate, y);
    const double xy = dot(x, y);
    if (!(normalize(y) > 0.0)) throw std::runtime_error("inverse_iteration: iterate vanished");
    if (dot(x, y) < 0.0) scale(-1.0, y);
    step = norm2(difference(y, x));
    out.raw_estimate = 1.0 / xy;
    x = std::move(y);
    out.iterations = it;
    if (step <= opt.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    if (opt.on_max_iter == OnMaxIter::raise)
      throw NonConvergence("inverse power method did not converge", out.iterations, step);
    out.converged = false;
  }

  const Vector fx = apply_forward(std::span<const double>(x));
  out.value = dot(x, fx);
  Vector r = fx;
  axpy(-out.value, x, r);
  out.residual = norm2(r);
  out.vector = std::move(x);
  return out;
}

namespace detail {
inline EigenPairs sorted_pairs(std::vector<EigenPair> pairs) {
  EigenPairs out;
  for (std::size_t i = 1; i < pairs.size(); ++i)
    if (pairs[i].value < pairs[i - 1].value - 1e-8) out.deflation_warning = true;
  std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
  out.pairs = std::move(pairs);
  return out;
}
} // namespace detail

/// (A#B)^{-1} x = (A^{-1}B)^{-1/2} A^{-1} x.
inline Vector geometric_mean_inverse_apply(const PencilOperator& p, std::span<const double> x,
                                           const EksmOptions& eksm) {
  const Vector u = p.solve_a(x);
  return eksm_solve(p, u, eksm).x;
}

/// (A#B) x = B (A^{-1}B)^{-1/2} x, matrix-free.
inline Vector geometric_mean_apply(const PencilOperator& p, std::span<const double> x, const EksmOptions& eksm) {
  return p.apply_b(eksm_solve(p, x, eksm).x);
}

/// Smallest eigenpair of A#B outside span(deflate).
inline EigenPair ipm_smallest_eigenpair(const PencilOperator& p, std::span<const Vector> deflate,
                                        const IpmOptions& opt = {}) {
  return inverse_iteration(
      p.size(), [&](std::span<const double> x) { return geometric_mean_inverse_apply(p, x, opt.eksm); },
      [&](std::span<const double> x) { return geometric_mean_apply(p, x, opt.eksm); }, deflate, opt);
}

/// k smallest eigenpairs of A#B by sequential deflation.
inline EigenPairs smallest_k_eigenpairs(const PencilOperator& p, std::size_t k, const IpmOptions& opt = {}) {
  if (k == 0 || k > p.size()) throw std::invalid_argument("smallest_k_eigenpairs: need 1 <= k <= n");
  std::vector<EigenPair> pairs;
  std::vector<Vector> found;
  for (std::size_t i = 0; i < k; ++i) {
    IpmOptions o = opt;
    o.seed = derive_seed(opt.seed, i);
    auto pair = ipm_smallest_eigenpair(p, found, o);
    found.push_back(pair.vector);
    pairs.push_back(std::move(pair));
  }
  return detail::sorted_pairs(std::move(pairs));
}

/**
 * Smallest eigenpairs of a single sparse symmetric matrix M by the same
 * deflated inverse iteration, with PCG solves on M + shift I. The shift must
 * make M + shift I positive definite; reported values are those of M.
 */
inline EigenPairs smallest_k_eigenpairs(const SparseSymMatrix& m, double shift, std::size_t k,
                                        const IpmOptions& opt = {}, const PcgOptions& pcg = {}) {
  if (k == 0 || k > m.size()) throw std::invalid_argument("smallest_k_eigenpairs: need 1 <= k <= n");
  const SparseSymMatrix shifted = add_diagonal(m, shift);
  const IcPreconditioner pc = incomplete_cholesky(shifted);
  std::vector<EigenPair> pairs;
  std::vector<Vector> found;
  for (std::size_t i = 0; i < k; ++i) {
    IpmOptions o = opt;
    o.seed = derive_seed(opt.seed, i);
    auto pair = inverse_iteration(
        m.size(), [&](std::span<const double> x) { return pcg_solve(shifted, x, pc, pcg); },
        [&](std::span<const double> x) { return spmv(m, x); }, found, o);
    found.push_back(pair.vector);
    pairs.push_back(std::move(pair));
  }
  return detail::sorted_pairs(std::move(pairs));
}

} // namespace sgm

#endif // SGM_IPM_HPP
