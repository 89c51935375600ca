#ifndef SGM_CLUSTERING_HPP
#define SGM_CLUSTERING_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgm/eksm.hpp"
#include "sgm/errors.hpp"
#include "sgm/ipm.hpp"
#include "sgm/kmeans.hpp"
#include "sgm/pcg.hpp"
#include "sgm/signed_graph.hpp"
#include "sgm/sparse.hpp"

namespace sgm {

enum class ClusterMethod { SN, BN, AM, GM };

inline std::string to_string(ClusterMethod m) {
  switch (m) {
    case ClusterMethod::SN: return "SN";
    case ClusterMethod::BN: return "BN";
    case ClusterMethod::AM: return "AM";
    case ClusterMethod::GM: return "GM";
  }
  return "?";
}

inline ClusterMethod parse_cluster_method(const std::string& s) {
  if (s == "SN") return ClusterMethod::SN;
  if (s == "BN") return ClusterMethod::BN;
  if (s == "AM") return ClusterMethod::AM;
  if (s == "GM") return ClusterMethod::GM;
  throw std::invalid_argument("unknown method '" + s + "' (expected SN, BN, AM or GM)");
}

/// Inverse-iteration settings used for clustering: an unconverged pair keeps
/// its last iterate and is flagged in the embedding instead of aborting, and
/// the inner EKSM solve stops when its gap levels off below 1e-6.
inline IpmOptions clustering_ipm_defaults() {
  IpmOptions o;
  o.tol = 1e-6;
  o.max_iter = 500;
  o.on_max_iter = OnMaxIter::keep_last;
  o.eksm.stall_window = 5;
  o.eksm.stall_tol = 1e-6;
  return o;
}

/// Inner solves for clustering also stop at the backward-error floor, which
/// matters when a shift leaves eigenvalues of order eps1.
inline PcgOptions clustering_pcg_defaults() {
  PcgOptions o;
  o.backward_tol = 1e-14;
  return o;
}

struct SpectralOptions {
  ShiftConfig shift;          ///< GM pencil shifts; eps1 also shifts SN and AM, 1 + eps1 shifts BN
  IpmOptions ipm = clustering_ipm_defaults();  ///< ipm.seed is overridden by the `seed` argument
  PcgOptions pcg = clustering_pcg_defaults();
  KmeansOptions kmeans;       ///< kmeans.seed is derived from the `seed` argument
};

/// Rows of the n x k eigenvector matrix, plus the eigenpair diagnostics.
struct Embedding {
  Points rows;
  std::vector<double> eigenvalues;
  std::vector<double> residuals;
  std::size_t iterations = 0;  ///< inverse-iteration steps, summed over the k pairs
  bool deflation_warning = false;
  bool converged = true;       ///< every eigenpair met the tolerance
};

namespace detail {

inline Embedding embedding_from_pairs(const EigenPairs& ep, std::size_t n, std::span<const double> row_scale) {
  const std::size_t k = ep.pairs.size();
  Embedding e;
  e.rows = Points(n, k);
  e.deflation_warning = ep.deflation_warning;
  for (std::size_t c = 0; c < k; ++c) {
    Vector col = ep.pairs[c].vector;
    if (!row_scale.empty()) {
      for (std::size_t i = 0; i < n; ++i) col[i] *= row_scale[i];
      normalize(col);
    }
    for (std::size_t i = 0; i < n; ++i) e.rows(i, c) = col[i];
    e.eigenvalues.push_back(ep.pairs[c].value);
    e.residuals.push_back(ep.pairs[c].residual);
    e.iterations += ep.pairs[c].iterations;
    e.converged = e.converged && ep.pairs[c].converged;
  }
  return e;
}

} // namespace detail

/**
 * Unit-norm eigenvectors for the k smallest eigenvalues of the chosen
 * operator. GM works matrix-free on the shifted pencil; SN, BN and AM run the
 * same deflated inverse iteration on the explicit sparse matrix. BN is solved
 * in its symmetric form and mapped back by Dbar^{-1/2}.
 */
inline Embedding spectral_embedding(const SignedGraph& g, std::size_t k, ClusterMethod method,
                                    std::uint64_t seed, const SpectralOptions& opt = {}) {
  const std::size_t n = g.size();
  if (n == 0) throw std::invalid_argument("spectral_embedding: empty graph");
  if (k < 1 || k > n) throw std::invalid_argument("spectral_embedding: need 1 <= k <= n");
  IpmOptions ipm = opt.ipm;
  ipm.seed = seed;
  switch (method) {
    case ClusterMethod::GM: {
      auto [a, b] = shifted_pair(g, opt.shift);
      const PencilOperator pencil(std::move(a), std::move(b), opt.pcg);
      return detail::embedding_from_pairs(smallest_k_eigenpairs(pencil, k, ipm), n, {});
    }
    case ClusterMethod::SN:
      return detail::embedding_from_pairs(
          smallest_k_eigenpairs(signed_laplacian(g, SignedOperator::SN), opt.shift.eps1, k, ipm, opt.pcg), n, {});
    case ClusterMethod::AM:
      return detail::embedding_from_pairs(
          smallest_k_eigenpairs(signed_laplacian(g, SignedOperator::AM), opt.shift.eps1, k, ipm, opt.pcg), n, {});
    case ClusterMethod::BN: {
      const auto ep =
          smallest_k_eigenpairs(signed_laplacian(g, SignedOperator::BN), 1.0 + opt.shift.eps1, k, ipm, opt.pcg);
      return detail::embedding_from_pairs(ep, n, inverse_sqrt_degrees(degrees(g).d_bar));
    }
  }
  throw std::invalid_argument("spectral_embedding: unknown method");
}

struct SpectralResult {
  ClusterLabels labels;
  Embedding embedding;
};

/// Spectral embedding followed by k-means on its rows.
inline SpectralResult spectral_cluster(const SignedGraph& g, std::size_t k, ClusterMethod method, std::uint64_t seed,
                                       const SpectralOptions& opt = {}) {
  if (k < 2) throw std::invalid_argument("spectral_cluster: k must be >= 2");
  SpectralResult r;
  r.embedding = spectral_embedding(g, k, method, derive_seed(seed, 0), opt);
  KmeansOptions km = opt.kmeans;
  km.seed = derive_seed(seed, 1);
  r.labels = kmeans(r.embedding.rows, k, km).labels;
  return r;
}

/**
 * Majority-vote error: each predicted cluster takes its most frequent true
 * class (ties to the smallest class id) and the error is the fraction of
 * vertices whose cluster's class differs from their own.
 */
inline double clustering_error(std::span<const int> pred, std::span<const int> truth) {
  if (pred.size() != truth.size()) throw DimensionError("clustering_error: label vectors differ in length");
  if (pred.empty()) return 0.0;
  for (int l : pred)
    if (l < 0) throw std::invalid_argument("clustering_error: negative predicted label");
  for (int l : truth)
    if (l < 0) throw std::invalid_argument("clustering_error: negative true label");
  const auto kp = static_cast<std::size_t>(*std::max_element(pred.begin(), pred.end())) + 1;
  const auto kt = static_cast<std::size_t>(*std::max_element(truth.begin(), truth.end())) + 1;
  std::vector<std::size_t> counts(kp * kt, 0);
  for (std::size_t i = 0; i < pred.size(); ++i)
    ++counts[static_cast<std::size_t>(pred[i]) * kt + static_cast<std::size_t>(truth[i])];
  std::size_t correct = 0;
  for (std::size_t c = 0; c < kp; ++c) {
    std::size_t best = 0;
    for (std::size_t t = 0; t < kt; ++t) best = std::max(best, counts[c * kt + t]);
    correct += best;
  }
  return 1.0 - static_cast<double>(correct) / static_cast<double>(pred.size());
}

inline double clustering_error(const ClusterLabels& pred, const ClusterLabels& truth) {
  return clustering_error(pred.labels, truth.labels);
}

} // namespace sgm

#endif // SGM_CLUSTERING_HPP
