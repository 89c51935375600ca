#ifndef SGM_SBM_HPP
#define SGM_SBM_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "sgm/dense.hpp"
#include "sgm/errors.hpp"
#include "sgm/rng.hpp"
#include "sgm/signed_graph.hpp"
#include "sgm/sparse.hpp"

namespace sgm {

/// Signed stochastic block model with k equal clusters of size cluster_size.
struct SbmParams {
  std::size_t k = 2;
  std::size_t cluster_size = 1;
  double p_in_plus = 0.0;
  double p_out_plus = 0.0;
  double p_in_minus = 0.0;
  double p_out_minus = 0.0;

  std::size_t n() const noexcept { return k * cluster_size; }

  void validate() const {
    if (k < 2) throw std::invalid_argument("SbmParams: k must be >= 2");
    if (cluster_size < 1) throw std::invalid_argument("SbmParams: cluster size must be >= 1");
    for (double p : {p_in_plus, p_out_plus, p_in_minus, p_out_minus})
      if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("SbmParams: probabilities must lie in [0,1]");
  }
};

/// Planted cluster of every vertex (clusters are contiguous index ranges).
inline std::vector<int> planted_labels(const SbmParams& p) {
  std::vector<int> labels(p.n());
  for (std::size_t v = 0; v < labels.size(); ++v) labels[v] = static_cast<int>(v / p.cluster_size);
  return labels;
}

namespace detail {

/// Calls emit(idx) for each idx in [0, total) independently with probability
/// p, jumping between successes with geometric gaps.
template <class Emit>
void bernoulli_positions(std::uint64_t total, double p, Rng& rng, Emit&& emit) {
  if (p <= 0.0 || total == 0) return;
  if (p >= 1.0) {
    for (std::uint64_t i = 0; i < total; ++i) emit(i);
    return;
  }
  const double log_q = std::log1p(-p);
  double pos = -1.0;
  while (true) {
    pos += 1.0 + std::floor(std::log(rng.uniform_open_left()) / log_q);
    if (pos >= static_cast<double>(total)) return;
    emit(static_cast<std::uint64_t>(pos));
  }
}

inline void sample_layer(const SbmParams& prm, double p_in, double p_out, Rng& rng, SymTripletBuilder& out) {
  const std::size_t c = prm.cluster_size;
  for (std::size_t a = 0; a < prm.k; ++a) {
    // Intra-cluster: strictly-upper-triangular pairs, row by row.
    const std::size_t base = a * c;
    std::size_t row = 0, row_start = 0;
    bernoulli_positions(static_cast<std::uint64_t>(c) * (c - 1) / 2, p_in, rng, [&](std::uint64_t idx) {
      while (idx >= row_start + (c - 1 - row)) {
        row_start += c - 1 - row;
        ++row;
      }
      out.add(base + row, base + row + 1 + (idx - row_start), 1.0);
    });
    for (std::size_t b = a + 1; b < prm.k; ++b) {
      bernoulli_positions(static_cast<std::uint64_t>(c) * c, p_out, rng, [&](std::uint64_t idx) {
        out.add(a * c + idx / c, b * c + idx % c, 1.0);
      });
    }
  }
}

} // namespace detail

/**
 * Draws a signed graph: each unordered vertex pair independently receives a
 * positive edge (p_in_plus inside a cluster, p_out_plus across) and,
 * independently, a negative edge with the minus probabilities. Unit weights,
 * zero diagonal. Deterministic in `seed`.
 */
inline SignedGraph sample(const SbmParams& prm, std::uint64_t seed) {
  prm.validate();
  Rng pos(derive_seed(seed, 0)), neg(derive_seed(seed, 1));
  SymTripletBuilder plus(prm.n()), minus(prm.n());
  detail::sample_layer(prm, prm.p_in_plus, prm.p_out_plus, pos, plus);
  detail::sample_layer(prm, prm.p_in_minus, prm.p_out_minus, neg, minus);
  return SignedGraph(plus.build(), minus.build());
}

/// Block-constant expectations of W+ and W-, diagonal included (rank k).
inline std::pair<DenseSymMatrix, DenseSymMatrix> expected_graph(const SbmParams& prm) {
  prm.validate();
  const std::size_t n = prm.n();
  if (n > kDenseOracleCap) throw DimensionError("expected_graph: order exceeds dense oracle cap");
  const auto en = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd wp(en, en), wm(en, en);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const bool same = i / prm.cluster_size == j / prm.cluster_size;
      const auto ei = static_cast<Eigen::Index>(i), ej = static_cast<Eigen::Index>(j);
      wp(ei, ej) = same ? prm.p_in_plus : prm.p_out_plus;
      wm(ei, ej) = same ? prm.p_in_minus : prm.p_out_minus;
    }
  return {DenseSymMatrix(std::move(wp)), DenseSymMatrix(std::move(wm))};
}

/// One strict inequality "left < right" with margin right - left.
struct Condition {
  bool holds = false;
  double margin = 0.0;
  bool degenerate = false;  ///< a denominator vanished; holds is false
};

struct ConditionSet {
  Condition e_plus, e_minus, e_bal, e_vol, e_conf, e_g, e_g_shifted;
  double shift_sum = 0.0;  ///< eps1 + eps2 used for e_g_shifted
};

namespace detail {
inline Condition less_than(double left, double right) { return {left < right, right - left, false}; }

/// k p+_out / (p+_in + (k-1) p+_out), the factor 1 - lambda_i+/d+.
inline double positive_factor(const SbmParams& p, bool& degenerate) {
  const double km1 = static_cast<double>(p.k - 1);
  const double den = p.p_in_plus + km1 * p.p_out_plus;
  if (!(den > 0.0)) {
    degenerate = true;
    return 0.0;
  }
  return static_cast<double>(p.k) * p.p_out_plus / den;
}

/// 1 + (p-_in - p-_out) / (p-_in + (k-1) p-_out), the factor 1 + lambda_i-/d-.
inline double negative_factor(const SbmParams& p, bool& degenerate) {
  const double km1 = static_cast<double>(p.k - 1);
  const double den = p.p_in_minus + km1 * p.p_out_minus;
  if (!(den > 0.0)) {
    degenerate = true;
    return 0.0;
  }
  return 1.0 + (p.p_in_minus - p.p_out_minus) / den;
}
} // namespace detail

/// Evaluates every inequality of the SBM condition table, strictly.
inline ConditionSet conditions(const SbmParams& p, const ShiftConfig& shift = {}) {
  const double km1 = static_cast<double>(p.k - 1);
  const double kd = static_cast<double>(p.k);
  ConditionSet c;
  c.e_plus = detail::less_than(p.p_out_plus, p.p_in_plus);
  c.e_minus = detail::less_than(p.p_in_minus, p.p_out_minus);
  c.e_bal = detail::less_than(p.p_in_minus + p.p_out_plus, p.p_in_plus + p.p_out_minus);
  c.e_vol = detail::less_than(p.p_in_minus + km1 * p.p_out_minus, p.p_in_plus + km1 * p.p_out_plus);

  bool deg_plus = false, deg_minus = false;
  const double fp = detail::positive_factor(p, deg_plus);
  const double fm = detail::negative_factor(p, deg_minus);
  const double den_minus = p.p_in_minus + km1 * p.p_out_minus;
  if (deg_plus || deg_minus) {
    c.e_conf.degenerate = c.e_g.degenerate = c.e_g_shifted.degenerate = true;
  } else {
    c.e_conf = detail::less_than(fp * (kd * p.p_in_minus / den_minus), 1.0);
    c.e_g = detail::less_than(fp * fm, 1.0);
    c.shift_sum = shift.eps1 + shift.eps2;
    c.e_g_shifted = detail::less_than(fp * fm + c.shift_sum, 1.0);
    c.e_g_shifted.holds = c.e_g_shifted.holds && c.shift_sum < 1.0;
  }
  return c;
}

/// Expected eigenvalues of one operator: on chi_1..chi_k, and on the rest.
struct OperatorSpectrum {
  std::vector<double> chi;
  double bulk = 0.0;
  bool degenerate = false;

  /// chi_1..chi_k strictly below the bulk eigenvalue.
  bool chi_at_bottom() const {
    if (degenerate) return false;
    for (double v : chi)
      if (!(v < bulk)) return false;
    return true;
  }
};

struct ExpectedSpectrum {
  double lambda1_plus = 0.0, lambdai_plus = 0.0;
  double lambda1_minus = 0.0, lambdai_minus = 0.0;
  double d_plus = 0.0, d_minus = 0.0;
  OperatorSpectrum br, bn, sr, sn, am, gm;
};

/**
 * Closed-form spectra of the expected operators. chi_i are shared
 * eigenvectors of the expected W+ and W-, so each operator acts on them by
 * the scalar formula below; all other eigenvectors see the bulk value.
 * The geometric-mean entries use the given shifts (pass zeros for the
 * unshifted operator).
 */
inline ExpectedSpectrum expected_spectrum(const SbmParams& p, const ShiftConfig& shift = {}) {
  const double c = static_cast<double>(p.cluster_size);
  const double km1 = static_cast<double>(p.k - 1);
  ExpectedSpectrum s;
  s.lambda1_plus = c * (p.p_in_plus + km1 * p.p_out_plus);
  s.lambdai_plus = c * (p.p_in_plus - p.p_out_plus);
  s.lambda1_minus = c * (p.p_in_minus + km1 * p.p_out_minus);
  s.lambdai_minus = c * (p.p_in_minus - p.p_out_minus);
  s.d_plus = s.lambda1_plus;
  s.d_minus = s.lambda1_minus;
  const double d_bar = s.d_plus + s.d_minus;

  auto lp = [&](std::size_t i) { return i == 0 ? s.lambda1_plus : s.lambdai_plus; };
  auto lm = [&](std::size_t i) { return i == 0 ? s.lambda1_minus : s.lambdai_minus; };
  for (std::size_t i = 0; i < p.k; ++i) {
    s.br.chi.push_back(s.d_plus - lp(i) + lm(i));
    s.sr.chi.push_back(d_bar - lp(i) + lm(i));
  }
  s.br.bulk = s.d_plus;
  s.sr.bulk = d_bar;

  if (d_bar > 0.0) {
    for (std::size_t i = 0; i < p.k; ++i) {
      s.bn.chi.push_back(s.br.chi[i] / d_bar);
      s.sn.chi.push_back(s.sr.chi[i] / d_bar);
    }
    s.bn.bulk = s.d_plus / d_bar;
    s.sn.bulk = 1.0;
  } else {
    s.bn.degenerate = s.sn.degenerate = true;
  }

  if (s.d_plus > 0.0 && s.d_minus > 0.0) {
    for (std::size_t i = 0; i < p.k; ++i) {
      const double a = 1.0 - lp(i) / s.d_plus;   // eigenvalue of expected L+_sym
      const double b = 1.0 + lm(i) / s.d_minus;  // eigenvalue of expected Q-_sym
      s.am.chi.push_back(a + b);
      s.gm.chi.push_back(std::sqrt((a + shift.eps1) * (b + shift.eps2)));
    }
    s.am.bulk = 2.0;
    s.gm.bulk = std::sqrt((1.0 + shift.eps1) * (1.0 + shift.eps2));
  } else {
    s.am.degenerate = s.gm.degenerate = true;
  }
  return s;
}

/// chi_1 = 1 and, for i = 2..k, chi_i = (k-1) on one planted cluster and -1
/// elsewhere; chi_2..chi_k indicate clusters 0..k-2. chi_1 is orthogonal to
/// the rest, which pairwise have inner product -k|C| (they span the
/// planted eigenspace without being orthogonal for k > 2).
inline std::vector<Vector> indicator_basis(const SbmParams& p) {
  const std::size_t n = p.n();
  std::vector<Vector> chi;
  chi.emplace_back(n, 1.0);
  const double km1 = static_cast<double>(p.k - 1);
  for (std::size_t i = 1; i < p.k; ++i) {
    Vector v(n, -1.0);
    for (std::size_t t = (i - 1) * p.cluster_size; t < i * p.cluster_size; ++t) v[t] = km1;
    chi.push_back(std::move(v));
  }
  return chi;
}

enum class ExpectedOperator { SN, BN, AM, GM };

/**
 * Dense expected operator: SN = I - (W+ - W-)/dbar, BN symmetrized
 * dbar^{-1}(d+ I - W+ + W-), AM = L+_sym + Q-_sym, and GM the dense geometric
 * mean of (L+_sym + eps1 I, Q-_sym + eps2 I).
 */
inline DenseSymMatrix expected_operator(const SbmParams& p, ExpectedOperator op, const ShiftConfig& shift = {}) {
  const auto [wp, wm] = expected_graph(p);
  const auto s = expected_spectrum(p);
  const auto n = static_cast<Eigen::Index>(p.n());
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  const double d_bar = s.d_plus + s.d_minus;
  auto need = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("expected_operator: degenerate degrees for ") + what);
  };
  switch (op) {
    case ExpectedOperator::SN:
      need(d_bar > 0.0, "SN");
      return DenseSymMatrix(Eigen::MatrixXd((d_bar * id - wp.matrix() + wm.matrix()) / d_bar));
    case ExpectedOperator::BN:
      need(d_bar > 0.0, "BN");
      return DenseSymMatrix(Eigen::MatrixXd((s.d_plus * id - wp.matrix() + wm.matrix()) / d_bar));
    case ExpectedOperator::AM:
      need(s.d_plus > 0.0 && s.d_minus > 0.0, "AM");
      return DenseSymMatrix(Eigen::MatrixXd(2.0 * id - wp.matrix() / s.d_plus + wm.matrix() / s.d_minus));
    case ExpectedOperator::GM: {
      need(s.d_plus > 0.0 && s.d_minus > 0.0, "GM");
      const DenseSymMatrix a(Eigen::MatrixXd((1.0 + shift.eps1) * id - wp.matrix() / s.d_plus));
      const DenseSymMatrix b(Eigen::MatrixXd((1.0 + shift.eps2) * id + wm.matrix() / s.d_minus));
      return dense_geometric_mean(a, b);
    }
  }
  throw std::invalid_argument("expected_operator: unknown operator");
}

enum class Conditioning { all, e_bal, e_plus_or_minus, e_plus_and_minus };
enum class RegionTarget { e_g, e_bal_and_vol };

inline std::string to_string(Conditioning c) {
  switch (c) {
    case Conditioning::all: return "all";
    case Conditioning::e_bal: return "E_bal";
    case Conditioning::e_plus_or_minus: return "E+|E-";
    case Conditioning::e_plus_and_minus: return "E+&E-";
  }
  return "?";
}

inline std::string to_string(RegionTarget t) { return t == RegionTarget::e_g ? "E_G" : "E_bal&E_vol"; }

struct RegionFraction {
  double fraction = 0.0;
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 0;
};

/**
 * Fraction of the grid (p+_in, p+_out, p-_in, p-_out) in [0,1]^4, with
 * `steps` cell-centred points per axis, where `target` holds among points
 * satisfying `conditioning`. Points with a degenerate target denominator
 * count in neither total. Throws when no point satisfies the conditioning.
 */
inline RegionFraction region_fraction(std::size_t k, std::size_t steps, Conditioning conditioning,
                                      RegionTarget target) {
  if (steps < 2) throw std::invalid_argument("region_fraction: steps must be >= 2");
  if (k < 2) throw std::invalid_argument("region_fraction: k must be >= 2");
  std::vector<double> grid(steps);
  for (std::size_t j = 0; j < steps; ++j) grid[j] = (static_cast<double>(j) + 0.5) / static_cast<double>(steps);

  RegionFraction r;
  SbmParams p;
  p.k = k;
  for (double pin_p : grid)
    for (double pout_p : grid)
      for (double pin_m : grid)
        for (double pout_m : grid) {
          p.p_in_plus = pin_p;
          p.p_out_plus = pout_p;
          p.p_in_minus = pin_m;
          p.p_out_minus = pout_m;
          const auto c = conditions(p);
          bool cond = true;
          switch (conditioning) {
            case Conditioning::all: break;
            case Conditioning::e_bal: cond = c.e_bal.holds; break;
            case Conditioning::e_plus_or_minus: cond = c.e_plus.holds || c.e_minus.holds; break;
            case Conditioning::e_plus_and_minus: cond = c.e_plus.holds && c.e_minus.holds; break;
          }
          if (!cond) continue;
          bool hit = false;
          if (target == RegionTarget::e_g) {
            if (c.e_g.degenerate) continue;
            hit = c.e_g.holds;
          } else {
            hit = c.e_bal.holds && c.e_vol.holds;
          }
          ++r.denominator;
          if (hit) ++r.numerator;
        }
  if (r.denominator == 0) throw std::domain_error("region_fraction: conditioning event is empty on this grid");
  r.fraction = static_cast<double>(r.numerator) / static_cast<double>(r.denominator);
  return r;
}

/// Upper bound 1/6 + 2/(3(k-1)) + 1/(k-1)^2 on the share of E+ & E- cases
/// where the arithmetic-mean operators keep chi at the bottom.
inline double corollary_bound(std::size_t k) {
  if (k < 2) throw std::invalid_argument("corollary_bound: k must be >= 2");
  const double km1 = static_cast<double>(k - 1);
  return 1.0 / 6.0 + 2.0 / (3.0 * km1) + 1.0 / (km1 * km1);
}

} // namespace sgm

#endif // SGM_SBM_HPP
