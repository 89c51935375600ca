#ifndef SGM_SIGNED_GRAPH_HPP
#define SGM_SIGNED_GRAPH_HPP

#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "sgm/errors.hpp"
#include "sgm/sparse.hpp"

namespace sgm {

/// Positive and negative relations on a shared vertex set. Both weight
/// matrices are nonnegative with zero diagonal.
class SignedGraph {
public:
  SignedGraph() = default;

  SignedGraph(SparseSymMatrix w_plus, SparseSymMatrix w_minus)
      : w_plus_(std::move(w_plus)), w_minus_(std::move(w_minus)) {
    if (w_plus_.size() != w_minus_.size()) throw DimensionError("SignedGraph: W+ and W- differ in order");
    check_weights(w_plus_, "W+");
    check_weights(w_minus_, "W-");
  }

  std::size_t size() const noexcept { return w_plus_.size(); }
  const SparseSymMatrix& w_plus() const noexcept { return w_plus_; }
  const SparseSymMatrix& w_minus() const noexcept { return w_minus_; }

private:
  static void check_weights(const SparseSymMatrix& w, const char* name) {
    for (std::size_t i = 0; i < w.size(); ++i) {
      auto cols = w.row_cols(i);
      auto vals = w.row_values(i);
      for (std::size_t p = 0; p < cols.size(); ++p) {
        if (vals[p] < 0.0) throw std::invalid_argument(std::string("SignedGraph: negative weight in ") + name);
        if (cols[p] == i && vals[p] != 0.0)
          throw std::invalid_argument(std::string("SignedGraph: nonzero diagonal in ") + name);
      }
    }
  }

  SparseSymMatrix w_plus_;
  SparseSymMatrix w_minus_;
};

struct DegreeVectors {
  Vector d_plus;
  Vector d_minus;
  Vector d_bar;  ///< d_plus + d_minus
};

inline Vector row_sums(const SparseSymMatrix& w) {
  Vector d(w.size(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i)
    for (double v : w.row_values(i)) d[i] += v;
  return d;
}

inline DegreeVectors degrees(const SignedGraph& g) {
  DegreeVectors dv{row_sums(g.w_plus()), row_sums(g.w_minus()), {}};
  dv.d_bar.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) dv.d_bar[i] = dv.d_plus[i] + dv.d_minus[i];
  return dv;
}

enum class Normalization { unnormalized, normalized };

/// 1/sqrt(d), with 0 for isolated vertices.
inline Vector inverse_sqrt_degrees(std::span<const double> d) {
  Vector s(d.size(), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) s[i] = d[i] > 0.0 ? 1.0 / std::sqrt(d[i]) : 0.0;
  return s;
}

namespace detail {

/// diag(d) + sign * W, with the diagonal always stored.
inline SparseSymMatrix degree_plus_signed(const SparseSymMatrix& w, std::span<const double> d, double sign) {
  return combine(SparseSymMatrix::diagonal(d), w, [sign](double a, double b) { return a + sign * b; });
}

/// D^{-1/2} M D^{-1/2}, with unit diagonal on non-isolated vertices and an
/// all-zero row for isolated ones.
inline SparseSymMatrix normalize_by_degree(const SparseSymMatrix& m, std::span<const double> d) {
  const Vector s = inverse_sqrt_degrees(d);
  return transform_values(m, [&](std::size_t i, std::size_t j, double x) {
    if (i == j) return d[i] > 0.0 ? x / d[i] : 0.0;
    return x * (s[i] * s[j]);
  });
}

} // namespace detail

/// L = D - W, or L_sym = D^{-1/2} L D^{-1/2}.
inline SparseSymMatrix laplacian(const SparseSymMatrix& w, Normalization variant) {
  const Vector d = row_sums(w);
  auto l = detail::degree_plus_signed(w, d, -1.0);
  return variant == Normalization::normalized ? detail::normalize_by_degree(l, d) : l;
}

/// Q = D + W, or Q_sym = D^{-1/2} Q D^{-1/2}.
inline SparseSymMatrix signless_laplacian(const SparseSymMatrix& w, Normalization variant) {
  const Vector d = row_sums(w);
  auto q = detail::degree_plus_signed(w, d, 1.0);
  return variant == Normalization::normalized ? detail::normalize_by_degree(q, d) : q;
}

enum class SignedOperator { BR, BN, SR, SN, AM };

inline std::string to_string(SignedOperator k) {
  switch (k) {
    case SignedOperator::BR: return "BR";
    case SignedOperator::BN: return "BN";
    case SignedOperator::SR: return "SR";
    case SignedOperator::SN: return "SN";
    case SignedOperator::AM: return "AM";
  }
  return "?";
}

/**
 * Signed Laplacians built from their definitions:
 *   SR = Dbar - W+ + W-          SN = Dbar^{-1/2} SR Dbar^{-1/2}
 *   BR = D+   - W+ + W-          BN ~ Dbar^{-1/2} BR Dbar^{-1/2}
 *   AM = L+_sym + Q-_sym
 * BN proper (Dbar^{-1} BR) is not symmetric; the returned similarity
 * transform has the same spectrum and eigenvectors mapped by Dbar^{1/2}.
 */
inline SparseSymMatrix signed_laplacian(const SignedGraph& g, SignedOperator kind) {
  const auto dv = degrees(g);
  auto signed_adjacency = combine(g.w_plus(), g.w_minus(), [](double p, double m) { return -p + m; });
  switch (kind) {
    case SignedOperator::SR:
      return detail::degree_plus_signed(signed_adjacency, dv.d_bar, 1.0);
    case SignedOperator::SN:
      return scale_symmetric(detail::degree_plus_signed(signed_adjacency, dv.d_bar, 1.0),
                             inverse_sqrt_degrees(dv.d_bar));
    case SignedOperator::BR:
      return detail::degree_plus_signed(signed_adjacency, dv.d_plus, 1.0);
    case SignedOperator::BN:
      return scale_symmetric(detail::degree_plus_signed(signed_adjacency, dv.d_plus, 1.0),
                             inverse_sqrt_degrees(dv.d_bar));
    case SignedOperator::AM:
      return add(laplacian(g.w_plus(), Normalization::normalized),
                 signless_laplacian(g.w_minus(), Normalization::normalized));
  }
  throw std::invalid_argument("signed_laplacian: unknown operator");
}

/// Diagonal shifts making the normalized pair positive definite.
struct ShiftConfig {
  double eps1 = 1e-6;  ///< on L+_sym
  double eps2 = 1e-6;  ///< on Q-_sym

  void validate_for_geometric_mean() const {
    if (!(eps1 > 0.0) || !(eps2 > 0.0)) throw std::invalid_argument("ShiftConfig: shifts must be positive");
    if (!(eps1 + eps2 < 1.0)) throw std::invalid_argument("ShiftConfig: eps1 + eps2 must be < 1");
  }
};

/// (L+_sym + eps1 I, Q-_sym + eps2 I).
inline std::pair<SparseSymMatrix, SparseSymMatrix> shifted_pair(const SignedGraph& g, const ShiftConfig& s) {
  s.validate_for_geometric_mean();
  return {add_diagonal(laplacian(g.w_plus(), Normalization::normalized), s.eps1),
          add_diagonal(signless_laplacian(g.w_minus(), Normalization::normalized), s.eps2)};
}

struct EdgeListReport {
  SignedGraph graph;
  std::size_t self_loops_dropped = 0;
  std::size_t edges_read = 0;
};

/**
 * Reads whitespace-separated "i j w" lines (0-based, '#' starts a comment).
 * w > 0 goes to W+, w < 0 to W- as |w|, w == 0 is ignored. Repeated
 * undirected edges are summed; self-loops are dropped and counted.
 * The vertex count is max index + 1 unless `min_vertices` is larger.
 */
inline EdgeListReport parse_edge_list(std::istream& in, std::size_t min_vertices = 0) {
  struct Edge {
    std::size_t i, j;
    double w;
  };
  std::vector<Edge> edges;
  EdgeListReport rep;
  std::size_t n = min_vertices;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    long long i = 0, j = 0;
    double w = 0.0;
    std::string rest;
    try {
      std::size_t used = 0;
      i = std::stoll(first, &used);
      if (used != first.size()) throw std::invalid_argument("index");
    } catch (const std::exception&) {
      throw ParseError("malformed vertex index '" + first + "'", lineno);
    }
    if (!(ls >> j >> w) || (ls >> rest)) throw ParseError("expected 'i j w'", lineno);
    if (i < 0 || j < 0) throw ParseError("negative vertex index", lineno);
    if (!std::isfinite(w)) throw ParseError("non-finite weight", lineno);
    ++rep.edges_read;
    n = std::max<std::size_t>(n, static_cast<std::size_t>(std::max(i, j)) + 1);
    if (i == j) {
      ++rep.self_loops_dropped;
      continue;
    }
    if (w != 0.0) edges.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), w});
  }
  SymTripletBuilder plus(n), minus(n);
  for (const auto& e : edges) (e.w > 0.0 ? plus : minus).add(e.i, e.j, std::abs(e.w));
  rep.graph = SignedGraph(plus.build(), minus.build());
  return rep;
}

inline EdgeListReport load_edge_list(const std::string& path, std::size_t min_vertices = 0) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge list '" + path + "'");
  return parse_edge_list(in, min_vertices);
}

} // namespace sgm

#endif // SGM_SIGNED_GRAPH_HPP
