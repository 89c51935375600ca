#ifndef SGM_NEIGHBORS_HPP
#define SGM_NEIGHBORS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgm/errors.hpp"
#include "sgm/kmeans.hpp"
#include "sgm/sparse.hpp"

namespace sgm {

enum class Symmetrization { union_of, intersection_of };

enum class NeighborOrder { nearest, farthest };

/**
 * Binary symmetric neighbor graph: i is linked to its `count` nearest (or
 * farthest) points under the Euclidean metric, ties going to the smaller
 * index, and the directed relation is symmetrized by union or intersection.
 */
inline SparseSymMatrix neighbor_graph(const Points& pts, std::size_t count, NeighborOrder order,
                                      Symmetrization sym = Symmetrization::union_of) {
  const std::size_t n = pts.rows();
  if (count == 0 || count >= n) throw std::invalid_argument("neighbor_graph: need 1 <= count < number of points");
  std::vector<std::vector<std::size_t>> chosen(n);
  std::vector<std::size_t> idx;
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    idx.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      dist[j] = squared_distance(pts.row(i), pts.row(j));
      idx.push_back(j);
    }
    auto before = [&](std::size_t a, std::size_t b) {
      if (dist[a] != dist[b]) return order == NeighborOrder::nearest ? dist[a] < dist[b] : dist[a] > dist[b];
      return a < b;
    };
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count), idx.end(), before);
    chosen[i].assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count));
    std::sort(chosen[i].begin(), chosen[i].end());
  }
  SymTripletBuilder b(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : chosen[i]) {
      const bool back = std::binary_search(chosen[j].begin(), chosen[j].end(), i);
      if (back && j < i) continue;  // already added from j's side
      if (!back && sym == Symmetrization::intersection_of) continue;
      b.add(i, j, 1.0);
    }
  }
  return b.build();
}

inline SparseSymMatrix knn_pos_graph(const Points& pts, std::size_t k_plus,
                                     Symmetrization sym = Symmetrization::union_of) {
  return neighbor_graph(pts, k_plus, NeighborOrder::nearest, sym);
}

inline SparseSymMatrix kfn_neg_graph(const Points& pts, std::size_t k_minus,
                                     Symmetrization sym = Symmetrization::union_of) {
  return neighbor_graph(pts, k_minus, NeighborOrder::farthest, sym);
}

/// One point per line; values separated by commas and/or whitespace. Blank
/// lines and '#' comments are skipped.
inline Points parse_points(std::istream& in) {
  std::vector<double> data;
  std::size_t rows = 0, cols = 0, lineno = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || !std::isfinite(v)) throw ParseError("malformed number '" + tok + "'", lineno);
      row.push_back(v);
    }
    if (row.empty()) continue;
    if (rows == 0) cols = row.size();
    if (row.size() != cols)
      throw ParseError("expected " + std::to_string(cols) + " values, found " + std::to_string(row.size()), lineno);
    data.insert(data.end(), row.begin(), row.end());
    ++rows;
  }
  return Points(rows, cols, std::move(data));
}

/// One nonnegative integer label per line.
inline std::vector<int> parse_labels(std::istream& in) {
  std::vector<int> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok, extra;
    if (!(ls >> tok)) continue;
    if (ls >> extra) throw ParseError("expected one label per line", lineno);
    std::size_t used = 0;
    long v = -1;
    try {
      v = std::stol(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || v < 0) throw ParseError("malformed label '" + tok + "'", lineno);
    labels.push_back(static_cast<int>(v));
  }
  return labels;
}

inline Points load_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open point file '" + path + "'");
  return parse_points(in);
}

inline std::vector<int> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open label file '" + path + "'");
  return parse_labels(in);
}

} // namespace sgm

#endif // SGM_NEIGHBORS_HPP
