#ifndef SGM_KMEANS_HPP
#define SGM_KMEANS_HPP

#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "sgm/errors.hpp"
#include "sgm/parallel.hpp"
#include "sgm/rng.hpp"

namespace sgm {

/// Row-major n x d matrix of points.
class Points {
public:
  Points() = default;
  Points(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  Points(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) throw DimensionError("Points: data size does not match rows * cols");
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

/// Cluster id per vertex, ids in [0, k).
struct ClusterLabels {
  std::vector<int> labels;
  int k = 0;
  bool has_empty_cluster = false;

  std::vector<std::size_t> sizes() const {
    std::vector<std::size_t> s(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++s[static_cast<std::size_t>(l)];
    return s;
  }
};

struct KmeansOptions {
  std::size_t restarts = 10;
  std::size_t max_iter = 300;
  double tol = 1e-9;         ///< relative decrease of the objective
  std::uint64_t seed = 0;
  std::size_t threads = 1;   ///< restarts in parallel; 0 = all cores
};

struct KmeansResult {
  ClusterLabels labels;
  double inertia = 0.0;  ///< within-cluster sum of squares
  std::size_t iterations = 0;
};

namespace detail {

inline std::size_t nearest_centroid(std::span<const double> x, const Points& centers, double& best) {
  std::size_t arg = 0;
  best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.rows(); ++c) {
    const double d = squared_distance(x, centers.row(c));
    if (d < best) {  // strict: ties keep the lowest index
      best = d;
      arg = c;
    }
  }
  return arg;
}

/// k-means++ seeding.
inline Points seed_centers(const Points& pts, std::size_t k, Rng& rng) {
  const std::size_t n = pts.rows();
  Points centers(k, pts.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t pick = static_cast<std::size_t>(rng.below(n));
  for (std::size_t c = 0; c < k; ++c) {
    auto dst = centers.row(c);
    auto src = pts.row(pick);
    std::copy(src.begin(), src.end(), dst.begin());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(pts.row(i), centers.row(c)));
      total += d2[i];
    }
    if (c + 1 == k) break;
    if (total > 0.0) {
      double r = rng.uniform() * total;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        r -= d2[i];
        if (r < 0.0 && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(rng.below(n));
    }
  }
  return centers;
}

inline KmeansResult lloyd(const Points& pts, std::size_t k, const KmeansOptions& opt, std::uint64_t seed) {
  const std::size_t n = pts.rows(), d = pts.cols();
  Rng rng(seed);
  Points centers = seed_centers(pts, k, rng);
  KmeansResult res;
  res.labels.k = static_cast<int>(k);
  res.labels.labels.assign(n, 0);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < opt.max_iter; ++it) {
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best;
      res.labels.labels[i] = static_cast<int>(nearest_centroid(pts.row(i), centers, best));
      obj += best;
    }
    // Assignment after an update step can only lower the objective.
    assert(obj <= prev * (1.0 + 1e-12) + 1e-300);
    res.iterations = it + 1;
    res.inertia = obj;
    if (prev - obj <= opt.tol * std::max(prev == std::numeric_limits<double>::infinity() ? obj : prev, 1e-300) &&
        it > 0)
      break;
    prev = obj;
    Points sums(k, d);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(res.labels.labels[i]);
      ++counts[c];
      auto row = pts.row(i);
      for (std::size_t j = 0; j < d; ++j) sums(c, j) += row[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its centroid
      for (std::size_t j = 0; j < d; ++j) centers(c, j) = sums(c, j) / static_cast<double>(counts[c]);
    }
  }
  std::vector<std::size_t> counts(k, 0);
  for (int l : res.labels.labels) ++counts[static_cast<std::size_t>(l)];
  for (auto c : counts)
    if (c == 0) res.labels.has_empty_cluster = true;
  return res;
}

} // namespace detail

/**
 * Lloyd's algorithm with k-means++ seeding; the best of `restarts` runs by
 * within-cluster sum of squares is returned. Each restart draws from its own
 * derived seed, so the result does not depend on the thread count.
 */
inline KmeansResult kmeans(const Points& pts, std::size_t k, const KmeansOptions& opt = {}) {
  if (k == 0) throw std::invalid_argument("kmeans: k must be >= 1");
  if (pts.rows() < k) throw std::invalid_argument("kmeans: fewer points than clusters");
  const std::size_t runs = std::max<std::size_t>(opt.restarts, 1);
  std::vector<KmeansResult> results(runs);
  parallel_for(runs, opt.threads, [&](std::size_t r) {
    results[r] = detail::lloyd(pts, k, opt, derive_seed(opt.seed, r));
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs; ++r)
    if (results[r].inertia < results[best].inertia) best = r;
  return std::move(results[best]);
}

} // namespace sgm

#endif // SGM_KMEANS_HPP
