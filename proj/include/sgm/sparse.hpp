#ifndef SGM_SPARSE_HPP
#define SGM_SPARSE_HPP

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "sgm/errors.hpp"
#include "sgm/vector_ops.hpp"

namespace sgm {

/// Anything that knows its order and can write y = Op x.
template <class Op>
concept LinearOperator = requires(const Op& op, std::span<const double> x, std::span<double> y) {
  { op.size() } -> std::convertible_to<std::size_t>;
  op.apply(x, y);
};

/**
 * Symmetric sparse matrix in compressed-sparse-row form.
 *
 * Both triangles are stored, so a product is a plain row sweep. Column indices
 * are strictly increasing within each row and entry (i,j) exists iff (j,i)
 * exists with bitwise-equal value. Instances are immutable once built; every
 * constructor path goes through validation or a builder that preserves the
 * invariants by construction.
 */
class SparseSymMatrix {
public:
  SparseSymMatrix() : row_ptr_(1, 0) {}

  /// Takes ownership of raw CSR arrays after checking every invariant.
  SparseSymMatrix(std::size_t n, std::vector<std::size_t> row_ptr, std::vector<std::size_t> col_idx,
                  std::vector<double> values)
      : n_(n), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)), values_(std::move(values)) {
    validate();
  }

  static SparseSymMatrix identity(std::size_t n, double scale = 1.0) {
    std::vector<double> d(n, scale);
    return diagonal(d);
  }

  static SparseSymMatrix diagonal(std::span<const double> d) {
    const std::size_t n = d.size();
    std::vector<std::size_t> rp(n + 1), ci(n);
    std::iota(rp.begin(), rp.end(), std::size_t{0});
    std::iota(ci.begin(), ci.end(), std::size_t{0});
    return SparseSymMatrix(n, std::move(rp), std::move(ci), std::vector<double>(d.begin(), d.end()),
                           Unchecked{});
  }

  /// Builds from a dense row-major array; zeros are not stored. Rejects any
  /// asymmetry (tolerance 0).
  static SparseSymMatrix from_dense(std::size_t n, std::span<const double> a) {
    require_same_size(a.size(), n * n, "SparseSymMatrix::from_dense");
    std::vector<std::size_t> rp(n + 1, 0), ci;
    std::vector<double> v;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        const double x = a[i * n + j];
        if (x != a[j * n + i]) throw std::invalid_argument("SparseSymMatrix::from_dense: matrix is not symmetric");
        if (x != 0.0) {
          ci.push_back(j);
          v.push_back(x);
        }
      }
      rp[i + 1] = ci.size();
    }
    return SparseSymMatrix(n, std::move(rp), std::move(ci), std::move(v), Unchecked{});
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t nnz() const noexcept { return values_.size(); }

  std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
  std::span<const std::size_t> col_idx() const noexcept { return col_idx_; }
  std::span<const double> values() const noexcept { return values_; }

  std::span<const std::size_t> row_cols(std::size_t i) const noexcept {
    return std::span<const std::size_t>(col_idx_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
  }
  std::span<const double> row_values(std::size_t i) const noexcept {
    return std::span<const double>(values_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
  }

  /// Entry (i,j), zero when not stored.
  double at(std::size_t i, std::size_t j) const {
    auto cols = row_cols(i);
    auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return 0.0;
    return values_[row_ptr_[i] + static_cast<std::size_t>(it - cols.begin())];
  }

  Vector diagonal_values() const {
    Vector d(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) d[i] = at(i, i);
    return d;
  }

  /// Largest absolute row sum; bounds the spectral norm.
  double norm_bound() const {
    double best = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += std::abs(values_[p]);
      best = std::max(best, s);
    }
    return best;
  }

  /// y = M x, row-major summation order.
  void apply(std::span<const double> x, std::span<double> y) const {
    require_same_size(x.size(), n_, "spmv");
    require_same_size(y.size(), n_, "spmv");
    for (std::size_t i = 0; i < n_; ++i) {
      double s = 0.0;
      for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += values_[p] * x[col_idx_[p]];
      y[i] = s;
    }
  }

  /// Dense row-major copy (tests and small oracles only).
  std::vector<double> to_dense() const {
    std::vector<double> a(n_ * n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) a[i * n_ + col_idx_[p]] = values_[p];
    return a;
  }

private:
  struct Unchecked {};
  friend class SymTripletBuilder;
  template <class F>
  friend SparseSymMatrix transform_values(const SparseSymMatrix&, F&&);
  template <class F>
  friend SparseSymMatrix combine(const SparseSymMatrix&, const SparseSymMatrix&, F&&);

  SparseSymMatrix(std::size_t n, std::vector<std::size_t> row_ptr, std::vector<std::size_t> col_idx,
                  std::vector<double> values, Unchecked)
      : n_(n), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)), values_(std::move(values)) {}

  void validate() const {
    if (row_ptr_.size() != n_ + 1 || row_ptr_.front() != 0 || row_ptr_.back() != col_idx_.size() ||
        col_idx_.size() != values_.size()) {
      throw std::invalid_argument("SparseSymMatrix: inconsistent CSR array lengths");
    }
    for (std::size_t i = 0; i < n_; ++i) {
      if (row_ptr_[i] > row_ptr_[i + 1]) throw std::invalid_argument("SparseSymMatrix: row_ptr decreasing");
      for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
        if (col_idx_[p] >= n_) throw std::invalid_argument("SparseSymMatrix: column index out of range");
        if (p > row_ptr_[i] && col_idx_[p] <= col_idx_[p - 1])
          throw std::invalid_argument("SparseSymMatrix: columns not strictly increasing");
      }
    }
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
        const std::size_t j = col_idx_[p];
        auto cols = row_cols(j);
        auto it = std::lower_bound(cols.begin(), cols.end(), i);
        if (it == cols.end() || *it != i ||
            values_[row_ptr_[j] + static_cast<std::size_t>(it - cols.begin())] != values_[p]) {
          throw std::invalid_argument("SparseSymMatrix: not symmetric at (" + std::to_string(i) + "," +
                                      std::to_string(j) + ")");
        }
      }
    }
  }

  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_idx_;
  std::vector<double> values_;
};

inline Vector spmv(const SparseSymMatrix& m, std::span<const double> x) {
  Vector y(m.size());
  m.apply(x, y);
  return y;
}

/**
 * Accumulates undirected entries and emits a SparseSymMatrix.
 *
 * add(i, j, w) contributes w to both (i,j) and (j,i); duplicates are summed.
 * Both mirror entries receive their summands in the same order, so the result
 * is bitwise symmetric.
 */
class SymTripletBuilder {
public:
  explicit SymTripletBuilder(std::size_t n) : n_(n) {}

  std::size_t size() const noexcept { return n_; }

  void reserve(std::size_t edges) { triplets_.reserve(2 * edges); }

  void add(std::size_t i, std::size_t j, double w) {
    if (i >= n_ || j >= n_) throw std::out_of_range("SymTripletBuilder::add: index out of range");
    triplets_.emplace_back(i, j, w);
    if (i != j) triplets_.emplace_back(j, i, w);
  }

  SparseSymMatrix build() const {
    auto t = triplets_;
    std::stable_sort(t.begin(), t.end(), [](const auto& a, const auto& b) {
      return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    std::vector<std::size_t> rp(n_ + 1, 0), ci;
    std::vector<double> v;
    ci.reserve(t.size());
    v.reserve(t.size());
    for (std::size_t p = 0; p < t.size();) {
      const auto [i, j, w0] = t[p];
      double w = w0;
      std::size_t q = p + 1;
      for (; q < t.size() && std::get<0>(t[q]) == i && std::get<1>(t[q]) == j; ++q) w += std::get<2>(t[q]);
      ci.push_back(j);
      v.push_back(w);
      ++rp[i + 1];
      p = q;
    }
    for (std::size_t i = 0; i < n_; ++i) rp[i + 1] += rp[i];
    return SparseSymMatrix(n_, std::move(rp), std::move(ci), std::move(v), SparseSymMatrix::Unchecked{});
  }

private:
  std::size_t n_;
  std::vector<std::tuple<std::size_t, std::size_t, double>> triplets_;
};

/// Same pattern, values f(i, j, value). f must be symmetric in (i, j) for the
/// result to stay symmetric; callers pass commutative expressions only.
template <class F>
SparseSymMatrix transform_values(const SparseSymMatrix& m, F&& f) {
  std::vector<double> v(m.nnz());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t p = m.row_ptr_[i]; p < m.row_ptr_[i + 1]; ++p) v[p] = f(i, m.col_idx_[p], m.values_[p]);
  return SparseSymMatrix(m.n_, m.row_ptr_, m.col_idx_, std::move(v), SparseSymMatrix::Unchecked{});
}

/// Union of patterns, values f(a_ij, b_ij) with missing entries read as 0.
template <class F>
SparseSymMatrix combine(const SparseSymMatrix& a, const SparseSymMatrix& b, F&& f) {
  require_same_size(a.size(), b.size(), "combine");
  const std::size_t n = a.size();
  std::vector<std::size_t> rp(n + 1, 0), ci;
  std::vector<double> v;
  ci.reserve(a.nnz() + b.nnz());
  v.reserve(a.nnz() + b.nnz());
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t p = a.row_ptr_[i], pe = a.row_ptr_[i + 1];
    std::size_t q = b.row_ptr_[i], qe = b.row_ptr_[i + 1];
    while (p < pe || q < qe) {
      const std::size_t ja = p < pe ? a.col_idx_[p] : n;
      const std::size_t jb = q < qe ? b.col_idx_[q] : n;
      if (ja == jb) {
        ci.push_back(ja);
        v.push_back(f(a.values_[p++], b.values_[q++]));
      } else if (ja < jb) {
        ci.push_back(ja);
        v.push_back(f(a.values_[p++], 0.0));
      } else {
        ci.push_back(jb);
        v.push_back(f(0.0, b.values_[q++]));
      }
    }
    rp[i + 1] = ci.size();
  }
  return SparseSymMatrix(n, std::move(rp), std::move(ci), std::move(v), SparseSymMatrix::Unchecked{});
}

/// alpha*A + beta*B.
inline SparseSymMatrix add(const SparseSymMatrix& a, const SparseSymMatrix& b, double alpha = 1.0,
                           double beta = 1.0) {
  return combine(a, b, [=](double x, double y) { return alpha * x + beta * y; });
}

/// M + shift * I; the diagonal is inserted where absent.
inline SparseSymMatrix add_diagonal(const SparseSymMatrix& m, double shift) {
  return add(m, SparseSymMatrix::identity(m.size(), shift));
}

/// diag(s) M diag(s), computed as m_ij * (s_i * s_j) so mirror entries agree bitwise.
inline SparseSymMatrix scale_symmetric(const SparseSymMatrix& m, std::span<const double> s) {
  require_same_size(s.size(), m.size(), "scale_symmetric");
  return transform_values(m, [&](std::size_t i, std::size_t j, double x) { return x * (s[i] * s[j]); });
}

/// Largest absolute entrywise difference, missing entries read as 0.
inline double max_abs_difference(const SparseSymMatrix& a, const SparseSymMatrix& b) {
  const auto d = combine(a, b, [](double x, double y) { return x - y; });
  double m = 0.0;
  for (double x : d.values()) m = std::max(m, std::abs(x));
  return m;
}

} // namespace sgm

#endif // SGM_SPARSE_HPP
