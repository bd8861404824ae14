#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "whg/errors.hpp"
#include "whg/field.hpp"
#include "whg/rng.hpp"

namespace whg {

// Vector over Z_p; every entry reduced mod p.
using VecZp = std::vector<Residue>;

inline VecZp vec_add(const VecZp& a, const VecZp& b, std::int64_t p) {
  VecZp r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = add_mod(a[i], b[i], p);
  return r;
}

inline VecZp vec_sub(const VecZp& a, const VecZp& b, std::int64_t p) {
  VecZp r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = sub_mod(a[i], b[i], p);
  return r;
}

inline VecZp vec_scale(Residue c, const VecZp& a, std::int64_t p) {
  VecZp r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = mul_mod(c, a[i], p);
  return r;
}

inline Residue dot(const VecZp& a, const VecZp& b, std::int64_t p) {
  Residue s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s = add_mod(s, mul_mod(a[i], b[i], p), p);
  return s;
}

inline bool is_zero_vec(const VecZp& a) {
  return std::all_of(a.begin(), a.end(), [](Residue v) { return v == 0; });
}

// Dense row-major matrix over Z_p.
struct MatZp {
  std::int64_t rows = 0, cols = 0;
  std::vector<Residue> a;

  MatZp() = default;
  MatZp(std::int64_t r, std::int64_t c) : rows(r), cols(c), a(static_cast<std::size_t>(r * c), 0) {}

  Residue& at(std::int64_t r, std::int64_t c) { return a[static_cast<std::size_t>(r * cols + c)]; }
  Residue at(std::int64_t r, std::int64_t c) const { return a[static_cast<std::size_t>(r * cols + c)]; }

  static MatZp identity(std::int64_t n) {
    MatZp m(n, n);
    for (std::int64_t i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
  }

  VecZp row(std::int64_t r) const {
    return VecZp(a.begin() + r * cols, a.begin() + (r + 1) * cols);
  }

  friend bool operator==(const MatZp& x, const MatZp& y) {
    return x.rows == y.rows && x.cols == y.cols && x.a == y.a;
  }
};

inline MatZp mat_mul(const MatZp& x, const MatZp& y, std::int64_t p) {
  MatZp r(x.rows, y.cols);
  for (std::int64_t i = 0; i < x.rows; ++i)
    for (std::int64_t k = 0; k < x.cols; ++k) {
      const Residue v = x.at(i, k);
      if (v == 0) continue;
      for (std::int64_t j = 0; j < y.cols; ++j)
        r.at(i, j) = add_mod(r.at(i, j), mul_mod(v, y.at(k, j), p), p);
    }
  return r;
}

inline VecZp mat_vec(const MatZp& m, const VecZp& v, std::int64_t p) {
  VecZp r(static_cast<std::size_t>(m.rows), 0);
  for (std::int64_t i = 0; i < m.rows; ++i) {
    Residue s = 0;
    for (std::int64_t j = 0; j < m.cols; ++j) s = add_mod(s, mul_mod(m.at(i, j), v[static_cast<std::size_t>(j)], p), p);
    r[static_cast<std::size_t>(i)] = s;
  }
  return r;
}

// Reduced basis of a subspace of Z_p^dim.  Rows are kept in reduced row
// echelon form with unit pivots, so subspace equality is structural
// equality of the rows.
struct SubspaceBasis {
  std::int64_t p = 2;
  std::int64_t ambient = 0;
  std::vector<VecZp> rows;       // echelon-reduced, pivot columns increasing
  std::vector<std::int64_t> pivots;

  SubspaceBasis() = default;
  SubspaceBasis(std::int64_t p_, std::int64_t ambient_) : p(p_), ambient(ambient_) {}

  std::int64_t dim() const { return static_cast<std::int64_t>(rows.size()); }

  // Subtracts the projection of v onto the span; returns the residual.
  VecZp reduce(VecZp v) const {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const Residue c = v[static_cast<std::size_t>(pivots[r])];
      if (c != 0) v = vec_sub(v, vec_scale(c, rows[r], p), p);
    }
    return v;
  }

  bool contains(const VecZp& v) const { return is_zero_vec(reduce(v)); }

  // Inserts v into the span; returns true if the dimension grew.
  bool insert(VecZp v) {
    v = reduce(std::move(v));
    std::int64_t piv = -1;
    for (std::int64_t j = 0; j < ambient; ++j)
      if (v[static_cast<std::size_t>(j)] != 0) { piv = j; break; }
    if (piv < 0) return false;
    v = vec_scale(inv_mod(v[static_cast<std::size_t>(piv)], p), v, p);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const Residue c = rows[r][static_cast<std::size_t>(piv)];
      if (c != 0) rows[r] = vec_sub(rows[r], vec_scale(c, v, p), p);
    }
    std::size_t pos = 0;
    while (pos < pivots.size() && pivots[pos] < piv) ++pos;
    rows.insert(rows.begin() + static_cast<std::ptrdiff_t>(pos), std::move(v));
    pivots.insert(pivots.begin() + static_cast<std::ptrdiff_t>(pos), piv);
    return true;
  }

  // Coefficients expressing v over the basis rows, absent if v is outside.
  std::optional<VecZp> coordinates(const VecZp& v) const {
    VecZp coef(rows.size(), 0);
    VecZp rest = v;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const Residue c = rest[static_cast<std::size_t>(pivots[r])];
      if (c != 0) {
        coef[r] = c;
        rest = vec_sub(rest, vec_scale(c, rows[r], p), p);
      }
    }
    if (!is_zero_vec(rest)) return std::nullopt;
    return coef;
  }

  // Element with the given coefficient tuple.
  VecZp combine(const VecZp& coef) const {
    VecZp v(static_cast<std::size_t>(ambient), 0);
    for (std::size_t r = 0; r < rows.size(); ++r)
      if (coef[r] != 0) v = vec_add(v, vec_scale(coef[r], rows[r], p), p);
    return v;
  }

  VecZp random_element(Rng& rng) const {
    VecZp coef(rows.size(), 0);
    for (auto& c : coef) c = static_cast<Residue>(rng.below(static_cast<std::uint64_t>(p)));
    return combine(coef);
  }

  std::int64_t size() const {  // number of vectors in the subspace
    std::int64_t s = 1;
    for (std::int64_t i = 0; i < dim(); ++i) s *= p;
    return s;
  }

  friend bool operator==(const SubspaceBasis& a, const SubspaceBasis& b) {
    return a.p == b.p && a.ambient == b.ambient && a.rows == b.rows;
  }
  friend bool operator!=(const SubspaceBasis& a, const SubspaceBasis& b) { return !(a == b); }
};

inline SubspaceBasis span_of(std::int64_t p, std::int64_t ambient, const std::vector<VecZp>& vecs) {
  SubspaceBasis s(p, ambient);
  for (const auto& v : vecs) s.insert(v);
  return s;
}

inline SubspaceBasis full_space(std::int64_t p, std::int64_t ambient) {
  SubspaceBasis s(p, ambient);
  for (std::int64_t i = 0; i < ambient; ++i) {
    VecZp e(static_cast<std::size_t>(ambient), 0);
    e[static_cast<std::size_t>(i)] = 1;
    s.insert(e);
  }
  return s;
}

// Echelon basis of the right kernel {v : M v = 0}.
inline SubspaceBasis kernel_basis(const MatZp& m, std::int64_t p) {
  MatZp r = m;
  std::vector<std::int64_t> pivot_of_col(static_cast<std::size_t>(r.cols), -1);
  std::int64_t rank = 0;
  for (std::int64_t col = 0; col < r.cols && rank < r.rows; ++col) {
    std::int64_t sel = -1;
    for (std::int64_t i = rank; i < r.rows; ++i)
      if (r.at(i, col) != 0) { sel = i; break; }
    if (sel < 0) continue;
    for (std::int64_t j = 0; j < r.cols; ++j) std::swap(r.at(sel, j), r.at(rank, j));
    const Residue inv = inv_mod(r.at(rank, col), p);
    for (std::int64_t j = 0; j < r.cols; ++j) r.at(rank, j) = mul_mod(inv, r.at(rank, j), p);
    for (std::int64_t i = 0; i < r.rows; ++i) {
      if (i == rank) continue;
      const Residue c = r.at(i, col);
      if (c == 0) continue;
      for (std::int64_t j = 0; j < r.cols; ++j)
        r.at(i, j) = sub_mod(r.at(i, j), mul_mod(c, r.at(rank, j), p), p);
    }
    pivot_of_col[static_cast<std::size_t>(col)] = rank;
    ++rank;
  }
  SubspaceBasis ker(p, r.cols);
  for (std::int64_t col = 0; col < r.cols; ++col) {
    if (pivot_of_col[static_cast<std::size_t>(col)] >= 0) continue;
    VecZp v(static_cast<std::size_t>(r.cols), 0);
    v[static_cast<std::size_t>(col)] = 1;
    for (std::int64_t c2 = 0; c2 < r.cols; ++c2) {
      const std::int64_t pr = pivot_of_col[static_cast<std::size_t>(c2)];
      if (pr >= 0) v[static_cast<std::size_t>(c2)] = neg_mod(r.at(pr, col), p);
    }
    ker.insert(v);
  }
  return ker;
}

// Particular solution of M x = b, absent when inconsistent.
inline std::optional<VecZp> solve(const MatZp& m, const VecZp& b, std::int64_t p) {
  MatZp aug(m.rows, m.cols + 1);
  for (std::int64_t i = 0; i < m.rows; ++i) {
    for (std::int64_t j = 0; j < m.cols; ++j) aug.at(i, j) = m.at(i, j);
    aug.at(i, m.cols) = b[static_cast<std::size_t>(i)];
  }
  std::vector<std::int64_t> pivot_col;
  std::int64_t rank = 0;
  for (std::int64_t col = 0; col < m.cols && rank < m.rows; ++col) {
    std::int64_t sel = -1;
    for (std::int64_t i = rank; i < m.rows; ++i)
      if (aug.at(i, col) != 0) { sel = i; break; }
    if (sel < 0) continue;
    for (std::int64_t j = 0; j <= m.cols; ++j) std::swap(aug.at(sel, j), aug.at(rank, j));
    const Residue inv = inv_mod(aug.at(rank, col), p);
    for (std::int64_t j = 0; j <= m.cols; ++j) aug.at(rank, j) = mul_mod(inv, aug.at(rank, j), p);
    for (std::int64_t i = 0; i < m.rows; ++i) {
      if (i == rank) continue;
      const Residue c = aug.at(i, col);
      if (c == 0) continue;
      for (std::int64_t j = 0; j <= m.cols; ++j)
        aug.at(i, j) = sub_mod(aug.at(i, j), mul_mod(c, aug.at(rank, j), p), p);
    }
    pivot_col.push_back(col);
    ++rank;
  }
  for (std::int64_t i = rank; i < m.rows; ++i)
    if (aug.at(i, m.cols) != 0) return std::nullopt;
  VecZp x(static_cast<std::size_t>(m.cols), 0);
  for (std::int64_t r = 0; r < rank; ++r)
    x[static_cast<std::size_t>(pivot_col[static_cast<std::size_t>(r)])] = aug.at(r, m.cols);
  return x;
}

// Symplectic form on Z_p^{2n}: (x,y).(x',y') = x.y' - y.x'.
// Euclidean form on Z_p^m: plain dot product.
struct BilinearForm {
  enum class Tag { Symplectic, Euclidean };
  Tag tag = Tag::Symplectic;
  std::int64_t n = 0;  // half-dimension for the symplectic case

  static BilinearForm symplectic(std::int64_t n) { return {Tag::Symplectic, n}; }
  static BilinearForm euclidean(std::int64_t dim) { return {Tag::Euclidean, dim}; }

  Residue eval(const VecZp& v, const VecZp& w, std::int64_t p) const {
    if (tag == Tag::Euclidean) return dot(v, w, p);
    const std::size_t half = v.size() / 2;
    Residue s = 0;
    for (std::size_t i = 0; i < half; ++i) {
      s = add_mod(s, mul_mod(v[i], w[half + i], p), p);
      s = sub_mod(s, mul_mod(v[half + i], w[i], p), p);
    }
    return s;
  }
};

inline Residue symplectic_product(const VecZp& v, const VecZp& w, std::int64_t p) {
  return BilinearForm::symplectic(static_cast<std::int64_t>(v.size() / 2)).eval(v, w, p);
}

// Basis of {w : form(v, w) = 0 for all v in S}.
inline SubspaceBasis complement_basis(const SubspaceBasis& s, const BilinearForm& form) {
  if (form.tag == BilinearForm::Tag::Symplectic && s.ambient % 2 != 0)
    throw Error("symplectic complement needs even ambient dimension");
  MatZp m(s.dim(), s.ambient);
  const std::int64_t half = s.ambient / 2;
  for (std::int64_t r = 0; r < s.dim(); ++r) {
    const VecZp& v = s.rows[static_cast<std::size_t>(r)];
    for (std::int64_t j = 0; j < s.ambient; ++j) {
      if (form.tag == BilinearForm::Tag::Euclidean) {
        m.at(r, j) = v[static_cast<std::size_t>(j)];
      } else {
        // row entries of w |-> form(v, w): x.w_y - y.w_x
        m.at(r, j) = j < half ? neg_mod(v[static_cast<std::size_t>(j + half)], s.p)
                              : v[static_cast<std::size_t>(j - half)];
      }
    }
  }
  return kernel_basis(m, s.p);
}

inline bool is_isotropic(const SubspaceBasis& s) {
  for (std::int64_t i = 0; i < s.dim(); ++i)
    for (std::int64_t j = i; j < s.dim(); ++j)
      if (symplectic_product(s.rows[static_cast<std::size_t>(i)], s.rows[static_cast<std::size_t>(j)], s.p) != 0)
        return false;
  return true;
}

// Uniform d-dimensional isotropic subspace of Z_p^{2n}: each step extends by
// a uniform vector from (span^perp_symplectic) \ span; the count of valid
// extensions depends only on the current dimension, so the subspace law is
// uniform.
inline SubspaceBasis random_isotropic(std::int64_t p, std::int64_t n, std::int64_t d, Rng& rng) {
  if (d < 0 || d > n) throw Error("isotropic dimension must lie in [0, n]");
  SubspaceBasis s(p, 2 * n);
  while (s.dim() < d) {
    const SubspaceBasis perp = complement_basis(s, BilinearForm::symplectic(n));
    const VecZp v = perp.random_element(rng);
    if (!s.contains(v)) s.insert(v);
  }
  return s;
}

// Uniform d-dimensional subspace of Z_p^ambient (rejection on rank).
inline SubspaceBasis random_subspace(std::int64_t p, std::int64_t ambient, std::int64_t d, Rng& rng) {
  if (d < 0 || d > ambient) throw Error("subspace dimension out of range");
  SubspaceBasis s(p, ambient);
  while (s.dim() < d) {
    VecZp v(static_cast<std::size_t>(ambient), 0);
    for (auto& c : v) c = static_cast<Residue>(rng.below(static_cast<std::uint64_t>(p)));
    s.insert(v);
  }
  return s;
}

}  // namespace whg
