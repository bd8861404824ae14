#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "whg/complex_matrix.hpp"
#include "whg/errors.hpp"
#include "whg/group.hpp"
#include "whg/rational.hpp"
#include "whg/rng.hpp"
#include "whg/subgroup.hpp"

namespace whg {

// Irrep label: OneDim(a, b) with a, b in Z_p^n, or HighDim(k) with k != 0.
// G has p^{2n} one-dimensional irreps and p-1 irreps of dimension p^n.
struct IrrepLabel {
  enum class Tag { OneDim, HighDim };
  Tag tag = Tag::HighDim;
  VecZp a, b;       // OneDim
  Residue k = 1;    // HighDim

  static IrrepLabel one_dim(VecZp a_, VecZp b_) {
    IrrepLabel l;
    l.tag = Tag::OneDim;
    l.a = std::move(a_);
    l.b = std::move(b_);
    return l;
  }
  static IrrepLabel high_dim(Residue k_) {
    if (k_ == 0) throw ZeroLabel();
    IrrepLabel l;
    l.tag = Tag::HighDim;
    l.k = k_;
    return l;
  }

  bool is_one_dim() const { return tag == Tag::OneDim; }

  std::string str() const {
    if (is_one_dim()) return "chi(" + format_vec(a) + ";" + format_vec(b) + ")";
    return "rho(" + std::to_string(k) + ")";
  }

  friend bool operator==(const IrrepLabel& x, const IrrepLabel& y) {
    if (x.tag != y.tag) return false;
    return x.is_one_dim() ? (x.a == y.a && x.b == y.b) : x.k == y.k;
  }
  friend bool operator<(const IrrepLabel& x, const IrrepLabel& y) {
    if (x.tag != y.tag) return x.is_one_dim();
    if (x.is_one_dim()) return x.a != y.a ? x.a < y.a : x.b < y.b;
    return x.k < y.k;
  }
};

// chi_{a,b}(x,y,z) = omega_p^{a.x + b.y}
inline Complex chi(const VecZp& a, const VecZp& b, const GroupElement& g) {
  const RootsOfUnity w(g.params.p);
  return w[add_mod(dot(a, g.x, g.params.p), dot(b, g.y, g.params.p), g.params.p)];
}

inline Residue chi_exponent(const VecZp& a, const VecZp& b, const GroupElement& g) {
  return add_mod(dot(a, g.x, g.params.p), dot(b, g.y, g.params.p), g.params.p);
}

// rho_k(x,y,z) = sum_u omega_p^{k(z + y.u)} |u+x><u|, a generalized
// permutation matrix on C^{p^n}.
inline ComplexMatrix rho(Residue k, const GroupElement& g) {
  const auto& gp = g.params;
  if (mod_p(k, gp.p) == 0) throw ZeroLabel();
  const RootsOfUnity w(gp.p);
  const std::int64_t d = gp.register_dim();
  ComplexMatrix m(d, d);
  for (std::int64_t u = 0; u < d; ++u) {
    const VecZp uv = vec_unrank(u, gp.p, gp.n);
    const std::int64_t row = vec_rank(vec_add(uv, g.x, gp.p), gp.p);
    m.at(row, u) = w[mul_mod(k, add_mod(g.z, dot(g.y, uv, gp.p), gp.p), gp.p)];
  }
  return m;
}

inline ComplexMatrix irrep_matrix(const IrrepLabel& label, const GroupElement& g) {
  if (label.is_one_dim()) {
    ComplexMatrix m(1, 1);
    m.at(0, 0) = chi(label.a, label.b, g);
    return m;
  }
  return rho(label.k, g);
}

inline std::int64_t irrep_dim(const IrrepLabel& label, const GroupParams& gp) {
  return label.is_one_dim() ? 1 : gp.register_dim();
}

// rho(H) = (1/|H|) sum_h rho(h); an orthogonal projection of rank r_rho(H).
inline ComplexMatrix projector(const IrrepLabel& label, const Subgroup& h) {
  const auto& gp = h.params();
  const std::int64_t d = irrep_dim(label, gp);
  ComplexMatrix acc(d, d);
  const auto elems = h.elements();  // throws TooLarge past the cap
  for (const auto& e : elems) {
    const ComplexMatrix m = irrep_matrix(label, e);
    for (std::size_t i = 0; i < acc.a.size(); ++i) acc.a[i] += m.a[i];
  }
  const double inv = 1.0 / static_cast<double>(elems.size());
  for (auto& v : acc.a) v *= inv;
  return acc;
}

// All labels in the fixed iteration order: OneDim by (idx(a), idx(b)), then
// HighDim by k.  Intended for small (p, n) only.
inline std::vector<IrrepLabel> all_labels(const GroupParams& gp) {
  std::vector<IrrepLabel> out;
  const std::int64_t d = gp.register_dim();
  for (std::int64_t ia = 0; ia < d; ++ia)
    for (std::int64_t ib = 0; ib < d; ++ib)
      out.push_back(IrrepLabel::one_dim(vec_unrank(ia, gp.p, gp.n), vec_unrank(ib, gp.p, gp.n)));
  for (Residue k = 1; k < gp.p; ++k) out.push_back(IrrepLabel::high_dim(k));
  return out;
}

// Exact Plancherel distribution of weak Fourier sampling on coset states of
// H: P(rho) = d_rho |H| r_rho(H) / |G|.  Stored compactly: the one-dim
// support is the annihilator of S_H under the character pairing a.x + b.y
// (each supported label has mass |H|/|G|), and each high-dim label has mass
// p^{2n}/|G| = 1/p unless G' <= H, in which case high-dim mass is 0.
class PlancherelDist {
 public:
  explicit PlancherelDist(const Subgroup& h)
      : gp_(h.params()),
        annihilator_(complement_basis(h.s_basis(), BilinearForm::euclidean(2 * gp_.n))),
        contains_center_(h.contains_center()),
        order_(h.order()) {
    // sum of masses must be exactly 1
    const Rational one_dim_total = one_dim_mass() * Rational(annihilator_.size());
    const Rational high_total = high_dim_mass() * Rational(gp_.p - 1);
    if (one_dim_total + high_total != Rational(1))
      throw Error("plancherel masses do not sum to 1");
  }

  const GroupParams& params() const { return gp_; }
  const SubspaceBasis& one_dim_support() const { return annihilator_; }

  // mass of a single supported one-dim label: 1*|H|*1/|G|
  Rational one_dim_mass() const { return Rational(order_, gp_.order()); }
  // mass of each high-dim label: p^n * |H| * (p^n/|H|) / |G| = 1/p
  Rational high_dim_mass() const {
    return contains_center_ ? Rational(0) : Rational(gp_.pair_dim(), gp_.order());
  }
  Rational one_dim_total_mass() const { return one_dim_mass() * Rational(annihilator_.size()); }

  Rational mass(const IrrepLabel& label) const {
    if (label.is_one_dim()) {
      VecZp ab = label.a;
      ab.insert(ab.end(), label.b.begin(), label.b.end());
      return annihilator_.contains(ab) ? one_dim_mass() : Rational(0);
    }
    return high_dim_mass();
  }

  // Exact rational inverse-CDF sampling via one uniform draw in [0, |G|).
  IrrepLabel sample(Rng& rng) const {
    if (contains_center_) {
      // all mass on the one-dim support
      return sample_one_dim(rng);
    }
    const std::int64_t t = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(gp_.p)));
    if (t == 0) return sample_one_dim(rng);
    return IrrepLabel::high_dim(t);
  }

  std::vector<std::pair<IrrepLabel, Rational>> support() const {
    std::vector<std::pair<IrrepLabel, Rational>> out;
    const std::int64_t count = annihilator_.size();
    VecZp coef(static_cast<std::size_t>(annihilator_.dim()), 0);
    for (std::int64_t t = 0; t < count; ++t) {
      std::int64_t v = t;
      for (std::int64_t i = 0; i < annihilator_.dim(); ++i) {
        coef[static_cast<std::size_t>(i)] = v % gp_.p;
        v /= gp_.p;
      }
      const VecZp ab = annihilator_.combine(coef);
      out.emplace_back(IrrepLabel::one_dim(VecZp(ab.begin(), ab.begin() + gp_.n),
                                           VecZp(ab.begin() + gp_.n, ab.end())),
                       one_dim_mass());
    }
    if (!contains_center_)
      for (Residue k = 1; k < gp_.p; ++k)
        out.emplace_back(IrrepLabel::high_dim(k), high_dim_mass());
    return out;
  }

 private:
  IrrepLabel sample_one_dim(Rng& rng) const {
    const VecZp ab = annihilator_.random_element(rng);
    return IrrepLabel::one_dim(VecZp(ab.begin(), ab.begin() + gp_.n),
                               VecZp(ab.begin() + gp_.n, ab.end()));
  }

  GroupParams gp_;
  SubspaceBasis annihilator_;
  bool contains_center_;
  std::int64_t order_;
};

inline PlancherelDist plancherel(const Subgroup& h) { return PlancherelDist(h); }

// Dense QFT over G.  Row layout (k, a, b) with row index k*p^{2n} +
// idx(a)*p^n + idx(b); columns follow the shared (z, x, y) convention.
// k = 0 rows are the one-dim irreps scaled by p^{-(2n+1)/2}; k != 0 rows
// carry sqrt(p^n/|G|) omega^{k(z + b.y)} delta_{x, a-b}.
inline ComplexMatrix qft_dense(const GroupParams& gp) {
  const std::int64_t order = gp.order();
  if (order > kDenseStateCap) throw TooLarge("qft_dense refuses p^{2n+1} > 2^20");
  const RootsOfUnity w(gp.p);
  const std::int64_t d = gp.register_dim();
  const double one_dim_scale = 1.0 / std::sqrt(static_cast<double>(order));
  const double high_scale = std::sqrt(static_cast<double>(d) / static_cast<double>(order));
  ComplexMatrix u(order, order);
  for (std::int64_t ia = 0; ia < d; ++ia) {
    const VecZp a = vec_unrank(ia, gp.p, gp.n);
    for (std::int64_t ib = 0; ib < d; ++ib) {
      const VecZp b = vec_unrank(ib, gp.p, gp.n);
      // one-dim row (0, a, b)
      const std::int64_t row0 = ia * d + ib;
      for (std::int64_t col = 0; col < order; ++col) {
        const GroupElement g = element_from_index(gp, col);
        u.at(row0, col) = one_dim_scale * w[chi_exponent(a, b, g)];
      }
      // high-dim rows (k, a, b): nonzero iff x = a - b
      const VecZp x = vec_sub(a, b, gp.p);
      const std::int64_t ix = vec_rank(x, gp.p);
      for (Residue k = 1; k < gp.p; ++k) {
        const std::int64_t row = k * d * d + ia * d + ib;
        for (Residue z = 0; z < gp.p; ++z) {
          for (std::int64_t iy = 0; iy < d; ++iy) {
            const VecZp y = vec_unrank(iy, gp.p, gp.n);
            const std::int64_t col = z * d * d + ix * d + iy;
            u.at(row, col) = high_scale * w[mul_mod(k, add_mod(z, dot(b, y, gp.p), gp.p), gp.p)];
          }
        }
      }
    }
  }
  return u;
}

// Row index of matrix coefficient (i, j) of irrep `label` in the qft_dense
// layout.
inline std::int64_t qft_row_index(const GroupParams& gp, const IrrepLabel& label,
                                  std::int64_t i, std::int64_t j) {
  const std::int64_t d = gp.register_dim();
  if (label.is_one_dim()) return vec_rank(label.a, gp.p) * d + vec_rank(label.b, gp.p);
  return label.k * d * d + i * d + j;
}

}  // namespace whg
