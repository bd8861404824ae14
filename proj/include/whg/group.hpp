#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "whg/errors.hpp"
#include "whg/field.hpp"
#include "whg/linalg.hpp"

namespace whg {

// Dense backends refuse anything past these caps.
inline constexpr std::int64_t kDenseStateCap = std::int64_t{1} << 20;       // p^{2n+1}
inline constexpr std::int64_t kDenseTwoRegisterCap = std::int64_t{1} << 12; // p^{2n}
inline constexpr std::int64_t kEnumerationCap = std::int64_t{1} << 16;      // |H|

// Parameters of the Weyl-Heisenberg group G = Z_p^{n+1} x| Z_p^n of order
// p^{2n+1}.  n = 0 is allowed so the QFT circuit recursion can bottom out
// at the cyclic group Z_p.
struct GroupParams {
  std::int64_t p = 3;
  std::int64_t n = 1;

  GroupParams() = default;
  GroupParams(std::int64_t p_, std::int64_t n_) : p(p_), n(n_) {
    FieldParams check(p);  // validates primality
    if (n < 0) throw Error("n must be nonnegative");
  }

  std::int64_t register_dim() const {  // p^n
    std::int64_t d = 1;
    for (std::int64_t i = 0; i < n; ++i) d *= p;
    return d;
  }
  std::int64_t pair_dim() const { return register_dim() * register_dim(); }  // p^{2n}
  std::int64_t order() const { return pair_dim() * p; }                      // p^{2n+1}

  friend bool operator==(const GroupParams& a, const GroupParams& b) {
    return a.p == b.p && a.n == b.n;
  }
  friend bool operator!=(const GroupParams& a, const GroupParams& b) { return !(a == b); }
};

// Group element (x, y, z) with x, y in Z_p^n and z in Z_p.
struct GroupElement {
  GroupParams params;
  VecZp x, y;
  Residue z = 0;

  GroupElement() = default;
  GroupElement(const GroupParams& gp, VecZp x_, VecZp y_, Residue z_)
      : params(gp), x(std::move(x_)), y(std::move(y_)), z(mod_p(z_, gp.p)) {
    if (x.size() != static_cast<std::size_t>(gp.n) || y.size() != static_cast<std::size_t>(gp.n))
      throw ParamsMismatch("element vectors must have length n");
    for (auto& v : x) v = mod_p(v, gp.p);
    for (auto& v : y) v = mod_p(v, gp.p);
  }

  bool is_identity() const { return z == 0 && is_zero_vec(x) && is_zero_vec(y); }
  bool is_central() const { return is_zero_vec(x) && is_zero_vec(y); }

  // Projection to G/G' = Z_p^{2n}, laid out as (x | y).
  VecZp projection() const {
    VecZp v = x;
    v.insert(v.end(), y.begin(), y.end());
    return v;
  }

  friend bool operator==(const GroupElement& a, const GroupElement& b) {
    return a.params == b.params && a.x == b.x && a.y == b.y && a.z == b.z;
  }
  friend bool operator!=(const GroupElement& a, const GroupElement& b) { return !(a == b); }
  friend bool operator<(const GroupElement& a, const GroupElement& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.y != b.y) return a.y < b.y;
    return a.z < b.z;
  }
};

inline GroupElement identity_element(const GroupParams& gp) {
  return GroupElement(gp, VecZp(static_cast<std::size_t>(gp.n), 0),
                      VecZp(static_cast<std::size_t>(gp.n), 0), 0);
}

inline GroupElement center_generator(const GroupParams& gp) {
  return GroupElement(gp, VecZp(static_cast<std::size_t>(gp.n), 0),
                      VecZp(static_cast<std::size_t>(gp.n), 0), 1);
}

inline GroupElement element_from_pair(const GroupParams& gp, const VecZp& xy, Residue z) {
  VecZp x(xy.begin(), xy.begin() + gp.n);
  VecZp y(xy.begin() + gp.n, xy.end());
  return GroupElement(gp, std::move(x), std::move(y), z);
}

// (x,y,z).(x',y',z') = (x+x', y+y', z+z'+x'.y)
inline GroupElement multiply(const GroupElement& g, const GroupElement& h) {
  if (g.params != h.params) throw ParamsMismatch();
  const std::int64_t p = g.params.p;
  return GroupElement(g.params, vec_add(g.x, h.x, p), vec_add(g.y, h.y, p),
                      add_mod(add_mod(g.z, h.z, p), dot(h.x, g.y, p), p));
}

// (x,y,z)^{-1} = (-x, -y, -z + x.y)
inline GroupElement inverse(const GroupElement& g) {
  const std::int64_t p = g.params.p;
  VecZp nx(g.x.size()), ny(g.y.size());
  for (std::size_t i = 0; i < g.x.size(); ++i) nx[i] = neg_mod(g.x[i], p);
  for (std::size_t i = 0; i < g.y.size(); ++i) ny[i] = neg_mod(g.y[i], p);
  return GroupElement(g.params, std::move(nx), std::move(ny),
                      add_mod(neg_mod(g.z, p), dot(g.x, g.y, p), p));
}

// g^a.  Odd p uses the closed form (ax, ay, az + a(a-1)/2 xy); for p = 2 the
// closed form would divide by 2, so repeated multiplication is used there.
inline GroupElement power(const GroupElement& g, std::int64_t a) {
  const std::int64_t p = g.params.p;
  if (p > 2) {
    const Residue am = mod_p(a, p);  // exponent p: g^p = e
    const Residue zz = add_mod(mul_mod(am, g.z, p),
                               mul_mod(half_binom_mod(am, p), dot(g.x, g.y, p), p), p);
    return GroupElement(g.params, vec_scale(am, g.x, p), vec_scale(am, g.y, p), zz);
  }
  std::int64_t am = ((a % 4) + 4) % 4;  // order divides 4 at p = 2
  GroupElement acc = identity_element(g.params);
  for (std::int64_t i = 0; i < am; ++i) acc = multiply(acc, g);
  return acc;
}

// g^{-1} h g = (x, y, z + x'.y - x.y') for g = (x',y',z').
inline GroupElement conjugate(const GroupElement& h, const GroupElement& g) {
  if (g.params != h.params) throw ParamsMismatch();
  const std::int64_t p = g.params.p;
  const Residue zz = add_mod(h.z, sub_mod(dot(g.x, h.y, p), dot(h.x, g.y, p), p), p);
  return GroupElement(h.params, h.x, h.y, zz);
}

// Upper-unitriangular (n+2)x(n+2) realization; matrix product corresponds
// to the group law.
inline MatZp matrix_realization(const GroupElement& g) {
  const std::int64_t n = g.params.n;
  MatZp m = MatZp::identity(n + 2);
  for (std::int64_t i = 0; i < n; ++i) {
    m.at(0, i + 1) = g.y[static_cast<std::size_t>(i)];
    m.at(i + 1, n + 1) = g.x[static_cast<std::size_t>(i)];
  }
  m.at(0, n + 1) = g.z;
  return m;
}

// phi_alpha : (x,y,z) |-> (alpha x, alpha y, alpha^2 z), an automorphism of
// G for alpha != 0; it fixes S_H setwise.
struct GroupAutomorphism {
  Residue alpha = 1;

  explicit GroupAutomorphism(Residue a) : alpha(a) {
    if (alpha == 0) throw ZeroAlpha();
  }
};

inline GroupElement apply_phi_alpha(const GroupAutomorphism& aut, const GroupElement& g) {
  const std::int64_t p = g.params.p;
  const Residue a = mod_p(aut.alpha, p);
  if (a == 0) throw ZeroAlpha();
  return GroupElement(g.params, vec_scale(a, g.x, p), vec_scale(a, g.y, p),
                      mul_mod(mul_mod(a, a, p), g.z, p));
}

// Basis ordering shared by all dense backends: index = z*p^{2n} +
// idx(x)*p^n + idx(y), with idx the little-endian mixed-radix rank.
inline std::int64_t vec_rank(const VecZp& v, std::int64_t p) {
  std::int64_t r = 0, scale = 1;
  for (const Residue c : v) {
    r += c * scale;
    scale *= p;
  }
  return r;
}

inline VecZp vec_unrank(std::int64_t r, std::int64_t p, std::int64_t n) {
  VecZp v(static_cast<std::size_t>(n), 0);
  for (std::int64_t i = 0; i < n; ++i) {
    v[static_cast<std::size_t>(i)] = r % p;
    r /= p;
  }
  return v;
}

inline std::int64_t element_index(const GroupElement& g) {
  const auto& gp = g.params;
  return g.z * gp.pair_dim() + vec_rank(g.x, gp.p) * gp.register_dim() + vec_rank(g.y, gp.p);
}

inline GroupElement element_from_index(const GroupParams& gp, std::int64_t idx) {
  const std::int64_t y = idx % gp.register_dim();
  const std::int64_t x = (idx / gp.register_dim()) % gp.register_dim();
  const std::int64_t z = idx / gp.pair_dim();
  return GroupElement(gp, vec_unrank(x, gp.p, gp.n), vec_unrank(y, gp.p, gp.n), z);
}

}  // namespace whg
