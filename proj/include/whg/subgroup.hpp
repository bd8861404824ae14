#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "whg/errors.hpp"
#include "whg/group.hpp"
#include "whg/linalg.hpp"
#include "whg/rng.hpp"

namespace whg {

enum class SubgroupClass { AbelianNonCentral, NormalContainsCenter };

inline const char* to_string(SubgroupClass c) {
  return c == SubgroupClass::AbelianNonCentral ? "abelian" : "normal";
}

// Subgroup of G in canonical form: an echelon basis of S_H together with
// one lift per basis row, plus a flag for G' <= H.  In the abelian
// non-central case the lift per projection is unique (Lemma: |S_H| = |H|),
// so the canonical form is a complete invariant.  When the center is
// contained, row lifts are normalized to z = 0 and the center generator is
// implicit.
class Subgroup {
 public:
  explicit Subgroup(const GroupParams& gp) : params_(gp), s_basis_(gp.p, 2 * gp.n) {}

  Subgroup(const GroupParams& gp, const std::vector<GroupElement>& generators)
      : params_(gp), s_basis_(gp.p, 2 * gp.n) {
    for (const auto& g : generators) absorb(g);
    if (contains_center_) normalize_central_lifts();
  }

  const GroupParams& params() const { return params_; }
  const SubspaceBasis& s_basis() const { return s_basis_; }
  bool contains_center() const { return contains_center_; }
  const std::vector<GroupElement>& lifts() const { return lifts_; }

  SubgroupClass classify() const {
    return contains_center_ ? SubgroupClass::NormalContainsCenter
                            : SubgroupClass::AbelianNonCentral;
  }

  std::int64_t order() const {
    std::int64_t o = contains_center_ ? params_.p : 1;
    for (std::int64_t i = 0; i < s_basis_.dim(); ++i) o *= params_.p;
    return o;
  }

  // Canonical generating set: the row lifts, plus the center generator when
  // G' <= H.
  std::vector<GroupElement> generators() const {
    std::vector<GroupElement> gens = lifts_;
    if (contains_center_) gens.push_back(center_generator(params_));
    return gens;
  }

  bool contains(const GroupElement& g) const {
    if (g.params != params_) throw ParamsMismatch();
    const auto coef = s_basis_.coordinates(g.projection());
    if (!coef) return false;
    if (contains_center_) return true;
    return lift_of(*coef).z == g.z;
  }

  // The unique element of H over the coefficient tuple (abelian case the
  // lifts commute, so the product order is immaterial; in the central case
  // a fixed order makes the result canonical).
  GroupElement lift_of(const VecZp& coef) const {
    GroupElement acc = identity_element(params_);
    for (std::size_t i = 0; i < coef.size(); ++i)
      if (coef[i] != 0) acc = multiply(acc, power(lifts_[i], coef[i]));
    return acc;
  }

  std::vector<GroupElement> elements() const {
    if (order() > kEnumerationCap) throw TooLarge("subgroup enumeration cap is 2^16");
    std::vector<GroupElement> out;
    const std::int64_t d = s_basis_.dim();
    VecZp coef(static_cast<std::size_t>(d), 0);
    const std::int64_t count = s_basis_.size();
    for (std::int64_t t = 0; t < count; ++t) {
      std::int64_t v = t;
      for (std::int64_t i = 0; i < d; ++i) { coef[static_cast<std::size_t>(i)] = v % params_.p; v /= params_.p; }
      GroupElement e = lift_of(coef);
      if (contains_center_) {
        for (Residue z = 0; z < params_.p; ++z)
          out.push_back(GroupElement(params_, e.x, e.y, z));
      } else {
        out.push_back(e);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  Subgroup conjugated(const GroupElement& g) const {
    std::vector<GroupElement> gens;
    for (const auto& h : generators()) gens.push_back(conjugate(h, g));
    return Subgroup(params_, gens);
  }

  Subgroup mapped(const GroupAutomorphism& aut) const {
    std::vector<GroupElement> gens;
    for (const auto& h : generators()) gens.push_back(apply_phi_alpha(aut, h));
    return Subgroup(params_, gens);
  }

  friend bool operator==(const Subgroup& a, const Subgroup& b) {
    return a.params_ == b.params_ && a.contains_center_ == b.contains_center_ &&
           a.s_basis_ == b.s_basis_ && a.lifts_ == b.lifts_;
  }
  friend bool operator!=(const Subgroup& a, const Subgroup& b) { return !(a == b); }

 private:
  // Reduce g against the current rows, carrying the z component through the
  // group law.  A residual with zero projection and z != 0 witnesses
  // G' <= H.
  void absorb(GroupElement g) {
    if (g.params != params_) throw ParamsMismatch();
    for (const auto& h : lifts_)
      if (symplectic_product(g.projection(), h.projection(), params_.p) != 0)
        contains_center_ = true;
    for (std::size_t r = 0; r < lifts_.size(); ++r) {
      const Residue c = g.projection()[static_cast<std::size_t>(s_basis_.pivots[r])];
      if (c != 0) g = multiply(g, power(lifts_[r], -c));
    }
    if (is_zero_vec(g.projection())) {
      if (g.z != 0) contains_center_ = true;
      return;
    }
    // p = 2: (x,y,z)^2 = (0,0,xy), so a lift with xy != 0 squares into G'
    if (params_.p == 2 && dot(g.x, g.y, 2) != 0) contains_center_ = true;
    // normalize pivot to 1 and back-reduce existing rows
    std::int64_t piv = 0;
    const VecZp proj = g.projection();
    while (proj[static_cast<std::size_t>(piv)] == 0) ++piv;
    g = power(g, inv_mod(proj[static_cast<std::size_t>(piv)], params_.p));
    for (std::size_t r = 0; r < lifts_.size(); ++r) {
      const Residue c = lifts_[r].projection()[static_cast<std::size_t>(piv)];
      if (c != 0) lifts_[r] = multiply(lifts_[r], power(g, -c));
    }
    std::size_t pos = 0;
    while (pos < s_basis_.pivots.size() && s_basis_.pivots[pos] < piv) ++pos;
    lifts_.insert(lifts_.begin() + static_cast<std::ptrdiff_t>(pos), g);
    s_basis_.rows.insert(s_basis_.rows.begin() + static_cast<std::ptrdiff_t>(pos), g.projection());
    s_basis_.pivots.insert(s_basis_.pivots.begin() + static_cast<std::ptrdiff_t>(pos), piv);
  }

  void normalize_central_lifts() {
    for (auto& h : lifts_) h = GroupElement(params_, h.x, h.y, 0);
  }

  GroupParams params_;
  SubspaceBasis s_basis_;
  std::vector<GroupElement> lifts_;  // aligned with s_basis_.rows
  bool contains_center_ = false;
};

inline Subgroup trivial_subgroup(const GroupParams& gp) { return Subgroup(gp); }

inline Subgroup center_subgroup(const GroupParams& gp) {
  return Subgroup(gp, {center_generator(gp)});
}

inline Subgroup full_group(const GroupParams& gp) {
  std::vector<GroupElement> gens = {center_generator(gp)};
  for (std::int64_t i = 0; i < 2 * gp.n; ++i) {
    VecZp xy(static_cast<std::size_t>(2 * gp.n), 0);
    xy[static_cast<std::size_t>(i)] = 1;
    gens.push_back(element_from_pair(gp, xy, 0));
  }
  return Subgroup(gp, gens);
}

inline SubspaceBasis s_basis(const Subgroup& h) { return h.s_basis(); }
inline SubgroupClass classify(const Subgroup& h) { return h.classify(); }

// H_0 = {(x, y, xy/2) : (x,y) in S}; the canonical representative of the
// conjugacy class determined by an isotropic S (p > 2).
inline Subgroup canonical_h0(const SubspaceBasis& s, const GroupParams& gp) {
  if (gp.p == 2) throw EvenCharacteristic("H_0 requires p > 2");
  if (!is_isotropic(s)) throw NotIsotropic();
  std::vector<GroupElement> gens;
  for (const auto& row : s.rows) {
    GroupElement g = element_from_pair(gp, row, 0);
    g.z = mul_mod(dot(g.x, g.y, gp.p), inv_mod(2, gp.p), gp.p);
    gens.push_back(g);
  }
  return Subgroup(gp, gens);
}

// Conjugator (x^, y^, 0) with H^g = H_0; the pair is unique modulo
// S_H^perp (symplectic).
struct Conjugator {
  VecZp xhat, yhat;
  Residue zhat = 0;

  VecZp pair() const {
    VecZp v = xhat;
    v.insert(v.end(), yhat.begin(), yhat.end());
    return v;
  }
};

inline Conjugator conjugator_from_pair(const GroupParams& gp, const VecZp& xy) {
  Conjugator c;
  c.xhat.assign(xy.begin(), xy.begin() + gp.n);
  c.yhat.assign(xy.begin() + gp.n, xy.end());
  return c;
}

inline GroupElement conjugator_element(const GroupParams& gp, const Conjugator& c) {
  return GroupElement(gp, c.xhat, c.yhat, c.zhat);
}

// Solves x^.y_i - y^.x_i = x_i.y_i/2 - z_i over the canonical lifts; any
// solution conjugates H onto H_0.  The system is consistent exactly when H
// is abelian with G' not contained (p > 2).
inline Conjugator conjugator_to_h0(const Subgroup& h) {
  const GroupParams& gp = h.params();
  if (gp.p == 2) throw EvenCharacteristic("conjugator to H_0 requires p > 2");
  const auto& lifts = h.lifts();
  MatZp m(static_cast<std::int64_t>(lifts.size()), 2 * gp.n);
  VecZp b(lifts.size(), 0);
  for (std::size_t r = 0; r < lifts.size(); ++r) {
    const auto& g = lifts[r];
    for (std::int64_t i = 0; i < gp.n; ++i) {
      m.at(static_cast<std::int64_t>(r), i) = g.y[static_cast<std::size_t>(i)];
      m.at(static_cast<std::int64_t>(r), gp.n + i) = neg_mod(g.x[static_cast<std::size_t>(i)], gp.p);
    }
    b[r] = sub_mod(mul_mod(dot(g.x, g.y, gp.p), inv_mod(2, gp.p), gp.p), g.z, gp.p);
  }
  const auto sol = solve(m, b, gp.p);
  if (!sol) throw NotIsotropic("no conjugator: subgroup is not abelian-over-isotropic");
  return conjugator_from_pair(gp, *sol);
}

// Random subgroup of the requested class.  Abelian: uniform isotropic S of
// dimension d (uniform over [0, n] unless pinned) with an independently
// uniform z on each basis lift.  Normal: uniform subspace S of Z_p^{2n}
// (dimension uniform over [0, 2n] unless pinned), full preimage with G'.
inline Subgroup random_subgroup(const GroupParams& gp, SubgroupClass cls, Rng& rng,
                                std::int64_t pinned_dim = -1) {
  if (cls == SubgroupClass::AbelianNonCentral) {
    const std::int64_t d = pinned_dim >= 0 ? pinned_dim
                                           : static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(gp.n + 1)));
    SubspaceBasis s(gp.p, 2 * gp.n);
    if (gp.p == 2) {
      // p = 2 additionally needs x.y = 0 on S_H (squares land in G'
      // otherwise); rejection inside the greedy extension
      while (s.dim() < d) {
        const SubspaceBasis perp = complement_basis(s, BilinearForm::symplectic(gp.n));
        const VecZp v = perp.random_element(rng);
        const Residue q = dot(VecZp(v.begin(), v.begin() + gp.n), VecZp(v.begin() + gp.n, v.end()), 2);
        if (q == 0 && !s.contains(v)) s.insert(v);
      }
    } else {
      s = random_isotropic(gp.p, gp.n, d, rng);
    }
    std::vector<GroupElement> gens;
    for (const auto& row : s.rows) {
      const Residue z = static_cast<Residue>(rng.below(static_cast<std::uint64_t>(gp.p)));
      gens.push_back(element_from_pair(gp, row, z));
    }
    return Subgroup(gp, gens);
  }
  const std::int64_t d = pinned_dim >= 0 ? pinned_dim
                                         : static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(2 * gp.n + 1)));
  const SubspaceBasis s = random_subspace(gp.p, 2 * gp.n, d, rng);
  std::vector<GroupElement> gens = {center_generator(gp)};
  for (const auto& row : s.rows) gens.push_back(element_from_pair(gp, row, 0));
  return Subgroup(gp, gens);
}

// --- textual literal: "p,n;gen=x|y|z;gen=..." with vectors comma-separated

inline std::string format_vec(const VecZp& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

inline std::string format_subgroup(const Subgroup& h) {
  std::string s = std::to_string(h.params().p) + "," + std::to_string(h.params().n);
  for (const auto& g : h.generators())
    s += ";gen=" + format_vec(g.x) + "|" + format_vec(g.y) + "|" + std::to_string(g.z);
  return s;
}

inline VecZp parse_vec(const std::string& s, std::int64_t expected_len) {
  VecZp v;
  if (!s.empty()) {
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) v.push_back(std::stoll(tok));
  }
  if (static_cast<std::int64_t>(v.size()) != expected_len)
    throw Error("subgroup literal: vector of length " + std::to_string(v.size()) +
                ", expected " + std::to_string(expected_len));
  return v;
}

inline Subgroup parse_subgroup(const std::string& literal) {
  std::stringstream ss(literal);
  std::string head;
  if (!std::getline(ss, head, ';')) throw Error("empty subgroup literal");
  const auto comma = head.find(',');
  if (comma == std::string::npos) throw Error("subgroup literal must start with p,n");
  const GroupParams gp(std::stoll(head.substr(0, comma)), std::stoll(head.substr(comma + 1)));
  std::vector<GroupElement> gens;
  std::string part;
  while (std::getline(ss, part, ';')) {
    if (part.rfind("gen=", 0) != 0) throw Error("subgroup literal: expected gen=..., got " + part);
    std::string body = part.substr(4);
    const auto b1 = body.find('|');
    const auto b2 = body.find('|', b1 == std::string::npos ? 0 : b1 + 1);
    if (b1 == std::string::npos || b2 == std::string::npos)
      throw Error("subgroup literal: generator needs x|y|z");
    gens.push_back(GroupElement(gp, parse_vec(body.substr(0, b1), gp.n),
                                parse_vec(body.substr(b1 + 1, b2 - b1 - 1), gp.n),
                                std::stoll(body.substr(b2 + 1))));
  }
  return Subgroup(gp, gens);
}

// Test-grade check that the stored canonical form is closed under the law.
inline bool verify_closure(const Subgroup& h) {
  const auto elems = h.elements();
  for (const auto& a : elems)
    for (const auto& b : elems)
      if (!h.contains(multiply(a, b))) return false;
  return true;
}

}  // namespace whg
