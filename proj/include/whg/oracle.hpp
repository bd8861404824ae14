#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>

#include "whg/group.hpp"
#include "whg/subgroup.hpp"

namespace whg {

namespace simulator {
class OracleAccess;  // simulator-side access to the hidden subgroup
}

// Hiding function f: G -> S for a planted subgroup H, presented through
// queries only.  f(g1) = f(g2) iff g1^{-1} g2 in H.  Labels are canonical
// left-coset representatives serialized to fixed-width text; each query
// costs one unit on the counter.  The recovery driver sees only query(),
// query_count() and the group parameters; simulator internals (which model
// the quantum computer holding the coset state) reach H through
// simulator::OracleAccess.
class HiddenFunction {
 public:
  explicit HiddenFunction(Subgroup h) : h_(std::move(h)), width_(digits(h_.params().p - 1)) {}

  const GroupParams& params() const { return h_.params(); }

  std::string query(const GroupElement& g) const {
    counter_.fetch_add(1, std::memory_order_relaxed);
    return encode(canonical_representative(g));
  }

  std::int64_t query_count() const { return counter_.load(std::memory_order_relaxed); }

 private:
  friend class simulator::OracleAccess;

  // Canonical representative of gH: reduce the projection against the
  // echelon S_H basis by right-multiplying lifts (which tracks the
  // z-correction through the group law), then reduce z by the z-span of H.
  GroupElement canonical_representative(const GroupElement& g) const {
    if (g.params != h_.params()) throw ParamsMismatch();
    GroupElement r = g;
    const auto& basis = h_.s_basis();
    const auto& lifts = h_.lifts();
    for (std::size_t i = 0; i < lifts.size(); ++i) {
      const Residue c = r.projection()[static_cast<std::size_t>(basis.pivots[i])];
      if (c != 0) r = multiply(r, power(lifts[i], -c));
    }
    if (h_.contains_center()) r.z = 0;
    return r;
  }

  std::string encode(const GroupElement& g) const {
    std::string s;
    const auto put = [&](Residue v) {
      std::string t = std::to_string(v);
      s += std::string(static_cast<std::size_t>(width_) - t.size(), '0') + t;
    };
    for (const auto v : g.x) put(v);
    for (const auto v : g.y) put(v);
    put(g.z);
    return s;
  }

  static std::int64_t digits(std::int64_t v) {
    std::int64_t d = 1;
    while (v >= 10) { v /= 10; ++d; }
    return d;
  }

  Subgroup h_;
  std::int64_t width_;
  mutable std::atomic<std::int64_t> counter_{0};
};

inline HiddenFunction make_hidden_function(const Subgroup& h) { return HiddenFunction(h); }

}  // namespace whg
