#pragma once

#include <cstdint>
#include <vector>

#include "whg/complex_matrix.hpp"
#include "whg/errors.hpp"
#include "whg/rational.hpp"

namespace whg {

// Exact sparse operator: sum of terms c * omega_p^e |ket><bra| over a
// register space described by `dims` (flat index is first-register major).
// The pipeline is a chain of exact phase manipulations, so coefficients
// stay rational and exponents stay integers mod p end to end; floats only
// appear in to_dense().
struct StructuredState {
  struct Term {
    Rational coeff;
    std::int64_t exponent = 0;  // of omega_p
    std::int64_t ket = 0, bra = 0;
  };

  std::int64_t p = 2;
  std::vector<std::int64_t> dims;
  std::vector<Term> terms;

  std::int64_t total_dim() const {
    std::int64_t d = 1;
    for (const auto v : dims) d *= v;
    return d;
  }

  ComplexMatrix to_dense() const {
    const std::int64_t d = total_dim();
    if (d > kDenseTwoRegisterCap * 2) throw TooLarge("structured state too large to render");
    const RootsOfUnity w(p);
    ComplexMatrix m(d, d);
    for (const auto& t : terms)
      m.at(t.ket, t.bra) += t.coeff.to_double() * w[t.exponent];
    return m;
  }

  // Exact diagonal as rationals (entries of pipeline states are provably
  // rational on the diagonal).
  std::vector<Rational> diagonal() const {
    const std::int64_t d = total_dim();
    std::vector<CycRat> acc(static_cast<std::size_t>(d), CycRat(p));
    for (const auto& t : terms)
      if (t.ket == t.bra) acc[static_cast<std::size_t>(t.ket)].add(t.coeff, t.exponent);
    std::vector<Rational> out(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = acc[i].to_rational();
    return out;
  }

  Rational trace() const {
    Rational t(0);
    for (const auto& r : diagonal()) t += r;
    return t;
  }
};

inline StructuredState tensor(const StructuredState& a, const StructuredState& b) {
  if (a.p != b.p) throw ParamsMismatch("tensor of states over different p");
  StructuredState out;
  out.p = a.p;
  out.dims = a.dims;
  out.dims.insert(out.dims.end(), b.dims.begin(), b.dims.end());
  const std::int64_t db = b.total_dim();
  out.terms.reserve(a.terms.size() * b.terms.size());
  for (const auto& ta : a.terms)
    for (const auto& tb : b.terms)
      out.terms.push_back({ta.coeff * tb.coeff, ta.exponent + tb.exponent,
                           ta.ket * db + tb.ket, ta.bra * db + tb.bra});
  return out;
}

}  // namespace whg
