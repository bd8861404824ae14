#pragma once

#include <cstdint>
#include <optional>

#include "whg/errors.hpp"

namespace whg {

using Residue = std::int64_t;

inline bool is_prime(std::int64_t p) {
  if (p < 2) return false;
  for (std::int64_t d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

// Prime modulus, checked at construction.  Desk scale keeps p < 2^16.
struct FieldParams {
  std::int64_t p = 2;

  FieldParams() = default;
  explicit FieldParams(std::int64_t prime) : p(prime) {
    if (p >= (std::int64_t{1} << 16) || !is_prime(p))
      throw Error("modulus must be a prime below 2^16, got " + std::to_string(prime));
  }
};

inline Residue mod_p(std::int64_t a, std::int64_t p) {
  const std::int64_t r = a % p;
  return r < 0 ? r + p : r;
}

inline Residue add_mod(Residue a, Residue b, std::int64_t p) { return mod_p(a + b, p); }
inline Residue sub_mod(Residue a, Residue b, std::int64_t p) { return mod_p(a - b, p); }
inline Residue mul_mod(Residue a, Residue b, std::int64_t p) { return mod_p(a * b, p); }
inline Residue neg_mod(Residue a, std::int64_t p) { return mod_p(-a, p); }

inline Residue pow_mod(Residue base, std::int64_t exp, std::int64_t p) {
  base = mod_p(base, p);
  Residue acc = 1 % p;
  while (exp > 0) {
    if (exp & 1) acc = mul_mod(acc, base, p);
    base = mul_mod(base, base, p);
    exp >>= 1;
  }
  return acc;
}

inline Residue inv_mod(Residue a, std::int64_t p) {
  a = mod_p(a, p);
  if (a == 0) throw ZeroInverse();
  return pow_mod(a, p - 2, p);
}

inline Residue inv_mod(Residue a, const FieldParams& fp) { return inv_mod(a, fp.p); }

// Smaller of the two square roots when a is a quadratic residue, absent
// otherwise; sqrt_mod(0)=0.  Exhaustive search: desk-scale p makes
// Tonelli-Shanks unnecessary.
inline std::optional<Residue> sqrt_mod(Residue a, std::int64_t p) {
  a = mod_p(a, p);
  for (Residue r = 0; r <= p / 2; ++r)
    if (mul_mod(r, r, p) == a) return r;
  for (Residue r = p / 2 + 1; r < p; ++r)
    if (mul_mod(r, r, p) == a) return r;
  return std::nullopt;
}

inline std::optional<Residue> sqrt_mod(Residue a, const FieldParams& fp) {
  return sqrt_mod(a, fp.p);
}

// a*(a-1)/2 mod p for odd p; stable under reducing a mod p.
inline Residue half_binom_mod(Residue a, std::int64_t p) {
  a = mod_p(a, p);
  return mul_mod(mul_mod(a, sub_mod(a, 1, p), p), inv_mod(2, p), p);
}

}  // namespace whg
