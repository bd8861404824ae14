#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <vector>

#include "whg/complex_matrix.hpp"
#include "whg/errors.hpp"
#include "whg/group.hpp"
#include "whg/linalg.hpp"
#include "whg/oracle.hpp"
#include "whg/rational.hpp"
#include "whg/reps.hpp"
#include "whg/rng.hpp"
#include "whg/structured_state.hpp"
#include "whg/subgroup.hpp"

namespace whg::simulator {

enum class Backend { Dense, Structured, Analytic };

inline const char* to_string(Backend b) {
  switch (b) {
    case Backend::Dense: return "dense";
    case Backend::Structured: return "structured";
    default: return "analytic";
  }
}

// The only gateway from the quantum-side simulation to the planted
// subgroup.  The recovery driver never touches it.
class OracleAccess {
 public:
  static const Subgroup& hidden(const HiddenFunction& f) { return f.h_; }
  static void consume_queries(const HiddenFunction& f, std::int64_t n) {
    f.counter_.fetch_add(n, std::memory_order_relaxed);
  }
};

// One accepted two-register round: alpha^2 = -k/l with alpha not in {0,1}
// for p > 2 (alpha is a placeholder 1 in the p = 2 pipeline, which has no
// label change).
struct RoundSample {
  Residue k = 1, l = 1, alpha = 1;
  VecZp u, v;

  VecZp uv() const {
    VecZp w = u;
    w.insert(w.end(), v.begin(), v.end());
    return w;
  }
};

struct RoundOutcome {
  enum class Kind { Accepted, DiscardedOneDim, DiscardedSumZero, DiscardedNonSquare };
  Kind kind = Kind::Accepted;
  RoundSample sample;          // Accepted only
  IrrepLabel discarded_label;  // DiscardedOneDim only
  bool sum_zero_event = false; // k + l = 0 handled via alpha = -1

  bool accepted() const { return kind == Kind::Accepted; }
};

// --- perpendicularity convention -------------------------------------------
//
// Step 4's measured pairs satisfy (u + (1-alpha)x^, v + (1-alpha)y^) in
// S_H^perp, but the text leaves open which bilinear form "perp" uses and in
// which component order.  Both candidates are implemented; the dense
// density-matrix diagonal at p=3, n=1 picks the symplectic reading, and the
// convention-resolution test guards this constant.
enum class PerpConvention { SymplecticUV, EuclideanUV };

inline constexpr PerpConvention kResolvedPerpConvention = PerpConvention::SymplecticUV;
inline constexpr const char* kPerpConventionId = "symplectic-uv";

inline SubspaceBasis complement_under(const SubspaceBasis& s, PerpConvention conv) {
  const BilinearForm form = conv == PerpConvention::SymplecticUV
                                ? BilinearForm::symplectic(s.ambient / 2)
                                : BilinearForm::euclidean(s.ambient);
  return complement_basis(s, form);
}

inline SubspaceBasis resolved_complement(const SubspaceBasis& s) {
  return complement_under(s, kResolvedPerpConvention);
}

// Membership of a measured (u, v) in the predicted affine support.
inline bool affine_support_contains(const SubspaceBasis& perp, const Conjugator& conj,
                                    Residue alpha, const VecZp& u, const VecZp& v,
                                    std::int64_t p) {
  const Residue beta = sub_mod(1, alpha, p);
  VecZp w = vec_add(u, vec_scale(beta, conj.xhat, p), p);
  const VecZp wv = vec_add(v, vec_scale(beta, conj.yhat, p), p);
  w.insert(w.end(), wv.begin(), wv.end());
  return perp.contains(w);
}

// --- round label logic ------------------------------------------------------

// alpha for an accepted (k, l) pair of high-dim labels: the canonical
// (smaller) root of alpha^2 = -k/l, except that k+l = 0 forces -k/l = 1
// whose usable root is alpha = -1 (alpha = 1 is excluded because Step 5
// divides by 1 - alpha).  Absent when -k/l is a non-square.
inline std::optional<Residue> round_alpha(Residue k, Residue l, std::int64_t p) {
  if (add_mod(k, l, p) == 0) return p - 1;
  const Residue mu = mod_p(-k * inv_mod(l, p), p);
  const auto root = sqrt_mod(mu, p);
  if (!root) return std::nullopt;
  return *root;
}

// --- structured pipeline ----------------------------------------------------

// Pure coset state |gH><gH| for uniformly random g; models one oracle
// query.
inline StructuredState coset_state(const HiddenFunction& f, Rng& rng) {
  OracleAccess::consume_queries(f, 1);
  const Subgroup& h = OracleAccess::hidden(f);
  const GroupParams& gp = h.params();
  const GroupElement g = element_from_index(
      gp, static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(gp.order()))));
  const auto elems = h.elements();
  StructuredState st;
  st.p = gp.p;
  st.dims = {gp.order()};
  const Rational c(1, static_cast<std::int64_t>(elems.size()));
  for (const auto& h1 : elems)
    for (const auto& h2 : elems)
      st.terms.push_back({c, 0, element_index(multiply(g, h1)), element_index(multiply(g, h2))});
  return st;
}

// Collapsed column-space state after observing a high-dim label k:
// rho_k^*(H)/r = rho_{-k}(H)/r, laid out as |H| p^n exact terms.
inline StructuredState collapsed_high_dim(const Subgroup& h, Residue k) {
  const GroupParams& gp = h.params();
  if (mod_p(k, gp.p) == 0) throw ZeroLabel();
  const std::int64_t d = gp.register_dim();
  StructuredState st;
  st.p = gp.p;
  st.dims = {d};
  const Rational c(1, d);  // 1/(|H| r) with r = p^n/|H|
  for (const auto& e : h.elements()) {
    for (std::int64_t iu = 0; iu < d; ++iu) {
      const VecZp u = vec_unrank(iu, gp.p, gp.n);
      st.terms.push_back({c,
                          mod_p(-k * add_mod(e.z, dot(e.y, u, gp.p), gp.p), gp.p),
                          vec_rank(vec_add(u, e.x, gp.p), gp.p), iu});
    }
  }
  return st;
}

// Weak Fourier sampling, structured backend: the label is drawn exactly
// from the Plancherel distribution and the collapsed state is produced
// symbolically from (label, H); the row index is uniform and independent,
// so it is not simulated here.  Costs one query (the coset-state
// preparation).
inline std::pair<IrrepLabel, StructuredState> weak_fourier_sample(const HiddenFunction& f,
                                                                  Rng& rng) {
  OracleAccess::consume_queries(f, 1);
  const Subgroup& h = OracleAccess::hidden(f);
  const PlancherelDist dist(h);
  const IrrepLabel label = dist.sample(rng);
  if (label.is_one_dim()) {
    StructuredState st;
    st.p = h.params().p;
    st.dims = {1};
    st.terms.push_back({Rational(1), 0, 0, 0});
    return {label, st};
  }
  return {label, collapsed_high_dim(h, label.k)};
}

// U_alpha (x) I relabeling u |-> alpha u on the first register.
inline StructuredState apply_u_alpha(const StructuredState& st, Residue alpha) {
  if (mod_p(alpha, st.p) == 0) throw ZeroAlpha();
  StructuredState out = st;
  std::int64_t rest = 1;
  for (std::size_t i = 1; i < st.dims.size(); ++i) rest *= st.dims[i];
  const std::int64_t d0 = st.dims[0];
  std::int64_t n0 = 0;
  for (std::int64_t t = 1; t < d0; t *= st.p) ++n0;
  const auto relabel = [&](std::int64_t idx) {
    const std::int64_t reg = idx / rest;
    const VecZp u = vec_unrank(reg, st.p, n0);
    return vec_rank(vec_scale(alpha, u, st.p), st.p) * rest + idx % rest;
  };
  for (auto& t : out.terms) {
    t.ket = relabel(t.ket);
    t.bra = relabel(t.bra);
  }
  return out;
}

// Clebsch-Gordan transform on a two-register state with physical labels
// (k, l).  k+l != 0 is the basis permutation |u-v, (ku+lv)/(k+l)>; k+l = 0
// uses the kernel omega^{(l/2)(u+v).w} (p > 2) or (-1)^{w.v} (p = 2).
inline StructuredState clebsch_gordan(const StructuredState& st, Residue k, Residue l) {
  const std::int64_t p = st.p;
  if (mod_p(k, p) == 0 || mod_p(l, p) == 0) throw ZeroLabel();
  if (st.dims.size() != 2 || st.dims[0] != st.dims[1])
    throw Error("clebsch_gordan expects a two-register state");
  const std::int64_t d = st.dims[0];
  std::int64_t n = 0;
  for (std::int64_t t = 1; t < d; t *= p) ++n;
  StructuredState out;
  out.p = p;
  out.dims = st.dims;

  const auto split = [&](std::int64_t idx) {
    return std::pair<VecZp, VecZp>(vec_unrank(idx / d, p, n), vec_unrank(idx % d, p, n));
  };

  if (add_mod(k, l, p) != 0) {
    const Residue s = inv_mod(add_mod(k, l, p), p);
    const auto map = [&](std::int64_t idx) {
      const auto [u, v] = split(idx);
      const VecZp diff = vec_sub(u, v, p);
      const VecZp mix = vec_scale(
          s, vec_add(vec_scale(mod_p(k, p), u, p), vec_scale(mod_p(l, p), v, p), p), p);
      return vec_rank(diff, p) * d + vec_rank(mix, p);
    };
    out.terms.reserve(st.terms.size());
    for (const auto& t : st.terms) out.terms.push_back({t.coeff, t.exponent, map(t.ket), map(t.bra)});
    return out;
  }

  if (p == 2) {
    // |u,v> -> 2^{-n/2} sum_w (-1)^{w.v} |u+v, w>
    const Rational norm(1, d);
    out.terms.reserve(st.terms.size() * static_cast<std::size_t>(d) * static_cast<std::size_t>(d));
    for (const auto& t : st.terms) {
      const auto [uk, vk] = split(t.ket);
      const auto [ub, vb] = split(t.bra);
      const std::int64_t ksum = vec_rank(vec_add(uk, vk, p), p);
      const std::int64_t bsum = vec_rank(vec_add(ub, vb, p), p);
      for (std::int64_t w1 = 0; w1 < d; ++w1)
        for (std::int64_t w2 = 0; w2 < d; ++w2) {
          const VecZp w1v = vec_unrank(w1, p, n), w2v = vec_unrank(w2, p, n);
          const Residue ph = add_mod(dot(w1v, vk, p), dot(w2v, vb, p), p);
          out.terms.push_back({t.coeff * norm, t.exponent + ph, ksum * d + w1, bsum * d + w2});
        }
    }
    return out;
  }

  // p > 2, k + l = 0: |u,v> -> p^{-n/2} sum_w omega^{(l/2)(u+v).w} |u-v, w>
  const Residue half_l = mul_mod(mod_p(l, p), inv_mod(2, p), p);
  const Rational norm(1, d);
  out.terms.reserve(st.terms.size() * static_cast<std::size_t>(d) * static_cast<std::size_t>(d));
  for (const auto& t : st.terms) {
    const auto [uk, vk] = split(t.ket);
    const auto [ub, vb] = split(t.bra);
    const std::int64_t kdiff = vec_rank(vec_sub(uk, vk, p), p);
    const std::int64_t bdiff = vec_rank(vec_sub(ub, vb, p), p);
    const VecZp ksum = vec_add(uk, vk, p), bsum = vec_add(ub, vb, p);
    for (std::int64_t w1 = 0; w1 < d; ++w1) {
      const VecZp w1v = vec_unrank(w1, p, n);
      const Residue e1 = mul_mod(half_l, dot(ksum, w1v, p), p);
      for (std::int64_t w2 = 0; w2 < d; ++w2) {
        const VecZp w2v = vec_unrank(w2, p, n);
        const Residue e2 = mul_mod(half_l, dot(bsum, w2v, p), p);
        out.terms.push_back({t.coeff * norm, t.exponent + sub_mod(e1, e2, p), kdiff * d + w1, bdiff * d + w2});
      }
    }
  }
  return out;
}

// Exact standard-basis measurement distribution of the CG image of
// regA (x) regB, computed term-by-term without materializing the p^{2n}
// expansion: a term pair contributes to diagonal (U, W) iff its ket and bra
// first-register differences agree.  lambda is the k+l = 0 kernel
// parameter (ignored at p = 2).
inline std::vector<Rational> cg_measurement_distribution(const StructuredState& reg_a,
                                                         const StructuredState& reg_b,
                                                         Residue lambda) {
  const std::int64_t p = reg_a.p;
  const std::int64_t d = reg_a.dims[0];
  std::int64_t n = 0;
  for (std::int64_t t = 1; t < d; t *= p) ++n;
  const Rational norm(1, d);

  const auto diff_key = [&](const StructuredState::Term& t) {
    return vec_rank(vec_sub(vec_unrank(t.ket, p, n), vec_unrank(t.bra, p, n), p), p);
  };
  std::map<std::int64_t, std::vector<const StructuredState::Term*>> buckets_a, buckets_b;
  for (const auto& t : reg_a.terms) buckets_a[diff_key(t)].push_back(&t);
  for (const auto& t : reg_b.terms) buckets_b[diff_key(t)].push_back(&t);

  std::vector<CycRat> acc(static_cast<std::size_t>(d * d), CycRat(p));
  const Residue half = p == 2 ? 1 : inv_mod(2, p);
  for (const auto& [delta, list_a] : buckets_a) {
    const auto it = buckets_b.find(delta);
    if (it == buckets_b.end()) continue;
    for (const auto* ta : list_a) {
      const VecZp a1 = vec_unrank(ta->ket, p, n), b1 = vec_unrank(ta->bra, p, n);
      for (const auto* tb : it->second) {
        const VecZp a2 = vec_unrank(tb->ket, p, n), b2 = vec_unrank(tb->bra, p, n);
        const Rational c = ta->coeff * tb->coeff * norm;
        const std::int64_t base_e = ta->exponent + tb->exponent;
        std::int64_t urank;
        VecZp phase_vec;
        if (p == 2) {
          urank = vec_rank(vec_add(a1, a2, p), p);
          phase_vec = vec_add(a2, b2, p);  // (-1)^{W.(v_ket + v_bra)}
        } else {
          urank = vec_rank(vec_sub(a1, a2, p), p);
          // (lambda/2) [(a1+a2) - (b1+b2)] . W
          phase_vec = vec_scale(mul_mod(mod_p(lambda, p), half, p),
                                vec_sub(vec_add(a1, a2, p), vec_add(b1, b2, p), p), p);
        }
        for (std::int64_t w = 0; w < d; ++w) {
          const VecZp wv = vec_unrank(w, p, n);
          acc[static_cast<std::size_t>(urank * d + w)].add(c, base_e + dot(phase_vec, wv, p));
        }
      }
    }
  }
  std::vector<Rational> out(acc.size());
  Rational total(0);
  for (std::size_t i = 0; i < acc.size(); ++i) {
    out[i] = acc[i].to_rational();
    if (out[i] < Rational(0)) throw Error("negative measurement weight");
    total += out[i];
  }
  if (total != Rational(1)) throw Error("measurement distribution does not sum to 1");
  return out;
}

// Exact draw from rational weights with total 1.
inline std::size_t sample_rational_index(const std::vector<Rational>& weights, Rng& rng) {
  std::int64_t lcm = 1;
  for (const auto& w : weights) {
    const std::int64_t g = std::gcd(lcm, w.den());
    const __int128 l = static_cast<__int128>(lcm) / g * w.den();
    if (l > (static_cast<__int128>(1) << 62)) throw Error("weight denominator overflow");
    lcm = static_cast<std::int64_t>(l);
  }
  std::int64_t total = 0;
  std::vector<std::int64_t> scaled(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    scaled[i] = weights[i].num() * (lcm / weights[i].den());
    total += scaled[i];
  }
  std::int64_t r = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(total)));
  for (std::size_t i = 0; i < scaled.size(); ++i) {
    if (r < scaled[i]) return i;
    r -= scaled[i];
  }
  return weights.size() - 1;
}

// --- dense pipeline ---------------------------------------------------------

inline ComplexMatrix u_alpha_dense(const GroupParams& gp, Residue alpha) {
  if (mod_p(alpha, gp.p) == 0) throw ZeroAlpha();
  const std::int64_t d = gp.register_dim();
  ComplexMatrix m(d, d);
  for (std::int64_t u = 0; u < d; ++u)
    m.at(vec_rank(vec_scale(alpha, vec_unrank(u, gp.p, gp.n), gp.p), gp.p), u) = 1.0;
  return m;
}

// Dense CG unitary for the k+l = 0 kernel with parameter lambda (p > 2) or
// the (-1)^{w.v} kernel (p = 2).
inline ComplexMatrix cg_dense_sum_zero(const GroupParams& gp, Residue lambda) {
  const std::int64_t d = gp.register_dim();
  const RootsOfUnity w(gp.p);
  const double s = 1.0 / std::sqrt(static_cast<double>(d));
  ComplexMatrix m(d * d, d * d);
  for (std::int64_t u = 0; u < d; ++u)
    for (std::int64_t v = 0; v < d; ++v) {
      const VecZp uv = vec_unrank(u, gp.p, gp.n), vv = vec_unrank(v, gp.p, gp.n);
      if (gp.p == 2) {
        const std::int64_t sum = vec_rank(vec_add(uv, vv, 2), 2);
        for (std::int64_t wi = 0; wi < d; ++wi)
          m.at(sum * d + wi, u * d + v) = s * w[dot(vec_unrank(wi, 2, gp.n), vv, 2)];
      } else {
        const Residue half_l = mul_mod(mod_p(lambda, gp.p), inv_mod(2, gp.p), gp.p);
        const std::int64_t diff = vec_rank(vec_sub(uv, vv, gp.p), gp.p);
        const VecZp sumv = vec_add(uv, vv, gp.p);
        for (std::int64_t wi = 0; wi < d; ++wi)
          m.at(diff * d + wi, u * d + v) =
              s * w[mul_mod(half_l, dot(sumv, vec_unrank(wi, gp.p, gp.n), gp.p), gp.p)];
      }
    }
  return m;
}

// Dense CG for k+l != 0: the permutation |u,v> -> |u-v, (ku+lv)/(k+l)>.
inline ComplexMatrix cg_dense_sum_nonzero(const GroupParams& gp, Residue k, Residue l) {
  const std::int64_t d = gp.register_dim();
  const Residue s = inv_mod(add_mod(k, l, gp.p), gp.p);
  ComplexMatrix m(d * d, d * d);
  for (std::int64_t u = 0; u < d; ++u)
    for (std::int64_t v = 0; v < d; ++v) {
      const VecZp uv = vec_unrank(u, gp.p, gp.n), vv = vec_unrank(v, gp.p, gp.n);
      const VecZp diff = vec_sub(uv, vv, gp.p);
      const VecZp mix = vec_scale(
          s, vec_add(vec_scale(mod_p(k, gp.p), uv, gp.p), vec_scale(mod_p(l, gp.p), vv, gp.p), gp.p),
          gp.p);
      m.at(vec_rank(diff, gp.p) * d + vec_rank(mix, gp.p), u * d + v) = 1.0;
    }
  return m;
}

// Dense weak-Fourier machinery for one planted subgroup: sigma_H^G pushed
// through the dense QFT once; label probabilities read off the block
// traces and the collapsed column-space state extracted per high-dim
// label.  Used for cross-validation of the exact backends.
class DensePipeline {
 public:
  explicit DensePipeline(const Subgroup& h) : h_(h), gp_(h.params()) {
    if (gp_.order() > kDenseStateCap) throw BackendCapExceeded("dense backend refuses p^{2n+1} > 2^20");
    if (gp_.pair_dim() > kDenseTwoRegisterCap)
      throw BackendCapExceeded("dense two-register objects capped at p^{2n} <= 2^12");
    const std::int64_t order = gp_.order();
    ComplexMatrix sigma(order, order);
    const auto elems = h.elements();
    const double w = 1.0 / static_cast<double>(order);
    for (std::int64_t a = 0; a < order; ++a) {
      const GroupElement ga = element_from_index(gp_, a);
      for (const auto& e : elems) {
        sigma.at(a, element_index(multiply(ga, e))) = w;
      }
    }
    const ComplexMatrix qft = qft_dense(gp_);
    fourier_ = conjugate_by(qft, sigma);

    const std::int64_t d = gp_.register_dim();
    labels_ = all_labels(gp_);
    for (const auto& label : labels_) {
      double mass = 0.0;
      if (label.is_one_dim()) {
        const std::int64_t r = qft_row_index(gp_, label, 0, 0);
        mass = fourier_.at(r, r).real();
      } else {
        for (std::int64_t i = 0; i < d; ++i)
          for (std::int64_t j = 0; j < d; ++j) {
            const std::int64_t r = qft_row_index(gp_, label, i, j);
            mass += fourier_.at(r, r).real();
          }
      }
      label_probs_.push_back(std::max(0.0, mass));
    }
    for (Residue k = 1; k < gp_.p; ++k) collapsed_.push_back(extract_collapsed(k));
  }

  const Subgroup& subgroup() const { return h_; }
  const std::vector<IrrepLabel>& labels() const { return labels_; }
  const std::vector<double>& label_probs() const { return label_probs_; }
  const ComplexMatrix& fourier_state() const { return fourier_; }

  IrrepLabel sample_label(Rng& rng) const {
    double r = rng.unit();
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (r < label_probs_[i]) return labels_[i];
      r -= label_probs_[i];
    }
    return labels_.back();
  }

  // Collapsed state of the (k, i) block; identical across row indices i.
  const ComplexMatrix& collapsed(Residue k) const {
    return collapsed_[static_cast<std::size_t>(k - 1)];
  }

 private:
  ComplexMatrix extract_collapsed(Residue k) const {
    const std::int64_t d = gp_.register_dim();
    ComplexMatrix m(d, d);
    const IrrepLabel label = IrrepLabel::high_dim(k);
    double tr = 0.0;
    for (std::int64_t j = 0; j < d; ++j) {
      const std::int64_t r = qft_row_index(gp_, label, 0, j);
      tr += fourier_.at(r, r).real();
    }
    for (std::int64_t j1 = 0; j1 < d; ++j1)
      for (std::int64_t j2 = 0; j2 < d; ++j2)
        m.at(j1, j2) = fourier_.at(qft_row_index(gp_, label, 0, j1),
                                   qft_row_index(gp_, label, 0, j2)) / tr;
    return m;
  }

  Subgroup h_;
  GroupParams gp_;
  ComplexMatrix fourier_;
  std::vector<IrrepLabel> labels_;
  std::vector<double> label_probs_;
  std::vector<ComplexMatrix> collapsed_;
};

// --- two-register rounds ----------------------------------------------------

// Shared label stage for all p > 2 backends: sample two labels, apply the
// discard rules, pick alpha.
template <typename LabelSampler>
inline std::optional<RoundOutcome> label_stage(LabelSampler&& sample, std::int64_t p,
                                               Residue& k, Residue& l, Residue& alpha,
                                               bool& sum_zero) {
  const IrrepLabel l1 = sample();
  if (l1.is_one_dim()) {
    RoundOutcome out;
    out.kind = RoundOutcome::Kind::DiscardedOneDim;
    out.discarded_label = l1;
    return out;
  }
  const IrrepLabel l2 = sample();
  if (l2.is_one_dim()) {
    RoundOutcome out;
    out.kind = RoundOutcome::Kind::DiscardedOneDim;
    out.discarded_label = l2;
    return out;
  }
  k = l1.k;
  l = l2.k;
  sum_zero = add_mod(k, l, p) == 0;
  const auto a = round_alpha(k, l, p);
  if (!a) {
    RoundOutcome out;
    out.kind = RoundOutcome::Kind::DiscardedNonSquare;
    return out;
  }
  alpha = *a;
  return std::nullopt;
}

// Steps 1-5 on two fresh coset states, exact structured backend.  After
// the label change the physical pair is (l, -l) (the collapsed Fourier
// coefficient carries rho_{-k}; the conjugation is absorbed by relabeling),
// so the CG kernel parameter is -l.
inline RoundOutcome two_register_round_structured(const HiddenFunction& f, Rng& rng) {
  const Subgroup& h = OracleAccess::hidden(f);
  const GroupParams& gp = h.params();
  if (gp.p == 2) throw EvenCharacteristic("two_register_round requires p > 2; use p2_round");
  OracleAccess::consume_queries(f, 2);
  const PlancherelDist dist(h);
  Residue k = 0, l = 0, alpha = 1;
  bool sum_zero = false;
  if (auto out = label_stage([&] { return dist.sample(rng); }, gp.p, k, l, alpha, sum_zero)) {
    out->sum_zero_event = sum_zero;
    return *out;
  }
  const StructuredState reg_a = apply_u_alpha(collapsed_high_dim(h, k), alpha);
  const StructuredState reg_b = collapsed_high_dim(h, l);
  const auto weights = cg_measurement_distribution(reg_a, reg_b, neg_mod(l, gp.p));
  const std::int64_t idx = static_cast<std::int64_t>(sample_rational_index(weights, rng));
  const std::int64_t d = gp.register_dim();
  RoundOutcome out;
  out.kind = RoundOutcome::Kind::Accepted;
  out.sum_zero_event = sum_zero;
  out.sample = {k, l, alpha, vec_unrank(idx / d, gp.p, gp.n), vec_unrank(idx % d, gp.p, gp.n)};
  return out;
}

// Same steps on the dense backend: the cached QFT(sigma)QFT^+ blocks give
// the label law and collapsed states; U_alpha and CG are applied as dense
// unitaries and (u, v) is drawn from the final diagonal.
inline RoundOutcome two_register_round_dense(const HiddenFunction& f, Rng& rng,
                                             const DensePipeline& pipe) {
  const GroupParams& gp = pipe.subgroup().params();
  if (gp.p == 2) throw EvenCharacteristic("two_register_round requires p > 2; use p2_round");
  OracleAccess::consume_queries(f, 2);
  Residue k = 0, l = 0, alpha = 1;
  bool sum_zero = false;
  const std::int64_t d = gp.register_dim();
  if (auto out = label_stage(
          [&] {
            const IrrepLabel label = pipe.sample_label(rng);
            rng.below(static_cast<std::uint64_t>(irrep_dim(label, gp)));  // row index, discarded
            return label;
          },
          gp.p, k, l, alpha, sum_zero)) {
    out->sum_zero_event = sum_zero;
    return *out;
  }
  const ComplexMatrix ua = u_alpha_dense(gp, alpha);
  const ComplexMatrix reg_a = conjugate_by(ua, pipe.collapsed(k));
  const ComplexMatrix joint = tensor(reg_a, pipe.collapsed(l));
  const ComplexMatrix cg = cg_dense_sum_zero(gp, neg_mod(l, gp.p));
  const ComplexMatrix fin = conjugate_by(cg, joint);
  std::vector<double> diag(static_cast<std::size_t>(d * d));
  double total = 0.0;
  for (std::int64_t i = 0; i < d * d; ++i) {
    diag[static_cast<std::size_t>(i)] = std::max(0.0, fin.at(i, i).real());
    total += diag[static_cast<std::size_t>(i)];
  }
  double r = rng.unit() * total;
  std::int64_t idx = d * d - 1;
  for (std::int64_t i = 0; i < d * d; ++i) {
    if (r < diag[static_cast<std::size_t>(i)]) { idx = i; break; }
    r -= diag[static_cast<std::size_t>(i)];
  }
  RoundOutcome out;
  out.kind = RoundOutcome::Kind::Accepted;
  out.sum_zero_event = sum_zero;
  out.sample = {k, l, alpha, vec_unrank(idx / d, gp.p, gp.n), vec_unrank(idx % d, gp.p, gp.n)};
  return out;
}

// Closed-form sampler: same label law and alpha, then (u, v) uniform on
// the affine translate of S_H^perp predicted by the Step 4 analysis.
inline RoundOutcome analytic_round(const Subgroup& h, const Conjugator& conj, Rng& rng) {
  const GroupParams& gp = h.params();
  if (gp.p == 2) throw EvenCharacteristic("analytic_round requires p > 2");
  const PlancherelDist dist(h);
  Residue k = 0, l = 0, alpha = 1;
  bool sum_zero = false;
  if (auto out = label_stage([&] { return dist.sample(rng); }, gp.p, k, l, alpha, sum_zero)) {
    out->sum_zero_event = sum_zero;
    return *out;
  }
  const SubspaceBasis perp = resolved_complement(h.s_basis());
  const VecZp s = perp.random_element(rng);
  const Residue beta = sub_mod(1, alpha, gp.p);
  const VecZp offset = vec_scale(beta, conj.pair(), gp.p);
  const VecZp uv = vec_sub(s, offset, gp.p);
  RoundOutcome out;
  out.kind = RoundOutcome::Kind::Accepted;
  out.sum_zero_event = sum_zero;
  out.sample = {k, l, alpha, VecZp(uv.begin(), uv.begin() + gp.n), VecZp(uv.begin() + gp.n, uv.end())};
  return out;
}

// p = 2 round: both registers must land on the unique high-dim irrep
// (probability 1/2 each); CG uses the (-1)^{w.v} kernel; there is no label
// change.  The measured (u, v) lies in S_H^perp.
inline RoundOutcome p2_round(const HiddenFunction& f, Rng& rng) {
  const Subgroup& h = OracleAccess::hidden(f);
  const GroupParams& gp = h.params();
  if (gp.p != 2) throw Error("p2_round requires p = 2");
  OracleAccess::consume_queries(f, 2);
  const PlancherelDist dist(h);
  const IrrepLabel l1 = dist.sample(rng);
  if (l1.is_one_dim()) {
    RoundOutcome out;
    out.kind = RoundOutcome::Kind::DiscardedOneDim;
    out.discarded_label = l1;
    return out;
  }
  const IrrepLabel l2 = dist.sample(rng);
  if (l2.is_one_dim()) {
    RoundOutcome out;
    out.kind = RoundOutcome::Kind::DiscardedOneDim;
    out.discarded_label = l2;
    return out;
  }
  const StructuredState reg_a = collapsed_high_dim(h, 1);
  const StructuredState reg_b = collapsed_high_dim(h, 1);
  const auto weights = cg_measurement_distribution(reg_a, reg_b, 1);
  const std::int64_t idx = static_cast<std::int64_t>(sample_rational_index(weights, rng));
  const std::int64_t d = gp.register_dim();
  RoundOutcome out;
  out.kind = RoundOutcome::Kind::Accepted;
  out.sample = {1, 1, 1, vec_unrank(idx / d, 2, gp.n), vec_unrank(idx % d, 2, gp.n)};
  return out;
}

// Max deviation of U_alpha rho_k(H) U_alpha^+ from rho_{k/alpha^2}(phi_alpha(H)),
// the Weyl-Heisenberg instantiation of the label-change theorem.
inline double verify_label_change_theorem(const GroupParams& gp, Residue k, Residue alpha,
                                          const Subgroup& h) {
  if (mod_p(k, gp.p) == 0) throw ZeroLabel();
  if (mod_p(alpha, gp.p) == 0) throw ZeroAlpha();
  if (gp.pair_dim() > kDenseTwoRegisterCap) throw TooLarge();
  const ComplexMatrix ua = u_alpha_dense(gp, alpha);
  const ComplexMatrix lhs = conjugate_by(ua, projector(IrrepLabel::high_dim(k), h));
  const Residue k2 = mul_mod(mod_p(k, gp.p), inv_mod(mul_mod(alpha, alpha, gp.p), gp.p), gp.p);
  const ComplexMatrix rhs = projector(IrrepLabel::high_dim(k2), h.mapped(GroupAutomorphism(alpha)));
  return max_abs_diff(lhs, rhs);
}

// Steps 1-5 on two fresh coset states under the chosen backend.  Prefer
// RoundEngine when running many rounds against one oracle; this entry
// point rebuilds the dense pipeline per call.
inline RoundOutcome two_register_round(const HiddenFunction& f, Rng& rng, Backend backend) {
  const Subgroup& h = OracleAccess::hidden(f);
  switch (backend) {
    case Backend::Dense: {
      const DensePipeline pipe(h);
      return two_register_round_dense(f, rng, pipe);
    }
    case Backend::Structured:
      return two_register_round_structured(f, rng);
    case Backend::Analytic: {
      OracleAccess::consume_queries(f, 2);
      return analytic_round(h, conjugator_to_h0(h), rng);
    }
  }
  throw Error("unreachable backend");
}

// Round engine reused across a recovery run: caches the per-subgroup
// machinery each backend needs.
class RoundEngine {
 public:
  RoundEngine(const HiddenFunction& f, Backend backend) : f_(f), backend_(backend) {
    const Subgroup& h = OracleAccess::hidden(f);
    if (h.params().p > 2) {
      if (backend_ == Backend::Dense) pipe_.emplace(h);
      if (backend_ == Backend::Analytic) conj_ = conjugator_to_h0(h);
    }
  }

  RoundOutcome round(Rng& rng) {
    const Subgroup& h = OracleAccess::hidden(f_);
    if (h.params().p == 2) return p2_round(f_, rng);
    switch (backend_) {
      case Backend::Dense:
        return two_register_round_dense(f_, rng, *pipe_);
      case Backend::Structured:
        return two_register_round_structured(f_, rng);
      case Backend::Analytic: {
        OracleAccess::consume_queries(f_, 2);  // two coset states per round
        return analytic_round(h, *conj_, rng);
      }
    }
    throw Error("unreachable backend");
  }

 private:
  const HiddenFunction& f_;
  Backend backend_;
  std::optional<DensePipeline> pipe_;
  std::optional<Conjugator> conj_;
};

}  // namespace whg::simulator
