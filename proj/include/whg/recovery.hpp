#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "whg/errors.hpp"
#include "whg/group.hpp"
#include "whg/linalg.hpp"
#include "whg/oracle.hpp"
#include "whg/rng.hpp"
#include "whg/simulator.hpp"
#include "whg/subgroup.hpp"

namespace whg::recovery {

using simulator::Backend;
using simulator::RoundOutcome;
using simulator::RoundSample;

// Span-stabilization stop rule shared by all branches.
inline constexpr std::int64_t kStableRounds = 4;
inline std::int64_t accepted_round_cap(std::int64_t n) { return 8 * n + 32; }
inline std::int64_t total_round_cap(std::int64_t n) { return 100 * (8 * n + 32); }

struct DiscardCounts {
  std::int64_t one_dim = 0, sum_zero = 0, non_square = 0;
  std::int64_t total() const { return one_dim + sum_zero + non_square; }
};

struct RecoveryResult {
  explicit RecoveryResult(const GroupParams& gp)
      : recovered(gp), s_basis(gp.p, 2 * gp.n),
        high_dim_label_counts(static_cast<std::size_t>(gp.p), 0) {}

  Subgroup recovered;
  SubspaceBasis s_basis;
  std::optional<Conjugator> conjugator;  // abelian p > 2 branch
  SubgroupClass detected = SubgroupClass::AbelianNonCentral;
  std::int64_t rounds_total = 0;          // every round costs 2 oracle queries
  std::int64_t accepted_rounds = 0;       // across attempts
  std::int64_t max_accepted_in_attempt = 0;
  DiscardCounts discards;
  std::int64_t sum_zero_accepted = 0;     // k+l = 0 rounds accepted via alpha = -1
  std::int64_t verification_queries = 0;  // across attempts
  std::int64_t queries = 0;               // oracle counter delta
  std::int64_t attempts = 1;
  std::vector<std::int64_t> high_dim_label_counts;  // index k; labels of accepted rounds
  std::int64_t one_dim_labels_observed = 0;
};

// Two queries: H is normal (contains G') iff f(e) = f((0,0,1)).
inline SubgroupClass detect_case(const HiddenFunction& f) {
  const GroupParams& gp = f.params();
  return f.query(identity_element(gp)) == f.query(center_generator(gp))
             ? SubgroupClass::NormalContainsCenter
             : SubgroupClass::AbelianNonCentral;
}

// Removes the affine translation from accepted round samples: w_i =
// (u_i, v_i)/(1 - alpha_i) all lie in one coset of S_H^perp, so pairwise
// differences span (a subspace of) S_H^perp and -w_m is a conjugator
// representative.  The caller supplies enough records that the span has
// stabilized.
inline std::pair<SubspaceBasis, Conjugator> solve_samples(const std::vector<RoundSample>& records,
                                                          const GroupParams& gp) {
  if (records.size() < 2) throw InsufficientSamples();
  std::vector<VecZp> ws;
  ws.reserve(records.size());
  for (const auto& r : records) {
    const Residue beta = sub_mod(1, r.alpha, gp.p);
    ws.push_back(vec_scale(inv_mod(beta, gp.p), r.uv(), gp.p));
  }
  SubspaceBasis span(gp.p, 2 * gp.n);
  const VecZp& last = ws.back();
  for (std::size_t i = 0; i + 1 < ws.size(); ++i) span.insert(vec_sub(ws[i], last, gp.p));
  VecZp ghat(static_cast<std::size_t>(2 * gp.n), 0);
  for (std::size_t i = 0; i < last.size(); ++i) ghat[i] = neg_mod(last[i], gp.p);
  return {span, conjugator_from_pair(gp, span.reduce(ghat))};
}

// S_H := resolved complement of S_H^perp; H := the canonical H_0 of that
// class conjugated back by the inverse of (x^, y^, 0).
inline Subgroup reconstruct(const SubspaceBasis& s_perp, const Conjugator& conj,
                            const GroupParams& gp) {
  if (gp.p == 2) throw EvenCharacteristic("reconstruct requires p > 2");
  const SubspaceBasis s_h = simulator::resolved_complement(s_perp);
  if (!is_isotropic(s_h)) throw NotIsotropic();
  const Subgroup h0 = canonical_h0(s_h, gp);
  return h0.conjugated(inverse(conjugator_element(gp, conj)));
}

namespace detail {

inline bool verify_candidate(const HiddenFunction& f, const Subgroup& candidate,
                             const std::string& label_e, std::int64_t& verification_queries) {
  for (const auto& g : candidate.generators()) {
    ++verification_queries;
    if (f.query(g) != label_e) return false;
  }
  return true;
}

// Abelian p > 2 branch: loop two-register rounds under the stop rule, then
// solve + reconstruct.  Returns the candidate, or nullopt when the attempt
// produced unusable linear algebra (treated like a verification failure).
inline std::optional<Subgroup> abelian_attempt(const HiddenFunction& f, Backend backend, Rng& rng,
                                               RecoveryResult& stats,
                                               SubspaceBasis& s_perp_out, Conjugator& conj_out) {
  const GroupParams& gp = f.params();
  simulator::RoundEngine engine(f, backend);
  std::vector<RoundSample> samples;
  SubspaceBasis span(gp.p, 2 * gp.n);
  std::optional<VecZp> w_first;
  std::int64_t streak = 0, accepted = 0, rounds_attempt = 0;
  while (true) {
    if (rounds_attempt >= total_round_cap(gp.n)) throw SampleBudgetExceeded();
    const RoundOutcome out = engine.round(rng);
    ++stats.rounds_total;
    ++rounds_attempt;
    switch (out.kind) {
      case RoundOutcome::Kind::DiscardedOneDim:
        ++stats.discards.one_dim;
        ++stats.one_dim_labels_observed;
        continue;
      case RoundOutcome::Kind::DiscardedSumZero: ++stats.discards.sum_zero; continue;
      case RoundOutcome::Kind::DiscardedNonSquare: ++stats.discards.non_square; continue;
      case RoundOutcome::Kind::Accepted: break;
    }
    ++accepted;
    ++stats.accepted_rounds;
    ++stats.high_dim_label_counts[static_cast<std::size_t>(out.sample.k)];
    ++stats.high_dim_label_counts[static_cast<std::size_t>(out.sample.l)];
    if (out.sum_zero_event) ++stats.sum_zero_accepted;
    samples.push_back(out.sample);
    const Residue beta = sub_mod(1, out.sample.alpha, gp.p);
    const VecZp w = vec_scale(inv_mod(beta, gp.p), out.sample.uv(), gp.p);
    bool grew = false;
    if (!w_first) {
      w_first = w;
    } else {
      grew = span.insert(vec_sub(w, *w_first, gp.p));
    }
    streak = grew ? 0 : streak + 1;
    if (streak >= kStableRounds && accepted >= 2) break;
    if (accepted >= accepted_round_cap(gp.n)) break;
  }
  stats.max_accepted_in_attempt = std::max(stats.max_accepted_in_attempt, accepted);
  if (samples.size() < 2) throw SampleBudgetExceeded();
  try {
    auto [s_perp, conj] = solve_samples(samples, gp);
    s_perp_out = s_perp;
    conj_out = conj;
    return reconstruct(s_perp, conj, gp);
  } catch (const NotIsotropic&) {
    return std::nullopt;
  }
}

// Normal branch: weak Fourier sampling sees only one-dim labels (a, b);
// their span stabilizes to the annihilator of S_H under the character
// pairing, whose annihilator in turn is S_H.  H is the full preimage.
// Rounds draw two samples apiece so every round costs 2 queries.
inline Subgroup normal_attempt(const HiddenFunction& f, Rng& rng, RecoveryResult& stats) {
  const GroupParams& gp = f.params();
  SubspaceBasis span(gp.p, 2 * gp.n);
  std::int64_t streak = 0, rounds_attempt = 0;
  while (true) {
    bool grew = false;
    for (int s = 0; s < 2; ++s) {
      const auto [label, state] = simulator::weak_fourier_sample(f, rng);
      if (!label.is_one_dim()) throw Error("normal branch observed a high-dim label");
      ++stats.one_dim_labels_observed;
      VecZp ab = label.a;
      ab.insert(ab.end(), label.b.begin(), label.b.end());
      grew = span.insert(ab) || grew;
    }
    ++stats.rounds_total;
    ++stats.accepted_rounds;
    ++rounds_attempt;
    streak = grew ? 0 : streak + 1;
    if (streak >= kStableRounds || rounds_attempt >= accepted_round_cap(gp.n)) break;
  }
  stats.max_accepted_in_attempt = std::max(stats.max_accepted_in_attempt, rounds_attempt);
  const SubspaceBasis s_h = complement_basis(span, BilinearForm::euclidean(2 * gp.n));
  std::vector<GroupElement> gens = {center_generator(gp)};
  for (const auto& row : s_h.rows) gens.push_back(element_from_pair(gp, row, 0));
  return Subgroup(gp, gens);
}

// p = 2 abelian branch.  Stage 1 spans S_H^perp from p2_round samples;
// stage 2 runs the abelian standard method on HG' =~ Z_2^{d+1}, simulated
// exactly as uniform sampling from the character annihilator of H inside
// HG', then solves the linear system for H.
inline std::optional<Subgroup> p2_attempt(const HiddenFunction& f, Rng& rng,
                                          RecoveryResult& stats, SubspaceBasis& s_h_out) {
  const GroupParams& gp = f.params();
  SubspaceBasis span(gp.p, 2 * gp.n);
  std::int64_t streak = 0, accepted = 0, rounds_attempt = 0;
  while (true) {
    if (rounds_attempt >= total_round_cap(gp.n)) throw SampleBudgetExceeded();
    const RoundOutcome out = simulator::p2_round(f, rng);
    ++stats.rounds_total;
    ++rounds_attempt;
    if (!out.accepted()) {
      ++stats.discards.one_dim;
      ++stats.one_dim_labels_observed;
      continue;
    }
    ++accepted;
    ++stats.accepted_rounds;
    stats.high_dim_label_counts[1] += 2;  // both registers carry k = 1
    const bool grew = span.insert(out.sample.uv());
    streak = grew ? 0 : streak + 1;
    if (streak >= kStableRounds || accepted >= accepted_round_cap(gp.n)) break;
  }
  stats.max_accepted_in_attempt = std::max(stats.max_accepted_in_attempt, accepted);
  const SubspaceBasis s_h = simulator::resolved_complement(span);
  if (!is_isotropic(s_h)) return std::nullopt;
  s_h_out = s_h;

  // coordinates on HG': basis lifts (v_i, 0) plus the center generator
  const Subgroup& hidden = simulator::OracleAccess::hidden(f);
  const std::int64_t d = s_h.dim();
  VecZp delta(static_cast<std::size_t>(d), 0);
  for (std::int64_t i = 0; i < d; ++i) {
    const auto coords = hidden.s_basis().coordinates(s_h.rows[static_cast<std::size_t>(i)]);
    if (!coords) return std::nullopt;  // stage 1 overshot S_H
    delta[static_cast<std::size_t>(i)] = hidden.lift_of(*coords).z;
  }
  // annihilator of H inside HG'^ is {0, (delta, 1)}
  VecZp ann_gen = delta;
  ann_gen.push_back(1);
  SubspaceBasis ann(2, d + 1);
  ann.insert(ann_gen);

  SubspaceBasis observed(2, d + 1);
  std::int64_t streak2 = 0, rounds2 = 0;
  while (true) {
    bool grew = false;
    for (int s = 0; s < 2; ++s) {
      simulator::OracleAccess::consume_queries(f, 1);  // one coset state of HG' per sample
      grew = observed.insert(ann.random_element(rng)) || grew;
    }
    ++stats.rounds_total;
    ++stats.accepted_rounds;
    ++rounds2;
    streak2 = grew ? 0 : streak2 + 1;
    if (streak2 >= kStableRounds || rounds2 >= accepted_round_cap(gp.n)) break;
  }
  const SubspaceBasis h_coords = complement_basis(observed, BilinearForm::euclidean(d + 1));
  std::vector<GroupElement> gens;
  for (const auto& row : h_coords.rows) {
    GroupElement g = identity_element(gp);
    for (std::int64_t i = 0; i < d; ++i)
      if (row[static_cast<std::size_t>(i)] != 0)
        g = multiply(g, element_from_pair(gp, s_h.rows[static_cast<std::size_t>(i)], 0));
    if (row[static_cast<std::size_t>(d)] != 0) g = multiply(g, center_generator(gp));
    gens.push_back(g);
  }
  return Subgroup(gp, gens);
}

}  // namespace detail

inline RecoveryResult normal_recover(const HiddenFunction& f, Rng& rng) {
  const GroupParams& gp = f.params();
  const std::int64_t start = f.query_count();
  RecoveryResult res(gp);
  const std::string label_e = f.query(identity_element(gp));
  f.query(center_generator(gp));  // paired detection query
  res.detected = SubgroupClass::NormalContainsCenter;
  for (std::int64_t attempt = 1; attempt <= 2; ++attempt) {
    res.attempts = attempt;
    const Subgroup candidate = detail::normal_attempt(f, rng, res);
    if (detail::verify_candidate(f, candidate, label_e, res.verification_queries)) {
      res.recovered = candidate;
      res.s_basis = candidate.s_basis();
      res.queries = f.query_count() - start;
      return res;
    }
  }
  throw VerificationFailed();
}

inline RecoveryResult p2_recover(const HiddenFunction& f, Rng& rng) {
  const GroupParams& gp = f.params();
  if (gp.p != 2) throw Error("p2_recover requires p = 2");
  const std::int64_t start = f.query_count();
  RecoveryResult res(gp);
  const std::string label_e = f.query(identity_element(gp));
  f.query(center_generator(gp));
  res.detected = SubgroupClass::AbelianNonCentral;
  for (std::int64_t attempt = 1; attempt <= 2; ++attempt) {
    res.attempts = attempt;
    SubspaceBasis s_h(gp.p, 2 * gp.n);
    const auto candidate = detail::p2_attempt(f, rng, res, s_h);
    if (candidate &&
        detail::verify_candidate(f, *candidate, label_e, res.verification_queries)) {
      res.recovered = *candidate;
      res.s_basis = candidate->s_basis();
      res.queries = f.query_count() - start;
      return res;
    }
  }
  throw VerificationFailed();
}

// Full driver: case detection, branch dispatch, span-stabilized sampling,
// oracle verification of the candidate (one retry with fresh randomness),
// faithful query accounting: queries = 2*rounds + 2 + verification queries.
inline RecoveryResult run_full(const HiddenFunction& f, Rng& rng,
                               Backend backend = Backend::Structured) {
  const GroupParams& gp = f.params();
  const std::int64_t start = f.query_count();
  RecoveryResult res(gp);
  const std::string label_e = f.query(identity_element(gp));
  const std::string label_c = f.query(center_generator(gp));
  const bool normal = label_e == label_c;
  res.detected = normal ? SubgroupClass::NormalContainsCenter : SubgroupClass::AbelianNonCentral;

  for (std::int64_t attempt = 1; attempt <= 2; ++attempt) {
    res.attempts = attempt;
    std::optional<Subgroup> candidate;
    SubspaceBasis s_perp(gp.p, 2 * gp.n);
    Conjugator conj;
    bool have_conj = false;
    if (normal) {
      candidate = detail::normal_attempt(f, rng, res);
    } else if (gp.p == 2) {
      SubspaceBasis s_h(gp.p, 2 * gp.n);
      candidate = detail::p2_attempt(f, rng, res, s_h);
    } else {
      candidate = detail::abelian_attempt(f, backend, rng, res, s_perp, conj);
      have_conj = candidate.has_value();
    }
    if (candidate &&
        detail::verify_candidate(f, *candidate, label_e, res.verification_queries)) {
      res.recovered = *candidate;
      res.s_basis = candidate->s_basis();
      if (have_conj) res.conjugator = conj;
      res.queries = f.query_count() - start;
      return res;
    }
  }
  throw VerificationFailed();
}

}  // namespace whg::recovery
