#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "whg/errors.hpp"
#include "whg/oracle.hpp"
#include "whg/qft_circuit.hpp"
#include "whg/recovery.hpp"
#include "whg/reps.hpp"
#include "whg/rng.hpp"
#include "whg/simulator.hpp"
#include "whg/subgroup.hpp"

namespace whg::experiment {

using nlohmann::ordered_json;
using simulator::Backend;

// Batch experiment configuration; file form is plain key=value with flags
// overriding file entries.
struct ExperimentConfig {
  std::int64_t p = 3;
  std::int64_t n = 1;
  SubgroupClass case_filter = SubgroupClass::AbelianNonCentral;
  std::int64_t trials = 100;
  std::uint64_t seed = 1;
  Backend backend = Backend::Structured;
  std::optional<std::string> subgroup_literal;
  std::string out_path;
  bool hook_permute_wires = false;  // negative-control hook for verify

  GroupParams group_params() const { return GroupParams(p, n); }

  void validate() const {
    GroupParams gp(3, 1);
    try {
      gp = GroupParams(p, n);
    } catch (const Error& e) {
      throw ConfigInvalid(e.what());
    }
    if (trials < 0) throw ConfigInvalid("trials must be nonnegative");
    if (n < 1) throw ConfigInvalid("n must be positive for experiments");
    if (backend == Backend::Dense) {
      if (gp.order() > kDenseStateCap)
        throw BackendCapExceeded("dense backend refused: p^{2n+1} > 2^20");
      if (gp.pair_dim() > kDenseTwoRegisterCap)
        throw BackendCapExceeded("dense backend refused: p^{2n} > 2^12");
    }
    if (subgroup_literal) {
      const Subgroup h = parse_subgroup(*subgroup_literal);
      if (h.params() != gp) throw ConfigInvalid("pinned subgroup parameters disagree with --p/--n");
      if (h.classify() != case_filter)
        throw ConfigInvalid("pinned subgroup class disagrees with --case");
    }
  }
};

inline Backend backend_from_string(const std::string& s) {
  if (s == "dense") return Backend::Dense;
  if (s == "structured") return Backend::Structured;
  if (s == "analytic") return Backend::Analytic;
  throw ConfigInvalid("unknown backend: " + s);
}

inline SubgroupClass case_from_string(const std::string& s) {
  if (s == "abelian") return SubgroupClass::AbelianNonCentral;
  if (s == "normal") return SubgroupClass::NormalContainsCenter;
  throw ConfigInvalid("unknown case: " + s);
}

inline std::map<std::string, std::string> parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigInvalid("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    if (!key.empty()) kv[key] = val;
  }
  return kv;
}

struct TrialRecord {
  std::int64_t trial = 0;
  SubgroupClass cls = SubgroupClass::AbelianNonCentral;
  bool success = false;
  std::int64_t rounds = 0, accepted_rounds = 0, queries = 0, attempts = 1;
  recovery::DiscardCounts discards;
  std::int64_t sum_zero_accepted = 0;
  std::vector<std::int64_t> high_dim_label_counts;  // index k; accepted-round labels
  std::int64_t one_dim_labels_observed = 0;
};

inline TrialRecord run_trial(const ExperimentConfig& cfg, std::int64_t trial_index) {
  const GroupParams gp = cfg.group_params();
  Rng rng(Rng::derive(cfg.seed, static_cast<std::uint64_t>(trial_index)));
  const Subgroup planted = cfg.subgroup_literal
                               ? parse_subgroup(*cfg.subgroup_literal)
                               : random_subgroup(gp, cfg.case_filter, rng);
  const HiddenFunction f(planted);
  TrialRecord rec;
  rec.trial = trial_index;
  rec.cls = planted.classify();
  rec.high_dim_label_counts.assign(static_cast<std::size_t>(gp.p), 0);
  try {
    const recovery::RecoveryResult res = recovery::run_full(f, rng, cfg.backend);
    rec.success = res.recovered == planted;
    rec.rounds = res.rounds_total;
    rec.accepted_rounds = res.accepted_rounds;
    rec.queries = res.queries;
    rec.attempts = res.attempts;
    rec.discards = res.discards;
    rec.sum_zero_accepted = res.sum_zero_accepted;
    rec.high_dim_label_counts = res.high_dim_label_counts;
    rec.one_dim_labels_observed = res.one_dim_labels_observed;
  } catch (const Error&) {
    rec.success = false;
    rec.queries = f.query_count();
  }
  return rec;
}

inline std::vector<TrialRecord> run_trials(const ExperimentConfig& cfg) {
  std::vector<TrialRecord> records(static_cast<std::size_t>(cfg.trials));
  const std::int64_t workers =
      std::max<std::int64_t>(1, std::min<std::int64_t>({cfg.trials, 8,
          static_cast<std::int64_t>(std::thread::hardware_concurrency())}));
  std::vector<std::thread> pool;
  for (std::int64_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::int64_t t = w; t < cfg.trials; t += workers)
        records[static_cast<std::size_t>(t)] = run_trial(cfg, t);
    });
  }
  for (auto& th : pool) th.join();
  return records;
}

inline ordered_json experiment_document(const ExperimentConfig& cfg,
                                        const std::vector<TrialRecord>& records) {
  ordered_json doc;
  doc["schema"] = 1;
  doc["p"] = cfg.p;
  doc["n"] = cfg.n;
  doc["case"] = to_string(cfg.case_filter);
  doc["trials"] = cfg.trials;
  doc["seed"] = cfg.seed;
  doc["backend"] = simulator::to_string(cfg.backend);
  doc["convention_id"] = simulator::kPerpConventionId;
  if (cfg.subgroup_literal) doc["subgroup"] = *cfg.subgroup_literal;
  else doc["subgroup"] = nullptr;

  std::int64_t successes = 0;
  double sum_rounds = 0, sum_accepted = 0, sum_queries = 0, sum_zero = 0;
  double sum_one_dim = 0, sum_sz = 0, sum_ns = 0;
  for (const auto& r : records) {
    successes += r.success ? 1 : 0;
    sum_rounds += static_cast<double>(r.rounds);
    sum_accepted += static_cast<double>(r.accepted_rounds);
    sum_queries += static_cast<double>(r.queries);
    sum_zero += static_cast<double>(r.sum_zero_accepted);
    sum_one_dim += static_cast<double>(r.discards.one_dim);
    sum_sz += static_cast<double>(r.discards.sum_zero);
    sum_ns += static_cast<double>(r.discards.non_square);
  }
  const double denom = records.empty() ? 1.0 : static_cast<double>(records.size());
  doc["successes"] = successes;
  doc["mean_rounds"] = sum_rounds / denom;
  doc["mean_accepted_rounds"] = sum_accepted / denom;
  doc["mean_queries"] = sum_queries / denom;
  doc["mean_discards_by_reason"] = {
      {"one_dim", sum_one_dim / denom}, {"sum_zero", sum_sz / denom}, {"non_square", sum_ns / denom}};
  doc["mean_sum_zero_accepted"] = sum_zero / denom;

  ordered_json per_trial = ordered_json::array();
  for (const auto& r : records) {
    per_trial.push_back({{"trial", r.trial},
                         {"case", to_string(r.cls)},
                         {"success", r.success},
                         {"rounds", r.rounds},
                         {"accepted_rounds", r.accepted_rounds},
                         {"discards",
                          {{"one_dim", r.discards.one_dim},
                           {"sum_zero", r.discards.sum_zero},
                           {"non_square", r.discards.non_square}}},
                         {"sum_zero_accepted", r.sum_zero_accepted},
                         {"queries", r.queries},
                         {"attempts", r.attempts}});
  }
  doc["per_trial"] = per_trial;
  return doc;
}

// CSV side files: accepted-round histogram and discard/label frequencies.
inline std::string rounds_histogram_csv(const std::vector<TrialRecord>& records) {
  std::map<std::int64_t, std::int64_t> hist;
  for (const auto& r : records) ++hist[r.accepted_rounds];
  std::string csv = "accepted_rounds,trials\n";
  for (const auto& [k, v] : hist) csv += std::to_string(k) + "," + std::to_string(v) + "\n";
  return csv;
}

inline std::string labels_csv(const std::vector<TrialRecord>& records) {
  std::string csv = "label,count\n";
  if (!records.empty()) {
    const std::size_t p = records.front().high_dim_label_counts.size();
    for (std::size_t k = 1; k < p; ++k) {
      std::int64_t total = 0;
      for (const auto& r : records)
        if (k < r.high_dim_label_counts.size()) total += r.high_dim_label_counts[k];
      csv += "k=" + std::to_string(k) + "," + std::to_string(total) + "\n";
    }
    std::int64_t one_dim = 0;
    for (const auto& r : records) one_dim += r.one_dim_labels_observed;
    csv += "one_dim," + std::to_string(one_dim) + "\n";
  }
  return csv;
}

inline std::string discards_csv(const std::vector<TrialRecord>& records) {
  std::int64_t one_dim = 0, sum_zero = 0, non_square = 0, accepted = 0, sz_accepted = 0;
  for (const auto& r : records) {
    one_dim += r.discards.one_dim;
    sum_zero += r.discards.sum_zero;
    non_square += r.discards.non_square;
    accepted += r.accepted_rounds;
    sz_accepted += r.sum_zero_accepted;
  }
  std::string csv = "event,count\n";
  csv += "accepted," + std::to_string(accepted) + "\n";
  csv += "accepted_sum_zero," + std::to_string(sz_accepted) + "\n";
  csv += "discard_one_dim," + std::to_string(one_dim) + "\n";
  csv += "discard_sum_zero," + std::to_string(sum_zero) + "\n";
  csv += "discard_non_square," + std::to_string(non_square) + "\n";
  return csv;
}

// Runs `trials` independent recoveries with derived seeds and returns the
// result document (schema 1).  Same config -> byte-identical serialization.
inline ordered_json run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  return experiment_document(cfg, run_trials(cfg));
}

// --- verification suite ------------------------------------------------------

struct CheckResult {
  std::string name;
  std::string status;  // PASS / FAIL / SKIPPED
  double deviation = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_pass = true;

  void add(const std::string& name, bool pass, double dev, const std::string& detail = "") {
    checks.push_back({name, pass ? "PASS" : "FAIL", dev, detail});
    all_pass = all_pass && pass;
  }
  void skip(const std::string& name, const std::string& why) {
    checks.push_back({name, "SKIPPED", 0.0, why});
  }
};

inline GroupElement random_element(const GroupParams& gp, Rng& rng) {
  return element_from_index(gp, static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(gp.order()))));
}

// Drives the invariant suites of every module at the configured (p, n) and
// reports per-check max deviations.
inline VerifyReport verify_suite(const ExperimentConfig& cfg) {
  const GroupParams gp = cfg.group_params();
  Rng rng(Rng::derive(cfg.seed, 0xfeed));
  VerifyReport report;
  const double tol = 1e-9;

  {  // group axioms: associativity, inverses, power closed form
    bool ok = true;
    for (int t = 0; t < 400 && ok; ++t) {
      const GroupElement a = random_element(gp, rng), b = random_element(gp, rng),
                         c = random_element(gp, rng);
      ok = multiply(multiply(a, b), c) == multiply(a, multiply(b, c));
      ok = ok && multiply(a, inverse(a)) == identity_element(gp);
      GroupElement it = identity_element(gp);
      const std::int64_t e = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(2 * gp.p)));
      for (std::int64_t i = 0; i < e; ++i) it = multiply(it, a);
      ok = ok && power(a, e) == it;
    }
    report.add("group_axioms", ok, ok ? 0.0 : 1.0);
  }

  {  // rho homomorphism and chi multiplicativity
    double dev = 0.0;
    for (int t = 0; t < 60; ++t) {
      const GroupElement a = random_element(gp, rng), b = random_element(gp, rng);
      const Residue k = 1 + static_cast<Residue>(rng.below(static_cast<std::uint64_t>(gp.p - 1)));
      dev = std::max(dev, max_abs_diff(mat_mul(rho(k, a), rho(k, b)), rho(k, multiply(a, b))));
      const VecZp av = vec_unrank(static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(gp.register_dim()))), gp.p, gp.n);
      const VecZp bv = vec_unrank(static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(gp.register_dim()))), gp.p, gp.n);
      dev = std::max(dev, std::abs(chi(av, bv, a) * chi(av, bv, b) - chi(av, bv, multiply(a, b))));
    }
    report.add("rep_homomorphism", dev <= tol, dev);
  }

  {  // character orthogonality over one-dim labels (sampled pairs, exact sum)
    double dev = 0.0;
    for (int t = 0; t < 12; ++t) {
      const std::int64_t d = gp.register_dim();
      const auto pick = [&] {
        return std::pair<VecZp, VecZp>(
            vec_unrank(static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(d))), gp.p, gp.n),
            vec_unrank(static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(d))), gp.p, gp.n));
      };
      const auto [a1, b1] = pick();
      const auto [a2, b2] = pick();
      Complex sum = 0.0;
      for (std::int64_t i = 0; i < gp.order(); ++i) {
        const GroupElement g = element_from_index(gp, i);
        sum += chi(a1, b1, g) * std::conj(chi(a2, b2, g));
      }
      const double expect = (a1 == a2 && b1 == b2) ? static_cast<double>(gp.order()) : 0.0;
      dev = std::max(dev, std::abs(sum - expect));
    }
    report.add("character_orthogonality", dev <= 1e-6, dev);
  }

  if (gp.order() <= kDenseStateCap && gp.order() <= 4096) {
    const ComplexMatrix u = qft_dense(gp);
    const double dev = unitarity_deviation(u);
    report.add("qft_unitarity", dev <= tol, dev);
    const Circuit c = build_circuit(gp, cfg.hook_permute_wires ? WireLayout::SwapXYTestHook
                                                               : WireLayout::Standard);
    const double cdev = max_abs_diff(circuit_unitary(c), u);
    report.add("circuit_vs_dense", cdev <= tol, cdev,
               cfg.hook_permute_wires ? "wire-permutation hook active" : "");
  } else {
    report.skip("qft_unitarity", "dense cap");
    report.skip("circuit_vs_dense", "dense cap");
  }

  if (gp.p > 2 && gp.pair_dim() <= 1024) {  // CG block structure
    double dev = 0.0;
    for (Residue k = 1; k < gp.p; ++k)
      for (Residue l = 1; l < gp.p; ++l) {
        for (int t = 0; t < 8; ++t) {
          const GroupElement g = random_element(gp, rng);
          const ComplexMatrix prod = tensor(rho(k, g), rho(l, g));
          if (add_mod(k, l, gp.p) != 0) {
            const ComplexMatrix cg = simulator::cg_dense_sum_nonzero(gp, k, l);
            const ComplexMatrix expect =
                tensor(ComplexMatrix::identity(gp.register_dim()), rho(add_mod(k, l, gp.p), g));
            dev = std::max(dev, max_abs_diff(conjugate_by(cg, prod), expect));
          } else {
            const ComplexMatrix cg = simulator::cg_dense_sum_zero(gp, l);
            const ComplexMatrix got = conjugate_by(cg, prod);
            // diagonal with entry chi_{-kw, kd} at (d, w)
            ComplexMatrix expect(gp.pair_dim(), gp.pair_dim());
            for (std::int64_t di = 0; di < gp.register_dim(); ++di)
              for (std::int64_t wi = 0; wi < gp.register_dim(); ++wi) {
                const VecZp dv = vec_unrank(di, gp.p, gp.n), wv = vec_unrank(wi, gp.p, gp.n);
                const std::int64_t pos = di * gp.register_dim() + wi;
                expect.at(pos, pos) =
                    chi(vec_scale(neg_mod(k, gp.p), wv, gp.p), vec_scale(k, dv, gp.p), g);
              }
            dev = std::max(dev, max_abs_diff(got, expect));
          }
        }
      }
    report.add("cg_block_structure", dev <= tol, dev);
  } else if (gp.p == 2) {
    report.skip("cg_block_structure", "p = 2 uses the (-1)^{wv} kernel; covered by sampler check");
  } else {
    report.skip("cg_block_structure", "dense cap");
  }

  if (gp.p > 2 && gp.pair_dim() <= kDenseTwoRegisterCap) {  // label change
    double dev = 0.0;
    for (int t = 0; t < 12; ++t) {
      const Residue k = 1 + static_cast<Residue>(rng.below(static_cast<std::uint64_t>(gp.p - 1)));
      const Residue alpha = 1 + static_cast<Residue>(rng.below(static_cast<std::uint64_t>(gp.p - 1)));
      const Subgroup h = random_subgroup(gp, SubgroupClass::AbelianNonCentral, rng);
      dev = std::max(dev, simulator::verify_label_change_theorem(gp, k, alpha, h));
    }
    report.add("label_change", dev <= tol, dev);
  } else {
    report.skip("label_change", gp.p == 2 ? "p = 2 has no label change" : "dense cap");
  }

  if (gp.p > 2 && gp.order() <= kDenseStateCap && gp.pair_dim() <= kDenseTwoRegisterCap &&
      gp.order() <= 1024) {
    // sampler cross-validation: dense measurement diagonal vs the analytic
    // affine-support distribution, exact per accepted label pair
    double worst_tv = 0.0;
    for (int t = 0; t < 3; ++t) {
      const Subgroup h = random_subgroup(gp, SubgroupClass::AbelianNonCentral, rng);
      const simulator::DensePipeline pipe(h);
      const Conjugator conj = conjugator_to_h0(h);
      const SubspaceBasis perp = simulator::resolved_complement(h.s_basis());
      const std::int64_t d = gp.register_dim();
      for (Residue k = 1; k < gp.p; ++k)
        for (Residue l = 1; l < gp.p; ++l) {
          const auto alpha = simulator::round_alpha(k, l, gp.p);
          if (!alpha) continue;
          const ComplexMatrix ua = simulator::u_alpha_dense(gp, *alpha);
          const ComplexMatrix joint =
              tensor(conjugate_by(ua, pipe.collapsed(k)), pipe.collapsed(l));
          const ComplexMatrix fin =
              conjugate_by(simulator::cg_dense_sum_zero(gp, neg_mod(l, gp.p)), joint);
          const double uniform = 1.0 / static_cast<double>(perp.size());
          double tv = 0.0;
          for (std::int64_t i = 0; i < d * d; ++i) {
            const double got = std::max(0.0, fin.at(i, i).real());
            const bool in_support = simulator::affine_support_contains(
                perp, conj, *alpha, vec_unrank(i / d, gp.p, gp.n), vec_unrank(i % d, gp.p, gp.n), gp.p);
            tv += std::abs(got - (in_support ? uniform : 0.0));
          }
          worst_tv = std::max(worst_tv, tv / 2.0);
        }
    }
    report.add("sampler_cross_validation", worst_tv <= 1e-9, worst_tv);
  } else if (gp.p == 2 && gp.n <= 3) {
    // p = 2: structured p2 weights vs uniform-on-S_H^perp
    double worst_tv = 0.0;
    for (int t = 0; t < 4; ++t) {
      const Subgroup h = random_subgroup(gp, SubgroupClass::AbelianNonCentral, rng);
      const auto reg = simulator::collapsed_high_dim(h, 1);
      const auto weights = simulator::cg_measurement_distribution(reg, reg, 1);
      const SubspaceBasis perp = simulator::resolved_complement(h.s_basis());
      const Rational uniform(1, perp.size());
      double tv = 0.0;
      const std::int64_t d = gp.register_dim();
      for (std::size_t i = 0; i < weights.size(); ++i) {
        VecZp uv = vec_unrank(static_cast<std::int64_t>(i) / d, 2, gp.n);
        const VecZp vv = vec_unrank(static_cast<std::int64_t>(i) % d, 2, gp.n);
        uv.insert(uv.end(), vv.begin(), vv.end());
        const Rational expect = perp.contains(uv) ? uniform : Rational(0);
        tv += std::abs((weights[i] - expect).to_double());
      }
      worst_tv = std::max(worst_tv, tv / 2.0);
    }
    report.add("sampler_cross_validation", worst_tv <= 1e-9, worst_tv);
  } else {
    report.skip("sampler_cross_validation", "dense cap");
  }

  {  // oracle coset law, sampled
    bool ok = true;
    for (int t = 0; t < 6 && ok; ++t) {
      const Subgroup h = random_subgroup(
          gp, t % 2 == 0 ? SubgroupClass::AbelianNonCentral : SubgroupClass::NormalContainsCenter,
          rng);
      const HiddenFunction f(h);
      for (int s = 0; s < 60 && ok; ++s) {
        const GroupElement g = random_element(gp, rng), w = random_element(gp, rng);
        ok = (f.query(g) == f.query(multiply(g, w))) == h.contains(w);
      }
    }
    report.add("oracle_coset_law", ok, ok ? 0.0 : 1.0);
  }

  {  // plancherel rational identities
    bool ok = true;
    for (int t = 0; t < 8 && ok; ++t) {
      const Subgroup h = random_subgroup(
          gp, t % 2 == 0 ? SubgroupClass::AbelianNonCentral : SubgroupClass::NormalContainsCenter,
          rng);
      const PlancherelDist dist(h);  // ctor asserts masses sum to 1
      if (h.classify() == SubgroupClass::AbelianNonCentral) {
        ok = dist.high_dim_mass() == Rational(1, gp.p) &&
             dist.one_dim_total_mass() == Rational(1, gp.p);
      } else {
        ok = dist.high_dim_mass() == Rational(0) && dist.one_dim_total_mass() == Rational(1);
      }
    }
    report.add("plancherel_exact", ok, ok ? 0.0 : 1.0);
  }

  return report;
}

}  // namespace whg::experiment
