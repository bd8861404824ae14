// Batch experiment runner and invariant-verification entry point for the
// Weyl-Heisenberg HSP simulator.
//
//   whg run     --p 3 --n 1 --case abelian --trials 100 --seed 7
//               --backend structured --out results.json
//   whg verify  --p 3 --n 1 [--out report.json]
//   whg dump-circuit --p 3 --n 2 [--out gates.txt]
//
// Exit codes: 0 pass, 1 failures, 2 config error.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "whg/whg.hpp"

namespace {

using whg::experiment::ExperimentConfig;

std::string stem_of(const std::string& path) {
  const auto dotpos = path.find_last_of('.');
  const auto slash = path.find_last_of('/');
  if (dotpos == std::string::npos || (slash != std::string::npos && dotpos < slash)) return path;
  return path.substr(0, dotpos);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw whg::ConfigInvalid("cannot open output file: " + path);
  out << content;
}

struct RawOptions {
  std::string p, n, case_name, trials, seed, backend, subgroup, out, config;
  bool hook_permute_wires = false;
};

// file values first, flags override
ExperimentConfig merge_options(const RawOptions& raw) {
  std::map<std::string, std::string> kv;
  if (!raw.config.empty()) kv = whg::experiment::parse_config_file(raw.config);
  const auto put = [&](const std::string& key, const std::string& val) {
    if (!val.empty()) kv[key] = val;
  };
  put("p", raw.p);
  put("n", raw.n);
  put("case", raw.case_name);
  put("trials", raw.trials);
  put("seed", raw.seed);
  put("backend", raw.backend);
  put("subgroup", raw.subgroup);
  put("out", raw.out);

  ExperimentConfig cfg;
  try {
    if (kv.count("p")) cfg.p = std::stoll(kv["p"]);
    if (kv.count("n")) cfg.n = std::stoll(kv["n"]);
    if (kv.count("case")) cfg.case_filter = whg::experiment::case_from_string(kv["case"]);
    if (kv.count("trials")) cfg.trials = std::stoll(kv["trials"]);
    if (kv.count("seed")) cfg.seed = std::stoull(kv["seed"]);
    if (kv.count("backend")) cfg.backend = whg::experiment::backend_from_string(kv["backend"]);
    if (kv.count("subgroup")) cfg.subgroup_literal = kv["subgroup"];
    if (kv.count("out")) cfg.out_path = kv["out"];
  } catch (const std::invalid_argument&) {
    throw whg::ConfigInvalid("malformed numeric option");
  }
  cfg.hook_permute_wires = raw.hook_permute_wires;
  return cfg;
}

int cmd_run(const ExperimentConfig& cfg) {
  const auto records = whg::experiment::run_trials(cfg);
  const auto doc = whg::experiment::experiment_document(cfg, records);
  const std::string body = doc.dump(2) + "\n";
  if (cfg.out_path.empty()) {
    std::cout << body;
  } else {
    write_file(cfg.out_path, body);
    const std::string stem = stem_of(cfg.out_path);
    write_file(stem + "_rounds.csv", whg::experiment::rounds_histogram_csv(records));
    write_file(stem + "_labels.csv", whg::experiment::labels_csv(records));
    write_file(stem + "_events.csv", whg::experiment::discards_csv(records));
    std::cout << "wrote " << cfg.out_path << " (+ " << stem << "_rounds.csv, " << stem
              << "_labels.csv, " << stem << "_events.csv)\n";
  }
  return 0;
}

int cmd_verify(const ExperimentConfig& cfg) {
  const auto report = whg::experiment::verify_suite(cfg);
  nlohmann::ordered_json doc;
  doc["schema"] = 1;
  doc["p"] = cfg.p;
  doc["n"] = cfg.n;
  doc["convention_id"] = whg::simulator::kPerpConventionId;
  auto checks = nlohmann::ordered_json::array();
  for (const auto& c : report.checks) {
    std::printf("[%s] %-26s max_deviation=%.3e%s%s\n", c.status.c_str(), c.name.c_str(),
                c.deviation, c.detail.empty() ? "" : "  ", c.detail.c_str());
    checks.push_back({{"name", c.name},
                      {"status", c.status},
                      {"max_deviation", c.deviation},
                      {"detail", c.detail}});
  }
  doc["checks"] = checks;
  doc["all_pass"] = report.all_pass;
  if (!cfg.out_path.empty()) write_file(cfg.out_path, doc.dump(2) + "\n");
  std::printf("%s\n", report.all_pass ? "all checks passed" : "FAILURES present");
  return report.all_pass ? 0 : 1;
}

int cmd_dump_circuit(const ExperimentConfig& cfg) {
  const whg::Circuit c = whg::build_circuit(whg::GroupParams(cfg.p, cfg.n));
  const std::string text = whg::dump_gates(c);
  if (cfg.out_path.empty()) std::cout << text;
  else write_file(cfg.out_path, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hidden-subgroup recovery simulator for Weyl-Heisenberg groups"};
  app.require_subcommand(1);

  RawOptions raw;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--p", raw.p, "prime modulus");
    sub->add_option("--n", raw.n, "number of qupit pairs");
    sub->add_option("--seed", raw.seed, "master seed");
    sub->add_option("--out", raw.out, "output path");
    sub->add_option("--config", raw.config, "key=value config file (flags override)");
  };

  auto* run = app.add_subcommand("run", "run recovery trials and emit a JSON result document");
  add_common(run);
  run->add_option("--case", raw.case_name, "planted subgroup class: abelian | normal");
  run->add_option("--trials", raw.trials, "number of independent trials");
  run->add_option("--backend", raw.backend, "dense | structured | analytic");
  run->add_option("--subgroup", raw.subgroup, "pin the planted subgroup (literal p,n;gen=x|y|z;...)");

  auto* verify = app.add_subcommand("verify", "run the invariant-verification suite");
  add_common(verify);
  verify->add_flag("--hook-permute-wires", raw.hook_permute_wires,
                   "negative control: build the circuit with permuted wires");

  auto* dump = app.add_subcommand("dump-circuit", "print the QFT circuit gate list");
  add_common(dump);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const ExperimentConfig cfg = merge_options(raw);
    if (run->parsed()) {
      cfg.validate();
      return cmd_run(cfg);
    }
    try {
      whg::GroupParams check(cfg.p, cfg.n);
    } catch (const whg::Error& e) {
      throw whg::ConfigInvalid(e.what());
    }
    if (verify->parsed()) return cmd_verify(cfg);
    return cmd_dump_circuit(cfg);
  } catch (const whg::ConfigInvalid& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const whg::BackendCapExceeded& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const whg::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
