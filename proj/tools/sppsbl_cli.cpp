// sppsbl command-line front end. Talks to the library only through sppsbl.h.

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sppsbl/sppsbl.h"

namespace {

// Exit codes: 0 ok, 1 config or usage error, 2 I/O error, 3 numerical failure.
int exit_code(sppsbl_status status) {
  switch (status) {
    case SPPSBL_OK: return 0;
    case SPPSBL_ERR_IO: return 2;
    case SPPSBL_ERR_CONFIG:
    case SPPSBL_ERR_INVALID_ARGUMENT: return 1;
    default: return 3;
  }
}

int report(sppsbl_status status) {
  if (status != SPPSBL_OK) {
    std::cerr << "error: " << sppsbl_status_string(status) << ": " << sppsbl_last_error() << "\n";
  }
  return exit_code(status);
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::optional<std::uint64_t> parse_u64(const std::string& text) {
  if (text.empty() || text[0] == '-') return std::nullopt;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used, 0);
    if (used != text.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

struct Globals {
  std::string config;
  std::string seed_text;
  std::string out;
  int trials = 0;
  unsigned threads = 0;
  bool no_timing = false;
};

// --seed, then SPPSBL_SEED. Returns false on a malformed value.
bool resolve_seed(const Globals& g, std::optional<std::uint64_t>& seed) {
  if (!g.seed_text.empty()) {
    seed = parse_u64(g.seed_text);
    if (!seed) {
      std::cerr << "error: --seed expects an unsigned 64-bit integer, got '" << g.seed_text << "'\n";
      return false;
    }
    return true;
  }
  if (const char* env = std::getenv("SPPSBL_SEED"); env && *env) {
    seed = parse_u64(env);
    if (!seed) {
      std::cerr << "error: SPPSBL_SEED expects an unsigned 64-bit integer, got '" << env << "'\n";
      return false;
    }
  }
  return true;
}

int load_config(const Globals& g, std::string& text) {
  if (g.config.empty()) {
    std::cerr << "error: --config is required\n";
    return 1;
  }
  auto content = read_file(g.config);
  if (!content) {
    std::cerr << "error: cannot read config '" << g.config << "'\n";
    return 2;
  }
  text = std::move(*content);
  return 0;
}

int run_bench(const Globals& g, bool phase) {
  std::string text;
  if (int rc = load_config(g, text)) return rc;
  std::optional<std::uint64_t> seed;
  if (!resolve_seed(g, seed)) return 1;
  if (g.trials < 0) {
    std::cerr << "error: --trials must be positive\n";
    return 1;
  }
  sppsbl_run_options opts{};
  opts.threads = g.threads;
  opts.trials = g.trials;
  opts.has_seed = seed ? 1 : 0;
  opts.seed = seed.value_or(0);
  opts.out_dir = g.out.empty() ? nullptr : g.out.c_str();
  opts.timing = g.no_timing ? -1 : 0;
  opts.source = g.config.c_str();
  const sppsbl_status st = phase ? sppsbl_run_phase_grid(text.c_str(), &opts)
                                 : sppsbl_run_experiment(text.c_str(), &opts);
  return report(st);
}

struct GenerateArgs {
  std::string family = "heteroscedastic";
  long n = 0;
  long m = 0;
  double ratio = 0.0;
  std::string snr;
  std::size_t count = 1;
  long k = 0;
  long blocks = 0;
  double p = 0.0;
  double p10 = 0.0;
};

int run_generate(const Globals& g, const GenerateArgs& a) {
  std::string text;
  std::uint64_t seed = 0;
  if (!g.config.empty()) {
    if (int rc = load_config(g, text)) return rc;
    // master_seed of an experiment config is the fallback seed.
    try {
      const auto j = nlohmann::json::parse(text, nullptr, true, true);
      if (j.is_object() && j.contains("master_seed") && j["master_seed"].is_number_unsigned()) {
        seed = j["master_seed"].get<std::uint64_t>();
      }
    } catch (const std::exception&) {
      // Syntax errors are reported with positions by the library below.
    }
  } else {
    nlohmann::json j;
    j["family"] = a.family;
    if (a.n > 0) j["n"] = a.n;
    if (a.m > 0) j["m"] = a.m;
    if (a.ratio > 0.0) j["measurement_ratio"] = a.ratio;
    if (!a.snr.empty()) {
      try {
        j["snr_db"] = std::stod(a.snr);
      } catch (const std::exception&) {
        std::cerr << "error: --snr expects a number or inf\n";
        return 1;
      }
      if (a.snr == "inf" || a.snr == "+inf") j["snr_db"] = "inf";
    }
    nlohmann::json params = nlohmann::json::object();
    if (a.k > 0) params["k"] = a.k;
    if (a.blocks > 0) params["n_blocks"] = a.blocks;
    if (a.p > 0.0) params["p"] = a.p;
    if (a.p10 > 0.0) params["p10"] = a.p10;
    if (!params.empty()) j["params"] = params;
    text = j.dump();
  }
  std::optional<std::uint64_t> override_seed;
  if (!resolve_seed(g, override_seed)) return 1;
  if (override_seed) seed = *override_seed;
  const std::string out = g.out.empty() ? "instances" : g.out;
  const sppsbl_status st = sppsbl_generate_instances(text.c_str(), seed, a.count, out.c_str());
  if (st == SPPSBL_OK) std::cout << "wrote " << a.count << " instance(s) to " << out << "\n";
  return report(st);
}

struct SolveArgs {
  std::string instance;
  std::string scheme = "spp";
  double beta = 1.0;
  int max_iter = 500;
  double tol = 1e-6;
  std::string root_method = "bracketed";
  double tau = 0.01;
};

int run_solve(const Globals& g, const SolveArgs& a) {
  sppsbl_problem* problem = nullptr;
  sppsbl_status st = sppsbl_problem_load(a.instance.c_str(), &problem);
  if (st != SPPSBL_OK) return report(st);
  sppsbl_config* cfg = nullptr;
  sppsbl_result* result = nullptr;
  int rc = 0;
  do {
    if ((st = sppsbl_config_create(&cfg)) != SPPSBL_OK) break;
    if ((st = sppsbl_config_set_scheme(cfg, a.scheme.c_str(), a.beta)) != SPPSBL_OK) break;
    if ((st = sppsbl_config_set_iterations(cfg, a.max_iter, a.tol)) != SPPSBL_OK) break;
    if ((st = sppsbl_config_set_root_method(cfg, a.root_method.c_str())) != SPPSBL_OK) break;
    if ((st = sppsbl_solve(problem, cfg, &result)) != SPPSBL_OK) break;

    const std::size_t n = sppsbl_result_n(result);
    std::vector<double> x_hat(n);
    if ((st = sppsbl_result_copy_x_hat(result, x_hat.data(), n)) != SPPSBL_OK) break;
    nlohmann::json out;
    out["iterations"] = sppsbl_result_iterations(result);
    out["converged"] = sppsbl_result_converged(result) != 0;
    out["gamma"] = sppsbl_result_gamma(result);
    std::cout << "iterations " << sppsbl_result_iterations(result) << "\n";
    std::cout << "converged " << (sppsbl_result_converged(result) ? "yes" : "no") << "\n";
    if (sppsbl_problem_has_truth(problem)) {
      sppsbl_metrics m{};
      if ((st = sppsbl_result_metrics(result, problem, a.tau, &m)) != SPPSBL_OK) break;
      std::cout.precision(6);
      std::cout << "nmse " << std::scientific << m.nmse << "\n" << std::defaultfloat;
      std::cout << "corr " << m.corr << "\n";
      std::cout << "srr " << m.srr << "\n";
      std::cout << "success " << (m.success ? "yes" : "no") << "\n";
      out["metrics"] = {{"nmse", m.nmse}, {"corr", m.corr}, {"srr", m.srr}, {"success", m.success != 0}};
    }
    out["x_hat"] = x_hat;
    if (!g.out.empty()) {
      std::ofstream f(g.out, std::ios::binary | std::ios::trunc);
      f << out.dump() << "\n";
      if (!f) {
        std::cerr << "error: cannot write '" << g.out << "'\n";
        rc = 2;
      }
    }
  } while (false);
  if (st != SPPSBL_OK) rc = report(st);
  sppsbl_result_destroy(result);
  sppsbl_config_destroy(cfg);
  sppsbl_problem_destroy(problem);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Space-power-prior sparse Bayesian learning: solver and benchmark runner"};
  app.set_version_flag("--version", std::string(sppsbl_version()));
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "Experiment or generator config file (JSON)");
  app.add_option("--seed", g.seed_text, "Master seed (falls back to SPPSBL_SEED, then the config)");
  app.add_option("--out", g.out, "Output directory (generate, bench, phase) or result file (solve)");
  app.add_option("--trials", g.trials, "Trials per grid cell, overriding the config")->check(CLI::PositiveNumber);
  app.add_option("--threads", g.threads, "Worker threads for trials (default: all cores)");
  app.add_flag("--no-timing", g.no_timing, "Write runtime_ms as 0 so outputs are byte-stable");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write seeded instance files");
  generate->add_option("--family", gen.family, "heteroscedastic, multi_pattern or chain")
      ->check(CLI::IsMember({"heteroscedastic", "multi_pattern", "chain"}));
  generate->add_option("--n", gen.n, "Signal length");
  generate->add_option("--m", gen.m, "Measurements");
  generate->add_option("--ratio", gen.ratio, "Measurement ratio m/n (instead of --m)");
  generate->add_option("--snr", gen.snr, "SNR in dB, or inf for noiseless");
  generate->add_option("--count", gen.count, "Number of instances")->check(CLI::PositiveNumber);
  generate->add_option("--k", gen.k, "Nonzeros (heteroscedastic)");
  generate->add_option("--blocks", gen.blocks, "Number of blocks (heteroscedastic)");
  generate->add_option("--p", gen.p, "Pr(s_i = 0) (chain)");
  generate->add_option("--p10", gen.p10, "Pr(s_{i+1} = 1 | s_i = 0) (chain)");

  SolveArgs sol;
  auto* solve = app.add_subcommand("solve", "Recover one instance file and print metrics");
  solve->add_option("instance", sol.instance, "Instance JSON file")->required();
  solve->add_option("--scheme", sol.scheme, "spp, pc_fixed or none");
  solve->add_option("--beta", sol.beta, "Coupling weight for pc_fixed");
  solve->add_option("--max-iter", sol.max_iter, "Iteration limit")->check(CLI::PositiveNumber);
  solve->add_option("--tol", sol.tol, "Relative change of mu that stops the loop");
  solve->add_option("--root-method", sol.root_method, "bracketed or cardano");
  solve->add_option("--tau", sol.tau, "Relative support threshold for SRR");

  auto* bench = app.add_subcommand("bench", "Run an experiment config");
  auto* phase = app.add_subcommand("phase", "Run a 2D snr x ratio grid");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  if (generate->parsed()) return run_generate(g, gen);
  if (solve->parsed()) return run_solve(g, sol);
  if (bench->parsed()) return run_bench(g, false);
  if (phase->parsed()) return run_bench(g, true);
  std::cerr << app.help();
  return 1;
}
