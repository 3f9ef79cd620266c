#include "sppsbl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "json_fields.hpp"
#include "sppsbl/errors.hpp"
#include "sppsbl/instance_io.hpp"
#include "sppsbl/version.hpp"

namespace sppsbl {

using detail::Json;

namespace {

void parse_hyperpriors(const Json& j, const std::string& path, HyperPriors& h) {
  using namespace detail;
  require_object(j, path);
  check_keys(j, path, {"a", "b", "c", "d", "g", "h"});
  h.a = get_double(j, "a", path, h.a);
  h.b = get_double(j, "b", path, h.b);
  h.c = get_double(j, "c", path, h.c);
  h.d = get_double(j, "d", path, h.d);
  h.g = get_double(j, "g", path, h.g);
  h.h = get_double(j, "h", path, h.h);
}

// Solver fields shared by the "solver" defaults block and each algorithm.
void parse_solver_fields(const Json& j, const std::string& path, SolverConfig& s) {
  using namespace detail;
  s.max_iterations = static_cast<int>(get_int(j, "max_iterations", path, s.max_iterations));
  s.rel_tol = get_double(j, "rel_tol", path, s.rel_tol);
  s.alpha_cap = get_double(j, "alpha_cap", path, s.alpha_cap);
  s.init_alpha = get_double(j, "init_alpha", path, s.init_alpha);
  s.init_beta = get_double(j, "init_beta", path, s.init_beta);
  s.init_gamma = get_double(j, "init_gamma", path, s.init_gamma);
  if (j.contains("root_method")) {
    const std::string rp = join_path(path, "root_method");
    try {
      s.root_method = parse_root_method(as_string(j["root_method"], rp));
    } catch (const ConfigError& e) {
      if (std::string(e.what()).rfind("field", 0) == 0) throw;
      field_error(rp, e.what());
    }
  }
  if (j.contains("hyperpriors")) parse_hyperpriors(j["hyperpriors"], join_path(path, "hyperpriors"), s.hyperpriors);
}

#define SOLVER_KEYS \
  "max_iterations", "rel_tol", "alpha_cap", "init_alpha", "init_beta", "init_gamma", "root_method", "hyperpriors"

AlgorithmSpec parse_algorithm(const Json& j, const std::string& path, const SolverConfig& defaults) {
  using namespace detail;
  require_object(j, path);
  check_keys(j, path, {"label", "scheme", "beta", SOLVER_KEYS});
  AlgorithmSpec out;
  out.solver = defaults;
  if (!j.contains("scheme")) field_error(join_path(path, "scheme"), "missing");
  const std::string sp = join_path(path, "scheme");
  CouplingScheme::Kind kind;
  try {
    kind = parse_scheme_kind(as_string(j["scheme"], sp));
  } catch (const ConfigError& e) {
    if (std::string(e.what()).rfind("field", 0) == 0) throw;
    field_error(sp, e.what());
  }
  switch (kind) {
    case CouplingScheme::Kind::kSpp:
      out.solver.scheme = CouplingScheme::spp();
      break;
    case CouplingScheme::Kind::kNone:
      out.solver.scheme = CouplingScheme::none();
      break;
    case CouplingScheme::Kind::kPcFixed:
      out.solver.scheme = CouplingScheme::pc_fixed(get_double(j, "beta", path, 1.0));
      break;
  }
  if (kind != CouplingScheme::Kind::kPcFixed && j.contains("beta")) {
    field_error(join_path(path, "beta"), "only pc_fixed takes a fixed beta");
  }
  parse_solver_fields(j, path, out.solver);
  out.label = get_string(j, "label", path, out.solver.scheme.name());
  if (out.label.empty()) field_error(join_path(path, "label"), "must not be empty");
  try {
    out.solver.validate();
  } catch (const Error& e) {
    field_error(path, e.what());
  }
  return out;
}

std::vector<double> parse_number_list(const Json& j, const std::string& path) {
  if (!j.is_array()) detail::field_error(path, "expected an array, got " + detail::describe(j));
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(detail::as_double(j[i], path + "[" + std::to_string(i) + "]"));
  }
  if (out.empty()) detail::field_error(path, "must not be empty");
  return out;
}

Json hyper_json(const HyperPriors& h) {
  return Json{{"a", h.a}, {"b", h.b}, {"c", h.c}, {"d", h.d}, {"g", h.g}, {"h", h.h}};
}

Json algorithm_json(const AlgorithmSpec& a) {
  Json j;
  j["label"] = a.label;
  switch (a.solver.scheme.kind) {
    case CouplingScheme::Kind::kSpp: j["scheme"] = "spp"; break;
    case CouplingScheme::Kind::kNone: j["scheme"] = "none"; break;
    case CouplingScheme::Kind::kPcFixed:
      j["scheme"] = "pc_fixed";
      j["beta"] = a.solver.scheme.fixed_beta;
      break;
  }
  j["max_iterations"] = a.solver.max_iterations;
  j["rel_tol"] = a.solver.rel_tol;
  j["alpha_cap"] = a.solver.alpha_cap;
  j["init_alpha"] = a.solver.init_alpha;
  j["init_beta"] = a.solver.init_beta;
  j["init_gamma"] = a.solver.init_gamma;
  j["root_method"] = to_string(a.solver.root_method);
  j["hyperpriors"] = hyper_json(a.solver.hyperpriors);
  return j;
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

// Resolved config without the output location, so results written to
// different directories stay byte-identical.
Json resolved_json(const ExperimentConfig& config) {
  Json j = Json::parse(experiment_config_to_json(config));
  j.erase("output_dir");
  return j;
}

std::string comment_block(const ExperimentConfig& config) {
  std::ostringstream os;
  os << "# sppsbl " << kVersion << "\n";
  os << "# config:\n";
  const std::string echo = config.source_text.empty() ? experiment_config_to_json(config) : config.source_text;
  std::istringstream lines(echo);
  std::string line;
  while (std::getline(lines, line)) os << "# " << line << "\n";
  os << "# resolved: " << resolved_json(config).dump() << "\n";
  return os.str();
}

bool has_sweep_columns(const ExperimentConfig& config) { return !config.sweep.empty(); }

}  // namespace

void ExperimentConfig::validate() const {
  if (name.empty()) throw ConfigError("field 'name': must not be empty");
  if (algorithms.empty()) throw ConfigError("field 'algorithms': at least one algorithm is required");
  if (n_trials < 1) throw ConfigError("field 'n_trials': must be at least 1");
  if (!(support_tau > 0.0 && support_tau < 1.0)) throw ConfigError("field 'support_tau': must lie in (0, 1)");
  for (std::size_t i = 0; i < algorithms.size(); ++i) {
    for (std::size_t k = 0; k < i; ++k) {
      if (algorithms[k].label == algorithms[i].label) {
        throw ConfigError("field 'algorithms[" + std::to_string(i) + "].label': duplicate label '" +
                          algorithms[i].label + "'");
      }
    }
    algorithms[i].solver.validate();
  }
  for (double r : sweep.measurement_ratio) {
    if (!(r > 0.0 && r <= 1.0)) throw ConfigError("field 'sweep.measurement_ratio': ratios must lie in (0, 1]");
    if (std::lround(r * static_cast<double>(generator.n)) < 1) {
      throw ConfigError("field 'sweep.measurement_ratio': ratio gives fewer than one measurement");
    }
  }
  for (double s : sweep.snr_db) {
    if (std::isnan(s)) throw ConfigError("field 'sweep.snr_db': NaN");
  }
  generator.validate();
}

ExperimentConfig parse_experiment_config(const std::string& text, const std::string& source) {
  using namespace detail;
  const Json j = parse_json_text(text, source);
  require_object(j, "");
  check_keys(j, "", {"name", "generator", "algorithms", "solver", "n_trials", "master_seed", "sweep",
                     "output_dir", "support_tau", "record_timing"});
  ExperimentConfig cfg;
  cfg.source_text = text;
  cfg.name = get_string(j, "name", "", cfg.name);
  if (!j.contains("generator")) field_error("generator", "missing");
  cfg.generator = generator_spec_from(j["generator"], "generator", GeneratorSpec{});
  cfg.n_trials = static_cast<int>(get_int(j, "n_trials", "", cfg.n_trials));
  cfg.master_seed = get_or(j, "master_seed", "", cfg.master_seed, as_u64);
  cfg.output_dir = get_string(j, "output_dir", "", cfg.output_dir);
  cfg.support_tau = get_double(j, "support_tau", "", cfg.support_tau);
  cfg.record_timing = get_bool(j, "record_timing", "", cfg.record_timing);

  SolverConfig defaults;
  if (j.contains("solver")) {
    require_object(j["solver"], "solver");
    check_keys(j["solver"], "solver", {SOLVER_KEYS});
    parse_solver_fields(j["solver"], "solver", defaults);
  }
  if (!j.contains("algorithms")) field_error("algorithms", "missing");
  const Json& algs = j["algorithms"];
  if (!algs.is_array()) field_error("algorithms", "expected an array, got " + describe(algs));
  for (std::size_t i = 0; i < algs.size(); ++i) {
    cfg.algorithms.push_back(parse_algorithm(algs[i], "algorithms[" + std::to_string(i) + "]", defaults));
  }
  if (j.contains("sweep")) {
    const Json& s = j["sweep"];
    require_object(s, "sweep");
    check_keys(s, "sweep", {"snr_db", "measurement_ratio"});
    if (s.contains("snr_db")) cfg.sweep.snr_db = parse_number_list(s["snr_db"], "sweep.snr_db");
    if (s.contains("measurement_ratio")) {
      cfg.sweep.measurement_ratio = parse_number_list(s["measurement_ratio"], "sweep.measurement_ratio");
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return parse_experiment_config(read_text_file(path), path);
}

std::string experiment_config_to_json(const ExperimentConfig& config) {
  Json j;
  j["name"] = config.name;
  j["generator"] = Json::parse(generator_spec_to_json(config.generator));
  j["generator"].erase("seed");
  Json algs = Json::array();
  for (const auto& a : config.algorithms) algs.push_back(algorithm_json(a));
  j["algorithms"] = algs;
  j["n_trials"] = config.n_trials;
  j["master_seed"] = config.master_seed;
  if (!config.sweep.empty()) {
    Json s = Json::object();
    if (!config.sweep.snr_db.empty()) {
      Json list = Json::array();
      for (double v : config.sweep.snr_db) list.push_back(std::isinf(v) ? Json(v > 0 ? "inf" : "-inf") : Json(v));
      s["snr_db"] = list;
    }
    if (!config.sweep.measurement_ratio.empty()) s["measurement_ratio"] = config.sweep.measurement_ratio;
    j["sweep"] = s;
  }
  if (!config.output_dir.empty()) j["output_dir"] = config.output_dir;
  j["support_tau"] = config.support_tau;
  j["record_timing"] = config.record_timing;
  return j.dump(2);
}

std::vector<GridPoint> grid_points(const ExperimentConfig& config) {
  const std::vector<double> snrs =
      config.sweep.snr_db.empty() ? std::vector<double>{config.generator.snr_db} : config.sweep.snr_db;
  std::vector<GridPoint> out;
  const double n = static_cast<double>(config.generator.n);
  for (double snr : snrs) {
    if (config.sweep.measurement_ratio.empty()) {
      GridPoint p;
      p.index = out.size();
      p.snr_db = snr;
      p.generator = config.generator;
      p.generator.snr_db = snr;
      p.generator.seed = 0;
      p.measurement_ratio = static_cast<double>(p.generator.m) / n;
      out.push_back(p);
      continue;
    }
    for (double ratio : config.sweep.measurement_ratio) {
      GridPoint p;
      p.index = out.size();
      p.snr_db = snr;
      p.measurement_ratio = ratio;
      p.generator = config.generator;
      p.generator.snr_db = snr;
      p.generator.m = static_cast<Index>(std::lround(ratio * n));
      p.generator.seed = 0;
      out.push_back(p);
    }
  }
  return out;
}

std::vector<TrialRow> run_trial(const ExperimentConfig& config, const GridPoint& cell, std::size_t trial) {
  GeneratorSpec spec = cell.generator;
  spec.seed = derive_seed(config.master_seed, cell.index, trial);

  std::vector<TrialRow> rows(config.algorithms.size());
  for (std::size_t a = 0; a < rows.size(); ++a) {
    rows[a].cell = cell.index;
    rows[a].trial = trial;
    rows[a].algorithm = a;
    rows[a].record.algorithm = config.algorithms[a].label;
    rows[a].record.seed = spec.seed;
  }
  auto mark_failed = [](TrialRow& row, const std::string& why) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.record.failed = true;
    row.record.success = false;
    row.record.nmse = row.record.corr = row.record.srr = nan;
    row.record.runtime_ms = 0.0;
    row.error = why;
  };

  GeneratedInstance inst;
  try {
    inst = generate(spec);
  } catch (const std::exception& e) {
    for (auto& row : rows) mark_failed(row, std::string("generation: ") + e.what());
    return rows;
  }
  const Vector& x_true = *inst.problem.x_true;

  for (std::size_t a = 0; a < rows.size(); ++a) {
    TrialRow& row = rows[a];
    try {
      const auto t0 = std::chrono::steady_clock::now();
      SolveResult res = run_em(inst.problem, config.algorithms[a].solver);
      const auto t1 = std::chrono::steady_clock::now();
      row.record.iterations = res.iterations;
      row.record.runtime_ms =
          config.record_timing ? std::chrono::duration<double, std::milli>(t1 - t0).count() : 0.0;
      row.record.nmse = nmse(res.x_hat, x_true);
      row.record.corr = correlation(res.x_hat, x_true);
      row.record.srr = srr(extract_support(res.x_hat, config.support_tau), *inst.problem.true_support);
      row.record.success = success(row.record.nmse);
      row.coupling = res.coupling;
      if (config.algorithms[a].solver.scheme.learns_beta() && res.state.beta.size() > 0) {
        row.beta_mean = res.state.beta.values().mean();
      }
    } catch (const std::exception& e) {
      mark_failed(row, e.what());
    }
  }
  return rows;
}

ExperimentResult run_trials(const ExperimentConfig& config, unsigned threads) {
  config.validate();
  ExperimentResult result;
  result.cells = grid_points(config);
  const std::size_t n_trials = static_cast<std::size_t>(config.n_trials);
  const std::size_t units = result.cells.size() * n_trials;
  std::vector<std::vector<TrialRow>> slots(units);

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(units, 1)));

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr fatal;
  auto worker = [&] {
    for (;;) {
      const std::size_t u = next.fetch_add(1);
      if (u >= units) return;
      try {
        slots[u] = run_trial(config, result.cells[u / n_trials], u % n_trials);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!fatal) fatal = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (fatal) std::rethrow_exception(fatal);

  for (auto& s : slots) {
    for (auto& row : s) result.rows.push_back(std::move(row));
  }
  std::stable_sort(result.rows.begin(), result.rows.end(), [](const TrialRow& a, const TrialRow& b) {
    if (a.cell != b.cell) return a.cell < b.cell;
    if (a.record.seed != b.record.seed) return a.record.seed < b.record.seed;
    return a.algorithm < b.algorithm;
  });
  return result;
}

std::string trials_csv(const ExperimentConfig& config, const ExperimentResult& result) {
  const bool cells = has_sweep_columns(config);
  std::ostringstream os;
  os << comment_block(config);
  os << "algorithm,seed,nmse,corr,srr,iterations,runtime_ms,success";
  if (cells) os << ",snr_db,ratio";
  os << "\n";
  for (const auto& row : result.rows) {
    const auto& r = row.record;
    os << r.algorithm << ',' << r.seed << ',' << format_double(r.nmse) << ',' << format_double(r.corr) << ','
       << format_double(r.srr) << ',' << r.iterations << ',' << format_double(r.runtime_ms) << ','
       << (r.success ? 1 : 0);
    if (cells) {
      const auto& c = result.cells.at(row.cell);
      os << ',' << format_double(c.snr_db) << ',' << format_double(c.measurement_ratio);
    }
    os << "\n";
  }
  return os.str();
}

std::string summary_json(const ExperimentConfig& config, const ExperimentResult& result) {
  Json j;
  j["name"] = config.name;
  j["version"] = kVersion;
  j["master_seed"] = config.master_seed;
  j["n_trials"] = config.n_trials;
  j["support_tau"] = config.support_tau;
  j["config"] = config.source_text.empty() ? experiment_config_to_json(config) : config.source_text;
  j["resolved_config"] = resolved_json(config);

  Json rows = Json::array();
  Json algs = Json::array();
  for (std::size_t a = 0; a < config.algorithms.size(); ++a) {
    std::size_t failed_total = 0;
    CouplingStats coupling;
    std::vector<double> betas;
    for (const auto& cell : result.cells) {
      std::vector<TrialRecord> recs;
      std::size_t failed = 0;
      for (const auto& row : result.rows) {
        if (row.algorithm != a || row.cell != cell.index) continue;
        recs.push_back(row.record);
        if (row.record.failed) {
          ++failed;
        } else {
          coupling.merge(row.coupling);
          if (config.algorithms[a].solver.scheme.learns_beta()) betas.push_back(row.beta_mean);
        }
      }
      failed_total += failed;
      const bool any_ok = failed < recs.size();
      Summary s;
      if (any_ok) s = aggregate(recs);
      auto add = [&](const char* metric, const MetricSummary& m) {
        Json r;
        r["algorithm"] = config.algorithms[a].label;
        r["metric"] = metric;
        r["mean"] = any_ok ? finite_or_null(m.mean) : Json(nullptr);
        r["std"] = any_ok ? finite_or_null(m.std) : Json(nullptr);
        r["n"] = s.n;
        r["success_rate"] = any_ok ? Json(s.success_rate) : Json(nullptr);
        r["failed"] = failed;
        if (has_sweep_columns(config)) {
          r["snr_db"] = finite_or_null(cell.snr_db);
          r["ratio"] = cell.measurement_ratio;
        }
        rows.push_back(r);
      };
      add("nmse", s.nmse);
      add("corr", s.corr);
      add("srr", s.srr);
      add("iterations", s.iterations);
      add("runtime_ms", s.runtime_ms);
    }
    Json alg;
    alg["algorithm"] = config.algorithms[a].label;
    alg["scheme"] = config.algorithms[a].solver.scheme.name();
    alg["failed_trials"] = failed_total;
    alg["coupling_solves"] = coupling.solves;
    alg["coupling_bound_violations"] = coupling.bound_violations;
    alg["coupling_max_scaled_residual"] = coupling.max_scaled_residual;
    if (!betas.empty()) {
      const auto [lo, hi] = std::minmax_element(betas.begin(), betas.end());
      const MetricSummary bm = mean_std(betas);
      alg["beta_mean"] = Json{{"mean", bm.mean}, {"std", bm.std}, {"min", *lo}, {"max", *hi}};
    }
    algs.push_back(alg);
  }
  j["summary"] = rows;
  j["algorithms"] = algs;
  return j.dump(2) + "\n";
}

std::vector<GridCell> phase_grid(const ExperimentResult& result, std::size_t algorithm) {
  std::vector<GridCell> out;
  for (const auto& cell : result.cells) {
    GridCell g;
    g.snr_db = cell.snr_db;
    g.measurement_ratio = cell.measurement_ratio;
    double sum = 0.0;
    for (const auto& row : result.rows) {
      if (row.cell != cell.index || row.algorithm != algorithm || row.record.failed) continue;
      sum += std::sqrt(row.record.nmse);
      ++g.n_trials;
    }
    g.mean_rnmse = g.n_trials > 0 ? sum / g.n_trials : std::numeric_limits<double>::quiet_NaN();
    out.push_back(g);
  }
  return out;
}

std::string grid_csv(const ExperimentConfig& config, const std::vector<GridCell>& grid) {
  std::ostringstream os;
  os << comment_block(config);
  os << "snr_db,ratio,mean_rnmse,n_trials\n";
  for (const auto& g : grid) {
    os << format_double(g.snr_db) << ',' << format_double(g.measurement_ratio) << ','
       << format_double(g.mean_rnmse) << ',' << g.n_trials << "\n";
  }
  return os.str();
}

std::string output_directory(const ExperimentConfig& config) {
  return config.output_dir.empty() ? config.name : config.output_dir;
}

namespace {

std::filesystem::path prepare_dir(const ExperimentConfig& config) {
  const std::filesystem::path dir(output_directory(config));
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

void write_common(const ExperimentConfig& config, const ExperimentResult& result,
                  const std::filesystem::path& dir) {
  write_text_file((dir / "trials.csv").string(), trials_csv(config, result));
  write_text_file((dir / "summary.json").string(), summary_json(config, result));
  Json echo;
  echo["version"] = kVersion;
  echo["config"] = config.source_text.empty() ? experiment_config_to_json(config) : config.source_text;
  echo["resolved_config"] = Json::parse(experiment_config_to_json(config));
  write_text_file((dir / "config_echo.json").string(), echo.dump(2) + "\n");
}

std::string file_label(const std::string& label) {
  std::string out;
  for (char ch : label) {
    const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.';
    out.push_back(ok ? ch : '_');
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned threads) {
  const auto dir = prepare_dir(config);
  ExperimentResult result = run_trials(config, threads);
  write_common(config, result, dir);
  return result;
}

ExperimentResult run_phase_grid(const ExperimentConfig& config, unsigned threads) {
  if (config.sweep.snr_db.empty() || config.sweep.measurement_ratio.empty()) {
    throw ConfigError("field 'sweep': a phase grid needs both snr_db and measurement_ratio lists");
  }
  const auto dir = prepare_dir(config);
  ExperimentResult result = run_trials(config, threads);
  write_common(config, result, dir);
  for (std::size_t a = 0; a < config.algorithms.size(); ++a) {
    const std::string name = a == 0 ? "grid.csv" : "grid_" + file_label(config.algorithms[a].label) + ".csv";
    write_text_file((dir / name).string(), grid_csv(config, phase_grid(result, a)));
  }
  return result;
}

}  // namespace sppsbl
