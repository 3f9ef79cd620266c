#include "sppsbl/sppsbl.h"

#include <cmath>
#include <filesystem>
#include <limits>
#include <memory>
#include <new>
#include <optional>
#include <string>

#include "json_fields.hpp"
#include "sppsbl/errors.hpp"
#include "sppsbl/experiment.hpp"
#include "sppsbl/instance_io.hpp"
#include "sppsbl/metrics.hpp"
#include "sppsbl/solver.hpp"
#include "sppsbl/version.hpp"

struct sppsbl_problem {
  sppsbl::SensingProblem problem;
  std::optional<sppsbl::GeneratorSpec> spec;
};

struct sppsbl_config {
  sppsbl::SolverConfig config;
};

struct sppsbl_result {
  sppsbl::SolveResult result;
};

namespace {

thread_local std::string g_last_error;

sppsbl_status fail(sppsbl_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Maps the library exception hierarchy onto status codes.
template <class F>
sppsbl_status guarded(F&& body) {
  try {
    body();
    return SPPSBL_OK;
  } catch (const sppsbl::ConfigError& e) {
    return fail(SPPSBL_ERR_CONFIG, e.what());
  } catch (const sppsbl::IoError& e) {
    return fail(SPPSBL_ERR_IO, e.what());
  } catch (const sppsbl::DimensionError& e) {
    return fail(SPPSBL_ERR_DIMENSION, e.what());
  } catch (const sppsbl::DomainError& e) {
    return fail(SPPSBL_ERR_DOMAIN, e.what());
  } catch (const sppsbl::ConditioningError& e) {
    return fail(SPPSBL_ERR_CONDITIONING, e.what());
  } catch (const sppsbl::InvariantViolation& e) {
    return fail(SPPSBL_ERR_INVARIANT, e.what());
  } catch (const sppsbl::GenerationError& e) {
    return fail(SPPSBL_ERR_GENERATION, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SPPSBL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SPPSBL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SPPSBL_ERR_INTERNAL, "unknown error");
  }
}

sppsbl_status null_arg(const char* what) {
  return fail(SPPSBL_ERR_INVALID_ARGUMENT, std::string(what) + " is NULL");
}

sppsbl::GeneratorSpec generator_from_text(const char* text) {
  using sppsbl::detail::Json;
  const Json j = sppsbl::detail::parse_json_text(text, "<generator>");
  if (j.is_object() && j.contains("generator")) {
    return sppsbl::detail::generator_spec_from(j["generator"], "generator", sppsbl::GeneratorSpec{});
  }
  return sppsbl::detail::generator_spec_from(j, "", sppsbl::GeneratorSpec{});
}

sppsbl::ExperimentConfig experiment_from(const char* text, const sppsbl_run_options* options) {
  const std::string source = options && options->source ? options->source : "<config>";
  sppsbl::ExperimentConfig cfg = sppsbl::parse_experiment_config(text, source);
  if (options) {
    if (options->trials < 0) throw sppsbl::ConfigError("trial count must be positive");
    if (options->trials > 0) cfg.n_trials = options->trials;
    if (options->has_seed) cfg.master_seed = options->seed;
    if (options->out_dir) cfg.output_dir = options->out_dir;
    if (options->timing > 0) cfg.record_timing = true;
    if (options->timing < 0) cfg.record_timing = false;
  }
  cfg.validate();
  return cfg;
}

sppsbl_status copy_out(const sppsbl::Vector& v, double* out, size_t len, const char* what) {
  if (!out) return null_arg("output buffer");
  if (len != static_cast<size_t>(v.size())) {
    return fail(SPPSBL_ERR_INVALID_ARGUMENT, std::string(what) + ": buffer length " + std::to_string(len) +
                                                 " does not match " + std::to_string(v.size()));
  }
  for (size_t i = 0; i < len; ++i) out[i] = v[static_cast<sppsbl::Index>(i)];
  return SPPSBL_OK;
}

}  // namespace

extern "C" {

const char* sppsbl_version(void) { return sppsbl::kVersion; }

const char* sppsbl_last_error(void) { return g_last_error.c_str(); }

const char* sppsbl_status_string(sppsbl_status status) {
  switch (status) {
    case SPPSBL_OK: return "ok";
    case SPPSBL_ERR_INVALID_ARGUMENT: return "invalid argument";
    case SPPSBL_ERR_CONFIG: return "config error";
    case SPPSBL_ERR_IO: return "i/o error";
    case SPPSBL_ERR_DIMENSION: return "dimension error";
    case SPPSBL_ERR_DOMAIN: return "domain error";
    case SPPSBL_ERR_CONDITIONING: return "numerical conditioning error";
    case SPPSBL_ERR_INVARIANT: return "invariant violation";
    case SPPSBL_ERR_GENERATION: return "generation error";
    case SPPSBL_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

sppsbl_status sppsbl_problem_create(const double* phi, size_t m, size_t n, const double* y,
                                    const double* x_true, sppsbl_problem** out) {
  if (!out) return null_arg("out");
  *out = nullptr;
  if (!phi) return null_arg("phi");
  if (!y) return null_arg("y");
  if (m < 1 || n < 2) return fail(SPPSBL_ERR_DIMENSION, "need m >= 1 and n >= 2");
  return guarded([&] {
    const auto M = static_cast<sppsbl::Index>(m);
    const auto N = static_cast<sppsbl::Index>(n);
    sppsbl::Matrix P(M, N);
    for (sppsbl::Index r = 0; r < M; ++r) {
      for (sppsbl::Index c = 0; c < N; ++c) P(r, c) = phi[r * N + c];
    }
    sppsbl::Vector yv = Eigen::Map<const sppsbl::Vector>(y, M);
    std::optional<sppsbl::Vector> xt;
    if (x_true) xt = Eigen::Map<const sppsbl::Vector>(x_true, N);
    auto handle = std::make_unique<sppsbl_problem>();
    handle->problem = sppsbl::SensingProblem::make(std::move(P), std::move(yv), std::move(xt));
    *out = handle.release();
  });
}

sppsbl_status sppsbl_problem_load(const char* path, sppsbl_problem** out) {
  if (!out) return null_arg("out");
  *out = nullptr;
  if (!path) return null_arg("path");
  return guarded([&] {
    auto file = sppsbl::load_instance(path);
    auto handle = std::make_unique<sppsbl_problem>();
    handle->problem = std::move(file.problem);
    handle->spec = std::move(file.spec);
    *out = handle.release();
  });
}

sppsbl_status sppsbl_problem_save(const sppsbl_problem* problem, const char* path) {
  if (!problem) return null_arg("problem");
  if (!path) return null_arg("path");
  return guarded([&] { sppsbl::save_instance(path, problem->problem, problem->spec); });
}

sppsbl_status sppsbl_problem_generate(const char* generator_json, uint64_t seed, sppsbl_problem** out) {
  if (!out) return null_arg("out");
  *out = nullptr;
  if (!generator_json) return null_arg("generator_json");
  return guarded([&] {
    sppsbl::GeneratorSpec spec = generator_from_text(generator_json);
    spec.seed = seed;
    auto inst = sppsbl::generate(spec);
    auto handle = std::make_unique<sppsbl_problem>();
    handle->problem = std::move(inst.problem);
    handle->spec = inst.spec;
    *out = handle.release();
  });
}

void sppsbl_problem_destroy(sppsbl_problem* problem) { delete problem; }

size_t sppsbl_problem_m(const sppsbl_problem* problem) {
  return problem ? static_cast<size_t>(problem->problem.m()) : 0;
}

size_t sppsbl_problem_n(const sppsbl_problem* problem) {
  return problem ? static_cast<size_t>(problem->problem.n()) : 0;
}

int sppsbl_problem_has_truth(const sppsbl_problem* problem) {
  return problem && problem->problem.x_true ? 1 : 0;
}

sppsbl_status sppsbl_problem_copy_x_true(const sppsbl_problem* problem, double* out, size_t len) {
  if (!problem) return null_arg("problem");
  if (!problem->problem.x_true) return fail(SPPSBL_ERR_INVALID_ARGUMENT, "problem has no ground truth");
  return copy_out(*problem->problem.x_true, out, len, "x_true");
}

sppsbl_status sppsbl_config_create(sppsbl_config** out) {
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] { *out = new sppsbl_config(); });
}

void sppsbl_config_destroy(sppsbl_config* config) { delete config; }

sppsbl_status sppsbl_config_set_scheme(sppsbl_config* config, const char* scheme, double fixed_beta) {
  if (!config) return null_arg("config");
  if (!scheme) return null_arg("scheme");
  sppsbl::CouplingScheme::Kind kind;
  try {
    kind = sppsbl::parse_scheme_kind(scheme);
  } catch (const std::exception& e) {
    return fail(SPPSBL_ERR_INVALID_ARGUMENT, e.what());
  }
  switch (kind) {
    case sppsbl::CouplingScheme::Kind::kSpp:
      config->config.scheme = sppsbl::CouplingScheme::spp();
      break;
    case sppsbl::CouplingScheme::Kind::kNone:
      config->config.scheme = sppsbl::CouplingScheme::none();
      break;
    case sppsbl::CouplingScheme::Kind::kPcFixed:
      if (!(fixed_beta >= 0.0) || !std::isfinite(fixed_beta)) {
        return fail(SPPSBL_ERR_INVALID_ARGUMENT, "fixed coupling weight must be nonnegative");
      }
      config->config.scheme = sppsbl::CouplingScheme::pc_fixed(fixed_beta);
      break;
  }
  return SPPSBL_OK;
}

sppsbl_status sppsbl_config_set_hyperpriors(sppsbl_config* config, double a, double b, double c, double d,
                                            double g, double h) {
  if (!config) return null_arg("config");
  sppsbl::HyperPriors hp{a, b, c, d, g, h};
  try {
    hp.validate();
  } catch (const std::exception& e) {
    return fail(SPPSBL_ERR_INVALID_ARGUMENT, e.what());
  }
  config->config.hyperpriors = hp;
  return SPPSBL_OK;
}

sppsbl_status sppsbl_config_set_iterations(sppsbl_config* config, int max_iterations, double rel_tol) {
  if (!config) return null_arg("config");
  if (max_iterations < 1) return fail(SPPSBL_ERR_INVALID_ARGUMENT, "max_iterations must be positive");
  if (!(rel_tol > 0.0)) return fail(SPPSBL_ERR_INVALID_ARGUMENT, "rel_tol must be positive");
  config->config.max_iterations = max_iterations;
  config->config.rel_tol = rel_tol;
  return SPPSBL_OK;
}

sppsbl_status sppsbl_config_set_init(sppsbl_config* config, double alpha, double beta, double gamma) {
  if (!config) return null_arg("config");
  sppsbl::SolverConfig next = config->config;
  next.init_alpha = alpha;
  next.init_beta = beta;
  next.init_gamma = gamma;
  try {
    next.validate();
  } catch (const std::exception& e) {
    return fail(SPPSBL_ERR_INVALID_ARGUMENT, e.what());
  }
  config->config = next;
  return SPPSBL_OK;
}

sppsbl_status sppsbl_config_set_alpha_cap(sppsbl_config* config, double cap) {
  if (!config) return null_arg("config");
  sppsbl::SolverConfig next = config->config;
  next.alpha_cap = cap;
  try {
    next.validate();
  } catch (const std::exception& e) {
    return fail(SPPSBL_ERR_INVALID_ARGUMENT, e.what());
  }
  config->config = next;
  return SPPSBL_OK;
}

sppsbl_status sppsbl_config_set_root_method(sppsbl_config* config, const char* method) {
  if (!config) return null_arg("config");
  if (!method) return null_arg("method");
  try {
    config->config.root_method = sppsbl::parse_root_method(method);
  } catch (const std::exception& e) {
    return fail(SPPSBL_ERR_INVALID_ARGUMENT, e.what());
  }
  return SPPSBL_OK;
}

sppsbl_status sppsbl_solve(const sppsbl_problem* problem, const sppsbl_config* config, sppsbl_result** out) {
  if (!out) return null_arg("out");
  *out = nullptr;
  if (!problem) return null_arg("problem");
  const sppsbl::SolverConfig defaults;
  const sppsbl::SolverConfig& cfg = config ? config->config : defaults;
  return guarded([&] {
    auto handle = std::make_unique<sppsbl_result>();
    handle->result = sppsbl::run_em(problem->problem, cfg);
    *out = handle.release();
  });
}

void sppsbl_result_destroy(sppsbl_result* result) { delete result; }

size_t sppsbl_result_n(const sppsbl_result* result) {
  return result ? static_cast<size_t>(result->result.x_hat.size()) : 0;
}

int sppsbl_result_iterations(const sppsbl_result* result) { return result ? result->result.iterations : 0; }

int sppsbl_result_converged(const sppsbl_result* result) {
  return result && result->result.converged ? 1 : 0;
}

double sppsbl_result_gamma(const sppsbl_result* result) {
  return result ? result->result.state.gamma : std::numeric_limits<double>::quiet_NaN();
}

sppsbl_status sppsbl_result_copy_x_hat(const sppsbl_result* result, double* out, size_t len) {
  if (!result) return null_arg("result");
  return copy_out(result->result.x_hat, out, len, "x_hat");
}

sppsbl_status sppsbl_result_copy_alpha(const sppsbl_result* result, double* out, size_t len) {
  if (!result) return null_arg("result");
  return copy_out(result->result.state.alpha.values(), out, len, "alpha");
}

sppsbl_status sppsbl_result_copy_beta(const sppsbl_result* result, double* out, size_t len) {
  if (!result) return null_arg("result");
  return copy_out(result->result.state.beta.values(), out, len, "beta");
}

sppsbl_status sppsbl_result_metrics(const sppsbl_result* result, const sppsbl_problem* problem, double tau,
                                    sppsbl_metrics* out) {
  if (!result) return null_arg("result");
  if (!problem) return null_arg("problem");
  if (!out) return null_arg("out");
  if (!problem->problem.x_true) return fail(SPPSBL_ERR_INVALID_ARGUMENT, "problem has no ground truth");
  return guarded([&] {
    const auto& x = *problem->problem.x_true;
    const auto& xh = result->result.x_hat;
    const double t = tau > 0.0 ? tau : sppsbl::kDefaultSupportTau;
    out->nmse = sppsbl::nmse(xh, x);
    out->corr = sppsbl::correlation(xh, x);
    out->srr = sppsbl::srr(sppsbl::extract_support(xh, t), *problem->problem.true_support);
    out->success = sppsbl::success(out->nmse) ? 1 : 0;
  });
}

sppsbl_status sppsbl_run_experiment(const char* config_text, const sppsbl_run_options* options) {
  if (!config_text) return null_arg("config_text");
  return guarded([&] {
    const auto cfg = experiment_from(config_text, options);
    sppsbl::run_experiment(cfg, options ? options->threads : 0u);
  });
}

sppsbl_status sppsbl_run_phase_grid(const char* config_text, const sppsbl_run_options* options) {
  if (!config_text) return null_arg("config_text");
  return guarded([&] {
    const auto cfg = experiment_from(config_text, options);
    sppsbl::run_phase_grid(cfg, options ? options->threads : 0u);
  });
}

sppsbl_status sppsbl_generate_instances(const char* generator_json, uint64_t seed, size_t count,
                                        const char* out_dir) {
  if (!generator_json) return null_arg("generator_json");
  if (!out_dir) return null_arg("out_dir");
  if (count == 0) return fail(SPPSBL_ERR_INVALID_ARGUMENT, "count must be positive");
  return guarded([&] {
    const sppsbl::GeneratorSpec base = generator_from_text(generator_json);
    const std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw sppsbl::IoError("cannot create '" + dir.string() + "': " + ec.message());
    for (size_t i = 0; i < count; ++i) {
      sppsbl::GeneratorSpec spec = base;
      spec.seed = sppsbl::derive_seed(seed, 0, i);
      const auto inst = sppsbl::generate(spec);
      sppsbl::save_instance((dir / ("instance_" + std::to_string(i) + ".json")).string(), inst.problem, inst.spec);
    }
  });
}

}  // extern "C"
