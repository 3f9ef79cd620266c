#include "sppsbl/solver.hpp"

#include <algorithm>
#include <cmath>

#include "sppsbl/errors.hpp"

namespace sppsbl {

void SolverConfig::validate() const {
  hyperpriors.validate();
  if (max_iterations < 1) throw ConfigError("max_iterations must be positive");
  if (!(rel_tol > 0.0)) throw ConfigError("rel_tol must be positive");
  if (!(alpha_cap > 0.0) || !std::isfinite(alpha_cap)) throw ConfigError("alpha_cap must be positive");
  if (!(init_alpha > 0.0) || !(init_alpha <= alpha_cap)) {
    throw ConfigError("init_alpha must lie in (0, alpha_cap]");
  }
  if (!(init_beta >= 0.0) || !std::isfinite(init_beta)) throw ConfigError("init_beta must be nonnegative");
  if (!(init_gamma > 0.0) || !std::isfinite(init_gamma)) throw ConfigError("init_gamma must be positive");
  if (scheme.kind == CouplingScheme::Kind::kPcFixed &&
      (!(scheme.fixed_beta >= 0.0) || !std::isfinite(scheme.fixed_beta))) {
    throw ConfigError("fixed coupling weight must be nonnegative");
  }
}

void CouplingStats::merge(const CouplingStats& other) {
  solves += other.solves;
  bound_violations += other.bound_violations;
  max_scaled_residual = std::max(max_scaled_residual, other.max_scaled_residual);
}

Vector update_eta(const PosteriorMoments& moments, const CouplingVector& beta) {
  const Index n = moments.mu.size();
  if (moments.sigma_diag.size() != n || beta.size() != n - 1) {
    throw DimensionError("update_eta: inconsistent dimensions");
  }
  const Vector second = moments.mu.cwiseAbs2() + moments.sigma_diag;
  Vector eta = second;
  for (Index i = 0; i + 1 < n; ++i) {
    eta[i] += beta[i] * second[i + 1];
    eta[i + 1] += beta[i] * second[i];
  }
  return eta;
}

PrecisionField update_alpha(const Vector& eta, const HyperPriors& hyper, double cap) {
  Vector alpha(eta.size());
  for (Index i = 0; i < eta.size(); ++i) {
    if (!(eta[i] >= 0.0)) throw DomainError("update_alpha: eta must be nonnegative");
    alpha[i] = std::min((hyper.a + 0.5) / (hyper.b + 0.5 * eta[i]), cap);
  }
  return PrecisionField(std::move(alpha), cap);
}

double update_gamma(Index m, const ResidualStats& stats, const HyperPriors& hyper) {
  return (static_cast<double>(m) + 2.0 * hyper.g) /
         (stats.resid_sq + stats.trace_term + 2.0 * hyper.h);
}

double update_gamma(const SensingProblem& problem, const PosteriorMoments& moments,
                    const HyperPriors& hyper) {
  return update_gamma(problem.m(), residual_stats(problem, moments), hyper);
}

double evaluate_q_alpha_beta(const PrecisionField& alpha, const CouplingVector& beta,
                             const PosteriorMoments& moments, const HyperPriors& hyper) {
  const Index n = alpha.size();
  if (beta.size() != n - 1 || moments.mu.size() != n || moments.sigma_diag.size() != n) {
    throw DimensionError("evaluate_q_alpha_beta: inconsistent dimensions");
  }
  for (Index i = 0; i < beta.size(); ++i) {
    if (!(beta[i] > 0.0)) throw DomainError("evaluate_q_alpha_beta: beta must be positive");
  }
  const Vector lambda = prior_precisions(alpha, beta);
  double q = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double m = moments.mu[i] * moments.mu[i] + moments.sigma_diag[i];
    q += (hyper.a - 1.0) * std::log(alpha[i]) - hyper.b * alpha[i] + 0.5 * std::log(lambda[i]) -
         0.5 * lambda[i] * m;
  }
  for (Index i = 0; i < beta.size(); ++i) {
    q += (hyper.c - 1.0) * std::log(beta[i]) - hyper.d * beta[i];
  }
  return q;
}

namespace {

CouplingVector initial_coupling(const SolverConfig& config, Index n) {
  switch (config.scheme.kind) {
    case CouplingScheme::Kind::kSpp:
      return CouplingVector::constant(n, config.init_beta);
    case CouplingScheme::Kind::kPcFixed:
      return CouplingVector::constant(n, config.scheme.fixed_beta);
    case CouplingScheme::Kind::kNone:
      break;
  }
  return CouplingVector::constant(n, 0.0);
}

}  // namespace

SolveResult run_em(const SensingProblem& problem, const SolverConfig& config,
                   SolveObserver* observer) {
  problem.validate();
  config.validate();
  const Index n = problem.n();
  const HyperPriors& hyper = config.hyperpriors;

  const PosteriorEngine engine(problem);

  SolveResult result;
  SolverState& state = result.state;
  state.alpha = PrecisionField(Vector::Constant(n, config.init_alpha), config.alpha_cap);
  state.beta = initial_coupling(config, n);
  state.gamma = config.init_gamma;

  // Sigma is only needed in full once the loop ends.
  Vector lambda = prior_precisions(state.alpha, state.beta);
  double moments_gamma = state.gamma;
  PosteriorMoments moments = engine.compute(lambda, state.gamma, CovarianceMode::kDiagonal);

  Vector beta_work = state.beta.values();
  for (int t = 1; t <= config.max_iterations; ++t) {
    // eta uses the previous posterior and the previous couplings.
    state.alpha = update_alpha(update_eta(moments, state.beta), hyper, config.alpha_cap);

    if (config.scheme.learns_beta()) {
      const double upper = hyper.c / hyper.d;
      for (Index i = 0; i + 1 < n; ++i) {
        CouplingVector current(beta_work);
        const BetaEquation eq = beta_equation(i, state.alpha, current, moments, hyper);
        const double root = solve_beta_equation(eq, config.root_method);
        ++result.coupling.solves;
        if (!(root > 0.0 && root < upper)) ++result.coupling.bound_violations;
        const double scaled = std::abs(eq.f(root) / eq.derivative(root));
        result.coupling.max_scaled_residual = std::max(result.coupling.max_scaled_residual, scaled);
        beta_work[i] = root;
        if (observer) observer->on_coupling_solved(i, eq, root);
      }
      state.beta = CouplingVector(beta_work);
    }

    lambda = prior_precisions(state.alpha, state.beta);
    moments_gamma = state.gamma;
    PosteriorMoments next = engine.compute(lambda, state.gamma, CovarianceMode::kDiagonal);
    ResidualStats stats;
    stats.resid_sq = (problem.y - problem.phi * next.mu).squaredNorm();
    stats.trace_term = next.trace_sigma_gram;
    state.gamma = update_gamma(problem.m(), stats, hyper);

    const double denom = std::max(moments.mu.norm(), 1e-12);
    const double change = (next.mu - moments.mu).norm() / denom;
    moments = std::move(next);

    state.iteration = t;
    result.iterations = t;
    result.history.push_back({change, state.gamma});
    if (config.record_trajectory) result.trajectory.push_back(moments.mu);
    if (observer) {
      state.mu = moments.mu;
      observer->on_iteration(state, moments);
    }
    if (change < config.rel_tol) {
      result.converged = true;
      break;
    }
  }

  state.mu = moments.mu;
  state.sigma = engine.compute(lambda, moments_gamma, CovarianceMode::kFull).sigma;
  result.x_hat = state.mu;
  return result;
}

}  // namespace sppsbl
