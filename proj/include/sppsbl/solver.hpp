#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sppsbl/core.hpp"
#include "sppsbl/coupling_update.hpp"
#include "sppsbl/posterior.hpp"

namespace sppsbl {

struct SolverConfig {
  HyperPriors hyperpriors;
  CouplingScheme scheme = CouplingScheme::spp();
  int max_iterations = 500;
  double rel_tol = 1e-6;
  double alpha_cap = PrecisionField::kDefaultCap;
  double init_alpha = 1.0;
  double init_beta = 1.0;
  double init_gamma = 1.0;
  RootMethod root_method = RootMethod::kBracketed;
  /// Keep mu after every iteration in SolveResult::trajectory.
  bool record_trajectory = false;

  void validate() const;
};

struct IterationRecord {
  double mu_change = 0.0;  // relative change of mu
  double gamma = 0.0;
};

/// Counters over every coupling solve of one run.
struct CouplingStats {
  std::uint64_t solves = 0;
  /// Roots outside the open interval (0, c/d).
  std::uint64_t bound_violations = 0;
  /// max over solves of |f(root)| / |f'(root)|, i.e. the Newton step left.
  double max_scaled_residual = 0.0;

  void merge(const CouplingStats& other);
};

struct SolveResult {
  Vector x_hat;
  SolverState state;
  int iterations = 0;
  bool converged = false;
  std::vector<IterationRecord> history;
  std::vector<Vector> trajectory;
  CouplingStats coupling;
};

/// Hooks for tests and diagnostics. Default implementations do nothing.
class SolveObserver {
 public:
  virtual ~SolveObserver() = default;
  /// Called right after beta_i is solved, with the equation it satisfied.
  virtual void on_coupling_solved(Index /*i*/, const BetaEquation& /*eq*/, double /*root*/) {}
  /// Called at the end of each iteration with the refreshed state and moments.
  /// Inside the loop only diag(Sigma) is kept; state.sigma and moments.sigma
  /// are empty.
  virtual void on_iteration(const SolverState& /*state*/, const PosteriorMoments& /*moments*/) {}
};

/// eta_i = m_i + beta_i m_{i+1} + beta_{i-1} m_{i-1},  m_k = mu_k^2 + Sigma_kk.
Vector update_eta(const PosteriorMoments& moments, const CouplingVector& beta);

/// alpha_i = min((a + 1/2) / (b + eta_i / 2), cap).
PrecisionField update_alpha(const Vector& eta, const HyperPriors& hyper, double cap);

/// gamma = (M + 2g) / (||y - Phi mu||^2 + tr(Sigma Phi^T Phi) + 2h).
double update_gamma(const SensingProblem& problem, const PosteriorMoments& moments,
                    const HyperPriors& hyper);

/// Same rule from precomputed residual statistics.
double update_gamma(Index m, const ResidualStats& stats, const HyperPriors& hyper);

/// The alpha/beta part of the EM objective, used for diagnostics:
///   sum_i [(a-1) log a_i - b a_i + 1/2 log l_i - 1/2 l_i m_i]
///   + sum_{i<N-1} [(c-1) log beta_i - d beta_i]
/// Throws DomainError for any nonpositive alpha or beta.
double evaluate_q_alpha_beta(const PrecisionField& alpha, const CouplingVector& beta,
                             const PosteriorMoments& moments, const HyperPriors& hyper);

/// EM loop: alpha update, cap, beta sweep (ascending index, fresh neighbours),
/// posterior refresh, gamma update; until the relative change of mu drops
/// below rel_tol or max_iterations is reached.
SolveResult run_em(const SensingProblem& problem, const SolverConfig& config,
                   SolveObserver* observer = nullptr);

}  // namespace sppsbl
