#pragma once

#include "sppsbl/core.hpp"

namespace sppsbl {

/// Jitter ladder tried when the posterior precision is not numerically
/// positive definite: 0, then 1e-10, 1e-9, ..., 1e-4.
std::vector<double> jitter_ladder();

/// Posterior moments for a fixed problem. Caches Phi^T Phi and Phi^T y so an
/// EM loop only pays for the factorization on each call.
enum class CovarianceMode {
  kFull,      // materialize Sigma
  kDiagonal,  // diag(Sigma) and tr(Sigma Phi^T Phi) only
};

class PosteriorEngine {
 public:
  explicit PosteriorEngine(const SensingProblem& problem);

  /// mu = gamma Sigma Phi^T y with Sigma = (gamma Phi^T Phi + diag(lambda))^{-1}.
  /// Throws DomainError for a nonpositive gamma or lambda entry and
  /// ConditioningError when every jitter level fails.
  PosteriorMoments compute(const Vector& lambda, double gamma,
                           CovarianceMode mode = CovarianceMode::kFull) const;

  const Matrix& gram() const { return gram_; }
  const Vector& phi_t_y() const { return phi_t_y_; }
  Index size() const { return gram_.rows(); }

 private:
  Matrix gram_;
  Vector phi_t_y_;
};

/// One-shot convenience over PosteriorEngine.
PosteriorMoments compute_posterior(const SensingProblem& problem, const Vector& lambda,
                                   double gamma);

struct ResidualStats {
  double resid_sq = 0.0;    // ||y - Phi mu||^2
  double trace_term = 0.0;  // tr(Sigma Phi^T Phi)
};

/// Uses moments.sigma when present, otherwise the cached trace.
ResidualStats residual_stats(const SensingProblem& problem, const PosteriorMoments& moments);

}  // namespace sppsbl
