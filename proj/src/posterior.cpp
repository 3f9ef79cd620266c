#include "sppsbl/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sppsbl/errors.hpp"

namespace sppsbl {

std::vector<double> jitter_ladder() {
  return {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4};
}

PosteriorEngine::PosteriorEngine(const SensingProblem& problem)
    : gram_(problem.phi.transpose() * problem.phi),
      phi_t_y_(problem.phi.transpose() * problem.y) {}

PosteriorMoments PosteriorEngine::compute(const Vector& lambda, double gamma,
                                          CovarianceMode mode) const {
  const Index n = size();
  if (lambda.size() != n) throw DimensionError("prior precision length does not match N");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("noise precision must be positive");
  for (Index i = 0; i < n; ++i) {
    if (!(lambda[i] > 0.0) || !std::isfinite(lambda[i])) {
      std::ostringstream os;
      os << "prior precision lambda[" << i << "] = " << lambda[i] << " is not positive";
      throw DomainError(os.str());
    }
  }

  Matrix precision = gamma * gram_;
  precision.diagonal() += lambda;

  std::vector<double> tried;
  for (double jitter : jitter_ladder()) {
    tried.push_back(jitter);
    Matrix shifted = precision;
    if (jitter > 0.0) shifted.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() != Eigen::Success) continue;
    const auto diag = llt.matrixLLT().diagonal();
    if (!diag.allFinite() || (diag.array() <= 0.0).any()) continue;

    PosteriorMoments out;
    out.jitter = jitter;
    if (mode == CovarianceMode::kFull) {
      out.sigma = llt.solve(Matrix::Identity(n, n));
      // Symmetrize: the two triangular solves leave O(eps) asymmetry.
      out.sigma = 0.5 * (out.sigma + out.sigma.transpose()).eval();
      out.sigma_diag = out.sigma.diagonal();
      if (!out.sigma.allFinite()) continue;
      out.trace_sigma_gram = out.sigma.cwiseProduct(gram_).sum();
    } else {
      // Sigma = L^{-T} L^{-1}, so diag(Sigma) is the column norms of L^{-1}.
      Matrix l_inv = Matrix::Identity(n, n);
      llt.matrixL().solveInPlace(l_inv);
      out.sigma_diag = l_inv.colwise().squaredNorm().transpose();
      if (!out.sigma_diag.allFinite()) continue;
      // gamma Sigma G = I - Sigma (diag(lambda) + jitter I)
      const double shrink = (out.sigma_diag.array() * (lambda.array() + jitter)).sum();
      out.trace_sigma_gram = std::max(0.0, (static_cast<double>(n) - shrink) / gamma);
    }
    if ((out.sigma_diag.array() <= 0.0).any()) continue;
    out.mu = gamma * llt.solve(phi_t_y_);
    return out;
  }

  std::ostringstream os;
  os << "posterior precision is not positive definite after jitter up to "
     << tried.back();
  throw ConditioningError(os.str(), tried);
}

PosteriorMoments compute_posterior(const SensingProblem& problem, const Vector& lambda,
                                   double gamma) {
  return PosteriorEngine(problem).compute(lambda, gamma);
}

ResidualStats residual_stats(const SensingProblem& problem, const PosteriorMoments& moments) {
  if (moments.mu.size() != problem.n()) throw DimensionError("posterior mean length does not match N");
  ResidualStats stats;
  stats.resid_sq = (problem.y - problem.phi * moments.mu).squaredNorm();
  if (moments.has_full_sigma()) {
    if (moments.sigma.rows() != problem.n() || moments.sigma.cols() != problem.n()) {
      throw DimensionError("posterior covariance must be N x N");
    }
    // tr(Sigma Phi^T Phi) = ||Phi Sigma^{1/2}||_F^2 = sum_ij (Phi Sigma)_ij Phi_ij
    stats.trace_term = (problem.phi * moments.sigma).cwiseProduct(problem.phi).sum();
  } else {
    stats.trace_term = moments.trace_sigma_gram;
  }
  return stats;
}

}  // namespace sppsbl
