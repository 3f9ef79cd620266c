#pragma once

// Domain types shared by the posterior engine, the EM solver, the data
// generators and the experiment runner.

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace sppsbl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Sorted, duplicate-free 0-based indices.
using SupportSet = std::vector<Index>;

/// One recovery instance: y = phi * x + n.
struct SensingProblem {
  Matrix phi;
  Vector y;
  std::optional<Vector> x_true;
  std::optional<SupportSet> true_support;
  std::optional<double> snr_db;

  Index m() const { return phi.rows(); }
  Index n() const { return phi.cols(); }

  /// Throws DimensionError / DomainError when any invariant fails.
  void validate() const;

  /// Builds a problem and checks it. When x_true is given the support is
  /// derived from its nonzero pattern.
  static SensingProblem make(Matrix phi, Vector y,
                             std::optional<Vector> x_true = std::nullopt,
                             std::optional<double> snr_db = std::nullopt);
};

/// Gamma-prior constants: alpha ~ Gamma(a, b), beta_i ~ Gamma(c, d),
/// gamma ~ Gamma(g, h).
struct HyperPriors {
  double a = 1e-4;
  double b = 1e-4;
  double c = 10.0;
  double d = 1.0;
  double g = 1e-4;
  double h = 1e-4;

  void validate() const;
};

/// Per-coefficient precisions alpha_i in (0, cap].
class PrecisionField {
 public:
  static constexpr double kDefaultCap = 1e10;

  PrecisionField() = default;
  explicit PrecisionField(Vector alpha, double cap = kDefaultCap);

  const Vector& values() const { return alpha_; }
  double cap() const { return cap_; }
  Index size() const { return alpha_.size(); }
  double operator[](Index i) const { return alpha_[i]; }

 private:
  Vector alpha_;
  double cap_ = kDefaultCap;
};

/// Coupling weights between neighbours: beta_i links coefficients i and i+1,
/// so a signal of length N carries N-1 entries. The virtual boundary entries
/// beta_{-1} and beta_{N-1} are zero and never stored.
class CouplingVector {
 public:
  CouplingVector() = default;
  explicit CouplingVector(Vector beta);

  static CouplingVector constant(Index n_signal, double value);

  const Vector& values() const { return beta_; }
  Index size() const { return beta_.size(); }
  double operator[](Index i) const { return beta_[i]; }

  /// beta_i with the zero boundary convention applied for i outside [0, N-2].
  double at_or_zero(Index i) const {
    return (i < 0 || i >= beta_.size()) ? 0.0 : beta_[i];
  }

 private:
  Vector beta_;
};

/// Which transformation matrix maps alpha to prior precisions.
struct CouplingScheme {
  enum class Kind { kSpp, kPcFixed, kNone };

  Kind kind = Kind::kSpp;
  double fixed_beta = 0.0;  // used only by kPcFixed

  static CouplingScheme spp() { return {Kind::kSpp, 0.0}; }
  static CouplingScheme pc_fixed(double beta);
  static CouplingScheme none() { return {Kind::kNone, 0.0}; }

  std::string name() const;
  bool learns_beta() const { return kind == Kind::kSpp; }
};

/// Parses "spp", "pc_fixed" or "none" (case-insensitive). Throws ConfigError.
CouplingScheme::Kind parse_scheme_kind(const std::string& text);

/// Gaussian posterior of x given the current hyperparameters. `sigma` may be
/// left empty (0x0) by the solver's hot path; `sigma_diag` is always filled.
struct PosteriorMoments {
  Vector mu;
  Matrix sigma;
  Vector sigma_diag;
  /// tr(Sigma * Phi^T Phi), computed alongside the factorization.
  double trace_sigma_gram = 0.0;
  /// Jitter added to the precision diagonal (0 when the first attempt worked).
  double jitter = 0.0;

  bool has_full_sigma() const { return sigma.size() > 0; }
};

struct SolverState {
  PrecisionField alpha;
  CouplingVector beta;
  double gamma = 1.0;
  Vector mu;
  Matrix sigma;
  int iteration = 0;
};

/// lambda_i = alpha_i + beta_{i-1} alpha_{i-1} + beta_i alpha_{i+1}, the
/// diagonal of diag(T alpha) for the tridiagonal coupling matrix T.
Vector prior_precisions(const PrecisionField& alpha, const CouplingVector& beta);

/// Dense symmetric tridiagonal coupling matrix with unit diagonal. For kSpp
/// the off-diagonals are `beta`; kPcFixed uses the scheme's shared weight and
/// kNone gives the identity. Intended for tests and diagnostics; solvers use
/// prior_precisions() directly.
Matrix build_coupling_matrix(const CouplingScheme& scheme,
                             const CouplingVector& beta, Index n);

/// Indices of the nonzero entries of x.
SupportSet support_of(const Vector& x);

}  // namespace sppsbl
