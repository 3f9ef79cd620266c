#pragma once

// Stationarity equation for one coupling weight beta_i and its root finders.
//
// With the neighbours held fixed, dQ/dbeta_i = 0 reads
//
//   f(b) = (c-1)/b - d + 1/2 [ a_{i+1}/(A + b a_{i+1}) + a_i/(E + b a_i) ] - B
//
//   A = a_i + beta_{i-1} a_{i-1}
//   E = a_{i+1} + beta_{i+1} a_{i+2}
//   B = 1/2 [ a_{i+1} (mu_i^2 + S_ii) + a_i (mu_{i+1}^2 + S_{i+1,i+1}) ]
//
// For c > 1, f is strictly decreasing on (0, inf), tends to +inf at 0+ and is
// negative at c/d, so exactly one root lies in (0, c/d). Clearing
// denominators gives the cubic  ta b^3 + tb b^2 + tc b + td = 0.

#include <array>
#include <vector>

#include "sppsbl/core.hpp"

namespace sppsbl {

enum class RootMethod { kBracketed, kCardano };

RootMethod parse_root_method(const std::string& text);
std::string to_string(RootMethod method);

struct BetaEquation {
  double alpha_i = 0.0;
  double alpha_next = 0.0;
  double A = 0.0;
  double E = 0.0;
  double B = 0.0;
  double c = 0.0;
  double d = 0.0;

  double f(double beta) const;
  double derivative(double beta) const;
  double upper_bound() const { return c / d; }

  /// {ta, tb, tc, td}, highest degree first.
  std::array<double, 4> cubic_coefficients() const;
};

/// Assembles the equation for beta_i (0-based, i in [0, N-2]) from the
/// freshest alpha, the current couplings (neighbours beta_{i-1}, beta_{i+1})
/// and the posterior second moments.
BetaEquation beta_equation(Index i, const PrecisionField& alpha, const CouplingVector& beta,
                           const PosteriorMoments& moments, const HyperPriors& hyper);

/// f(beta_i) for the equation above. Throws DomainError when beta_i <= 0.
double beta_stationarity(double beta_i, Index i, const PrecisionField& alpha,
                         const CouplingVector& beta, const PosteriorMoments& moments,
                         const HyperPriors& hyper);

/// Unique root of the equation in (0, c/d). Throws InvariantViolation when the
/// bracket does not straddle zero or Cardano yields no admissible root.
double solve_beta_equation(const BetaEquation& eq, RootMethod method);

double solve_beta(Index i, const PrecisionField& alpha, const CouplingVector& beta,
                  const PosteriorMoments& moments, const HyperPriors& hyper,
                  RootMethod method = RootMethod::kBracketed);

/// Real roots of p3 x^3 + p2 x^2 + p1 x + p0 (p3 != 0) via the depressed
/// cubic: Cardano's radicals when the discriminant is positive, the
/// trigonometric form otherwise. Returned in ascending order.
std::vector<double> cubic_real_roots(double p3, double p2, double p1, double p0);

}  // namespace sppsbl
