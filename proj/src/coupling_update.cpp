#include "sppsbl/coupling_update.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "sppsbl/errors.hpp"

namespace sppsbl {

RootMethod parse_root_method(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (t == "bracketed") return RootMethod::kBracketed;
  if (t == "cardano") return RootMethod::kCardano;
  throw ConfigError("unknown root method '" + text + "' (expected bracketed or cardano)");
}

std::string to_string(RootMethod method) {
  return method == RootMethod::kCardano ? "cardano" : "bracketed";
}

double BetaEquation::f(double beta) const {
  return (c - 1.0) / beta - d +
         0.5 * (alpha_next / (A + beta * alpha_next) + alpha_i / (E + beta * alpha_i)) - B;
}

double BetaEquation::derivative(double beta) const {
  const double u = alpha_next / (A + beta * alpha_next);
  const double v = alpha_i / (E + beta * alpha_i);
  return -(c - 1.0) / (beta * beta) - 0.5 * (u * u + v * v);
}

std::array<double, 4> BetaEquation::cubic_coefficients() const {
  const double bd = B + d;
  const double cross = A * alpha_i + E * alpha_next;
  const double prod = alpha_i * alpha_next;
  return {2.0 * bd * prod, 2.0 * bd * cross - 2.0 * c * prod,
          2.0 * bd * A * E + (1.0 - 2.0 * c) * cross, 2.0 * (1.0 - c) * A * E};
}

BetaEquation beta_equation(Index i, const PrecisionField& alpha, const CouplingVector& beta,
                           const PosteriorMoments& moments, const HyperPriors& hyper) {
  const Index n = alpha.size();
  if (beta.size() != n - 1 || moments.mu.size() != n || moments.sigma_diag.size() != n) {
    throw DimensionError("beta_equation: inconsistent dimensions");
  }
  if (i < 0 || i >= n - 1) throw DimensionError("beta_equation: coupling index out of range");

  const auto alpha_at = [&](Index k) { return (k < 0 || k >= n) ? 0.0 : alpha[k]; };
  const auto second_moment = [&](Index k) {
    return moments.mu[k] * moments.mu[k] + moments.sigma_diag[k];
  };

  BetaEquation eq;
  eq.alpha_i = alpha[i];
  eq.alpha_next = alpha[i + 1];
  eq.A = alpha[i] + beta.at_or_zero(i - 1) * alpha_at(i - 1);
  eq.E = alpha[i + 1] + beta.at_or_zero(i + 1) * alpha_at(i + 2);
  eq.B = 0.5 * (alpha[i + 1] * second_moment(i) + alpha[i] * second_moment(i + 1));
  eq.c = hyper.c;
  eq.d = hyper.d;
  return eq;
}

double beta_stationarity(double beta_i, Index i, const PrecisionField& alpha,
                         const CouplingVector& beta, const PosteriorMoments& moments,
                         const HyperPriors& hyper) {
  if (!(beta_i > 0.0)) throw DomainError("beta_stationarity: beta_i must be positive");
  return beta_equation(i, alpha, beta, moments, hyper).f(beta_i);
}

namespace {

std::string describe(const BetaEquation& eq) {
  std::ostringstream os;
  os.precision(17);
  os << "{alpha_i=" << eq.alpha_i << ", alpha_next=" << eq.alpha_next << ", A=" << eq.A
     << ", E=" << eq.E << ", B=" << eq.B << ", c=" << eq.c << ", d=" << eq.d << "}";
  return os.str();
}

// f is strictly decreasing, so bisection on the sign is always valid; Newton
// steps are taken only when they land strictly inside the current bracket.
double solve_bracketed(const BetaEquation& eq) {
  double hi = eq.upper_bound();
  const double f_hi = eq.f(hi);
  if (!(f_hi < 0.0)) {
    throw InvariantViolation("coupling equation is not negative at c/d " + describe(eq));
  }
  double lo = std::min(1e-12, 0.5 * hi);
  double f_lo = eq.f(lo);
  while (!(f_lo > 0.0)) {
    lo *= 1e-3;
    if (lo < 1e-300) {
      throw InvariantViolation("coupling equation bracket does not straddle zero " +
                               describe(eq));
    }
    f_lo = eq.f(lo);
  }

  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 200; ++iter) {
    const double fx = eq.f(x);
    if (fx == 0.0) return x;
    if (fx > 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    const double step = fx / eq.derivative(x);
    double next = x - step;
    if (!(next > lo && next < hi)) {
      // Geometric midpoint first when the bracket spans decades.
      next = (hi > 1e3 * lo) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    }
    const double width = hi - lo;
    if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * x ||
        width <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      return next;
    }
    x = next;
  }
  return x;
}

double solve_cardano(const BetaEquation& eq) {
  const auto coef = eq.cubic_coefficients();
  const auto roots = cubic_real_roots(coef[0], coef[1], coef[2], coef[3]);
  const double upper = eq.upper_bound();
  double best = std::numeric_limits<double>::quiet_NaN();
  double best_residual = std::numeric_limits<double>::infinity();
  for (double r : roots) {
    if (!(r > 0.0) || !(r < upper)) continue;
    const double residual =
        std::abs(((coef[0] * r + coef[1]) * r + coef[2]) * r + coef[3]);
    if (residual < best_residual) {
      best_residual = residual;
      best = r;
    }
  }
  if (std::isnan(best)) {
    throw InvariantViolation("Cardano produced no root in (0, c/d) " + describe(eq));
  }
  return best;
}

}  // namespace

double solve_beta_equation(const BetaEquation& eq, RootMethod method) {
  if (!(eq.c > 1.0) || !(eq.d > 0.0)) throw DomainError("coupling update requires c > 1, d > 0");
  if (!(eq.alpha_i > 0.0) || !(eq.alpha_next > 0.0)) {
    throw DomainError("coupling update requires positive neighbouring alpha");
  }
  return method == RootMethod::kCardano ? solve_cardano(eq) : solve_bracketed(eq);
}

double solve_beta(Index i, const PrecisionField& alpha, const CouplingVector& beta,
                  const PosteriorMoments& moments, const HyperPriors& hyper,
                  RootMethod method) {
  return solve_beta_equation(beta_equation(i, alpha, beta, moments, hyper), method);
}

std::vector<double> cubic_real_roots(double p3, double p2, double p1, double p0) {
  if (p3 == 0.0) throw DomainError("cubic_real_roots: leading coefficient is zero");
  const double b = p2 / p3;
  const double c = p1 / p3;
  const double d = p0 / p3;
  const double shift = b / 3.0;
  // t^3 + p t + q = 0 with x = t - b/3
  const double p = c - b * b / 3.0;
  const double q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
  const double disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);

  std::vector<double> roots;
  if (disc > 0.0) {
    // One real root. Take the larger-magnitude radical first and recover the
    // second from u v = -p/3 to avoid cancellation.
    const double sq = std::sqrt(disc);
    const double u = std::cbrt(-q / 2.0 + (q > 0.0 ? -sq : sq));
    const double v = (u != 0.0) ? -p / (3.0 * u) : std::cbrt(-q / 2.0 - sq);
    roots.push_back(u + v - shift);
  } else if (p == 0.0) {
    roots.push_back(-shift);  // triple root
  } else {
    const double r = 2.0 * std::sqrt(-p / 3.0);
    double arg = (3.0 * q) / (p * r);
    arg = std::clamp(arg, -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) {
      roots.push_back(r * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0) - shift);
    }
  }

  // Closed forms lose digits when the coefficients span many decades; a few
  // Newton steps on the cubic itself recover them.
  const auto poly = [&](double x) { return ((p3 * x + p2) * x + p1) * x + p0; };
  const auto polish = [&](double& x) {
    double fx = poly(x);
    for (int it = 0; it < 8 && fx != 0.0; ++it) {
      const double dfx = (3.0 * p3 * x + 2.0 * p2) * x + p1;
      if (dfx == 0.0) break;
      const double next = x - fx / dfx;
      const double fn = poly(next);
      if (!(std::abs(fn) < std::abs(fx))) break;
      x = next;
      fx = fn;
    }
  };

  // Small roots next to a large one come out as differences of big numbers,
  // and the discriminant sign itself can be lost. Keep the largest root,
  // deflate from the constant end and solve the quadratic directly.
  double big = *std::max_element(roots.begin(), roots.end(),
                                 [](double x, double y) { return std::abs(x) < std::abs(y); });
  polish(big);
  if (big != 0.0 && p0 != 0.0) {
    const double q0 = -p0 / big;
    const double q1 = (q0 - p1) / big;
    const double qd = q1 * q1 - 4.0 * p3 * q0;
    const double t = -0.5 * (q1 + std::copysign(std::sqrt(std::max(qd, 0.0)), q1));
    if (qd >= 0.0 && t != 0.0) {
      roots = {big, t / p3, q0 / t};
    } else if (roots.size() == 1) {
      roots = {big};
    }
  }
  for (double& x : roots) polish(x);
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace sppsbl
