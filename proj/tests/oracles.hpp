#pragma once

// Independent reference computations for the unit tests. Plain loops over
// std::vector, no Eigen decompositions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "sppsbl/core.hpp"
#include "sppsbl/coupling_update.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense to_dense(const sppsbl::Matrix& m) {
  Dense out(m.rows(), std::vector<double>(m.cols()));
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  return out;
}

// Gauss-Jordan with partial pivoting.
inline Dense inverse(Dense a) {
  const std::size_t n = a.size();
  Dense inv(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (a[piv][col] == 0.0) throw std::runtime_error("singular");
    std::swap(a[piv], a[col]);
    std::swap(inv[piv], inv[col]);
    const double p = a[col][col];
    for (std::size_t k = 0; k < n; ++k) {
      a[col][k] /= p;
      inv[col][k] /= p;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      if (f == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) {
        a[r][k] -= f * a[col][k];
        inv[r][k] -= f * inv[col][k];
      }
    }
  }
  return inv;
}

struct Posterior {
  std::vector<double> mu;
  Dense sigma;
};

// Sigma = (gamma Phi^T Phi + diag(lambda))^{-1}, mu = gamma Sigma Phi^T y.
inline Posterior posterior(const sppsbl::Matrix& phi, const sppsbl::Vector& y,
                           const std::vector<double>& lambda, double gamma) {
  const int m = phi.rows(), n = phi.cols();
  Dense prec(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < m; ++k) s += phi(k, i) * phi(k, j);
      prec[i][j] = gamma * s;
    }
    prec[i][i] += lambda[i];
  }
  Posterior out;
  out.sigma = inverse(prec);
  std::vector<double> pty(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < m; ++k) pty[i] += phi(k, i) * y[k];
  out.mu.assign(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out.mu[i] += gamma * out.sigma[i][j] * pty[j];
  return out;
}

// lambda_i from the dense T alpha product.
inline std::vector<double> precisions_via_matrix(const std::vector<double>& alpha,
                                                 const std::vector<double>& beta) {
  const std::size_t n = alpha.size();
  Dense t(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) t[i][i] = 1.0;
  for (std::size_t i = 0; i + 1 < n; ++i) t[i][i + 1] = t[i + 1][i] = beta[i];
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i] += t[i][j] * alpha[j];
  return out;
}

inline sppsbl::SensingProblem random_problem(std::uint64_t seed, int m, int n, double noise = 0.05) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  sppsbl::Matrix phi(m, n);
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < n; ++c) phi(r, c) = g(rng) / std::sqrt(static_cast<double>(m));
  sppsbl::Vector x = sppsbl::Vector::Zero(n);
  for (int i = n / 4; i < n / 2; ++i) x[i] = g(rng);
  sppsbl::Vector y = phi * x;
  for (int r = 0; r < m; ++r) y[r] += noise * g(rng);
  return sppsbl::SensingProblem::make(phi, y, x);
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

// Random equation with log-uniform alphas and moments, c in (1, 20], d in (0.1, 10).
inline sppsbl::BetaEquation random_equation(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> lu(-4.0, 4.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto lg = [&] { return std::pow(10.0, lu(rng)); };
  sppsbl::BetaEquation eq;
  eq.alpha_i = lg();
  eq.alpha_next = lg();
  eq.A = eq.alpha_i + (u(rng) < 0.2 ? 0.0 : u(rng) * 10.0 * lg());
  eq.E = eq.alpha_next + (u(rng) < 0.2 ? 0.0 : u(rng) * 10.0 * lg());
  eq.B = 0.5 * (eq.alpha_next * lg() + eq.alpha_i * lg());
  eq.c = 1.0 + 1e-3 + u(rng) * 19.0;
  eq.d = std::pow(10.0, -1.0 + 2.0 * u(rng));
  return eq;
}

// Reference EM over std::vector with the dense-inverse posterior. beta is
// fixed unless `learn`, in which case each coupling is found by plain
// bisection on the stationarity function.
inline std::vector<std::vector<double>> reference_em(const sppsbl::SensingProblem& p,
                                                     const sppsbl::HyperPriors& h,
                                                     double beta0, bool learn, int iters) {
  const int n = p.n(), m = p.m();
  std::vector<double> alpha(n, 1.0), beta(n - 1, beta0);
  double gamma = 1.0;
  auto post = posterior(p.phi, p.y, precisions_via_matrix(alpha, beta), gamma);
  std::vector<std::vector<double>> traj;
  for (int t = 0; t < iters; ++t) {
    std::vector<double> sec(n);
    for (int i = 0; i < n; ++i) sec[i] = post.mu[i] * post.mu[i] + post.sigma[i][i];
    for (int i = 0; i < n; ++i) {
      double eta = sec[i];
      if (i + 1 < n) eta += beta[i] * sec[i + 1];
      if (i > 0) eta += beta[i - 1] * sec[i - 1];
      alpha[i] = std::min((h.a + 0.5) / (h.b + 0.5 * eta), 1e10);
    }
    if (learn) {
      for (int i = 0; i + 1 < n; ++i) {
        const double A = alpha[i] + (i > 0 ? beta[i - 1] * alpha[i - 1] : 0.0);
        const double E = alpha[i + 1] + (i + 2 < n ? beta[i + 1] * alpha[i + 2] : 0.0);
        const double B = 0.5 * (alpha[i + 1] * sec[i] + alpha[i] * sec[i + 1]);
        auto f = [&](double b) {
          return (h.c - 1) / b - h.d + 0.5 * (alpha[i + 1] / (A + b * alpha[i + 1]) + alpha[i] / (E + b * alpha[i])) - B;
        };
        double lo = 1e-300, hi = h.c / h.d;
        for (int k = 0; k < 2000 && hi - lo > 1e-16 * hi; ++k) {
          const double mid = (hi > 1e3 * lo) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
          (f(mid) > 0 ? lo : hi) = mid;
        }
        beta[i] = 0.5 * (lo + hi);
      }
    }
    post = posterior(p.phi, p.y, precisions_via_matrix(alpha, beta), gamma);
    double resid = 0.0, trace = 0.0;
    for (int r = 0; r < m; ++r) {
      double fit = 0.0;
      for (int c = 0; c < n; ++c) fit += p.phi(r, c) * post.mu[c];
      resid += (p.y[r] - fit) * (p.y[r] - fit);
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double g = 0.0;
        for (int k = 0; k < m; ++k) g += p.phi(k, i) * p.phi(k, j);
        trace += post.sigma[i][j] * g;
      }
    gamma = (m + 2 * h.g) / (resid + trace + 2 * h.h);
    traj.push_back(post.mu);
  }
  return traj;
}

inline double traj_err(const std::vector<double>& ref, const sppsbl::Vector& got) {
  double err = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    err = std::max(err, std::abs(ref[i] - got[i]));
    scale = std::max(scale, std::abs(ref[i]));
  }
  return err / std::max(scale, 1e-300);
}

}  // namespace oracle
