#include "sppsbl/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "sppsbl/errors.hpp"

namespace sppsbl {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void SensingProblem::validate() const {
  if (phi.rows() < 1 || phi.cols() < 2) {
    std::ostringstream os;
    os << "sensing matrix must be at least 1x2, got " << phi.rows() << "x"
       << phi.cols();
    throw DimensionError(os.str());
  }
  if (!phi.allFinite()) throw DomainError("sensing matrix has non-finite entries");
  if (y.size() != phi.rows()) {
    std::ostringstream os;
    os << "observation length " << y.size() << " does not match " << phi.rows()
       << " matrix rows";
    throw DimensionError(os.str());
  }
  if (!y.allFinite()) throw DomainError("observations have non-finite entries");
  if (x_true) {
    if (x_true->size() != phi.cols()) {
      throw DimensionError("ground-truth length does not match matrix columns");
    }
    if (true_support && *true_support != support_of(*x_true)) {
      throw DomainError("true support differs from the nonzero pattern of x_true");
    }
  } else if (true_support) {
    for (Index i : *true_support) {
      if (i < 0 || i >= phi.cols()) throw DimensionError("support index out of range");
    }
  }
}

SensingProblem SensingProblem::make(Matrix phi, Vector y, std::optional<Vector> x_true,
                                    std::optional<double> snr_db) {
  SensingProblem p;
  p.phi = std::move(phi);
  p.y = std::move(y);
  if (x_true) p.true_support = support_of(*x_true);
  p.x_true = std::move(x_true);
  p.snr_db = snr_db;
  p.validate();
  return p;
}

void HyperPriors::validate() const {
  const double all[] = {a, b, c, d, g, h};
  for (double v : all) {
    if (!positive_finite(v)) throw DomainError("hyperprior constants must be positive and finite");
  }
  // The coupling stationarity equation has a unique positive root only for c > 1.
  if (!(c > 1.0)) throw DomainError("hyperprior c must exceed 1");
}

PrecisionField::PrecisionField(Vector alpha, double cap) : alpha_(std::move(alpha)), cap_(cap) {
  if (!positive_finite(cap_)) throw DomainError("alpha cap must be positive and finite");
  for (Index i = 0; i < alpha_.size(); ++i) {
    if (!(alpha_[i] > 0.0) || !(alpha_[i] <= cap_)) {
      std::ostringstream os;
      os << "alpha[" << i << "] = " << alpha_[i] << " outside (0, " << cap_ << "]";
      throw DomainError(os.str());
    }
  }
}

CouplingVector::CouplingVector(Vector beta) : beta_(std::move(beta)) {
  for (Index i = 0; i < beta_.size(); ++i) {
    if (!(beta_[i] >= 0.0) || !std::isfinite(beta_[i])) {
      throw DomainError("coupling weights must be finite and nonnegative");
    }
  }
}

CouplingVector CouplingVector::constant(Index n_signal, double value) {
  if (n_signal < 2) throw DimensionError("coupling vector needs a signal of length >= 2");
  return CouplingVector(Vector::Constant(n_signal - 1, value));
}

CouplingScheme CouplingScheme::pc_fixed(double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) {
    throw DomainError("fixed coupling weight must be finite and nonnegative");
  }
  return {Kind::kPcFixed, beta};
}

std::string CouplingScheme::name() const {
  switch (kind) {
    case Kind::kSpp:
      return "spp";
    case Kind::kPcFixed: {
      std::ostringstream os;
      os << "pc_fixed(" << fixed_beta << ")";
      return os.str();
    }
    case Kind::kNone:
      return "none";
  }
  return "unknown";
}

CouplingScheme::Kind parse_scheme_kind(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (t == "spp") return CouplingScheme::Kind::kSpp;
  if (t == "pc_fixed" || t == "pc") return CouplingScheme::Kind::kPcFixed;
  if (t == "none" || t == "sbl") return CouplingScheme::Kind::kNone;
  throw ConfigError("unknown coupling scheme '" + text + "' (expected spp, pc_fixed or none)");
}

Vector prior_precisions(const PrecisionField& alpha, const CouplingVector& beta) {
  const Index n = alpha.size();
  if (n < 2 || beta.size() != n - 1) {
    std::ostringstream os;
    os << "prior_precisions: alpha has " << n << " entries, beta has " << beta.size()
       << " (expected " << n - 1 << ")";
    throw DimensionError(os.str());
  }
  const Vector& a = alpha.values();
  const Vector& b = beta.values();
  Vector lambda = a;
  for (Index i = 0; i + 1 < n; ++i) {
    lambda[i] += b[i] * a[i + 1];
    lambda[i + 1] += b[i] * a[i];
  }
  return lambda;
}

Matrix build_coupling_matrix(const CouplingScheme& scheme, const CouplingVector& beta, Index n) {
  if (n < 2) throw DimensionError("coupling matrix needs n >= 2");
  Matrix t = Matrix::Identity(n, n);
  switch (scheme.kind) {
    case CouplingScheme::Kind::kNone:
      break;
    case CouplingScheme::Kind::kPcFixed:
      for (Index i = 0; i + 1 < n; ++i) {
        t(i, i + 1) = scheme.fixed_beta;
        t(i + 1, i) = scheme.fixed_beta;
      }
      break;
    case CouplingScheme::Kind::kSpp:
      if (beta.size() != n - 1) throw DimensionError("coupling vector must have n-1 entries");
      for (Index i = 0; i + 1 < n; ++i) {
        t(i, i + 1) = beta[i];
        t(i + 1, i) = beta[i];
      }
      break;
  }
  return t;
}

SupportSet support_of(const Vector& x) {
  SupportSet s;
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) s.push_back(i);
  }
  return s;
}

}  // namespace sppsbl
