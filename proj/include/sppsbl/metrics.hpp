#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sppsbl/core.hpp"

namespace sppsbl {

/// Successful recovery threshold on NMSE (inclusive).
inline constexpr double kSuccessNmse = 1e-5;
inline constexpr double kDefaultSupportTau = 0.01;

/// ||x_hat - x||^2 / ||x||^2. Throws DomainError when x is zero.
double nmse(const Vector& x_hat, const Vector& x_true);

/// Cosine similarity. Throws DomainError when either vector is zero.
double correlation(const Vector& x_hat, const Vector& x_true);

/// |S_hat & S| / (|S_hat \ S| + |S|). Inputs need not be sorted. Throws
/// DomainError when the true support is empty.
double srr(const SupportSet& estimated, const SupportSet& truth);

/// {i : |x_i| > tau max_j |x_j|}; empty for the zero vector.
SupportSet extract_support(const Vector& x_hat, double tau = kDefaultSupportTau);

bool success(double nmse_value);

struct TrialRecord {
  std::string algorithm;
  std::uint64_t seed = 0;
  double nmse = 0.0;
  double corr = 0.0;
  double srr = 0.0;
  int iterations = 0;
  double runtime_ms = 0.0;
  bool success = false;
  /// Solver threw; metric fields are NaN and the record is excluded from
  /// aggregation.
  bool failed = false;
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 when n == 1
};

struct Summary {
  std::size_t n = 0;
  bool single_record = false;
  MetricSummary nmse;
  MetricSummary corr;
  MetricSummary srr;
  MetricSummary iterations;
  MetricSummary runtime_ms;
  double success_rate = 0.0;
};

/// Mean and (n-1) standard deviation of a nonempty sample.
MetricSummary mean_std(const std::vector<double>& values);

/// Aggregates records after sorting them by seed. Throws DomainError when
/// `records` is empty.
Summary aggregate(std::vector<TrialRecord> records);

struct GridCell {
  double snr_db = 0.0;
  double measurement_ratio = 0.0;
  double mean_rnmse = 0.0;
  int n_trials = 0;
};

/// Spearman rank correlation with average ranks for ties. Returns NaN when
/// either input is constant.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace sppsbl
