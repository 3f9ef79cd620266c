#include "sppsbl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sppsbl/errors.hpp"

namespace sppsbl {

double nmse(const Vector& x_hat, const Vector& x_true) {
  if (x_hat.size() != x_true.size()) throw DimensionError("nmse: length mismatch");
  const double denom = x_true.squaredNorm();
  if (!(denom > 0.0)) throw DomainError("nmse: true signal is zero");
  return (x_hat - x_true).squaredNorm() / denom;
}

double correlation(const Vector& x_hat, const Vector& x_true) {
  if (x_hat.size() != x_true.size()) throw DimensionError("correlation: length mismatch");
  const double na = x_hat.norm();
  const double nb = x_true.norm();
  if (!(na > 0.0) || !(nb > 0.0)) throw DomainError("correlation: zero-norm input");
  return std::clamp(x_hat.dot(x_true) / (na * nb), -1.0, 1.0);
}

double srr(const SupportSet& estimated, const SupportSet& truth) {
  SupportSet s_hat = estimated;
  SupportSet s = truth;
  std::sort(s_hat.begin(), s_hat.end());
  s_hat.erase(std::unique(s_hat.begin(), s_hat.end()), s_hat.end());
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  if (s.empty()) throw DomainError("srr: true support is empty");

  SupportSet common;
  std::set_intersection(s_hat.begin(), s_hat.end(), s.begin(), s.end(), std::back_inserter(common));
  const double extra = static_cast<double>(s_hat.size() - common.size());
  return static_cast<double>(common.size()) / (extra + static_cast<double>(s.size()));
}

SupportSet extract_support(const Vector& x_hat, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("extract_support: tau must lie in (0, 1)");
  SupportSet out;
  if (x_hat.size() == 0) return out;
  const double peak = x_hat.cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) return out;
  const double cut = tau * peak;
  for (Index i = 0; i < x_hat.size(); ++i) {
    if (std::abs(x_hat[i]) > cut) out.push_back(i);
  }
  return out;
}

bool success(double nmse_value) { return nmse_value <= kSuccessNmse; }

MetricSummary mean_std(const std::vector<double>& values) {
  if (values.empty()) throw DomainError("mean_std: empty sample");
  const double n = static_cast<double>(values.size());
  MetricSummary s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

Summary aggregate(std::vector<TrialRecord> records) {
  if (records.empty()) throw DomainError("aggregate: no records");
  std::stable_sort(records.begin(), records.end(),
                   [](const TrialRecord& a, const TrialRecord& b) { return a.seed < b.seed; });
  std::vector<double> nm, co, sr, it, rt;
  std::size_t successes = 0;
  for (const auto& r : records) {
    if (r.failed) continue;
    nm.push_back(r.nmse);
    co.push_back(r.corr);
    sr.push_back(r.srr);
    it.push_back(static_cast<double>(r.iterations));
    rt.push_back(r.runtime_ms);
    if (r.success) ++successes;
  }
  Summary out;
  out.n = nm.size();
  if (out.n == 0) throw DomainError("aggregate: every trial failed");
  out.single_record = out.n == 1;
  out.nmse = mean_std(nm);
  out.corr = mean_std(co);
  out.srr = mean_std(sr);
  out.iterations = mean_std(it);
  out.runtime_ms = mean_std(rt);
  out.success_rate = static_cast<double>(successes) / static_cast<double>(out.n);
  return out;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw DomainError("spearman: need two equal-length samples");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

}  // namespace sppsbl
