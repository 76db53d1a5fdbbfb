#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "projlab/error.hpp"

namespace projlab {

namespace detail {

/// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_cf(double a, double b, double x, double tol) {
  constexpr double tiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < tol) return h;
  }
  return h;
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b).
inline double regularized_beta(double x, double a, double b, double tol = 1e-15) {
  require(a > 0 && b > 0, ErrorCode::InvalidArgument, "beta parameters must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::beta_cf(a, b, x, tol) / a;
  return 1.0 - front * detail::beta_cf(b, a, 1.0 - x, tol) / b;
}

inline double f_cdf(double f, double d1, double d2) {
  if (f <= 0.0) return 0.0;
  if (std::isinf(f)) return 1.0;
  return regularized_beta(d1 * f / (d1 * f + d2), d1 / 2.0, d2 / 2.0);
}

/// Upper tail, computed from the complementary beta to keep small p-values accurate.
inline double f_sf(double f, double d1, double d2) {
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return regularized_beta(d2 / (d2 + d1 * f), d2 / 2.0, d1 / 2.0);
}

/// Quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> v, double q) {
  require(!v.empty(), ErrorCode::InvalidArgument, "quantile of empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

inline double mean(const std::vector<double>& v) {
  require(!v.empty(), ErrorCode::InvalidArgument, "mean of empty sample");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

struct BoxStats {
  std::size_t n = 0;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

inline BoxStats box_stats(const std::vector<double>& v) {
  require(!v.empty(), ErrorCode::InvalidArgument, "box stats of empty sample");
  return {v.size(), *std::min_element(v.begin(), v.end()), quantile(v, 0.25), quantile(v, 0.5),
          quantile(v, 0.75), *std::max_element(v.begin(), v.end())};
}

struct AnovaResult {
  std::string factor;
  double f_stat = 0.0;
  double p_value = 1.0;
  int dof_between = 0;
  int dof_within = 0;
  double ss_between = 0.0;
  double ss_within = 0.0;
  bool degenerate = false;  ///< all observations identical, or too few groups/observations
  std::vector<std::string> levels;
  std::vector<double> group_medians;
};

/// One-way ANOVA. With every observation identical F is undefined; the
/// result then reports F = 0, p = 1 and sets `degenerate`.
inline AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups) {
  require(groups.size() >= 2, ErrorCode::InvalidArgument, "anova needs at least two groups");
  std::size_t n = 0;
  double grand = 0.0;
  for (const auto& g : groups) {
    require(g.size() >= 2, ErrorCode::InvalidArgument, "anova groups need at least two observations");
    n += g.size();
    for (double x : g) grand += x;
  }
  const auto k = groups.size();
  require(n > k, ErrorCode::InvalidArgument, "anova needs positive within-group dof");
  grand /= static_cast<double>(n);
  AnovaResult r;
  r.dof_between = static_cast<int>(k - 1);
  r.dof_within = static_cast<int>(n - k);
  double ss_total = 0.0;
  for (const auto& g : groups) {
    const double m = mean(g);
    r.ss_between += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double x : g) {
      r.ss_within += (x - m) * (x - m);
      ss_total += (x - grand) * (x - grand);
    }
    r.group_medians.push_back(median(g));
  }
  if (ss_total == 0.0) {
    r.degenerate = true;
    return r;
  }
  const double msb = r.ss_between / r.dof_between, msw = r.ss_within / r.dof_within;
  r.f_stat = msw > 0.0 ? msb / msw : std::numeric_limits<double>::infinity();
  r.p_value = f_sf(r.f_stat, r.dof_between, r.dof_within);
  return r;
}

}  // namespace projlab
