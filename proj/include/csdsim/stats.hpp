#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace csdsim {

/// (sum actual - sum predicted) / sum actual over aligned series.
inline std::optional<double> mre(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size()) throw std::invalid_argument("mre: series lengths differ");
  double sa = 0, sp = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    sa += actual[i];
    sp += predicted[i];
  }
  if (sa == 0) return std::nullopt;
  return (sa - sp) / sa;
}

struct TestResult {
  double statistic;
  double p_value;  // two-sided
  std::size_t n;
};

/// Two-sided tail probability of Student's t with `df` degrees of freedom.
inline double student_t_two_sided(double t, double df) {
  if (std::isinf(t)) return 0.0;
  const boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

/// Sample Pearson correlation with the t-based two-sided p-value.
inline std::optional<TestResult> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: series lengths differ");
  const std::size_t n = x.size();
  if (n < 3) return std::nullopt;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::nullopt;
  const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double df = static_cast<double>(n - 2);
  const double p = std::fabs(r) == 1.0 ? 0.0 : student_t_two_sided(r * std::sqrt(df / (1 - r * r)), df);
  return TestResult{r, p, n};
}

/// One-sample t test of the mean against `mu0`. Zero variance yields t = 0,
/// p = 1 when the mean equals mu0 and an exact rejection otherwise.
inline std::optional<TestResult> t_test(std::span<const double> x, double mu0 = 0.0) {
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  double mean = 0;
  for (const double v : x) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0;
  for (const double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0) {
    if (mean == mu0) return TestResult{0.0, 1.0, n};
    return TestResult{mean > mu0 ? HUGE_VAL : -HUGE_VAL, 0.0, n};
  }
  const double t = (mean - mu0) / (sd / std::sqrt(static_cast<double>(n)));
  return TestResult{t, student_t_two_sided(t, static_cast<double>(n - 1)), n};
}

/// Ordinary least squares y = slope * x + intercept.
struct LinearFit {
  double slope;
  double intercept;
  std::size_t n;
};

inline std::optional<LinearFit> fit_linear(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_linear: series lengths differ");
  const std::size_t n = x.size();
  if (n < 2) return std::nullopt;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0) return std::nullopt;
  const double slope = sxy / sxx;
  return LinearFit{slope, my - slope * mx, n};
}

}  // namespace csdsim
