#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace simplexscan {

// Two-sample Kolmogorov-Smirnov statistic: sup |F_a - F_b|.
inline double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t n = a.size(), m = b.size();
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < n && j < m) {
    const double x = std::min(a[i], b[j]);
    while (i < n && a[i] <= x) ++i;
    while (j < m && b[j] <= x) ++j;
    d = std::max(d, std::fabs(double(i) / n - double(j) / m));
  }
  return d;
}

// Asymptotic two-sample KS critical value at level alpha:
// c(alpha) * sqrt((n+m)/(n m)), c(alpha) = sqrt(-ln(alpha/2)/2).
inline double ks_critical_value(double alpha, std::size_t n, std::size_t m) {
  const double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
  return c * std::sqrt(double(n + m) / (double(n) * double(m)));
}

// Least-squares line fit of log(y) against log(x); slope_se is the usual
// regression standard error of the slope (0 when only two points).
struct LoglogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  int points_used = 0;
};

inline LoglogFit fit_loglog(const std::vector<double>& x,
                            const std::vector<double>& y) {
  LoglogFit fit;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  const int n = int(lx.size());
  fit.points_used = n;
  if (n < 2) return fit;
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n > 2) {
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
      ss += r * r;
    }
    fit.slope_se = std::sqrt(ss / (n - 2) / sxx);
  }
  return fit;
}

}  // namespace simplexscan
