#include "stablesde/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stablesde {

double mean(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("mean: empty sample");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) throw std::invalid_argument("sample_variance: need >= 2 points");
  double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double standard_error(const std::vector<double>& v) {
  return std::sqrt(sample_variance(v) / static_cast<double>(v.size()));
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile: empty sample");
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  double pos = p * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(pos);
  double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

double interquartile_range(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return quantile_sorted(v, 0.75) - quantile_sorted(v, 0.25);
}

double normal_cdf(double x, double mu, double sigma) {
  return 0.5 * std::erfc(-(x - mu) / (sigma * std::sqrt(2.0)));
}

std::complex<double> empirical_cf(const std::vector<double>& v, double xi) {
  if (v.empty()) throw std::invalid_argument("empirical_cf: empty sample");
  double re = 0.0, im = 0.0;
  for (double x : v) {
    re += std::cos(xi * x);
    im += std::sin(xi * x);
  }
  double n = static_cast<double>(v.size());
  return {re / n, im / n};
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    double f = cdf(sample[i]);
    double hi = (static_cast<double>(i) + 1.0) / n - f;
    double lo = f - static_cast<double>(i) / n;
    d = std::max(d, std::max(hi, lo));
  }
  return d;
}

double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("ks_statistic_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double na = static_cast<double>(a.size());
  double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    // advance past every copy of the current value in both samples so ties
    // are compared after the joint jump, not in between
    double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_two_sample_critical(std::size_t n, std::size_t m, double c_level) {
  double dn = static_cast<double>(n), dm = static_cast<double>(m);
  return c_level * std::sqrt((dn + dm) / (dn * dm));
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line: need matching samples of size >= 2");
  double n = static_cast<double>(x.size());
  double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double r = y[i] - fit.intercept - fit.slope * x[i];
    ss_res += r * r;
  }
  if (x.size() > 2)
    fit.slope_stderr = std::sqrt(ss_res / (n - 2.0) / sxx);
  return fit;
}

}  // namespace stablesde
