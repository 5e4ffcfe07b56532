#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace stablesde {

double mean(const std::vector<double>& v);
double sample_variance(const std::vector<double>& v);   ///< unbiased
double standard_error(const std::vector<double>& v);    ///< of the mean

/// Interpolated quantile of an already sorted vector, p in [0,1].
double quantile_sorted(const std::vector<double>& sorted, double p);
double interquartile_range(std::vector<double> v);  ///< sorts a copy

double normal_cdf(double x, double mu = 0.0, double sigma = 1.0);

/// Empirical characteristic function (1/n) sum exp(i xi v_k).
std::complex<double> empirical_cf(const std::vector<double>& v, double xi);

/// One-sample KS statistic sup |F_n - F| against an arbitrary CDF.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Two-sample KS statistic between empirical CDFs.
double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b);

/// Asymptotic two-sample critical value at level (1 - ... ), c(0.01)=1.628.
double ks_two_sample_critical(std::size_t n, std::size_t m, double c_level = 1.628);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

/// Ordinary least squares y = a + b x with residual-based slope error.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace stablesde
