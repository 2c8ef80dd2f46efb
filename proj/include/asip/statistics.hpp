#pragma once

#include "asip/lp_norm.hpp"

#include <vector>

namespace asip {

double normal_cdf(double x);
double normal_pdf(double x);

/// Standard deviation of the Kolmogorov limit law; sd(KS) ~ this / sqrt(N).
inline constexpr double kKolmogorovSd = 0.2605;

/// sup_x |F_N(x) - Phi(x)| for a sorted sample.
double ks_normal(const std::vector<double>& sorted);

/// sup_x |F(x) - Phi(x)| for a finite law, values sorted.
double ks_normal(const DiscreteLaw& law);

/// W_1 between a finite law (values sorted, probabilities) and N(0, sigma^2),
/// as the integral of |F - Phi(./sigma)|.
double wasserstein1_normal(const std::vector<double>& values, const std::vector<double>& probs,
                           double sigma);

/// Empirical-law version for a sorted sample.
double wasserstein1_normal(const std::vector<double>& sorted, double sigma);

/// W_1 between two sorted samples of equal size.
double wasserstein1_samples(const std::vector<double>& a, const std::vector<double>& b);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Sample mean and its standard error.
Estimate mean_estimate(const std::vector<double>& x);
/// Unbiased sample variance and its standard error, from the fourth central moment.
Estimate variance_estimate(const std::vector<double>& x);

/// Quantile by linear interpolation on a sorted sample.
double quantile(const std::vector<double>& sorted, double q);

}  // namespace asip
