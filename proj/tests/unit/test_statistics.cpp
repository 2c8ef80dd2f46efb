#include "asip/statistics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

TEST(Statistics, NormalCdf) {
  EXPECT_DOUBLE_EQ(asip::normal_cdf(0.0), 0.5);
  EXPECT_NEAR(asip::normal_cdf(1.0), 0.8413447460685429, 1e-15);
  EXPECT_NEAR(asip::normal_cdf(-1.96), 0.024997895148220435, 1e-15);
}

TEST(Statistics, KsOfMidpointQuantiles) {
  // x_i = Phi^{-1}((i + 1/2) / n) puts the empirical CDF exactly 1/(2n) off.
  const int n = 200;
  std::vector<double> xs;
  for (int i = 0; i < n; ++i) {
    const double target = (i + 0.5) / n;
    double lo = -10.0, hi = 10.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (asip::normal_cdf(mid) < target ? lo : hi) = mid;
    }
    xs.push_back(0.5 * (lo + hi));
  }
  EXPECT_NEAR(asip::ks_normal(xs), 0.5 / n, 1e-12);
}

TEST(Statistics, KsOfTwoPointLaw) {
  asip::DiscreteLaw law;
  law.values = {-1.0, 1.0};
  law.probs = {0.5, 0.5};
  EXPECT_NEAR(asip::ks_normal(law), asip::normal_cdf(1.0) - 0.5, 1e-15);
}

TEST(Statistics, W1OfPointMass) {
  for (double sigma : {0.5, 1.0, 3.0}) {
    EXPECT_NEAR(asip::wasserstein1_normal(std::vector<double>{0.0}, std::vector<double>{1.0}, sigma),
                sigma * std::sqrt(2.0 / std::numbers::pi), 1e-14);
  }
}

TEST(Statistics, W1AgainstQuadrature) {
  const std::vector<double> v = {-1.5, -0.25, 0.5, 2.0};
  const std::vector<double> p = {0.2, 0.3, 0.4, 0.1};
  const double sigma = 1.3;
  double integral = 0.0;
  const double h = 1e-4;
  for (double x = -12.0; x < 12.0; x += h) {
    const double mid = x + 0.5 * h;
    double f = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] <= mid) f += p[i];
    }
    integral += std::abs(f - asip::normal_cdf(mid / sigma)) * h;
  }
  EXPECT_NEAR(asip::wasserstein1_normal(v, p, sigma), integral, 1e-6);
}

TEST(Statistics, W1BetweenSamples) {
  EXPECT_DOUBLE_EQ(asip::wasserstein1_samples({0.0, 1.0, 2.0}, {1.0, 2.0, 3.0}), 1.0);
}

TEST(Statistics, Estimates) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> z(2.0, 3.0);
  std::vector<double> x(200000);
  for (double& v : x) v = z(gen);
  const auto m = asip::mean_estimate(x);
  const auto v = asip::variance_estimate(x);
  EXPECT_NEAR(m.std_error, 3.0 / std::sqrt(200000.0), 1e-4);
  EXPECT_LT(std::abs(m.value - 2.0), 4.0 * m.std_error);
  // Var(s^2) = 2 sigma^4 / n for Gaussian data.
  EXPECT_NEAR(v.std_error, std::sqrt(2.0 / 200000.0) * 9.0, 2e-3);
  EXPECT_LT(std::abs(v.value - 9.0), 4.0 * v.std_error);
}

TEST(Statistics, Quantile) {
  const std::vector<double> s = {1.0, 2.0, 3.0, 4.0, 5.0};
  EXPECT_DOUBLE_EQ(asip::quantile(s, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(asip::quantile(s, 0.125), 1.5);
  EXPECT_DOUBLE_EQ(asip::quantile(s, 1.0), 5.0);
}
