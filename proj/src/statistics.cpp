#include "asip/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace asip {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double ks_normal(const std::vector<double>& sorted) {
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = normal_cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_normal(const DiscreteLaw& law) {
  double below = 0.0;
  double d = 0.0;
  for (std::size_t i = 0; i < law.values.size(); ++i) {
    const double f = normal_cdf(law.values[i]);
    d = std::max(d, std::abs(f - below));
    below += law.probs[i];
    d = std::max(d, std::abs(below - f));
  }
  return d;
}

namespace {

// Antiderivative of Phi.
double phi_integral(double x) { return x * normal_cdf(x) + normal_pdf(x); }

// Integral over [a, b] of |c - Phi(x / sigma)|, with Phi increasing in x.
double segment(double a, double b, double c, double sigma) {
  if (!(b > a)) return 0.0;
  auto area = [sigma](double lo, double hi) {  // integral of Phi(x / sigma)
    return sigma * (phi_integral(hi / sigma) - phi_integral(lo / sigma));
  };
  const double fa = normal_cdf(a / sigma);
  const double fb = normal_cdf(b / sigma);
  if (fa >= c) return area(a, b) - c * (b - a);
  if (fb <= c) return c * (b - a) - area(a, b);
  double lo = a;
  double hi = b;
  for (int i = 0; i < 100 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid / sigma) < c ? lo : hi) = mid;
  }
  const double x = 0.5 * (lo + hi);
  return (c * (x - a) - area(a, x)) + (area(x, b) - c * (b - x));
}

}  // namespace

double wasserstein1_normal(const std::vector<double>& values, const std::vector<double>& probs,
                           double sigma) {
  if (values.empty()) return 0.0;
  if (!(sigma > 0.0)) {
    double w = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) w += probs[i] * std::abs(values[i]);
    return w;
  }
  // Tails: F = 0 left of the first atom, F = 1 right of the last.
  double w = sigma * phi_integral(values.front() / sigma) + sigma * phi_integral(-values.back() / sigma);
  double cum = 0.0;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    cum += probs[i];
    w += segment(values[i], values[i + 1], std::min(cum, 1.0), sigma);
  }
  return w;
}

double wasserstein1_normal(const std::vector<double>& sorted, double sigma) {
  const std::vector<double> probs(sorted.size(), 1.0 / static_cast<double>(sorted.size()));
  return wasserstein1_normal(sorted, probs, sigma);
}

double wasserstein1_samples(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  double w = 0.0;
  for (std::size_t i = 0; i < n; ++i) w += std::abs(a[i] - b[i]);
  return n ? w / static_cast<double>(n) : 0.0;
}

Estimate mean_estimate(const std::vector<double>& x) {
  Estimate e;
  const double n = static_cast<double>(x.size());
  if (x.empty()) return e;
  for (double v : x) e.value += v;
  e.value /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - e.value) * (v - e.value);
  e.std_error = x.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return e;
}

Estimate variance_estimate(const std::vector<double>& x) {
  Estimate e;
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) return e;
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double v : x) {
    const double d = (v - mean) * (v - mean);
    m2 += d;
    m4 += d * d;
  }
  m2 /= n;
  m4 /= n;
  e.value = m2 * n / (n - 1.0);
  e.std_error = std::sqrt(std::max(0.0, m4 - m2 * m2) / n);
  return e;
}

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace asip
