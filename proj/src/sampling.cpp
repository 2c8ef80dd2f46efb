#include "asip/sampling.hpp"

#include <algorithm>

namespace asip {

std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

StepSampler::StepSampler(const ChainSpec& chain, Time first, Time last)
    : first_(first), last_(last), period_(0) {
  chain.require_time(first);
  chain.require_time(last);
  const Vector& init = chain.marginal(first);
  initial_cdf_.resize(init.size());
  double acc = 0.0;
  for (Eigen::Index x = 0; x < init.size(); ++x) initial_cdf_[x] = (acc += init[x]);

  const Time steps = last - first;
  Time stored = steps;
  if (chain.periodic() && chain.span() < steps) {
    period_ = chain.span();
    stored = period_;
  }
  cdf_.reserve(static_cast<std::size_t>(std::max<Time>(stored, 0)));
  for (Time k = 0; k < stored; ++k) {
    const Matrix p = chain.kernel(first + k);
    Matrix c(p.cols(), p.rows());
    for (Eigen::Index x = 0; x < p.rows(); ++x) {
      double s = 0.0;
      for (Eigen::Index y = 0; y < p.cols(); ++y) c(y, x) = (s += p(x, y));
    }
    cdf_.push_back(std::move(c));
  }
}

std::size_t StepSampler::slot(Time t) const {
  const Time k = t - first_;
  return static_cast<std::size_t>(period_ > 0 ? k % period_ : k);
}

Eigen::Index StepSampler::draw(const double* cumulative, Eigen::Index n, double u) {
  // Compare against the scaled total so rounding in the last partial sum cannot
  // leave u above every threshold.
  const double target = u * cumulative[n - 1];
  for (Eigen::Index y = 0; y + 1 < n; ++y) {
    if (target < cumulative[y]) return y;
  }
  return n - 1;
}

Eigen::Index StepSampler::sample_initial(Rng& rng) const {
  return draw(initial_cdf_.data(), initial_cdf_.size(), rng.uniform());
}

Eigen::Index StepSampler::sample_next(Time t, Eigen::Index x, Rng& rng) const {
  const Matrix& c = cdf_[slot(t)];
  return draw(c.data() + x * c.rows(), c.rows(), rng.uniform());
}

}  // namespace asip
