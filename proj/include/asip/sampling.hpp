#pragma once

#include "asip/chain.hpp"

#include <cstdint>
#include <random>

namespace asip {

/// SplitMix64 finalizer; maps (seed, stream) to an independent engine seed so
/// per-path streams do not depend on how paths are scheduled.
std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t stream);

class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(derive_stream_seed(seed, stream)) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double normal() { return normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Precomputed cumulative transition rows over a time window, for inverse-CDF
/// sampling of trajectories.
class StepSampler {
 public:
  StepSampler(const ChainSpec& chain, Time first, Time last);

  Time first() const { return first_; }
  Time last() const { return last_; }

  Eigen::Index sample_initial(Rng& rng) const;
  /// Draws xi_{t+1} given xi_t = x, for first <= t < last.
  Eigen::Index sample_next(Time t, Eigen::Index x, Rng& rng) const;

 private:
  static Eigen::Index draw(const double* cumulative, Eigen::Index n, double u);
  std::size_t slot(Time t) const;

  Time first_;
  Time last_;
  Time period_;  // 0 when tables are stored for every time
  Vector initial_cdf_;
  std::vector<Matrix> cdf_;  // row-wise cumulative kernels, transposed: column x holds row x
};

}  // namespace asip
