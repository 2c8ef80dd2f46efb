#include "asip/battery.hpp"
#include "asip/blocks.hpp"
#include "asip/moments.hpp"
#include "asip/sampling.hpp"
#include "asip/simulation.hpp"
#include "asip/statistics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>

using asip::Matrix;
using asip::Time;
using asip::Vector;

namespace {

asip::SampleRequest request(Time horizon, std::size_t paths, std::vector<Time> checkpoints, int d = 1) {
  asip::SampleRequest r;
  r.horizon = horizon;
  r.paths = paths;
  r.seed = 42;
  r.checkpoints = std::move(checkpoints);
  r.directions = asip::direction_grid(d, 3);
  return r;
}

}  // namespace

TEST(Sampling, StreamSeedsAreDistinct) {
  EXPECT_EQ(asip::derive_stream_seed(1, 2), asip::derive_stream_seed(1, 2));
  EXPECT_NE(asip::derive_stream_seed(1, 2), asip::derive_stream_seed(1, 3));
  EXPECT_NE(asip::derive_stream_seed(1, 2), asip::derive_stream_seed(2, 2));
}

TEST(Sampling, TransitionFrequencies) {
  const auto chain = asip::battery_chain("four-state-ladder");
  const asip::StepSampler sampler(chain, 1, 2);
  std::vector<int> counts(4, 0);
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    asip::Rng rng(9, static_cast<std::uint64_t>(i));
    counts[static_cast<std::size_t>(sampler.sample_next(1, 0, rng))]++;
  }
  const Matrix k = chain.kernel(1);
  for (int y = 0; y < 4; ++y) {
    const double p = k(0, y);
    EXPECT_LT(std::abs(counts[static_cast<std::size_t>(y)] / static_cast<double>(n) - p), 4.0 * std::sqrt(p * (1 - p) / n));
  }
}

TEST(Simulation, WorkerCountDoesNotChangeResults) {
  const auto chain = asip::battery_chain("three-periodic-2d");
  auto req = request(80, 301, {1, 10, 80}, 2);
  req.lil = true;
  req.threads = 1;
  const auto one = asip::sample_paths(chain, req);
  req.threads = 3;
  const auto three = asip::sample_paths(chain, req);
  EXPECT_EQ(one.sums, three.sums);
  EXPECT_EQ(one.terms, three.terms);
  EXPECT_EQ(one.lil, three.lil);
}

TEST(Simulation, WorkerEnvironmentVariable) {
  setenv("ASIP_THREADS", "3", 1);
  EXPECT_EQ(asip::worker_count(), 3);
  setenv("ASIP_THREADS", "three", 1);
  EXPECT_THROW(asip::worker_count(), asip::InputError);
  setenv("ASIP_THREADS", "0", 1);
  EXPECT_THROW(asip::worker_count(), asip::InputError);
  unsetenv("ASIP_THREADS");
  EXPECT_EQ(asip::worker_count(), 1);
}

TEST(Simulation, RejectsBadRequests) {
  const auto chain = asip::symmetric_chain(0.5);
  EXPECT_THROW(asip::sample_paths(chain, request(10, 5, {3, 2})), asip::InputError);
  EXPECT_THROW(asip::sample_paths(chain, request(10, 5, {11})), asip::InputError);
  EXPECT_THROW(asip::sample_paths(chain, request(10, 0, {1})), asip::InputError);
}

TEST(Simulation, MomentsAgreeWithExactValues) {
  const auto chain = asip::battery_chain("asymmetric-point-start");
  const auto batch = asip::sample_paths(chain, request(60, 20000, {1, 5, 60}));
  for (std::size_t c = 0; c < batch.checkpoints.size(); ++c) {
    const Time n = batch.checkpoints[c];
    const auto m = asip::mean_estimate(batch.term_column(c, 0));
    const double exact_mean = asip::mean_obs(chain, n)[0];
    if (m.std_error == 0.0) {
      EXPECT_DOUBLE_EQ(m.value, exact_mean);
    } else {
      EXPECT_LT(std::abs(m.value - exact_mean), 4.0 * m.std_error) << n;
    }
    const auto v = asip::variance_estimate(batch.column(c, 0));
    const double exact_var = asip::set_variance(chain, asip::IndexSet(1, n), Vector::Ones(1));
    EXPECT_LE(std::abs(v.value - exact_var), 4.0 * v.std_error + 1e-12) << n;
  }
}

TEST(Simulation, KsSkipsDegenerateCheckpoints) {
  Matrix zero = Matrix::Zero(2, 1);
  Matrix spins(2, 1);
  spins << 1.0, -1.0;
  Matrix k(2, 2);
  k << 0.5, 0.5, 0.5, 0.5;
  const auto chain = asip::make_chain({{k}, asip::Repeat::Periodic}, Vector::Constant(2, 0.5),
                                      {{zero, spins}, asip::Repeat::Periodic});
  const auto batch = asip::sample_paths(chain, request(400, 2000, {1, 400}));
  const auto ks = asip::clt_diagnostic(chain, batch);
  ASSERT_EQ(ks.size(), 2u);
  EXPECT_TRUE(ks[0].skipped);
  EXPECT_FALSE(ks[1].skipped);
  EXPECT_NEAR(ks[1].std_error, asip::kKolmogorovSd / std::sqrt(2000.0), 1e-15);
}

TEST(Simulation, SurrogateMatchesBlockCovariances) {
  const auto chain = asip::battery_chain("product-0.3-0.7-2d");
  const auto part = asip::build_blocks(chain, Vector::Unit(2, 0), 20.0, 4, 300);
  const auto dirs = asip::direction_grid(2, 4);
  const auto sur = asip::gaussian_surrogate(part, 5, dirs, 4000, 11);
  EXPECT_EQ(sur.clipped, 0u);
  for (std::size_t j = 0; j < 5; ++j) {
    const Matrix back = sur.roots[j] * sur.roots[j];
    EXPECT_LT((back - part.blocks[j].theta_cov).cwiseAbs().maxCoeff(), 1e-10);
  }
  for (const auto& u : dirs) {
    double exact = 0.0;
    for (std::size_t j = 0; j < 5; ++j) exact += u.dot(part.blocks[j].theta_cov * u);
    EXPECT_NEAR(sur.variance(4, u), exact, 1e-10 * exact);
  }
  const auto col = sur.column(4, 0);
  const auto v = asip::variance_estimate(col);
  EXPECT_LT(std::abs(v.value - sur.variance(4, dirs[0])), 4.0 * v.std_error);
}

TEST(Simulation, SurrogateIsDeterministic) {
  const auto chain = asip::symmetric_chain(0.5);
  const auto part = asip::build_blocks(chain, Vector::Ones(1), 20.0, 4, 200);
  const auto a = asip::gaussian_surrogate(part, 3, {Vector::Ones(1)}, 500, 5, 1);
  const auto b = asip::gaussian_surrogate(part, 3, {Vector::Ones(1)}, 500, 5, 4);
  EXPECT_EQ(a.sums, b.sums);
}

TEST(Simulation, IidVarianceGapIsZero) {
  const auto chain = asip::battery_chain("iid-rademacher");
  const auto part = asip::build_blocks(chain, Vector::Ones(1), 5.0, 2, 300);
  const auto vm = asip::variance_matching_diagnostic(chain, part, {Vector::Ones(1)}, 0.1, 300);
  ASSERT_FALSE(vm.points.empty());
  for (const auto& pt : vm.points) EXPECT_NEAR(pt.gap, 0.0, 1e-10);
}

TEST(Simulation, RateDiagnosticShrinksAgainstOwnSurrogate) {
  const auto chain = asip::symmetric_chain(0.5);
  const auto part = asip::build_blocks(chain, Vector::Ones(1), 30.0, 6, 600);
  std::vector<Time> ends;
  for (const auto& b : part.blocks) {
    if (b.i_last <= 600) ends.push_back(b.i_last);
  }
  auto req = request(600, 4000, ends);
  const auto batch = asip::sample_paths(chain, req);
  const auto sur = asip::gaussian_surrogate(part, ends.size(), req.directions, 4000, 42);
  const auto rate = asip::rate_scaling_diagnostic(chain, batch, sur, 0.1);
  ASSERT_EQ(rate.size(), ends.size());
  for (const auto& pt : rate) {
    EXPECT_GE(pt.w1, 0.0);
    EXPECT_GT(pt.w1_std_error, 0.0);
    EXPECT_LT(pt.w1, 0.2 * std::sqrt(pt.s_n));
  }
}

TEST(Simulation, LilNormalizers) {
  const auto chain = asip::symmetric_chain(0.5);
  const auto w = asip::lil_normalizers(chain, 50, Vector::Ones(1));
  const double threshold = std::exp(std::numbers::e);
  const auto v = asip::prefix_variances(chain, 1, 50, Vector::Ones(1));
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (v[i] < threshold) {
      EXPECT_EQ(w[i], 0.0);
    } else {
      EXPECT_NEAR(w[i], 1.0 / std::sqrt(2.0 * v[i] * std::log(std::log(v[i]))), 1e-15);
    }
  }
}
