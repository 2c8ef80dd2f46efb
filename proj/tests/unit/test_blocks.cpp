#include "asip/battery.hpp"
#include "asip/blocks.hpp"
#include "asip/chain_io.hpp"
#include "asip/moments.hpp"

#include <gtest/gtest.h>

#include <cmath>

using asip::Matrix;
using asip::Time;
using asip::Vector;

namespace {

// sum_{m >= 1} (C delta^{r m})^{e}, summed term by term.
double separation_series(double c, double delta, Time r, double e) {
  double s = 0.0;
  for (int m = 1; m <= 4000; ++m) s += std::pow(c * std::pow(delta, static_cast<double>(r * m)), e);
  return s;
}

}  // namespace

TEST(Separation, SmallestCertifiedGap) {
  const double target = 1.0 / 256.0;
  for (double delta : {0.1, 0.5, 0.9}) {
    const auto s = asip::select_separation(0.25, delta, 4.0, 8.0);
    EXPECT_LT(separation_series(0.25, delta, s.r, 0.5), target) << delta;
    if (s.r > 1) EXPECT_GE(separation_series(0.25, delta, s.r - 1, 0.5), target) << delta;
  }
  EXPECT_EQ(asip::select_separation(0.25, 0.5, 4.0, 8.0).r, 15);
}

TEST(Separation, Degenerate) {
  EXPECT_EQ(asip::select_separation(0.0, 0.5, 4.0, 8.0).r, 1);
  EXPECT_THROW(asip::select_separation(0.25, 1.0, 4.0, 8.0), asip::InputError);
  EXPECT_THROW(asip::select_separation(0.25, 0.5, 2.0, 8.0), asip::InputError);
}

TEST(Amplitude, QZeroSeries) {
  const double c = 0.25, delta = 0.5, p = 4.0, cp = 8.0, L = 1.0;
  const Time r = 15;
  double series = 0.0;
  for (int m = 1; m <= 4000; ++m) series += std::pow(c * std::pow(delta, m), 2.0 - 2.0 / p);
  const double expected = 2.0 * cp * (1.0 + r * L) * (1.0 + L) * series;
  EXPECT_NEAR(asip::compute_q0(r, p, L, c, delta, cp), expected, 1e-12 * expected);
  EXPECT_THROW(asip::compute_q(1.0, r, p, L, c, delta, cp), asip::InputError);
}

TEST(Amplitude, SmallestCertifiedAmplitude) {
  for (double q0 : {0.0, 1e-6, 0.78, 12.0, 2196.0}) {
    const auto a = asip::select_amplitude(q0);
    EXPECT_GE(a.certificate, 0.0);
    EXPECT_GE(a.a, 4.0 * asip::q_of_a(q0, a.a) + 1.0);
    EXPECT_NEAR(a.closed_form, a.bisection, 1e-9 * a.a);
    if (a.a > 1.0) {
      const double below = a.a * (1.0 - 1e-9);
      EXPECT_LT(below - 4.0 * asip::q_of_a(q0, below) - 1.0, 0.0);
    }
  }
  EXPECT_EQ(asip::select_amplitude(0.0).a, 1.0);
}

TEST(Blocks, IidOverrideExample) {
  const auto chain = asip::load_chain(std::string(ASIP_TEST_DATA) + "/iid.json");
  const auto part = asip::build_blocks(chain, Vector::Ones(1), 9.0, 2, 60);
  ASSERT_FALSE(part.blocks.empty());
  EXPECT_EQ(part.blocks[0].a, 1);
  EXPECT_EQ(part.blocks[0].b, 9);
  EXPECT_EQ(part.blocks[1].a, 12);
  EXPECT_EQ(part.blocks[1].b, 20);
  EXPECT_TRUE(asip::check_structure(part).empty());
  EXPECT_EQ(part.k_of(8), 0);
  EXPECT_EQ(part.k_of(9), 1);
  EXPECT_EQ(part.k_of(19), 1);
  EXPECT_EQ(part.k_of(20), 2);
  const auto v = asip::verify_partition(chain, part, 60);
  EXPECT_TRUE(v.passed());
}

TEST(Blocks, NormsStayInBand) {
  for (const char* name : {"symmetric-0.7", "three-cyclic-2d", "sparse-observable", "mixture-power"}) {
    const auto chain = asip::battery_chain(name);
    const auto part = asip::build_blocks(chain, Vector::Unit(chain.dimension(), 0), 40.0, 3, 2000);
    for (const auto& b : part.blocks) {
      EXPECT_GE(b.norm, std::sqrt(40.0));
      EXPECT_LE(b.norm, std::sqrt(40.0) + part.bound);
      EXPECT_NEAR(b.variance, asip::set_variance(chain, part.m_set(&b - part.blocks.data()),
                                                 Vector::Unit(chain.dimension(), 0)),
                  1e-9 * b.variance);
    }
    EXPECT_TRUE(asip::check_structure(part).empty()) << name;
    EXPECT_GE(part.blocks.back().i_last, 2000);
  }
}

TEST(Blocks, MinimumBlockCount) {
  asip::BuildOptions o;
  o.min_blocks = 6;
  o.scan_limit = 100000;
  const auto part = asip::build_blocks(asip::symmetric_chain(0.5), Vector::Ones(1), 30.0, 4, 1, o);
  EXPECT_EQ(part.blocks.size(), 6u);
}

TEST(Blocks, StarvationNamesTheIndex) {
  const auto chain = asip::load_chain(std::string(ASIP_TEST_DATA) + "/starved.json");
  try {
    asip::build_blocks(chain, Vector::Ones(1), 4.0, 1, 10);
    FAIL() << "expected ConstructionError";
  } catch (const asip::ConstructionError& e) {
    EXPECT_NE(std::string(e.what()).find("starved at index 10"), std::string::npos) << e.what();
  }
}

TEST(Blocks, StructureDetectsTampering) {
  auto part = asip::build_blocks(asip::symmetric_chain(0.5), Vector::Ones(1), 20.0, 3, 200);
  part.blocks[1].a += 1;
  EXPECT_FALSE(asip::check_structure(part).empty());
}

TEST(Blocks, DirectionGrid) {
  for (int d : {1, 2, 3, 5}) {
    const auto g = asip::direction_grid(d, 16);
    EXPECT_GE(g.size(), 1u);
    for (const auto& u : g) {
      EXPECT_EQ(u.size(), d);
      EXPECT_NEAR(u.norm(), 1.0, 1e-12);
    }
  }
}

TEST(Blocks, CertifiedPipelineOnReferenceChain) {
  const auto chain = asip::symmetric_chain(0.5);
  const auto sep = asip::select_separation(0.25, 0.5, 4.0, 8.0);
  const double q0 = asip::compute_q0(sep.r, 4.0, 1.0, 0.25, 0.5, 8.0);
  const auto amp = asip::select_amplitude(q0);
  const auto q = asip::compute_q(amp.a, sep.r, 4.0, 1.0, 0.25, 0.5, 8.0);
  asip::BuildOptions o;
  o.min_blocks = 4;
  o.scan_limit = 1000000;
  const auto part = asip::build_blocks(chain, Vector::Ones(1), amp.a, sep.r, 1, o);
  asip::VerifyOptions vo;
  vo.q_of_amplitude = q.q;
  vo.separation_certified = true;
  const auto v = asip::verify_partition(chain, part, part.blocks.back().i_last, vo);
  EXPECT_TRUE(v.sandwich_applicable);
  EXPECT_TRUE(v.sandwich_ok);
  EXPECT_GE(v.sandwich_min, 0.5);
  EXPECT_LE(v.sandwich_max, 1.5);
  EXPECT_TRUE(v.deviation_applicable) << v.deviation_note;
  EXPECT_TRUE(v.deviation_ok);
  EXPECT_TRUE(v.passed());
}

TEST(Blocks, DeviationBoundCanFailNearIndependence) {
  // With Q0 -> 0 the allowance 2Q(A)/A vanishes, but the r separating indices
  // of each I_j still carry variance, so the ratio stays about r / (|M_j| + r).
  // Values +-3/4 put two-step blocks (variance 9/8) inside [A, 2A] with A near 1.
  const double lambda = 1e-6;
  Matrix k(2, 2);
  k << (1 + lambda) / 2, (1 - lambda) / 2, (1 - lambda) / 2, (1 + lambda) / 2;
  Matrix f(2, 1);
  f << 0.75, -0.75;
  const auto chain = asip::make_chain({{k}, asip::Repeat::Periodic}, Vector::Constant(2, 0.5),
                                      {{f}, asip::Repeat::Periodic});
  const double c = 0.25 * lambda, delta = lambda;
  const auto sep = asip::select_separation(c, delta, 4.0, 8.0);
  const double q0 = asip::compute_q0(sep.r, 4.0, chain.bound(), c, delta, 8.0);
  const auto amp = asip::select_amplitude(q0);
  ASSERT_GT(amp.a, 1.0);
  asip::BuildOptions o;
  o.min_blocks = 4;
  const auto part = asip::build_blocks(chain, Vector::Ones(1), amp.a, sep.r, 1, o);
  asip::VerifyOptions vo;
  vo.q_of_amplitude = asip::q_of_a(q0, amp.a);
  vo.separation_certified = true;
  const auto v = asip::verify_partition(chain, part, part.blocks.back().i_last, vo);
  ASSERT_TRUE(v.deviation_applicable) << v.deviation_note;
  EXPECT_GT(v.deviation_max, v.deviation_bound);
  EXPECT_FALSE(v.deviation_ok);
}

TEST(CovarianceInequality, HoldsOnBlocks) {
  const auto chain = asip::symmetric_chain(0.5);
  const auto part = asip::build_blocks(chain, Vector::Ones(1), 30.0, 15, 400);
  for (std::size_t j = 0; j + 1 < part.blocks.size(); ++j) {
    const auto c = asip::covariance_inequality_check(chain, part.m_set(j), part.m_set(j + 1), Vector::Ones(1), 4.0);
    EXPECT_TRUE(c.exact);
    EXPECT_TRUE(c.pass) << c.cov << " vs " << c.bound;
    EXPECT_EQ(c.r, 16);
    EXPECT_NEAR(c.alpha, std::pow(0.5, 16) / 4.0, 1e-15);
  }
}

TEST(CovarianceInequality, SingletonsAtEveryLag) {
  for (const auto& e : asip::default_battery()) {
    const Vector u = Vector::Unit(e.chain.dimension(), 0);
    for (Time k = 1; k <= 6; ++k) {
      const auto c = asip::covariance_inequality_check(e.chain, asip::IndexSet(2, 2), asip::IndexSet(2 + k, 2 + k), u, 4.0);
      EXPECT_TRUE(c.pass) << e.name << " k = " << k;
    }
  }
}

TEST(TailStatistics, BoundedByTrivialBound) {
  const auto chain = asip::symmetric_chain(0.5);
  const auto part = asip::build_blocks(chain, Vector::Ones(1), 30.0, 6, 300);
  const auto t = asip::tail_statistics(chain, part, 4.0, 300, 100, 7);
  EXPECT_FALSE(t.d_norms.empty());
  for (double d : t.d_norms) EXPECT_LE(d, t.trivial_bound);
  EXPECT_TRUE(t.bounded);
  EXPECT_EQ(t.path_max.size(), t.epsilons.size());
}
