#include "oracles.hpp"

#include "asip/battery.hpp"
#include "asip/lp_norm.hpp"
#include "asip/moments.hpp"

#include <gtest/gtest.h>

#include <cmath>

using asip::IndexSet;
using asip::LpOptions;
using asip::Matrix;
using asip::Time;
using asip::Vector;

namespace {

LpOptions law_route() {
  LpOptions o;
  o.moment_route = false;
  o.monte_carlo = false;
  return o;
}

Vector first_direction(int d) {
  return d == 1 ? Vector::Ones(1) : Vector(Vector::Ones(d) / std::sqrt(static_cast<double>(d)));
}

}  // namespace

TEST(LpNorm, LawMatchesPathEnumeration) {
  for (const auto& e : asip::default_battery()) {
    const Vector u = first_direction(e.chain.dimension());
    const IndexSet set(std::vector<asip::Interval>{{1, 3}, {5, 6}});
    const auto law = asip::partial_sum_law(e.chain, set, u);
    const auto expected = oracle::centered_law(e.chain, {1, 2, 3, 5, 6}, u);
    if (!law.lattice) {
      // Keys were rounded to the grid: atoms may split, but the CDF between
      // well-separated atoms and the moments are unaffected beyond grid error.
      std::vector<std::pair<double, double>> atoms(expected.begin(), expected.end());
      double below = 0.0;
      for (std::size_t j = 0; j + 1 < atoms.size(); ++j) {
        below += atoms[j].second;
        if (atoms[j + 1].first - atoms[j].first > 1e-6) {
          EXPECT_NEAR(law.cdf(0.5 * (atoms[j].first + atoms[j + 1].first)), below, 1e-13) << e.name;
        }
      }
      double m2 = 0.0;
      for (const auto& [v, p] : atoms) m2 += p * v * v;
      EXPECT_NEAR(law.moment(2.0), m2, 1e-7 * m2) << e.name;
      continue;
    }
    ASSERT_EQ(law.values.size(), expected.size()) << e.name;
    std::size_t i = 0;
    for (const auto& [v, p] : expected) {
      EXPECT_NEAR(law.values[i], v, 1e-12) << e.name;
      EXPECT_NEAR(law.probs[i], p, 1e-14) << e.name;
      ++i;
    }
  }
}

TEST(LpNorm, CentralMomentsMatchEnumeration) {
  for (const auto& e : asip::default_battery()) {
    const Vector u = first_direction(e.chain.dimension());
    for (int k = 1; k <= 6; ++k) {
      const double exact = oracle::central_moment(e.chain, oracle::range(2, 7), u, k);
      EXPECT_NEAR(asip::central_moment(e.chain, IndexSet(2, 7), u, k), exact, 1e-10 * (1.0 + std::abs(exact)))
          << e.name << " k = " << k;
    }
  }
}

TEST(LpNorm, MomentRouteAgreesWithLawRoute) {
  for (const auto& e : asip::default_battery()) {
    const Vector u = first_direction(e.chain.dimension());
    const IndexSet set(4, 40);
    for (double p : {2.0, 4.0, 6.0}) {
      const auto a = asip::lp_norm(e.chain, set, u, p);
      const auto b = asip::lp_norm(e.chain, set, u, p, law_route());
      EXPECT_TRUE(a.exact && b.exact);
      EXPECT_NEAR(a.value, b.value, (b.lattice ? 1e-10 : 1e-8) * b.value) << e.name << " p = " << p;
    }
  }
}

TEST(LpNorm, SecondNormIsStandardDeviation) {
  const auto chain = asip::battery_chain("four-state-ladder");
  const Vector u = Vector::Ones(1);
  for (Time n : {1, 5, 60}) {
    const double sd = std::sqrt(asip::set_variance(chain, IndexSet(1, n), u));
    EXPECT_NEAR(asip::lp_norm_partial_sum(chain, 1, n, u, 2.0, law_route()).value, sd, 1e-11 * (1.0 + sd));
  }
}

TEST(LpNorm, NonEvenOrderUsesTheLaw) {
  const auto chain = asip::battery_chain("symmetric-0.3");
  const Vector u = Vector::Ones(1);
  const double m3 = oracle::central_moment(chain, oracle::range(1, 8), u, 1);  // 0, sanity
  EXPECT_NEAR(m3, 0.0, 1e-14);
  double abs3 = 0.0;
  for (const auto& [v, p] : oracle::centered_law(chain, oracle::range(1, 8), u)) abs3 += p * std::pow(std::abs(v), 3.0);
  EXPECT_NEAR(asip::lp_norm(chain, IndexSet(1, 8), u, 3.0).value, std::cbrt(abs3), 1e-12);
}

TEST(LpNorm, NonDyadicValuesUseTheGrid) {
  Matrix f(2, 1);
  f << 1.0 / 3.0, -0.7;
  Matrix k(2, 2);
  k << 0.6, 0.4, 0.3, 0.7;
  const auto chain = asip::make_chain({{k}, asip::Repeat::Periodic}, Vector::Constant(2, 0.5),
                                      {{f}, asip::Repeat::Periodic});
  const auto law = asip::partial_sum_law(chain, IndexSet(1, 6), Vector::Ones(1));
  EXPECT_FALSE(law.lattice);
  const auto exact = asip::lp_norm(chain, IndexSet(1, 6), Vector::Ones(1), 4.0);
  const auto grid = asip::lp_norm(chain, IndexSet(1, 6), Vector::Ones(1), 4.0, law_route());
  EXPECT_NEAR(exact.value, grid.value, 1e-8);
}

TEST(LpNorm, CapacityOverflow) {
  Matrix f(2, 1);
  f << 1.0, -0.5;  // sums do not coincide, so the support grows every step
  const auto chain = asip::make_chain({{Matrix::Constant(2, 2, 0.5)}, asip::Repeat::Periodic},
                                      Vector::Constant(2, 0.5), {{f}, asip::Repeat::Periodic});
  LpOptions o = law_route();
  o.atom_cap = 50;
  try {
    asip::lp_norm(chain, IndexSet(1, 200), Vector::Ones(1), 3.0, o);
    FAIL() << "expected CapacityError";
  } catch (const asip::CapacityError& e) {
    EXPECT_STREQ(e.what(), "support overflow");
  }
}

TEST(LpNorm, MonteCarloFallbackIsFlagged) {
  const auto chain = asip::battery_chain("symmetric-0.5");
  LpOptions o;
  o.moment_route = false;
  o.atom_cap = 8;
  o.mc_paths = 40000;
  const auto mc = asip::lp_norm(chain, IndexSet(1, 30), Vector::Ones(1), 4.0, o);
  EXPECT_FALSE(mc.exact);
  EXPECT_GT(mc.std_error, 0.0);
  const double exact = asip::lp_norm(chain, IndexSet(1, 30), Vector::Ones(1), 4.0).value;
  EXPECT_LT(std::abs(mc.value - exact), 4.0 * mc.std_error);
}

TEST(LpNorm, RunningMaxMatchesEnumeration) {
  for (const char* name : {"symmetric-0.7", "three-lazy", "sparse-observable"}) {
    const auto chain = asip::battery_chain(name);
    const Vector u = Vector::Ones(1);
    const auto law = asip::running_max_law(chain, 2, 8, u);
    const auto expected = oracle::running_max_law(chain, 2, 8, u);
    ASSERT_EQ(law.values.size(), expected.size()) << name;
    std::size_t i = 0;
    for (const auto& [v, p] : expected) {
      EXPECT_NEAR(law.values[i], v, 1e-12) << name;
      EXPECT_NEAR(law.probs[i], p, 1e-14) << name;
      ++i;
    }
  }
}

TEST(LpNorm, NormsIncreaseWithOrder) {
  for (const auto& e : asip::default_battery()) {
    const Vector u = first_direction(e.chain.dimension());
    double prev = 0.0;
    for (double p : {2.0, 3.0, 4.0, 6.0, 8.0}) {
      const double v = asip::lp_norm(e.chain, IndexSet(1, 12), u, p).value;
      EXPECT_GE(v, prev * (1.0 - 1e-12)) << e.name << " p = " << p;
      prev = v;
    }
  }
}
