#include "asip/balance.hpp"
#include "asip/battery.hpp"

#include <gtest/gtest.h>

using asip::HexagonLaw;
using asip::PairObservable;
using asip::Time;
using asip::Vector;

TEST(Balance, HexagonLawIsNormalized) {
  for (const char* name : {"three-cyclic", "periodic-alternating", "four-state-ladder"}) {
    const auto chain = asip::battery_chain(name);
    for (Time i = 3; i <= 6; ++i) EXPECT_NEAR(HexagonLaw::independent_copies(chain, i).mass(), 1.0, 1e-14) << name;
  }
  EXPECT_THROW(HexagonLaw::independent_copies(asip::symmetric_chain(0.5), 2), asip::InputError);
}

TEST(Balance, IidSpinsGiveVarianceFour) {
  // f(x_{i-1}) + f(x_i) - f(y_{i-1}) - f(y_i) with four independent +-1 spins.
  const auto chain = asip::battery_chain("iid-rademacher");
  const auto f = PairObservable::from_states(chain);
  const Vector u = Vector::Ones(1);
  for (Time i = 3; i <= 5; ++i) {
    EXPECT_NEAR(asip::balance_variance(f, i, u, HexagonLaw::independent_copies(chain, i)), 4.0, 1e-14);
  }
}

TEST(Balance, VanishesWhenBothPathsAgree) {
  const auto chain = asip::battery_chain("three-periodic-2d");
  const auto f = PairObservable::from_states(chain);
  const Vector u = Vector::Ones(2) / std::sqrt(2.0);
  for (Eigen::Index a = 0; a < 3; ++a) {
    for (Eigen::Index b = 0; b < 3; ++b) {
      for (Eigen::Index c = 0; c < 3; ++c) {
        for (Eigen::Index e = 0; e < 3; ++e) {
          EXPECT_NEAR(asip::balance_function(f, 4, {a, b, c, b, c, e}, u), 0.0, 1e-15);
        }
      }
    }
  }
}

TEST(Balance, RejectsUnnormalizedLaw) {
  const auto chain = asip::battery_chain("symmetric-0.5");
  auto law = HexagonLaw::independent_copies(chain, 3);
  law.atoms.front().second += 0.01;
  EXPECT_THROW(asip::balance_variance(PairObservable::from_states(chain), 3, Vector::Ones(1), law),
               asip::InputError);
}

TEST(Balance, VarianceSandwichOnReferenceChain) {
  const auto chain = asip::battery_chain("symmetric-0.5");
  const auto f = PairObservable::from_states(chain);
  const auto lifted = asip::lift_pairs(chain, f);
  const Vector u = Vector::Ones(1);
  auto balance = [&](Time j) { return asip::balance_variance(f, j, u, HexagonLaw::independent_copies(chain, j)); };
  std::vector<std::pair<Time, Time>> windows;
  for (Time len : {8, 32, 128}) {
    for (Time n = 1; n <= 4; ++n) windows.emplace_back(n, n + len);
  }
  const auto report = asip::verify_var2_sandwich(lifted, u, windows, balance);
  EXPECT_TRUE(report.holds);
  EXPECT_GT(report.a, 0.0);
  EXPECT_LE(report.a, report.c);
  EXPECT_FALSE(report.low_confidence);
}
