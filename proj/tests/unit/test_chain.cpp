#include "oracles.hpp"

#include "asip/battery.hpp"
#include "asip/chain.hpp"
#include "asip/chain_io.hpp"

#include <gtest/gtest.h>

#include <string>

using asip::ChainSpec;
using asip::Matrix;
using asip::Vector;

namespace {

std::string data(const std::string& name) { return std::string(ASIP_TEST_DATA) + "/" + name; }

Matrix m2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST(Chain, MarginalsMatchPathEnumeration) {
  for (const auto& entry : asip::default_battery()) {
    const auto paths = oracle::enumerate_paths(entry.chain, 6);
    for (asip::Time j = 1; j <= 6; ++j) {
      Vector law = Vector::Zero(entry.chain.states(j));
      for (const auto& p : paths) law[p.states[static_cast<std::size_t>(j - 1)]] += p.prob;
      EXPECT_LT((law - entry.chain.marginal(j)).cwiseAbs().maxCoeff(), 1e-14) << entry.name << " j = " << j;
    }
  }
}

TEST(Chain, TransitionIsKernelProduct) {
  const ChainSpec chain = asip::battery_chain("periodic-alternating");
  EXPECT_TRUE(chain.transition(3, 3).isIdentity());
  const Matrix expected = chain.kernel(2) * chain.kernel(3) * chain.kernel(4);
  EXPECT_LT((chain.transition(2, 5) - expected).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(chain.transition(5, 2), asip::InputError);
}

TEST(Chain, RejectsNonStochasticKernel) {
  EXPECT_THROW(asip::make_chain({{m2(0.75, 0.35, 0.25, 0.75)}, asip::Repeat::Periodic}, Vector::Constant(2, 0.5),
                                {{Matrix::Ones(2, 1)}, asip::Repeat::Periodic}),
               asip::InputError);
  EXPECT_THROW(asip::make_chain({{m2(1.1, -0.1, 0.25, 0.75)}, asip::Repeat::Periodic}, Vector::Constant(2, 0.5),
                                {{Matrix::Ones(2, 1)}, asip::Repeat::Periodic}),
               asip::InputError);
}

TEST(Chain, RejectsObservableAboveDeclaredBound) {
  Matrix f(2, 1);
  f << 2.0, -1.0;
  EXPECT_THROW(asip::make_chain({{m2(0.5, 0.5, 0.5, 0.5)}, asip::Repeat::Periodic}, Vector::Constant(2, 0.5),
                                {{f}, asip::Repeat::Periodic}, 1.0),
               asip::InputError);
}

TEST(Chain, ExplicitScheduleHasFiniteHorizon) {
  const ChainSpec chain = asip::load_chain(data("starved.json"));
  EXPECT_EQ(chain.horizon(), 10);
  EXPECT_THROW(chain.marginal(11), asip::InputError);
}

TEST(ChainIo, ParsesReferenceChain) {
  const ChainSpec chain = asip::load_chain(data("symmetric.json"));
  EXPECT_EQ(chain.dimension(), 1);
  EXPECT_DOUBLE_EQ(chain.bound(), 1.0);
  EXPECT_DOUBLE_EQ(chain.kernel(7)(0, 0), 0.75);
  EXPECT_DOUBLE_EQ(chain.observable(3)(1, 0), -1.0);
}

TEST(ChainIo, MissingFileNamesThePath) {
  try {
    asip::load_chain(data("nope.json"));
    FAIL() << "expected InputError";
  } catch (const asip::InputError& e) {
    EXPECT_NE(std::string(e.what()).find("nope.json"), std::string::npos);
  }
}

TEST(ChainIo, MalformedKernelIsInputError) {
  EXPECT_THROW(asip::load_chain(data("malformed_kernel.json")), asip::InputError);
}

TEST(ChainIo, MixtureDocument) {
  const auto doc = nlohmann::json::parse(R"({
    "initial": [0.5, 0.5],
    "kernels": {"mixture": {"components": [[[0.95, 0.05], [0.05, 0.95]], [[0.5, 0.5], [0.5, 0.5]]],
                            "weights": {"kind": "sine", "period": 8, "amplitude": 0.3}}},
    "observable": [1.0, -1.0]
  })");
  const ChainSpec chain = asip::parse_chain(doc);
  for (asip::Time j = 1; j <= 16; ++j) {
    const double w = 0.5 + 0.3 * std::sin(2.0 * 3.14159265358979323846 * static_cast<double>(j) / 8.0);
    EXPECT_NEAR(chain.kernel(j)(0, 0), w * 0.95 + (1.0 - w) * 0.5, 1e-15);
  }
}

TEST(Chain, MixtureWeightOutOfRange) {
  asip::MixtureWeights w;
  w.period = 4;
  w.center = 0.5;
  w.amplitude = 0.7;
  EXPECT_THROW(asip::make_mixture_chain(m2(1, 0, 0, 1), m2(0.5, 0.5, 0.5, 0.5), w, Vector::Constant(2, 0.5),
                                        {{Matrix::Ones(2, 1)}, asip::Repeat::Periodic}),
               asip::InputError);
}

TEST(Chain, LiftedPairsReproduceStateObservable) {
  const ChainSpec chain = asip::battery_chain("three-cyclic");
  const ChainSpec lifted = asip::lift_pairs(chain, asip::PairObservable::from_states(chain));
  const Vector u = Vector::Ones(1);
  for (asip::Time j = 1; j <= 5; ++j) {
    const double direct = chain.marginal(j).dot(chain.projected(j, u));
    const double pairs = lifted.marginal(j).dot(lifted.projected(j, u));
    EXPECT_NEAR(direct, pairs, 1e-15);
  }
}

TEST(Chain, UniformEllipticity) {
  const auto iid = asip::check_uniform_ellipticity(asip::battery_chain("iid-rademacher"), 0.25);
  EXPECT_TRUE(iid.passed());
  const auto sticky = asip::check_uniform_ellipticity(asip::sticky_chain(), 0.25);
  EXPECT_FALSE(sticky.passed());
}

TEST(Battery, CoversTheAdvertisedRange) {
  const auto battery = asip::default_battery();
  EXPECT_GE(battery.size(), 20u);
  bool d1 = false, d2 = false;
  for (const auto& e : battery) {
    const auto n = e.chain.states(1);
    EXPECT_GE(n, 2);
    EXPECT_LE(n, 4);
    (e.chain.dimension() == 1 ? d1 : d2) = true;
  }
  EXPECT_TRUE(d1 && d2);
  EXPECT_THROW(asip::battery_chain("no-such-chain"), asip::InputError);
}
