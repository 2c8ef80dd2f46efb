#include "asip/battery.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <utility>

namespace asip {

namespace {

Matrix rows(std::initializer_list<std::initializer_list<double>> values) {
  Matrix m(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(values.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : values) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

Matrix flip(double lambda) {
  const double stay = 0.5 * (1.0 + lambda);
  return rows({{stay, 1.0 - stay}, {1.0 - stay, stay}});
}

Matrix spins() { return rows({{1.0}, {-1.0}}); }

// States (s1, s2) in order (+,+), (+,-), (-,+), (-,-).
Matrix product_table(double scale1, double scale2) {
  return rows({{scale1, scale2}, {scale1, -scale2}, {-scale1, scale2}, {-scale1, -scale2}});
}

ChainSpec homogeneous(Matrix kernel, Vector initial, Matrix table) {
  return make_chain({{std::move(kernel)}, Repeat::Periodic}, std::move(initial),
                    {{std::move(table)}, Repeat::Periodic});
}

Vector uniform(Eigen::Index n) { return Vector::Constant(n, 1.0 / static_cast<double>(n)); }

}  // namespace

ChainSpec symmetric_chain(double lambda) { return homogeneous(flip(lambda), uniform(2), spins()); }

ChainSpec sticky_chain() {
  return homogeneous(rows({{0.999, 0.001}, {0.01, 0.99}}), vec({1.0 / 11.0, 10.0 / 11.0}), spins());
}

std::vector<BatteryEntry> default_battery() {
  std::vector<BatteryEntry> out;
  auto add = [&out](std::string name, ChainSpec chain, bool iid = false) {
    out.push_back({std::move(name), std::move(chain), iid});
  };

  add("iid-rademacher", symmetric_chain(0.0), true);
  add("symmetric-0.1", symmetric_chain(0.1));
  add("symmetric-0.3", symmetric_chain(0.3));
  add("symmetric-0.5", symmetric_chain(0.5));
  add("symmetric-0.7", symmetric_chain(0.7));
  add("symmetric-0.9", symmetric_chain(0.9));
  add("asymmetric-stationary",
      homogeneous(rows({{0.8, 0.2}, {0.4, 0.6}}), vec({2.0 / 3.0, 1.0 / 3.0}), spins()));
  add("asymmetric-point-start",
      homogeneous(rows({{0.7, 0.3}, {0.2, 0.8}}), vec({1.0, 0.0}), rows({{1.0}, {0.0}})));
  add("periodic-alternating",
      make_chain({{rows({{0.9, 0.1}, {0.3, 0.7}}), rows({{0.4, 0.6}, {0.5, 0.5}})}, Repeat::Periodic},
                 uniform(2), {{spins()}, Repeat::Periodic}));

  const Matrix cyclic = rows({{0.6, 0.3, 0.1}, {0.1, 0.6, 0.3}, {0.3, 0.1, 0.6}});
  const Matrix lazy3 = rows({{0.5, 0.25, 0.25}, {0.25, 0.5, 0.25}, {0.25, 0.25, 0.5}});
  add("three-cyclic", homogeneous(cyclic, uniform(3), rows({{1.0}, {0.0}, {-1.0}})));
  add("three-cyclic-2d", homogeneous(cyclic, uniform(3), rows({{1.0, 0.0}, {0.0, 1.0}, {-1.0, -1.0}})));
  add("three-lazy", homogeneous(lazy3, vec({1.0, 0.0, 0.0}), rows({{1.0}, {-0.5}, {-0.5}})));
  add("three-periodic-2d",
      make_chain({{cyclic, lazy3}, Repeat::Periodic}, uniform(3),
                 {{rows({{1.0, 0.5}, {-1.0, 0.5}, {0.0, -1.0}})}, Repeat::Periodic}));

  const Matrix iid4 = Matrix::Constant(4, 4, 0.25);
  add("product-iid-2d", homogeneous(iid4, uniform(4), product_table(1.0, 1.0)), true);
  add("product-iid-scaled-2d", homogeneous(iid4, uniform(4), product_table(1.0, 2.0)), true);
  add("product-0.5-2d",
      homogeneous(Eigen::kroneckerProduct(flip(0.5), flip(0.5)).eval(), uniform(4), product_table(1.0, 1.0)));
  add("product-0.3-0.7-2d",
      homogeneous(Eigen::kroneckerProduct(flip(0.3), flip(0.7)).eval(), uniform(4), product_table(1.0, 1.0)));
  add("four-state-ladder",
      homogeneous(rows({{0.4, 0.3, 0.2, 0.1}, {0.25, 0.25, 0.25, 0.25}, {0.1, 0.2, 0.3, 0.4}, {0.3, 0.1, 0.1, 0.5}}),
                  vec({0.0, 1.0, 0.0, 0.0}), rows({{1.0}, {0.5}, {-0.5}, {-1.0}})));

  MixtureWeights sine;
  sine.kind = MixtureWeights::Kind::Sine;
  sine.period = 16;
  sine.center = 0.5;
  sine.amplitude = 0.4;
  add("mixture-sine", make_mixture_chain(flip(0.9), flip(0.0), sine, uniform(2), {{spins()}, Repeat::Periodic}));

  MixtureWeights power;
  power.kind = MixtureWeights::Kind::Power;
  power.gamma = 1.0;
  power.start = 1.0;
  power.limit = 0.5;
  add("mixture-power", make_mixture_chain(flip(0.7), flip(0.1), power, uniform(2), {{spins()}, Repeat::Periodic}));

  add("sparse-observable",
      make_chain({{flip(0.5)}, Repeat::Periodic}, uniform(2),
                 {{spins(), rows({{0.0}, {0.0}}), rows({{0.5}, {-0.5}})}, Repeat::Periodic}));
  add("alternating-scale",
      make_chain({{flip(0.3)}, Repeat::Periodic}, uniform(2),
                 {{spins(), rows({{0.25}, {-0.25}})}, Repeat::Periodic}));
  return out;
}

ChainSpec battery_chain(const std::string& name) {
  if (name == "sticky") return sticky_chain();
  std::string names = "sticky";
  for (auto& entry : default_battery()) {
    if (entry.name == name) return entry.chain;
    names += ", " + entry.name;
  }
  throw InputError("unknown battery chain '" + name + "'; known: " + names);
}

}  // namespace asip
