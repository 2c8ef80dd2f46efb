#pragma once

#include "asip/chain.hpp"

#include <array>
#include <functional>
#include <utility>
#include <vector>

namespace asip {

/// A hexagon at position i is (x_{i-2}, x_{i-1}, x_i; y_{i-1}, y_i, y_{i+1}).
using Hexagon = std::array<Eigen::Index, 6>;

/// Finite law on hexagons at one position.
struct HexagonLaw {
  std::vector<std::pair<Hexagon, double>> atoms;

  double mass() const;

  /// law(xi_{i-2}, xi_{i-1}, xi_i) (x) law(xi'_{i-1}, xi'_i, xi'_{i+1}) for two
  /// independent copies of the chain.
  static HexagonLaw independent_copies(const ChainSpec& chain, Time i, std::size_t cap = 1000000);
};

/// Gamma_i for the pair observable f projected on u.
double balance_function(const PairObservable& f, Time i, const Hexagon& h, const Vector& u);

/// u_i^2(f; u): variance of Gamma_i under the hexagon law, by enumeration.
/// Throws InputError when the law's mass is not 1 and CapacityError past `cap`.
double balance_variance(const PairObservable& f, Time i, const Vector& u, const HexagonLaw& law,
                        std::size_t cap = 1000000);

struct Var2Point {
  Time n = 1;
  Time m = 4;
  double variance = 0.0;     // Var(S_{n,m} . u)
  double balance_sum = 0.0;  // sum_{j=n+3}^{m} u_j^2
};

struct Var2Report {
  std::vector<Var2Point> points;
  double a = 1.0;
  double b = 0.0;
  double c = 1.0;
  double d = 0.0;
  double short_ratio = 0.0;  // mean Var / sum over the shortest windows
  double long_ratio = 0.0;   // same over the longest windows
  bool low_confidence = false;
  bool holds = true;         // both inequalities hold at every point with the fitted constants
};

/// Fits constants for A sum u_j^2 - B <= Var(S_{n,m} . u) <= C sum u_j^2 + D.
/// `chain` carries X_j = f_j(xi_j, xi_{j+1}) (see lift_pairs); `balance(j)` is u_j^2.
Var2Report verify_var2_sandwich(const ChainSpec& chain, const Vector& u,
                                const std::vector<std::pair<Time, Time>>& windows,
                                const std::function<double(Time)>& balance);

}  // namespace asip
