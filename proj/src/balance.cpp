#include "asip/balance.hpp"

#include "asip/moments.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace asip {

double HexagonLaw::mass() const {
  double m = 0.0;
  for (const auto& [h, p] : atoms) m += p;
  return m;
}

namespace {

// Law of (xi_{i-1+o}, xi_{i+o}, xi_{i+1+o}) for o = -1 or 0, as a flat list.
std::vector<std::pair<std::array<Eigen::Index, 3>, double>> triple_law(const ChainSpec& chain, Time first) {
  const Vector& pi = chain.marginal(first);
  const Matrix p1 = chain.kernel(first);
  const Matrix p2 = chain.kernel(first + 1);
  std::vector<std::pair<std::array<Eigen::Index, 3>, double>> out;
  for (Eigen::Index a = 0; a < pi.size(); ++a) {
    if (pi[a] <= 0.0) continue;
    for (Eigen::Index b = 0; b < p1.cols(); ++b) {
      if (p1(a, b) <= 0.0) continue;
      for (Eigen::Index c = 0; c < p2.cols(); ++c) {
        const double w = pi[a] * p1(a, b) * p2(b, c);
        if (w > 0.0) out.push_back({{a, b, c}, w});
      }
    }
  }
  return out;
}

}  // namespace

HexagonLaw HexagonLaw::independent_copies(const ChainSpec& chain, Time i, std::size_t cap) {
  if (i < 3) throw InputError("hexagon at position " + std::to_string(i) + " needs i >= 3");
  const auto xs = triple_law(chain, i - 2);
  const auto ys = triple_law(chain, i - 1);
  if (xs.size() * ys.size() > cap) throw CapacityError("hexagon configuration space above enumeration cap");
  HexagonLaw law;
  law.atoms.reserve(xs.size() * ys.size());
  for (const auto& [x, px] : xs) {
    for (const auto& [y, py] : ys) law.atoms.push_back({{x[0], x[1], x[2], y[0], y[1], y[2]}, px * py});
  }
  return law;
}

double balance_function(const PairObservable& f, Time i, const Hexagon& h, const Vector& u) {
  const auto [x2, x1, x0, y1, y0, yn] = h;  // x_{i-2}, x_{i-1}, x_i, y_{i-1}, y_i, y_{i+1}
  return f.value(i - 2, x2, x1, u) + f.value(i - 1, x1, x0, u) + f.value(i, x0, yn, u) -
         f.value(i - 2, x2, y1, u) - f.value(i - 1, y1, y0, u) - f.value(i, y0, yn, u);
}

double balance_variance(const PairObservable& f, Time i, const Vector& u, const HexagonLaw& law,
                        std::size_t cap) {
  if (law.atoms.size() > cap) throw CapacityError("hexagon configuration space above enumeration cap");
  const double mass = law.mass();
  if (std::abs(mass - 1.0) > 1e-12) {
    throw InputError("hexagon law has mass " + std::to_string(mass) + ", expected 1");
  }
  double mean = 0.0;
  double second = 0.0;
  for (const auto& [h, p] : law.atoms) {
    const double g = balance_function(f, i, h, u);
    mean += p * g;
    second += p * g * g;
  }
  return std::max(0.0, second - mean * mean);
}

Var2Report verify_var2_sandwich(const ChainSpec& chain, const Vector& u,
                                const std::vector<std::pair<Time, Time>>& windows,
                                const std::function<double(Time)>& balance) {
  Var2Report report;
  for (const auto& [n, m] : windows) {
    if (m - n < 3) throw InputError("Var2 windows need m - n >= 3");
    Var2Point pt;
    pt.n = n;
    pt.m = m;
    pt.variance = set_variance(chain, IndexSet(n, m), u);
    for (Time j = n + 3; j <= m; ++j) pt.balance_sum += balance(j);
    report.points.push_back(pt);
  }
  report.low_confidence = report.points.size() <= 1;
  if (report.points.empty()) return report;

  double u_max = 0.0;
  for (const auto& pt : report.points) u_max = std::max(u_max, pt.balance_sum);
  if (u_max > 0.0) {
    report.a = std::numeric_limits<double>::infinity();
    report.c = 0.0;
    for (const auto& pt : report.points) {
      if (pt.balance_sum < 0.5 * u_max) continue;
      const double ratio = pt.variance / pt.balance_sum;
      report.a = std::min(report.a, ratio);
      report.c = std::max(report.c, ratio);
    }
  }
  for (const auto& pt : report.points) {
    report.b = std::max(report.b, report.a * pt.balance_sum - pt.variance);
    report.d = std::max(report.d, pt.variance - report.c * pt.balance_sum);
  }
  for (const auto& pt : report.points) {
    const double lo = report.a * pt.balance_sum - report.b;
    const double hi = report.c * pt.balance_sum + report.d;
    const double tol = 1e-9 * (1.0 + std::abs(pt.variance));
    if (pt.variance < lo - tol || pt.variance > hi + tol) report.holds = false;
  }

  Time shortest = report.points.front().m - report.points.front().n;
  Time longest = shortest;
  for (const auto& pt : report.points) {
    shortest = std::min(shortest, pt.m - pt.n);
    longest = std::max(longest, pt.m - pt.n);
  }
  auto mean_ratio = [&](Time len) {
    double acc = 0.0;
    int count = 0;
    for (const auto& pt : report.points) {
      if (pt.m - pt.n == len && pt.balance_sum > 0.0) {
        acc += pt.variance / pt.balance_sum;
        ++count;
      }
    }
    return count > 0 ? acc / count : 0.0;
  };
  report.short_ratio = mean_ratio(shortest);
  report.long_ratio = mean_ratio(longest);
  return report;
}

}  // namespace asip
