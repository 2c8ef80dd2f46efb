#pragma once

#include "asip/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace asip {

/// A time-inhomogeneous finite-state Markov chain {xi_j} with a bounded
/// vector observable X_j = f_j(xi_j).
///
/// Kernels and observables are produced lazily from generator functions, so
/// periodic and parameterized schedules are addressable at any time without
/// being materialized. Marginals are memoized; a ChainSpec is immutable after
/// construction and safe to share between threads.
class ChainSpec {
 public:
  using KernelFn = std::function<Matrix(Time)>;      // P_j: |X_j| x |X_{j+1}|
  using ObservableFn = std::function<Matrix(Time)>;  // f_j: |X_j| x d
  using StateCountFn = std::function<Eigen::Index(Time)>;

  struct Parts {
    Vector initial;
    KernelFn kernel;
    ObservableFn observable;
    StateCountFn states;
    Time horizon = kUnbounded;  // last addressable time
    Time span = 1;              // times 1..span exhibit every distinct (P_j, f_j) pattern
    int dimension = 1;
    double bound = 0.0;         // declared L >= sup_j max_x |f_j(x)|_inf
    std::string kind = "custom";
    bool periodic = false;      // P_j and f_j depend only on (j - 1) mod span
  };

  /// Validates every invariant over the characteristic span and throws
  /// InputError on the first violation.
  static ChainSpec create(Parts parts);
  /// Skips validation. Used to inject faults into verification runs.
  static ChainSpec create_unchecked(Parts parts);

  Time horizon() const { return parts_.horizon; }
  Time span() const { return parts_.span; }
  int dimension() const { return parts_.dimension; }
  double bound() const { return parts_.bound; }
  const std::string& kind() const { return parts_.kind; }
  bool periodic() const { return parts_.periodic; }
  const Vector& initial() const { return parts_.initial; }

  Eigen::Index states(Time j) const;
  Matrix kernel(Time j) const;
  Matrix observable(Time j) const;
  /// f_j(x) . u for every state x.
  Vector projected(Time j, const Vector& u) const;

  /// Law of xi_j, by forward propagation from the initial law.
  const Vector& marginal(Time j) const;
  /// P_i P_{i+1} ... P_{j-1}; the identity when i == j.
  Matrix transition(Time i, Time j) const;

  /// Default range for suprema over time: every distinct pattern plus one step.
  TimeRange scan_range(Time steps_ahead = 0) const;

  void require_time(Time j) const;

 private:
  struct Cache;
  explicit ChainSpec(Parts parts);
  Parts parts_;
  std::shared_ptr<Cache> cache_;
};

/// How a finite list of tables extends in time.
enum class Repeat { Periodic, Finite };

struct KernelSchedule {
  std::vector<Matrix> kernels;
  Repeat repeat = Repeat::Periodic;
};

struct ObservableSchedule {
  std::vector<Matrix> tables;  // each |X_j| x d
  Repeat repeat = Repeat::Periodic;
};

/// Weight of the first component in a two-kernel mixture.
struct MixtureWeights {
  enum class Kind { Sine, Power };
  Kind kind = Kind::Sine;
  // Sine: w_j = center + amplitude * sin(2 pi j / period)
  Time period = 1;
  double center = 0.5;
  double amplitude = 0.0;
  // Power: w_j = limit + (start - limit) * j^{-gamma}
  double gamma = 1.0;
  double start = 1.0;
  double limit = 0.5;

  double at(Time j) const;
};

ChainSpec make_chain(KernelSchedule kernels, Vector initial, ObservableSchedule observable,
                     std::optional<double> bound = std::nullopt);

ChainSpec make_mixture_chain(Matrix first, Matrix second, MixtureWeights weights,
                             Vector initial, ObservableSchedule observable,
                             std::optional<double> bound = std::nullopt);

/// Same transition structure with a different observable.
ChainSpec with_observable(const ChainSpec& chain, ChainSpec::ObservableFn observable,
                          int dimension, double bound, Time span, std::string kind);

/// Observable on consecutive pairs, f_j: X_j x X_{j+1} -> R^d, given as a
/// periodic list of tables (one |X_j| x |X_{j+1}| matrix per coordinate).
struct PairObservable {
  std::vector<std::vector<Matrix>> period;

  int dimension() const;
  const std::vector<Matrix>& at(Time j) const;
  double value(Time j, Eigen::Index x, Eigen::Index y, const Vector& u) const;
  double sup_norm() const;

  /// f_j(x, y) = f_j(x), lifting a state observable of a periodic chain.
  static PairObservable from_states(const ChainSpec& chain);
};

/// The chain of consecutive pairs (xi_j, xi_{j+1}), carrying a pair observable.
/// Pair (x, y) at time j is state x * |X_{j+1}| + y.
ChainSpec lift_pairs(const ChainSpec& chain, const PairObservable& observable);

struct JointLaw {
  Time first = 1;
  Time second = 2;
  Matrix joint;  // P(xi_first = x, xi_second = y)
  Vector first_marginal;
  Vector second_marginal;
};

JointLaw pair_joint(const ChainSpec& chain, Time i, Time j);

struct EllipticityReport {
  double eps0 = 0.0;
  TimeRange range;
  double sup_density = 0.0;     // sup p_i(x, y)
  double inf_two_step = 1.0;    // inf (P_i P_{i+1})(x, z)
  Time sup_witness = 1;
  Time inf_witness = 1;
  bool upper_ok = false;        // sup p <= 1 / eps0
  bool lower_ok = false;        // inf two-step >= eps0
  bool passed() const { return upper_ok && lower_ok; }
};

/// Densities are taken with respect to counting measure, so p_i(x, y) is the
/// kernel entry itself.
EllipticityReport check_uniform_ellipticity(const ChainSpec& chain, double eps0,
                                            std::optional<TimeRange> range = std::nullopt);

}  // namespace asip
