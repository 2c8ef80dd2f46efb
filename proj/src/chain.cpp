#include "asip/chain.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>

namespace asip {

namespace {

constexpr std::size_t kTransitionMemoLimit = 4096;

std::string describe(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void validate_distribution(const Vector& p, const std::string& what) {
  for (Eigen::Index x = 0; x < p.size(); ++x) {
    if (!(p[x] >= 0.0)) {
      throw InputError(what + " entry " + std::to_string(x) + " is negative (" + describe(p[x]) + ")");
    }
  }
  const double total = p.sum();
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    throw InputError(what + " sums to " + describe(total) + " ≠ 1");
  }
}

void validate_kernel(const Matrix& k, Time j, Eigen::Index rows, Eigen::Index cols) {
  if (k.rows() != rows || k.cols() != cols) {
    throw InputError("kernel at time " + std::to_string(j) + " is " + std::to_string(k.rows()) + "x" +
                     std::to_string(k.cols()) + ", expected " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
  for (Eigen::Index x = 0; x < k.rows(); ++x) {
    for (Eigen::Index y = 0; y < k.cols(); ++y) {
      if (!(k(x, y) >= 0.0)) {
        throw InputError("kernel at time " + std::to_string(j) + " row " + std::to_string(x) +
                         " has negative entry " + describe(k(x, y)));
      }
    }
    const double total = k.row(x).sum();
    if (std::abs(total - 1.0) > kProbabilityTolerance) {
      throw InputError("kernel at time " + std::to_string(j) + " row " + std::to_string(x) +
                       ": row sum " + describe(total) + " ≠ 1 (deficit " + describe(1.0 - total) + ")");
    }
  }
}

void validate_observable(const Matrix& f, Time j, Eigen::Index rows, int dim, double bound) {
  if (f.rows() != rows || f.cols() != dim) {
    throw InputError("observable at time " + std::to_string(j) + " is " + std::to_string(f.rows()) + "x" +
                     std::to_string(f.cols()) + ", expected " + std::to_string(rows) + "x" +
                     std::to_string(dim));
  }
  for (Eigen::Index x = 0; x < f.rows(); ++x) {
    for (Eigen::Index c = 0; c < f.cols(); ++c) {
      if (!std::isfinite(f(x, c)) || std::abs(f(x, c)) > bound + kProbabilityTolerance) {
        throw InputError("observable at time " + std::to_string(j) + " state " + std::to_string(x) +
                         " has value " + describe(f(x, c)) + " exceeding the declared bound L = " +
                         describe(bound));
      }
    }
  }
}

Time lcm_span(Time a, Time b) { return std::lcm(std::max<Time>(a, 1), std::max<Time>(b, 1)); }

double observed_bound(const std::vector<Matrix>& tables) {
  double b = 0.0;
  for (const auto& t : tables) b = std::max(b, t.size() ? t.cwiseAbs().maxCoeff() : 0.0);
  return b;
}

}  // namespace

struct ChainSpec::Cache {
  std::mutex mutex;
  std::deque<Vector> marginals;  // marginals[j - 1]; deque keeps references stable
  std::map<std::pair<Time, Time>, Matrix> transitions;
};

ChainSpec::ChainSpec(Parts parts) : parts_(std::move(parts)), cache_(std::make_shared<Cache>()) {}

ChainSpec ChainSpec::create_unchecked(Parts parts) { return ChainSpec(std::move(parts)); }

ChainSpec ChainSpec::create(Parts parts) {
  if (parts.dimension < 1) throw InputError("observable dimension d must be >= 1");
  if (!(parts.bound >= 0.0)) throw InputError("bound L must be nonnegative");
  if (parts.horizon < 1) throw InputError("horizon must contain at least one time");
  if (!parts.kernel || !parts.observable || !parts.states) {
    throw InputError("chain is missing a kernel, observable or state-count generator");
  }
  if (parts.initial.size() != parts.states(1)) {
    throw InputError("initial law has " + std::to_string(parts.initial.size()) + " entries but |X_1| = " +
                     std::to_string(parts.states(1)));
  }
  validate_distribution(parts.initial, "initial law");

  const Time last = std::min(parts.horizon, parts.span + 1);
  for (Time j = 1; j <= last; ++j) {
    const auto rows = parts.states(j);
    if (rows < 1) throw InputError("state space at time " + std::to_string(j) + " is empty");
    validate_observable(parts.observable(j), j, rows, parts.dimension, parts.bound);
    if (j < parts.horizon) validate_kernel(parts.kernel(j), j, rows, parts.states(j + 1));
  }
  return ChainSpec(std::move(parts));
}

void ChainSpec::require_time(Time j) const {
  if (j < 1 || j > parts_.horizon) {
    throw InputError("time " + std::to_string(j) + " is outside the addressable horizon [1, " +
                     std::to_string(parts_.horizon) + "]");
  }
}

Eigen::Index ChainSpec::states(Time j) const {
  require_time(j);
  return parts_.states(j);
}

Matrix ChainSpec::kernel(Time j) const {
  require_time(j + 1);
  require_time(j);
  return parts_.kernel(j);
}

Matrix ChainSpec::observable(Time j) const {
  require_time(j);
  return parts_.observable(j);
}

Vector ChainSpec::projected(Time j, const Vector& u) const { return observable(j) * u; }

const Vector& ChainSpec::marginal(Time j) const {
  require_time(j);
  std::lock_guard lock(cache_->mutex);
  auto& m = cache_->marginals;
  if (m.empty()) m.push_back(parts_.initial);
  while (static_cast<Time>(m.size()) < j) {
    const Time t = static_cast<Time>(m.size());
    m.push_back(parts_.kernel(t).transpose() * m.back());
  }
  return m[static_cast<std::size_t>(j - 1)];
}

Matrix ChainSpec::transition(Time i, Time j) const {
  if (i > j) throw InputError("transition requires i <= j");
  require_time(i);
  require_time(j);
  if (i == j) return Matrix::Identity(parts_.states(i), parts_.states(i));
  {
    std::lock_guard lock(cache_->mutex);
    auto it = cache_->transitions.find({i, j});
    if (it != cache_->transitions.end()) return it->second;
  }
  Matrix product = parts_.kernel(i);
  for (Time t = i + 1; t < j; ++t) product = product * parts_.kernel(t);
  std::lock_guard lock(cache_->mutex);
  if (cache_->transitions.size() >= kTransitionMemoLimit) cache_->transitions.clear();
  cache_->transitions.emplace(std::make_pair(i, j), product);
  return product;
}

TimeRange ChainSpec::scan_range(Time steps_ahead) const {
  TimeRange r{1, parts_.span};
  if (parts_.horizon != kUnbounded) {
    r.last = std::min(r.last, parts_.horizon - steps_ahead);
  }
  if (r.last < 1) {
    throw InputError("horizon " + std::to_string(parts_.horizon) + " is too short for lag " +
                     std::to_string(steps_ahead));
  }
  return r;
}

double MixtureWeights::at(Time j) const {
  switch (kind) {
    case Kind::Sine:
      return center + amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(j) /
                                           static_cast<double>(period));
    case Kind::Power:
      return limit + (start - limit) * std::pow(static_cast<double>(j), -gamma);
  }
  return center;
}

namespace {

std::function<const Matrix&(Time)> selector(const std::vector<Matrix>& tables, Repeat repeat,
                                            const char* what) {
  if (tables.empty()) throw InputError(std::string("empty ") + what + " schedule");
  auto shared = std::make_shared<const std::vector<Matrix>>(tables);
  if (repeat == Repeat::Periodic) {
    return [shared](Time j) -> const Matrix& {
      return (*shared)[static_cast<std::size_t>((j - 1) % static_cast<Time>(shared->size()))];
    };
  }
  return [shared](Time j) -> const Matrix& { return (*shared)[static_cast<std::size_t>(j - 1)]; };
}

Time schedule_horizon(const KernelSchedule& k, const ObservableSchedule& o) {
  Time h = kUnbounded;
  if (k.repeat == Repeat::Finite) h = static_cast<Time>(k.kernels.size()) + 1;
  if (o.repeat == Repeat::Finite) h = std::min(h, static_cast<Time>(o.tables.size()));
  return h;
}

int observable_dimension(const ObservableSchedule& o) {
  if (o.tables.empty()) throw InputError("empty observable schedule");
  return static_cast<int>(o.tables.front().cols());
}

}  // namespace

ChainSpec make_chain(KernelSchedule kernels, Vector initial, ObservableSchedule observable,
                     std::optional<double> bound) {
  ChainSpec::Parts parts;
  parts.horizon = schedule_horizon(kernels, observable);
  const Time kp = kernels.repeat == Repeat::Periodic ? static_cast<Time>(kernels.kernels.size()) : 1;
  const Time op = observable.repeat == Repeat::Periodic ? static_cast<Time>(observable.tables.size()) : 1;
  parts.span = (parts.horizon == kUnbounded) ? lcm_span(kp, op) : parts.horizon;
  parts.dimension = observable_dimension(observable);
  parts.bound = bound.value_or(observed_bound(observable.tables));
  parts.kind = kernels.repeat == Repeat::Periodic
                   ? (kernels.kernels.size() == 1 ? "homogeneous" : "periodic")
                   : "explicit";
  parts.periodic = parts.horizon == kUnbounded;

  auto kernel_at = selector(kernels.kernels, kernels.repeat, "kernel");
  auto table_at = selector(observable.tables, observable.repeat, "observable");
  const Eigen::Index first_states = initial.size();
  parts.initial = std::move(initial);
  parts.kernel = [kernel_at](Time j) { return kernel_at(j); };
  parts.observable = [table_at](Time j) { return table_at(j); };
  parts.states = [kernel_at, first_states](Time j) -> Eigen::Index {
    return j == 1 ? first_states : kernel_at(j - 1).cols();
  };
  return ChainSpec::create(std::move(parts));
}

ChainSpec make_mixture_chain(Matrix first, Matrix second, MixtureWeights weights, Vector initial,
                             ObservableSchedule observable, std::optional<double> bound) {
  if (first.rows() != second.rows() || first.cols() != second.cols() || first.rows() != first.cols()) {
    throw InputError("mixture components must be square kernels of equal size");
  }
  ChainSpec::Parts parts;
  parts.horizon = observable.repeat == Repeat::Finite ? static_cast<Time>(observable.tables.size())
                                                      : kUnbounded;
  const Time op = observable.repeat == Repeat::Periodic ? static_cast<Time>(observable.tables.size()) : 1;
  const Time wp = weights.kind == MixtureWeights::Kind::Sine ? std::max<Time>(weights.period, 1) : 256;
  parts.span = parts.horizon == kUnbounded ? lcm_span(wp, op) : parts.horizon;
  parts.dimension = observable_dimension(observable);
  parts.bound = bound.value_or(observed_bound(observable.tables));
  parts.kind = "mixture";
  parts.periodic = parts.horizon == kUnbounded && weights.kind == MixtureWeights::Kind::Sine;

  for (Time j = 1; j <= parts.span; ++j) {
    const double w = weights.at(j);
    if (!(w >= 0.0 && w <= 1.0)) {
      throw InputError("mixture weight at time " + std::to_string(j) + " is " + describe(w) +
                       ", outside [0, 1]");
    }
  }
  validate_kernel(first, 0, first.rows(), first.cols());
  validate_kernel(second, 0, second.rows(), second.cols());

  auto table_at = selector(observable.tables, observable.repeat, "observable");
  const Eigen::Index n = first.rows();
  parts.initial = std::move(initial);
  parts.kernel = [first = std::move(first), second = std::move(second), weights](Time j) -> Matrix {
    const double w = weights.at(j);
    return w * first + (1.0 - w) * second;
  };
  parts.observable = [table_at](Time j) { return table_at(j); };
  parts.states = [n](Time) { return n; };
  return ChainSpec::create(std::move(parts));
}

ChainSpec with_observable(const ChainSpec& chain, ChainSpec::ObservableFn observable, int dimension,
                          double bound, Time span, std::string kind) {
  ChainSpec::Parts parts;
  parts.initial = chain.initial();
  parts.kernel = [chain](Time j) { return chain.kernel(j); };
  parts.states = [chain](Time j) { return chain.states(j); };
  parts.observable = std::move(observable);
  parts.horizon = chain.horizon();
  parts.span = span;
  parts.dimension = dimension;
  parts.bound = bound;
  parts.kind = std::move(kind);
  return ChainSpec::create(std::move(parts));
}

int PairObservable::dimension() const {
  if (period.empty()) throw InputError("pair observable has no tables");
  return static_cast<int>(period.front().size());
}

const std::vector<Matrix>& PairObservable::at(Time j) const {
  if (period.empty()) throw InputError("pair observable has no tables");
  return period[static_cast<std::size_t>((j - 1) % static_cast<Time>(period.size()))];
}

double PairObservable::value(Time j, Eigen::Index x, Eigen::Index y, const Vector& u) const {
  const auto& coords = at(j);
  double v = 0.0;
  for (std::size_t c = 0; c < coords.size(); ++c) v += coords[c](x, y) * u[static_cast<Eigen::Index>(c)];
  return v;
}

double PairObservable::sup_norm() const {
  double b = 0.0;
  for (const auto& coords : period) {
    for (const auto& m : coords) b = std::max(b, m.size() ? m.cwiseAbs().maxCoeff() : 0.0);
  }
  return b;
}

PairObservable PairObservable::from_states(const ChainSpec& chain) {
  PairObservable out;
  const Time n = chain.horizon() == kUnbounded ? chain.span() : std::min(chain.span(), chain.horizon() - 1);
  for (Time j = 1; j <= n; ++j) {
    const Matrix f = chain.observable(j);
    const auto next = chain.states(j + 1);
    std::vector<Matrix> coords;
    for (Eigen::Index c = 0; c < f.cols(); ++c) coords.push_back(f.col(c).replicate(1, next));
    out.period.push_back(std::move(coords));
  }
  return out;
}

ChainSpec lift_pairs(const ChainSpec& chain, const PairObservable& observable) {
  const int d = observable.dimension();
  ChainSpec::Parts parts;
  parts.horizon = chain.horizon() == kUnbounded ? kUnbounded : chain.horizon() - 1;
  parts.span = lcm_span(chain.span(), static_cast<Time>(observable.period.size()));
  parts.dimension = d;
  parts.bound = observable.sup_norm();
  parts.kind = "pairs(" + chain.kind() + ")";
  parts.periodic = chain.periodic() && parts.horizon == kUnbounded;

  const Matrix first = chain.kernel(1);
  Vector init(first.size());
  const Vector& p1 = chain.initial();
  for (Eigen::Index x = 0; x < first.rows(); ++x) {
    for (Eigen::Index y = 0; y < first.cols(); ++y) init[x * first.cols() + y] = p1[x] * first(x, y);
  }
  parts.initial = std::move(init);
  parts.states = [chain](Time j) { return chain.states(j) * chain.states(j + 1); };
  parts.kernel = [chain](Time j) -> Matrix {
    const auto a = chain.states(j);
    const auto b = chain.states(j + 1);
    const auto c = chain.states(j + 2);
    const Matrix next = chain.kernel(j + 1);
    Matrix k = Matrix::Zero(a * b, b * c);
    for (Eigen::Index x = 0; x < a; ++x) {
      for (Eigen::Index y = 0; y < b; ++y) {
        for (Eigen::Index z = 0; z < c; ++z) k(x * b + y, y * c + z) = next(y, z);
      }
    }
    return k;
  };
  parts.observable = [chain, observable, d](Time j) -> Matrix {
    const auto a = chain.states(j);
    const auto b = chain.states(j + 1);
    const auto& coords = observable.at(j);
    Matrix f(a * b, d);
    for (Eigen::Index x = 0; x < a; ++x) {
      for (Eigen::Index y = 0; y < b; ++y) {
        for (int c = 0; c < d; ++c) f(x * b + y, c) = coords[static_cast<std::size_t>(c)](x, y);
      }
    }
    return f;
  };
  return ChainSpec::create(std::move(parts));
}

JointLaw pair_joint(const ChainSpec& chain, Time i, Time j) {
  if (i >= j) throw InputError("pair_joint requires i < j");
  JointLaw law;
  law.first = i;
  law.second = j;
  law.first_marginal = chain.marginal(i);
  law.joint = law.first_marginal.asDiagonal() * chain.transition(i, j);
  law.second_marginal = chain.marginal(j);
  return law;
}

EllipticityReport check_uniform_ellipticity(const ChainSpec& chain, double eps0,
                                            std::optional<TimeRange> range) {
  if (!(eps0 > 0.0)) throw InputError("eps0 must be positive");
  EllipticityReport report;
  report.eps0 = eps0;
  report.range = range.value_or(chain.scan_range(2));
  report.sup_density = 0.0;
  report.inf_two_step = std::numeric_limits<double>::infinity();
  for (Time i = report.range.first; i <= report.range.last; ++i) {
    const Matrix p = chain.kernel(i);
    const Matrix two = p * chain.kernel(i + 1);
    if (p.maxCoeff() > report.sup_density) {
      report.sup_density = p.maxCoeff();
      report.sup_witness = i;
    }
    if (two.minCoeff() < report.inf_two_step) {
      report.inf_two_step = two.minCoeff();
      report.inf_witness = i;
    }
  }
  report.upper_ok = report.sup_density <= 1.0 / eps0 + kProbabilityTolerance;
  report.lower_ok = report.inf_two_step >= eps0 - kProbabilityTolerance;
  return report;
}

}  // namespace asip
