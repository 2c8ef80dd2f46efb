#include "asip/blocks.hpp"

#include "asip/moments.hpp"
#include "asip/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace asip {

SeparationChoice select_separation(double c, double delta, double p, double c_p) {
  if (!(p > 2.0)) throw InputError("separation needs p > 2");
  if (!(c_p > 0.0)) throw InputError("separation needs c_p > 0");
  if (!(c >= 0.0)) throw InputError("envelope constant C must be >= 0");
  SeparationChoice out;
  out.target = 1.0 / (32.0 * c_p);
  if (c == 0.0 || delta <= 0.0) return out;  // alpha vanishes at every lag: r = 1, sum 0
  if (delta >= 1.0) throw InputError("no exponential envelope: delta = " + std::to_string(delta) + " >= 1");
  const double e = 1.0 - 2.0 / p;
  const double ce = std::pow(c, e);
  const double log_delta = std::log(delta);
  for (Time r = 1; r < (Time{1} << 40); ++r) {
    // q <= 1 always; exp underflows to 0 for tiny delta, which is the right limit.
    const double q = std::exp(static_cast<double>(r) * e * log_delta);
    const double sum = ce * q / (1.0 - q);
    if (sum < out.target) {
      out.r = r;
      out.sum = sum;
      return out;
    }
  }
  throw InputError("separation search did not terminate");
}

double compute_q0(Time r, double p, double bound, double c, double delta, double c_p, QExponent exponent) {
  if (!(p > 2.0)) throw InputError("Q0 needs p > 2");
  if (c == 0.0 || delta <= 0.0) return 0.0;
  if (delta >= 1.0) throw InputError("no exponential envelope: delta = " + std::to_string(delta) + " >= 1");
  const double e = exponent == QExponent::TwoMinus ? 2.0 - 2.0 / p : 1.0 - 2.0 / p;
  const double s = std::pow(delta, e);
  const double r_d = static_cast<double>(r);
  return 2.0 * c_p * (1.0 + r_d * bound) * (1.0 + bound) * std::pow(c, e) * s / (1.0 - s);
}

double q_of_a(double q0, double a) { return q0 + 2.0 * std::sqrt(3.0 * a * q0); }

QValues compute_q(double a, Time r, double p, double bound, double c, double delta, double c_p,
                  QExponent exponent) {
  if (!(a > 1.0)) throw InputError("Q(A) needs A > 1");
  QValues out;
  out.q0 = compute_q0(r, p, bound, c, delta, c_p, exponent);
  out.q = q_of_a(out.q0, a);
  return out;
}

AmplitudeChoice select_amplitude(double q0) {
  if (!(q0 >= 0.0)) throw InputError("Q0 must be >= 0");
  auto slack = [q0](double a) { return a - 4.0 * q_of_a(q0, a) - 1.0; };
  AmplitudeChoice out;
  const double x = (8.0 * std::sqrt(3.0 * q0) + std::sqrt(208.0 * q0 + 4.0)) / 2.0;
  out.closed_form = std::max(1.0, x * x);

  double lo = 1.0;
  double hi = 1.0;
  if (slack(lo) < 0.0) {
    while (slack(hi) < 0.0) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      (slack(mid) >= 0.0 ? hi : lo) = mid;
    }
  }
  out.bisection = hi;

  double a = std::max(out.closed_form, 1.0);
  while (slack(a) < 0.0) a = std::nextafter(a, std::numeric_limits<double>::infinity());
  out.a = a;
  out.certificate = slack(a);
  return out;
}

Time BlockPartition::k_of(Time n) const {
  const auto it = std::upper_bound(blocks.begin(), blocks.end(), n,
                                   [](Time value, const Block& b) { return value < b.b; });
  return static_cast<Time>(it - blocks.begin());
}

IndexSet BlockPartition::m_set(std::size_t j) const { return IndexSet(blocks.at(j).a, blocks.at(j).b); }

IndexSet BlockPartition::i_set(std::size_t j) const { return IndexSet(blocks.at(j).a, blocks.at(j).i_last); }

namespace {

Vector normalized(const Vector& u) {
  const double n = u.norm();
  if (!(n > 0.0)) throw InputError("direction u0 must be nonzero");
  return u / n;
}

}  // namespace

BlockPartition build_blocks(const ChainSpec& chain, const Vector& u0, double amplitude, Time r,
                            Time horizon, const BuildOptions& options) {
  if (u0.size() != chain.dimension()) throw InputError("direction u0 has the wrong dimension");
  if (!(amplitude >= 1.0)) throw InputError("amplitude A must be >= 1");
  if (r < 1) throw InputError("separation r must be >= 1");
  if (horizon < 1) throw InputError("horizon must be >= 1");
  BlockPartition part;
  part.u0 = normalized(u0);
  part.r = r;
  part.amplitude = amplitude;
  part.bound = chain.bound() * part.u0.lpNorm<1>();
  part.horizon = horizon;
  Time limit = options.scan_limit.value_or(2 * horizon + 1000);
  limit = std::min(limit, chain.horizon());

  Time start = 1;
  while (part.blocks.empty() || part.blocks.size() < options.min_blocks ||
         part.blocks.back().i_last < horizon) {
    CovarianceSweep sweep(chain, start, Matrix(part.u0));
    Time b = 0;
    for (Time t = start; t <= limit; ++t) {
      sweep.step();
      if (sweep.covariance()(0, 0) >= amplitude) {
        b = t;
        break;
      }
    }
    if (b == 0) {
      std::ostringstream msg;
      msg << "variance starved at index " << limit << ": block " << part.blocks.size() + 1
          << " starting at " << start << " reached Var " << sweep.covariance()(0, 0) << " < A = " << amplitude;
      throw ConstructionError(msg.str());
    }
    Block block;
    block.a = start;
    block.b = b;
    block.i_last = b + r;
    block.variance = sweep.covariance()(0, 0);
    block.norm = std::sqrt(block.variance);
    if (options.theta_covariances && block.i_last <= chain.horizon()) {
      block.theta_cov = cov_partial_sum(chain, block.a, block.i_last);
    }
    part.blocks.push_back(std::move(block));
    start = b + r + 1;
  }
  return part;
}

std::vector<std::string> check_structure(const BlockPartition& part) {
  std::vector<std::string> out;
  const double sa = std::sqrt(part.amplitude);
  Time expected_start = 1;
  for (std::size_t j = 0; j < part.blocks.size(); ++j) {
    const Block& b = part.blocks[j];
    const auto id = std::to_string(j + 1);
    if (b.a != expected_start) {
      out.push_back("block " + id + " starts at " + std::to_string(b.a) + ", expected " +
                    std::to_string(expected_start));
    }
    if (b.b < b.a) out.push_back("block " + id + " is empty");
    if (b.variance < part.amplitude) out.push_back("block " + id + " variance below A");
    if (b.norm > (sa + part.bound) * (1.0 + 1e-12)) out.push_back("block " + id + " norm above sqrt(A) + L");
    if (b.i_last != b.b + part.r) out.push_back("I_" + id + " does not end at max M + r");
    if (part.k_of(b.b) != static_cast<Time>(j + 1)) out.push_back("k_n at b_" + id + " is not " + id);
    if (part.k_of(b.b - 1) != static_cast<Time>(j)) out.push_back("k_n jumps early before b_" + id);
    expected_start = b.i_last + 1;  // min M_{j+1} - max M_j = r + 1, I's tile the line
  }
  return out;
}

std::vector<Vector> direction_grid(int d, int count) {
  std::vector<Vector> out;
  if (d < 1) throw InputError("dimension must be >= 1");
  if (d == 1) return {Vector::Ones(1)};
  count = std::max(count, 1);
  if (d == 2) {
    for (int i = 0; i < count; ++i) {
      const double th = std::numbers::pi * i / count;
      out.push_back((Vector(2) << std::cos(th), std::sin(th)).finished());
    }
  } else if (d == 3) {
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / count;
      const double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
      out.push_back((Vector(3) << rad * std::cos(golden * i), rad * std::sin(golden * i), z).finished());
    }
  } else {
    static constexpr int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
    if (d > 12) throw InputError("direction grid supports d <= 12");
    for (int i = 1; static_cast<int>(out.size()) < count; ++i) {
      Vector v(d);
      for (int k = 0; k < d; ++k) {
        double f = 1.0;
        double h = 0.0;
        for (int n = i; n > 0; n /= primes[k]) {
          f /= primes[k];
          h += f * (n % primes[k]);
        }
        v[k] = 2.0 * h - 1.0;
      }
      if (v.norm() > 1e-3) out.push_back(v / v.norm());
    }
  }
  for (int k = 0; k < d; ++k) out.push_back(Vector::Unit(d, k));
  return out;
}

bool BlockVerification::passed() const {
  return a_ok && c_ok && r_ok && sandwich_ok && deviation_ok && structural.empty();
}

BlockVerification verify_partition(const ChainSpec& chain, const BlockPartition& part, Time horizon,
                                   const VerifyOptions& options) {
  BlockVerification v;
  v.horizon = horizon;
  v.structural = check_structure(part);
  const int d = chain.dimension();

  std::vector<std::size_t> checked;
  for (std::size_t j = 0; j < part.blocks.size(); ++j) {
    if (part.blocks[j].i_last <= horizon) checked.push_back(j);
  }
  v.blocks_checked = checked.size();
  if (checked.empty()) {
    v.structural.push_back("no complete block inside horizon " + std::to_string(horizon));
    return v;
  }
  const Time last = part.blocks[checked.back()].i_last;

  const std::vector<Matrix> prefix = prefix_covariances(chain, 1, std::max(horizon, last));
  std::vector<Vector> dirs = direction_grid(d, options.directions);
  if (d > 1) {
    const EigenSummary es = eigen_summary(prefix[static_cast<std::size_t>(horizon - 1)]);
    for (Eigen::Index k = 0; k < es.vectors.cols(); ++k) dirs.push_back(es.vectors.col(k));
  }
  v.directions = static_cast<int>(dirs.size());

  // Norm range of Theta_j and the suffix bound on the I_j geometry.
  v.a1 = std::numeric_limits<double>::infinity();
  v.a_ok = true;
  for (std::size_t j : checked) {
    const Block& b = part.blocks[j];
    const std::vector<Matrix> local = prefix_covariances(chain, b.a, b.i_last);
    for (const Vector& u : dirs) {
      double best = 0.0;
      for (const Matrix& m : local) best = std::max(best, u.dot(m * u));
      const double whole = std::sqrt(std::max(0.0, u.dot(local.back() * u)));
      v.a1 = std::min(v.a1, whole);
      v.a2 = std::max(v.a2, std::sqrt(best));
    }
    std::vector<double> trace(static_cast<std::size_t>(b.i_last - b.a + 1), 0.0);
    for (int k = 0; k < d; ++k) {
      const auto s = suffix_variances(chain, b.a, b.i_last, Vector::Unit(d, k));
      for (std::size_t i = 0; i < s.size(); ++i) trace[i] += s[i];
    }
    for (double t : trace) v.c = std::max(v.c, std::sqrt(std::max(0.0, t)));
  }
  v.a_ok = v.a1 > 0.0 && std::isfinite(v.a2);
  v.c_ok = std::isfinite(v.c);

  // Linear growth: Var(S_n . u) / k_n over n with k_n >= 1.
  v.r_from = part.blocks.front().b;
  v.r1 = v.r1_grid = std::numeric_limits<double>::infinity();
  for (Time n = v.r_from; n <= horizon; ++n) {
    const double k = static_cast<double>(part.k_of(n));
    const Matrix& vn = prefix[static_cast<std::size_t>(n - 1)];
    double lo = vn(0, 0);
    double hi = vn(0, 0);
    if (d > 1) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(vn, Eigen::EigenvaluesOnly);
      lo = es.eigenvalues()(0);
      hi = es.eigenvalues()(d - 1);
    }
    v.r1 = std::min(v.r1, lo / k);
    v.r2 = std::max(v.r2, hi / k);
    for (const Vector& u : dirs) {
      const double q = u.dot(vn * u) / k;
      v.r1_grid = std::min(v.r1_grid, q);
      v.r2_grid = std::max(v.r2_grid, q);
    }
  }
  v.r_ok = v.r1 > 0.0 && std::isfinite(v.r2);

  // Prefix sandwich and block-variance deviation along u0, prefix by prefix.
  CovarianceSweep sweep(chain, 1, Matrix(part.u0));
  double block_sum = 0.0;
  double min_norm = std::numeric_limits<double>::infinity();
  bool in_band = true;
  const double tol = 1e-12;
  v.sandwich_min = std::numeric_limits<double>::infinity();
  v.sandwich_max = 0.0;
  for (std::size_t j : checked) {
    const Block& b = part.blocks[j];
    while (sweep.time() < b.a) sweep.step(0.0);
    while (sweep.time() <= b.b) sweep.step(1.0);
    const double union_var = sweep.covariance()(0, 0);
    block_sum += b.variance;
    min_norm = std::min(min_norm, b.norm);
    if (b.variance < part.amplitude || b.variance > 2.0 * part.amplitude) in_band = false;
    const double ratio = union_var / block_sum;
    v.sandwich.push_back(ratio);
    v.sandwich_min = std::min(v.sandwich_min, ratio);
    v.sandwich_max = std::max(v.sandwich_max, ratio);
    const double i_var = part.u0.dot(prefix[static_cast<std::size_t>(b.i_last - 1)] * part.u0);
    v.deviation.push_back(std::abs(union_var / i_var - 1.0));
    v.deviation_max = std::max(v.deviation_max, v.deviation.back());
  }
  v.sandwich_applicable = options.separation_certified && min_norm >= 1.0;
  v.sandwich_ok = !v.sandwich_applicable || (v.sandwich_min >= 0.5 - tol && v.sandwich_max <= 1.5 + tol);

  if (options.q_of_amplitude) {
    v.deviation_bound = 2.0 * *options.q_of_amplitude / part.amplitude;
    if (!(part.amplitude > 1.0)) {
      v.deviation_note = "not applicable: A = 1 (the ratio bound needs A > 1)";
    } else if (!in_band) {
      v.deviation_note = "not applicable: some Var(S(M_j)) outside [A, 2A]";
    } else if (!options.separation_certified) {
      v.deviation_note = "not applicable: r was not chosen by select_separation";
    } else {
      v.deviation_applicable = true;
    }
    v.deviation_ok = !v.deviation_applicable || v.deviation_max <= v.deviation_bound * (1.0 + tol);
  } else {
    v.deviation_note = "not evaluated: Q(A) not supplied";
  }
  return v;
}

CovarianceCheck covariance_inequality_check(const ChainSpec& chain, const IndexSet& m1,
                                            const IndexSet& m2, const Vector& u, double p,
                                            const LpOptions& options) {
  if (m1.empty() || m2.empty()) throw InputError("covariance check needs nonempty index sets");
  CovarianceCheck out;
  out.r = m2.min() - m1.max();
  if (out.r < 1) throw InputError("covariance check needs min M2 - max M1 >= 1");
  out.cov = cross_covariance(chain, m1, m2, u);
  const LpNorm n1 = lp_norm(chain, m1, u, p, options);
  const LpNorm n2 = lp_norm(chain, m2, u, p, options);
  out.norm1 = n1.value;
  out.norm2 = n2.value;
  out.exact = n1.exact && n2.exact;
  out.alpha = alpha_phi_at(chain, m1.max(), out.r, kDefaultEventPairCap, false).alpha;
  out.bound = 8.0 * out.norm1 * out.norm2 * std::pow(out.alpha, 1.0 - 2.0 / p);
  out.pass = std::abs(out.cov) <= out.bound * (1.0 + 1e-9) + 1e-15;
  return out;
}

TailStatistics tail_statistics(const ChainSpec& chain, const BlockPartition& part, double p, Time horizon,
                               std::size_t paths, std::uint64_t seed, const LpOptions& options) {
  TailStatistics ts;
  ts.trivial_bound = 2.0 * static_cast<double>(part.r) * part.bound;
  ts.paths = paths;
  ts.seed = seed;
  ts.epsilons = {0.1, 0.25};
  std::vector<Time> bases;
  for (const Block& b : part.blocks) {
    if (b.i_last <= horizon) bases.push_back(b.b);
  }
  for (Time base : bases) {
    const LpNorm n = running_max_norm(chain, base, base + part.r, part.u0, p, options);
    ts.d_norms.push_back(n.value);
    ts.d_exact.push_back(n.exact);
    ts.d_max = std::max(ts.d_max, n.value);
  }
  ts.bounded = ts.d_max <= ts.trivial_bound * (1.0 + 1e-12) + 1e-12;
  if (bases.empty() || paths == 0) return ts;

  const Time last = bases.back() + part.r;
  std::vector<Vector> rows;
  rows.reserve(static_cast<std::size_t>(last));
  for (Time t = 1; t <= last; ++t) {
    Vector row = chain.projected(t, part.u0);
    row.array() -= chain.marginal(t).dot(row);
    rows.push_back(std::move(row));
  }
  const StepSampler sampler(chain, 1, last);
  std::vector<std::vector<double>> stats(ts.epsilons.size());
  std::vector<Eigen::Index> path(static_cast<std::size_t>(last));
  for (std::size_t i = 0; i < paths; ++i) {
    Rng rng(seed, i);
    path[0] = sampler.sample_initial(rng);
    for (Time t = 1; t < last; ++t) path[static_cast<std::size_t>(t)] = sampler.sample_next(t, path[static_cast<std::size_t>(t - 1)], rng);
    std::vector<double> best(ts.epsilons.size(), 0.0);
    for (std::size_t q = 0; q < bases.size(); ++q) {
      double s = 0.0;
      double dq = 0.0;
      for (Time t = bases[q] + 1; t <= bases[q] + part.r; ++t) {
        s += rows[static_cast<std::size_t>(t - 1)][path[static_cast<std::size_t>(t - 1)]];
        dq = std::max(dq, std::abs(s));
      }
      for (std::size_t e = 0; e < ts.epsilons.size(); ++e) {
        best[e] = std::max(best[e], dq / std::pow(static_cast<double>(q + 1), ts.epsilons[e]));
      }
    }
    for (std::size_t e = 0; e < best.size(); ++e) stats[e].push_back(best[e]);
  }
  for (auto& s : stats) {
    std::sort(s.begin(), s.end());
    ts.path_max.push_back(s.back());
    ts.path_median.push_back(s.size() % 2 ? s[s.size() / 2] : 0.5 * (s[s.size() / 2 - 1] + s[s.size() / 2]));
  }
  return ts;
}

}  // namespace asip
