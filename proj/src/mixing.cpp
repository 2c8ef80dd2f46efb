#include "asip/mixing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

namespace asip {

namespace {

double snap(double v) { return std::abs(v) < kNumericalFloor ? 0.0 : v; }

void require_event_cap(Eigen::Index rows, Eigen::Index cols, std::size_t cap) {
  if (rows + cols >= 63 || (std::size_t{1} << (rows + cols)) > cap) {
    throw CapacityError("event space 2^" + std::to_string(rows) + " x 2^" + std::to_string(cols) +
                        " exceeds the brute-force cap of " + std::to_string(cap) +
                        " event pairs; enable event sampling");
  }
}

// Brute force over all A (row subsets) and B (column subsets) of a joint law.
AlphaPhi coefficients(const Matrix& joint, std::size_t cap, bool snap_small = true) {
  const Eigen::Index nx = joint.rows();
  const Eigen::Index ny = joint.cols();
  require_event_cap(nx, ny, cap);
  const Vector a = joint.rowwise().sum();
  const Vector b = joint.colwise().sum().transpose();

  const std::size_t nb = std::size_t{1} << ny;
  std::vector<double> pb(nb, 0.0);
  for (std::size_t mask = 1; mask < nb; ++mask) {
    const int low = std::countr_zero(mask);
    pb[mask] = pb[mask & (mask - 1)] + b[low];
  }

  AlphaPhi out;
  Vector row(ny);
  std::vector<double> pab(nb, 0.0);
  for (std::size_t amask = 1; amask < (std::size_t{1} << nx); ++amask) {
    double pa = 0.0;
    row.setZero();
    for (Eigen::Index x = 0; x < nx; ++x) {
      if (amask >> x & 1U) {
        pa += a[x];
        row += joint.row(x).transpose();
      }
    }
    for (std::size_t bmask = 1; bmask < nb; ++bmask) {
      const int low = std::countr_zero(bmask);
      pab[bmask] = pab[bmask & (bmask - 1)] + row[low];
      const double diff = std::abs(pab[bmask] - pa * pb[bmask]);
      out.alpha = std::max(out.alpha, diff);
      if (pa > 0.0) out.phi = std::max(out.phi, diff / pa);
    }
  }
  if (snap_small) {
    out.alpha = snap(out.alpha);
    out.phi = snap(out.phi);
  }
  out.phi = std::min(1.0, out.phi);
  return out;
}

// Joint law of the paths (xi_{first}, ..., xi_{first+w-1}) as a flat vector
// together with each path's last state, conditional on xi_first = x0 when given.
struct PathLaw {
  std::vector<double> probs;
  std::vector<Eigen::Index> last;
  std::vector<Eigen::Index> first;
};

PathLaw path_law(const ChainSpec& chain, Time first, int width, const Vector& start) {
  PathLaw law;
  for (Eigen::Index x = 0; x < start.size(); ++x) {
    law.probs.push_back(start[x]);
    law.last.push_back(x);
    law.first.push_back(x);
  }
  for (int step = 1; step < width; ++step) {
    const Matrix p = chain.kernel(first + step - 1);
    PathLaw next;
    for (std::size_t i = 0; i < law.probs.size(); ++i) {
      for (Eigen::Index y = 0; y < p.cols(); ++y) {
        next.probs.push_back(law.probs[i] * p(law.last[i], y));
        next.last.push_back(y);
        next.first.push_back(law.first[i]);
      }
    }
    law = std::move(next);
  }
  return law;
}

}  // namespace

AlphaPhi alpha_phi_at(const ChainSpec& chain, Time j, Time k, std::size_t cap, bool snap) {
  if (k < 1) throw InputError("mixing lag k must be >= 1");
  AlphaPhi out = coefficients(pair_joint(chain, j, j + k).joint, cap, snap);
  out.alpha_witness = out.phi_witness = j;
  return out;
}

AlphaPhi alpha_phi(const ChainSpec& chain, Time k, TimeRange range, std::size_t cap) {
  AlphaPhi best;
  best.alpha_witness = best.phi_witness = range.first;
  for (Time j = range.first; j <= range.last; ++j) {
    const AlphaPhi here = alpha_phi_at(chain, j, k, cap);
    if (here.alpha > best.alpha) {
      best.alpha = here.alpha;
      best.alpha_witness = j;
    }
    if (here.phi > best.phi) {
      best.phi = here.phi;
      best.phi_witness = j;
    }
  }
  return best;
}

AlphaPhi alpha_phi_window(const ChainSpec& chain, Time j, Time k, int width, std::size_t cap) {
  if (width < 1 || width > 3) throw InputError("window width must be in [1, 3]");
  if (j < width) throw InputError("window needs j >= width");
  if (k < 1) throw InputError("mixing lag k must be >= 1");
  const Time past_first = j - width + 1;
  const Time future_first = j + k;
  const PathLaw past = path_law(chain, past_first, width, chain.marginal(past_first));
  const Eigen::Index ny = chain.states(future_first);
  const PathLaw future = path_law(chain, future_first, width, Vector::Ones(ny));  // conditional on the first state
  const Matrix bridge = chain.transition(j, future_first);
  const auto rows = static_cast<Eigen::Index>(past.probs.size());
  const auto cols = static_cast<Eigen::Index>(future.probs.size());
  require_event_cap(rows, cols, cap);
  Matrix joint(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      joint(r, c) = past.probs[static_cast<std::size_t>(r)] *
                    bridge(past.last[static_cast<std::size_t>(r)], future.first[static_cast<std::size_t>(c)]) *
                    future.probs[static_cast<std::size_t>(c)];
    }
  }
  AlphaPhi out = coefficients(joint, cap);
  out.alpha_witness = out.phi_witness = j;
  return out;
}

double dobrushin_coefficient(const ChainSpec& chain, Time j) {
  const Matrix p = chain.kernel(j);
  double best = 0.0;
  for (Eigen::Index x1 = 0; x1 < p.rows(); ++x1) {
    for (Eigen::Index x2 = x1 + 1; x2 < p.rows(); ++x2) {
      best = std::max(best, 0.5 * (p.row(x1) - p.row(x2)).cwiseAbs().sum());
    }
  }
  return best;
}

double rho_coefficient(const ChainSpec& chain, Time j) {
  const JointLaw law = pair_joint(chain, j, j + 1);
  std::vector<Eigen::Index> xs;
  std::vector<Eigen::Index> ys;
  for (Eigen::Index x = 0; x < law.first_marginal.size(); ++x) {
    if (law.first_marginal[x] > 0.0) xs.push_back(x);
  }
  for (Eigen::Index y = 0; y < law.second_marginal.size(); ++y) {
    if (law.second_marginal[y] > 0.0) ys.push_back(y);
  }
  if (xs.size() < 2 || ys.size() < 2) return 0.0;
  // D_j^{-1/2} K D_{j+1}^{-1/2} has top singular value 1 with singular vectors
  // sqrt(pi_j), sqrt(pi_{j+1}); removing that pair leaves the zero-mean part.
  Matrix m(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(ys.size()));
  for (std::size_t r = 0; r < xs.size(); ++r) {
    for (std::size_t c = 0; c < ys.size(); ++c) {
      const double px = law.first_marginal[xs[r]];
      const double py = law.second_marginal[ys[c]];
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          law.joint(xs[r], ys[c]) / std::sqrt(px * py) - std::sqrt(px * py);
    }
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  return snap(svd.singularValues()(0));
}

Envelope fit_envelope(const std::vector<double>& alphas, const std::vector<double>& phis) {
  Envelope env;
  for (std::size_t i = 0; i < phis.size(); ++i) {
    if (phis[i] < 0.5) {
      env.n0 = static_cast<Time>(i + 1);
      break;
    }
  }
  for (std::size_t i = 1; i < alphas.size(); ++i) {
    if (alphas[i] > alphas[i - 1] + 1e-12) env.nonmonotone = true;
  }
  std::vector<double> ks;
  std::vector<double> logs;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (alphas[i] > 0.0) {
      ks.push_back(static_cast<double>(i + 1));
      logs.push_back(std::log(alphas[i]));
    }
  }
  if (ks.size() < 3) {
    env.degenerate = true;
    env.delta = 0.5;
  } else {
    const double n = static_cast<double>(ks.size());
    double mk = 0.0;
    double ml = 0.0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      mk += ks[i] / n;
      ml += logs[i] / n;
    }
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      sxy += (ks[i] - mk) * (logs[i] - ml);
      sxx += (ks[i] - mk) * (ks[i] - mk);
    }
    env.delta = std::exp(sxy / sxx);
  }
  env.c = 0.0;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (alphas[i] > 0.0) {
      env.c = std::max(env.c, alphas[i] / std::pow(env.delta, static_cast<double>(i + 1)));
    }
  }
  return env;
}

Time HLayout::max_length() const {
  Time best = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) best = std::max(best, cuts[i + 1] - cuts[i]);
  return best;
}

double default_h_eps0(const ChainSpec& chain, const HLayout& layout) {
  const double l = chain.bound() > 0.0 ? chain.bound() : 1.0;
  return std::numbers::pi / (2.0 * l * static_cast<double>(std::max<Time>(layout.max_length(), 1)));
}

namespace {

using CVector = Eigen::VectorXcd;

struct Phased {
  Time first;
  Time last;
  const Vector* t;
};

// E exp(i sum over the given blocks of t_b . X_l), by pushing a complex
// measure forward through the kernels.
std::complex<double> characteristic(const ChainSpec& chain, const std::vector<Phased>& blocks) {
  if (blocks.empty()) return {1.0, 0.0};
  Time time = blocks.front().first;
  CVector v = chain.marginal(time).cast<std::complex<double>>();
  bool started = false;
  for (const auto& b : blocks) {
    for (Time l = b.first; l <= b.last; ++l) {
      if (started) {
        const Matrix p = l == time + 1 ? chain.kernel(time) : chain.transition(time, l);
        v = p.transpose().cast<std::complex<double>>() * v;
      }
      started = true;
      time = l;
      const Vector phase = chain.observable(l) * *b.t;
      for (Eigen::Index x = 0; x < v.size(); ++x) v[x] *= std::polar(1.0, phase[x]);
    }
  }
  return v.sum();
}

}  // namespace

double condition_h_gap(const ChainSpec& chain, const HLayout& layout) {
  const int total = layout.blocks();
  if (total < 2 || layout.n < 1 || layout.n >= total) {
    throw InputError("condition (H) layout needs n >= 1 blocks in each group");
  }
  if (static_cast<int>(layout.t.size()) != total) throw InputError("one frequency per block is required");
  if (layout.k < 0) throw InputError("condition (H) gap k must be >= 0");
  for (int j = 0; j < total; ++j) {
    if (layout.cuts[static_cast<std::size_t>(j + 1)] <= layout.cuts[static_cast<std::size_t>(j)]) {
      throw InputError("condition (H) cuts must increase strictly");
    }
  }
  std::vector<Phased> first;
  std::vector<Phased> second;
  for (int j = 0; j < total; ++j) {
    const Time a = layout.cuts[static_cast<std::size_t>(j)];
    const Time b = layout.cuts[static_cast<std::size_t>(j + 1)] - 1;
    if (j < layout.n) {
      first.push_back({a, b, &layout.t[static_cast<std::size_t>(j)]});
    } else {
      second.push_back({a + layout.k, b + layout.k, &layout.t[static_cast<std::size_t>(j)]});
    }
  }
  std::vector<Phased> both = first;
  both.insert(both.end(), second.begin(), second.end());
  const auto joint = characteristic(chain, both);
  const auto product = characteristic(chain, first) * characteristic(chain, second);
  return std::abs(joint - product);
}

HScan condition_h_scan(const ChainSpec& chain, HLayout layout, const std::vector<Time>& ks) {
  HScan scan;
  for (Time k : ks) {
    layout.k = k;
    scan.points.push_back({k, condition_h_gap(chain, layout)});
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& pt : scan.points) {
    if (pt.gap > kNumericalFloor) {
      xs.push_back(static_cast<double>(pt.k));
      ys.push_back(std::log(pt.gap));
    }
  }
  if (xs.size() < 2) {
    scan.degenerate = true;
    scan.c_prime = xs.empty() ? std::numeric_limits<double>::infinity() : 0.0;
    scan.c_const = xs.empty() ? 0.0 : std::exp(ys.front());
    if (xs.size() == 1) {
      // A single nonzero gap followed by zeros still decays; fit through the floor.
      const double k_last = static_cast<double>(scan.points.back().k);
      if (k_last > xs.front()) {
        scan.c_prime = (ys.front() - std::log(kNumericalFloor)) / (k_last - xs.front());
        scan.c_const = std::exp(ys.front() + scan.c_prime * xs.front());
      }
    }
    return scan;
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i] / n;
    my += ys[i] / n;
  }
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  scan.c_prime = -sxy / sxx;
  for (const auto& pt : scan.points) {
    if (pt.gap > 0.0) {
      scan.c_const = std::max(scan.c_const, pt.gap * std::exp(scan.c_prime * static_cast<double>(pt.k)));
    }
  }
  return scan;
}

HLayout standard_h_layout(const ChainSpec& chain, Time start, int n, int m, Time length,
                          std::optional<double> eps0) {
  if (n < 1 || m < 1 || length < 1) throw InputError("condition (H) layout needs n, m, length >= 1");
  HLayout layout;
  for (int j = 0; j <= n + m; ++j) layout.cuts.push_back(start + j * length);
  layout.n = n;
  const double e = eps0.value_or(default_h_eps0(chain, layout));
  const int d = chain.dimension();
  for (int j = 0; j < n + m; ++j) {
    const double sign = j % 2 == 0 ? 1.0 : -1.0;
    layout.t.push_back(Vector::Constant(d, sign * e / std::sqrt(static_cast<double>(d))));
  }
  return layout;
}

TimeRange mixing_range(const ChainSpec& chain, Time k_max) {
  TimeRange r{1, chain.span() + 8};
  if (chain.horizon() != kUnbounded) r.last = std::min(r.last, chain.horizon() - k_max);
  if (r.last < 1) {
    throw InputError("horizon " + std::to_string(chain.horizon()) + " is too short for lag " +
                     std::to_string(k_max));
  }
  return r;
}

MixingReport analyze_mixing(const ChainSpec& chain, Time k_max, std::optional<TimeRange> j_range) {
  if (k_max < 1) throw InputError("k_max must be >= 1");
  MixingReport report;
  report.j_range = j_range.value_or(mixing_range(chain, k_max));
  for (Time k = 1; k <= k_max; ++k) {
    const AlphaPhi ap = alpha_phi(chain, k, report.j_range);
    report.alpha.push_back(ap.alpha);
    report.phi.push_back(ap.phi);
  }
  for (Time j = report.j_range.first; j <= report.j_range.last; ++j) {
    report.dobrushin.push_back(dobrushin_coefficient(chain, j));
    report.rho.push_back(rho_coefficient(chain, j));
    report.delta_pi = std::max(report.delta_pi, report.dobrushin.back());
    report.rho_sup = std::max(report.rho_sup, report.rho.back());
  }
  report.envelope = fit_envelope(report.alpha, report.phi);
  return report;
}

}  // namespace asip
