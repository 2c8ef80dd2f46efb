#include "asip/lp_norm.hpp"

#include "asip/moments.hpp"
#include "asip/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <utility>

namespace asip {

double DiscreteLaw::moment(double p) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) acc += probs[i] * std::pow(std::abs(values[i]), p);
  return acc;
}

double DiscreteLaw::cdf(double x) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size() && values[i] <= x; ++i) acc += probs[i];
  return acc;
}

namespace {

struct KeyScale {
  double unit = 1.0;
  bool lattice = true;
  std::int64_t key(double v) const { return std::llround(v / unit); }
};

// Smallest dyadic unit 2^-K representing every value exactly, provided sums of
// `terms` values stay exactly representable; else the configured grid.
KeyScale choose_scale(const std::vector<double>& values, Time terms, double grid) {
  double vmax = 0.0;
  for (double v : values) vmax = std::max(vmax, std::abs(v));
  for (int k = 0; k <= 52; ++k) {
    if (vmax * std::ldexp(1.0, k) * static_cast<double>(terms) >= 0x1.0p53) break;
    bool ok = true;
    for (double v : values) {
      const double scaled = std::ldexp(v, k);
      if (scaled != std::floor(scaled)) {
        ok = false;
        break;
      }
    }
    if (ok) return {std::ldexp(1.0, -k), true};
  }
  return {grid, false};
}

template <class Key>
using Atoms = std::vector<std::pair<Key, double>>;

template <class Key>
void merge(Atoms<Key>& atoms) {
  std::sort(atoms.begin(), atoms.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::size_t out = 0;
  for (std::size_t i = 0; i < atoms.size();) {
    Key k = atoms[i].first;
    double p = 0.0;
    for (; i < atoms.size() && atoms[i].first == k; ++i) p += atoms[i].second;
    if (p > 0.0) atoms[out++] = {k, p};
  }
  atoms.resize(out);
}

template <class Key>
std::size_t count(const std::vector<Atoms<Key>>& dist) {
  std::size_t n = 0;
  for (const auto& a : dist) n += a.size();
  return n;
}

template <class Key, class Update>
std::vector<Atoms<Key>> advance(const std::vector<Atoms<Key>>& dist, const Matrix& kernel,
                                Update update, std::size_t cap) {
  std::vector<Atoms<Key>> next(static_cast<std::size_t>(kernel.cols()));
  for (Eigen::Index x = 0; x < kernel.rows(); ++x) {
    for (const auto& [k, p] : dist[static_cast<std::size_t>(x)]) {
      for (Eigen::Index y = 0; y < kernel.cols(); ++y) {
        const double w = kernel(x, y);
        if (w > 0.0) next[static_cast<std::size_t>(y)].emplace_back(update(k, y), p * w);
      }
    }
  }
  for (auto& a : next) merge(a);
  if (count(next) > cap) throw CapacityError("support overflow");
  return next;
}

Vector key_row(const ChainSpec& chain, Time t, const Vector& u) { return chain.projected(t, u); }

double centered_mean(const ChainSpec& chain, const IndexSet& set, const Vector& u) {
  double mean = 0.0;
  for (const auto& iv : set.intervals()) {
    for (Time t = iv.first; t <= iv.last; ++t) mean += chain.marginal(t).dot(chain.projected(t, u));
  }
  return mean;
}

LpNorm from_law(const DiscreteLaw& law, double p) {
  LpNorm out;
  out.value = std::pow(law.moment(p), 1.0 / p);
  out.exact = true;
  out.lattice = law.lattice;
  out.atoms = law.values.size();
  return out;
}

// Monte Carlo estimate of (E|V|^p)^{1/p} with a delta-method standard error.
template <class Statistic>
LpNorm monte_carlo_norm(const ChainSpec& chain, Time first, Time last, double p,
                        const LpOptions& options, Statistic statistic) {
  const StepSampler sampler(chain, first, last);
  std::vector<Eigen::Index> path(static_cast<std::size_t>(last - first + 1));
  double sum = 0.0;
  double sum_sq = 0.0;
  const std::size_t n = std::max<std::size_t>(options.mc_paths, 2);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(options.mc_seed, i);
    path[0] = sampler.sample_initial(rng);
    for (Time t = first; t < last; ++t) {
      const auto k = static_cast<std::size_t>(t - first);
      path[k + 1] = sampler.sample_next(t, path[k], rng);
    }
    const double v = std::pow(std::abs(statistic(path)), p);
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / static_cast<double>(n);
  const double var = std::max(0.0, (sum_sq - sum * mean) / static_cast<double>(n - 1));
  LpNorm out;
  out.exact = false;
  out.lattice = false;
  out.value = std::pow(mean, 1.0 / p);
  out.std_error = mean > 0.0 ? out.value / (p * mean) * std::sqrt(var / static_cast<double>(n)) : 0.0;
  return out;
}

}  // namespace

DiscreteLaw partial_sum_law(const ChainSpec& chain, const IndexSet& set, const Vector& u,
                            const LpOptions& options) {
  DiscreteLaw law;
  if (set.empty()) {
    law.values = {0.0};
    law.probs = {1.0};
    return law;
  }
  std::vector<double> values;
  for (const auto& iv : set.intervals()) {
    for (Time t = iv.first; t <= iv.last; ++t) {
      const Vector row = key_row(chain, t, u);
      values.insert(values.end(), row.data(), row.data() + row.size());
    }
  }
  const KeyScale scale = choose_scale(values, set.size(), options.grid);

  std::vector<Atoms<std::int64_t>> dist;
  Time prev = 0;
  for (const auto& iv : set.intervals()) {
    for (Time t = iv.first; t <= iv.last; ++t) {
      const Vector row = key_row(chain, t, u);
      std::vector<std::int64_t> add(static_cast<std::size_t>(row.size()));
      for (Eigen::Index y = 0; y < row.size(); ++y) add[static_cast<std::size_t>(y)] = scale.key(row[y]);
      if (dist.empty()) {
        const Vector& pi = chain.marginal(t);
        dist.resize(static_cast<std::size_t>(pi.size()));
        for (Eigen::Index x = 0; x < pi.size(); ++x) {
          if (pi[x] > 0.0) dist[static_cast<std::size_t>(x)].emplace_back(add[static_cast<std::size_t>(x)], pi[x]);
        }
      } else {
        const Matrix kernel = t == prev + 1 ? chain.kernel(prev) : chain.transition(prev, t);
        dist = advance(dist, kernel,
                       [&](std::int64_t k, Eigen::Index y) { return k + add[static_cast<std::size_t>(y)]; },
                       options.atom_cap);
      }
      prev = t;
    }
  }

  Atoms<std::int64_t> all;
  for (auto& a : dist) all.insert(all.end(), a.begin(), a.end());
  merge(all);
  const double mean = centered_mean(chain, set, u);
  law.lattice = scale.lattice;
  law.values.reserve(all.size());
  law.probs.reserve(all.size());
  for (const auto& [k, p] : all) {
    law.values.push_back(static_cast<double>(k) * scale.unit - mean);
    law.probs.push_back(p);
  }
  return law;
}

double central_moment(const ChainSpec& chain, const IndexSet& set, const Vector& u, int k) {
  if (k < 0) throw InputError("central_moment requires k >= 0");
  if (set.empty()) return k == 0 ? 1.0 : 0.0;
  std::vector<std::vector<double>> binom(static_cast<std::size_t>(k) + 1);
  for (int i = 0; i <= k; ++i) {
    binom[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(i) + 1, 1.0);
    for (int j = 1; j < i; ++j) {
      binom[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          binom[static_cast<std::size_t>(i) - 1][static_cast<std::size_t>(j) - 1] +
          binom[static_cast<std::size_t>(i) - 1][static_cast<std::size_t>(j)];
    }
  }
  // m(x, i) = E[S_t^i ; xi_t = x] with S_t the centered sum over set ∩ [min, t].
  Matrix m;
  auto add_step = [&](Time t) {
    Vector g = chain.projected(t, u);
    g.array() -= chain.marginal(t).dot(g);
    Matrix next = Matrix::Zero(m.rows(), m.cols());
    for (Eigen::Index x = 0; x < m.rows(); ++x) {
      double gp = 1.0;
      std::vector<double> powers(static_cast<std::size_t>(k) + 1);
      for (int i = 0; i <= k; ++i, gp *= g[x]) powers[static_cast<std::size_t>(i)] = gp;
      for (int i = 0; i <= k; ++i) {
        double acc = 0.0;
        for (int j = 0; j <= i; ++j) {
          acc += binom[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * m(x, j) *
                 powers[static_cast<std::size_t>(i - j)];
        }
        next(x, i) = acc;
      }
    }
    m = std::move(next);
  };
  const Time first = set.min();
  const Vector& pi = chain.marginal(first);
  m = Matrix::Zero(pi.size(), k + 1);
  m.col(0) = pi;
  add_step(first);
  for (Time t = first + 1; t <= set.max(); ++t) {
    m = chain.kernel(t - 1).transpose() * m;
    if (set.contains(t)) add_step(t);
  }
  return m.col(k).sum();
}

LpNorm lp_norm(const ChainSpec& chain, const IndexSet& set, const Vector& u, double p,
               const LpOptions& options) {
  if (!(p >= 1.0)) throw InputError("L^p norm requires p >= 1");
  if (options.moment_route && p <= 16.0 && p == std::floor(p) && static_cast<int>(p) % 2 == 0) {
    LpNorm out;
    out.value = std::pow(std::max(0.0, central_moment(chain, set, u, static_cast<int>(p))), 1.0 / p);
    return out;
  }
  try {
    return from_law(partial_sum_law(chain, set, u, options), p);
  } catch (const CapacityError&) {
    if (!options.monte_carlo) throw;
  }
  const Time first = set.min();
  const double mean = centered_mean(chain, set, u);
  std::vector<Vector> rows;
  for (Time t = first; t <= set.max(); ++t) rows.push_back(set.contains(t) ? key_row(chain, t, u) : Vector());
  return monte_carlo_norm(chain, first, set.max(), p, options, [&](const std::vector<Eigen::Index>& path) {
    double s = -mean;
    for (std::size_t k = 0; k < path.size(); ++k) {
      if (rows[k].size() > 0) s += rows[k][path[k]];
    }
    return s;
  });
}

LpNorm lp_norm_partial_sum(const ChainSpec& chain, Time n, Time m, const Vector& u, double p,
                           const LpOptions& options) {
  if (n > m) throw InputError("lp_norm_partial_sum requires n <= m");
  return lp_norm(chain, IndexSet(n, m), u, p, options);
}

namespace {

struct SumMax {
  std::int64_t sum;
  std::int64_t max;
  bool operator<(const SumMax& o) const { return sum != o.sum ? sum < o.sum : max < o.max; }
  bool operator==(const SumMax& o) const { return sum == o.sum && max == o.max; }
};

std::vector<Vector> centered_rows(const ChainSpec& chain, Time base, Time last, const Vector& u) {
  std::vector<Vector> rows;
  for (Time t = base + 1; t <= last; ++t) {
    Vector row = chain.projected(t, u);
    row.array() -= chain.marginal(t).dot(row);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

DiscreteLaw running_max_law(const ChainSpec& chain, Time base, Time last, const Vector& u,
                            const LpOptions& options) {
  if (base > last) throw InputError("running_max_law requires base <= last");
  const std::vector<Vector> rows = centered_rows(chain, base, last, u);
  std::vector<double> values;
  for (const auto& row : rows) values.insert(values.end(), row.data(), row.data() + row.size());
  const KeyScale scale = choose_scale(values, last - base, options.grid);

  const Vector& pi = chain.marginal(base);
  std::vector<Atoms<SumMax>> dist(static_cast<std::size_t>(pi.size()));
  for (Eigen::Index x = 0; x < pi.size(); ++x) {
    if (pi[x] > 0.0) dist[static_cast<std::size_t>(x)].emplace_back(SumMax{0, 0}, pi[x]);
  }
  for (Time t = base + 1; t <= last; ++t) {
    const Vector& row = rows[static_cast<std::size_t>(t - base - 1)];
    std::vector<std::int64_t> add(static_cast<std::size_t>(row.size()));
    for (Eigen::Index y = 0; y < row.size(); ++y) add[static_cast<std::size_t>(y)] = scale.key(row[y]);
    dist = advance(dist, chain.kernel(t - 1),
                   [&](SumMax k, Eigen::Index y) {
                     const std::int64_t s = k.sum + add[static_cast<std::size_t>(y)];
                     return SumMax{s, std::max<std::int64_t>(k.max, s < 0 ? -s : s)};
                   },
                   options.atom_cap);
  }

  Atoms<std::int64_t> maxima;
  for (const auto& a : dist) {
    for (const auto& [k, p] : a) maxima.emplace_back(k.max, p);
  }
  merge(maxima);
  DiscreteLaw law;
  law.lattice = scale.lattice;
  for (const auto& [k, p] : maxima) {
    law.values.push_back(static_cast<double>(k) * scale.unit);
    law.probs.push_back(p);
  }
  return law;
}

LpNorm running_max_norm(const ChainSpec& chain, Time base, Time last, const Vector& u, double p,
                        const LpOptions& options) {
  if (!(p >= 1.0)) throw InputError("L^p norm requires p >= 1");
  try {
    return from_law(running_max_law(chain, base, last, u, options), p);
  } catch (const CapacityError&) {
    if (!options.monte_carlo) throw;
  }
  const std::vector<Vector> rows = centered_rows(chain, base, last, u);
  return monte_carlo_norm(chain, base, last, p, options, [&](const std::vector<Eigen::Index>& path) {
    double s = 0.0;
    double best = 0.0;
    for (std::size_t k = 1; k < path.size(); ++k) {
      s += rows[k - 1][path[k]];
      best = std::max(best, std::abs(s));
    }
    return best;
  });
}

}  // namespace asip
