#include "asip/simulation.hpp"

#include "asip/moments.hpp"
#include "asip/sampling.hpp"
#include "asip/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <string>
#include <thread>

namespace asip {

int worker_count() {
  if (const char* env = std::getenv("ASIP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
    throw InputError(std::string("ASIP_THREADS must be an integer in [1, 1024], got '") + env + "'");
  }
  return 1;
}

namespace {

// Runs fn(begin, end) over contiguous path ranges. Each path writes only its own
// slots, so the result is the same for any worker count.
template <class Fn>
void for_paths(std::size_t paths, int threads, Fn fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads > 0 ? threads : worker_count()));
  if (workers == 1 || paths < 2) {
    fn(std::size_t{0}, paths);
    return;
  }
  const std::size_t n = std::min(workers, paths);
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (std::size_t w = 0; w < n; ++w) {
    const std::size_t begin = paths * w / n;
    const std::size_t end = paths * (w + 1) / n;
    pool.emplace_back([&, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::vector<double> PathBatch::column(std::size_t c, std::size_t d) const {
  std::vector<double> out(paths);
  for (std::size_t i = 0; i < paths; ++i) out[i] = sum(i, c, d);
  return out;
}

std::vector<double> PathBatch::term_column(std::size_t c, std::size_t d) const {
  std::vector<double> out(paths);
  for (std::size_t i = 0; i < paths; ++i) out[i] = term(i, c, d);
  return out;
}

std::vector<double> lil_normalizers(const ChainSpec& chain, Time horizon, const Vector& u) {
  const std::vector<double> v = prefix_variances(chain, 1, horizon, u);
  const double threshold = std::exp(std::numbers::e);
  std::vector<double> out(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] >= threshold) out[i] = 1.0 / std::sqrt(2.0 * v[i] * std::log(std::log(v[i])));
  }
  return out;
}

PathBatch sample_paths(const ChainSpec& chain, const SampleRequest& req) {
  if (req.paths < 1) throw InputError("path count N must be >= 1");
  if (req.horizon < 1) throw InputError("horizon must be >= 1");
  if (req.directions.empty()) throw InputError("at least one direction is required");
  for (const auto& u : req.directions) {
    if (u.size() != chain.dimension()) throw InputError("direction has the wrong dimension");
  }
  for (std::size_t i = 0; i < req.checkpoints.size(); ++i) {
    const Time c = req.checkpoints[i];
    if (c < 1 || c > req.horizon) throw InputError("checkpoint " + std::to_string(c) + " outside [1, horizon]");
    if (i > 0 && c <= req.checkpoints[i - 1]) throw InputError("checkpoints must increase strictly");
  }
  chain.require_time(req.horizon);

  PathBatch batch;
  batch.seed = req.seed;
  batch.paths = req.paths;
  batch.horizon = req.horizon;
  batch.checkpoints = req.checkpoints;
  batch.directions = req.directions;
  const std::size_t nd = req.directions.size();
  const std::size_t nc = req.checkpoints.size();

  // Projected observable tables: centered for every time, raw at checkpoints.
  Matrix projection(chain.dimension(), static_cast<Eigen::Index>(nd));
  for (std::size_t d = 0; d < nd; ++d) projection.col(static_cast<Eigen::Index>(d)) = req.directions[d];
  std::vector<Matrix> centered(static_cast<std::size_t>(req.horizon));
  std::vector<Matrix> raw(nc);
  for (Time t = 1; t <= req.horizon; ++t) {
    Matrix values = chain.observable(t) * projection;
    const Vector mean = values.transpose() * chain.marginal(t);
    centered[static_cast<std::size_t>(t - 1)] = values.rowwise() - mean.transpose();
  }
  for (std::size_t c = 0; c < nc; ++c) raw[c] = chain.observable(req.checkpoints[c]) * projection;

  std::vector<double> lil_norm;
  if (req.lil) {
    lil_norm = lil_normalizers(chain, req.horizon, req.directions.front());
    batch.lil_defined = std::any_of(lil_norm.begin(), lil_norm.end(), [](double w) { return w > 0.0; });
    batch.lil.assign(req.paths, 0.0);
  }

  batch.sums.assign(req.paths * nc * nd, 0.0);
  batch.terms.assign(req.paths * nc * nd, 0.0);
  const StepSampler sampler(chain, 1, req.horizon);

  for_paths(req.paths, req.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> s(nd);
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng(req.seed, i);
      std::fill(s.begin(), s.end(), 0.0);
      std::size_t next = 0;
      double lil = 0.0;
      Eigen::Index x = sampler.sample_initial(rng);
      for (Time t = 1; t <= req.horizon; ++t) {
        if (t > 1) x = sampler.sample_next(t - 1, x, rng);
        const Matrix& g = centered[static_cast<std::size_t>(t - 1)];
        for (std::size_t d = 0; d < nd; ++d) s[d] += g(x, static_cast<Eigen::Index>(d));
        if (!lil_norm.empty()) lil = std::max(lil, std::abs(s[0]) * lil_norm[static_cast<std::size_t>(t - 1)]);
        if (next < nc && req.checkpoints[next] == t) {
          const std::size_t base = (i * nc + next) * nd;
          for (std::size_t d = 0; d < nd; ++d) {
            batch.sums[base + d] = s[d];
            batch.terms[base + d] = raw[next](x, static_cast<Eigen::Index>(d));
          }
          ++next;
        }
      }
      if (!lil_norm.empty()) batch.lil[i] = lil;
    }
  });
  return batch;
}

std::vector<double> Surrogate::column(std::size_t k, std::size_t d) const {
  std::vector<double> out(paths);
  for (std::size_t i = 0; i < paths; ++i) out[i] = sum(i, k, d);
  return out;
}

double Surrogate::variance(std::size_t k, const Vector& u) const {
  double v = 0.0;
  for (std::size_t j = 0; j <= k && j < covariances.size(); ++j) v += u.dot(covariances[j] * u);
  return v;
}

Surrogate gaussian_surrogate(const BlockPartition& partition, std::size_t blocks,
                             const std::vector<Vector>& directions, std::size_t paths,
                             std::uint64_t seed, int threads) {
  if (blocks > partition.blocks.size()) throw InputError("surrogate requests more blocks than the partition has");
  Surrogate sur;
  sur.seed = seed;
  sur.paths = paths;
  sur.directions = directions;
  for (std::size_t j = 0; j < blocks; ++j) {
    const Matrix& cov = partition.blocks[j].theta_cov;
    if (cov.size() == 0) throw InputError("block " + std::to_string(j + 1) + " has no Theta covariance");
    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    Vector lambda = es.eigenvalues();
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      if (lambda[i] < -1e-10) {
        throw ConstructionError("Cov(Theta_" + std::to_string(j + 1) + ") is not positive semidefinite (eigenvalue " +
                                std::to_string(lambda[i]) + ")");
      }
      if (lambda[i] < 0.0) {
        lambda[i] = 0.0;
        ++sur.clipped;
      }
    }
    sur.roots.push_back(es.eigenvectors() * lambda.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose());
    sur.covariances.push_back(cov);
  }
  const std::size_t nd = directions.size();
  sur.sums.assign(paths * blocks * nd, 0.0);
  if (blocks == 0) return sur;
  const Eigen::Index d = sur.roots.front().rows();
  // A distinct seed family keeps surrogate draws independent of the path streams.
  const std::uint64_t family = derive_stream_seed(seed, 0x6761757373ULL);
  for_paths(paths, threads, [&](std::size_t begin, std::size_t end) {
    Vector eps(d);
    Vector total(d);
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng(family, i);
      total.setZero();
      for (std::size_t j = 0; j < blocks; ++j) {
        for (Eigen::Index c = 0; c < d; ++c) eps[c] = rng.normal();
        total += sur.roots[j] * eps;
        for (std::size_t q = 0; q < nd; ++q) sur.sums[(i * blocks + j) * nd + q] = total.dot(directions[q]);
      }
    }
  });
  return sur;
}

std::vector<KsPoint> clt_diagnostic(const ChainSpec& chain, const PathBatch& batch) {
  std::vector<KsPoint> out;
  if (batch.checkpoints.empty()) return out;
  const auto covs = prefix_covariances(chain, 1, batch.checkpoints.back());
  for (std::size_t c = 0; c < batch.checkpoints.size(); ++c) {
    const Matrix& v = covs[static_cast<std::size_t>(batch.checkpoints[c] - 1)];
    for (std::size_t d = 0; d < batch.directions.size(); ++d) {
      KsPoint pt;
      pt.n = batch.checkpoints[c];
      pt.direction = d;
      pt.exact_variance = batch.directions[d].dot(v * batch.directions[d]);
      if (!(pt.exact_variance > 1e-12)) {
        pt.skipped = true;
        out.push_back(pt);
        continue;
      }
      std::vector<double> z = batch.column(c, d);
      const double scale = 1.0 / std::sqrt(pt.exact_variance);
      for (double& x : z) x *= scale;
      std::sort(z.begin(), z.end());
      pt.ks = ks_normal(z);
      pt.std_error = kKolmogorovSd / std::sqrt(static_cast<double>(z.size()));
      out.push_back(pt);
    }
  }
  return out;
}

VarianceMatching variance_matching_diagnostic(const ChainSpec& chain, const BlockPartition& partition,
                                              const std::vector<Vector>& directions, double delta,
                                              Time horizon) {
  VarianceMatching vm;
  vm.delta = delta;
  vm.horizon = horizon;
  const auto covs = prefix_covariances(chain, 1, horizon);
  std::vector<double> surrogate(directions.size(), 0.0);
  std::vector<double> running(directions.size(), 0.0);
  for (std::size_t k = 0; k < partition.blocks.size(); ++k) {
    const Block& b = partition.blocks[k];
    if (b.i_last > horizon) break;
    const Matrix theta = b.theta_cov.size() ? b.theta_cov : cov_partial_sum(chain, b.a, b.i_last);
    const Matrix& v = covs[static_cast<std::size_t>(b.i_last - 1)];
    const double s = min_eigenvalue(v);
    for (std::size_t d = 0; d < directions.size(); ++d) {
      const Vector& u = directions[d];
      surrogate[d] += u.dot(theta * u);
      VariancePoint pt;
      pt.k = k + 1;
      pt.end = b.i_last;
      pt.direction = d;
      pt.variance = u.dot(v * u);
      pt.surrogate = surrogate[d];
      pt.gap = std::abs(pt.variance - pt.surrogate);
      pt.s_n = s;
      pt.normalized = s > 0.0 ? pt.gap / std::pow(s, 0.5 + delta) : std::numeric_limits<double>::infinity();
      running[d] = std::max(running[d], pt.normalized);
      pt.running_max = running[d];
      vm.constant = std::max(vm.constant, pt.normalized);
      vm.points.push_back(pt);
    }
  }
  return vm;
}

std::vector<RatePoint> rate_scaling_diagnostic(const ChainSpec& chain, const PathBatch& batch,
                                               const Surrogate& surrogate, double delta) {
  std::vector<RatePoint> out;
  const std::size_t k_max = std::min(batch.checkpoints.size(), surrogate.roots.size());
  if (k_max == 0) return out;
  const auto covs = prefix_covariances(chain, 1, batch.checkpoints[k_max - 1]);
  constexpr std::size_t kBatches = 20;
  for (std::size_t k = 0; k < k_max; ++k) {
    const double s = min_eigenvalue(covs[static_cast<std::size_t>(batch.checkpoints[k] - 1)]);
    for (std::size_t d = 0; d < batch.directions.size(); ++d) {
      RatePoint pt;
      pt.k = k + 1;
      pt.end = batch.checkpoints[k];
      pt.direction = d;
      pt.s_n = s;
      const double sigma = std::sqrt(std::max(0.0, surrogate.variance(k, batch.directions[d])));
      std::vector<double> x = batch.column(k, d);
      std::vector<double> sorted = x;
      std::sort(sorted.begin(), sorted.end());
      pt.w1 = wasserstein1_normal(sorted, sigma);
      if (surrogate.paths == batch.paths && d < surrogate.directions.size()) {
        std::vector<double> z = surrogate.column(k, d);
        std::sort(z.begin(), z.end());
        pt.w1_samples = wasserstein1_samples(sorted, z);
      }
      if (batch.paths >= 2 * kBatches) {
        std::vector<double> parts;
        for (std::size_t b = 0; b < kBatches; ++b) {
          std::vector<double> chunk(x.begin() + static_cast<std::ptrdiff_t>(batch.paths * b / kBatches),
                                    x.begin() + static_cast<std::ptrdiff_t>(batch.paths * (b + 1) / kBatches));
          std::sort(chunk.begin(), chunk.end());
          parts.push_back(wasserstein1_normal(chunk, sigma));
        }
        // sd(W1) scales like N^{-1/2}: the batch spread over sqrt(B) estimates the full-sample sd.
        pt.w1_std_error = mean_estimate(parts).std_error;
      }
      pt.ratio = s > 0.0 ? pt.w1 / std::pow(s, 0.25 + delta) : std::numeric_limits<double>::infinity();
      out.push_back(pt);
    }
  }
  return out;
}

LilSummary lil_diagnostic(const ChainSpec& chain, const PathBatch& batch) {
  LilSummary out;
  out.paths = batch.paths;
  if (!batch.lil_defined || batch.lil.empty()) return out;
  const auto norms = lil_normalizers(chain, batch.horizon, batch.directions.front());
  for (std::size_t i = 0; i < norms.size(); ++i) {
    if (norms[i] > 0.0) {
      out.first_included = static_cast<Time>(i + 1);
      break;
    }
  }
  out.defined = true;
  std::vector<double> v = batch.lil;
  std::sort(v.begin(), v.end());
  out.median = quantile(v, 0.5);
  out.q10 = quantile(v, 0.1);
  out.q90 = quantile(v, 0.9);
  out.max = v.back();
  return out;
}

}  // namespace asip
