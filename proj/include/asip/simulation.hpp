#pragma once

#include "asip/blocks.hpp"
#include "asip/chain.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace asip {

/// Worker count from the ASIP_THREADS environment variable (default 1).
int worker_count();

struct SampleRequest {
  Time horizon = 1;             // n_max
  std::size_t paths = 1;        // N
  std::uint64_t seed = 42;
  std::vector<Time> checkpoints;
  std::vector<Vector> directions;  // unit vectors u
  bool lil = false;             // track the LIL statistic along directions[0]
  int threads = 0;              // 0: worker_count()
};

/// Per-path centered partial sums at checkpoints. Path i draws from the stream
/// derived from (seed, i), so the batch does not depend on the worker count.
struct PathBatch {
  std::uint64_t seed = 0;
  std::size_t paths = 0;
  Time horizon = 0;
  std::vector<Time> checkpoints;
  std::vector<Vector> directions;
  std::vector<double> sums;   // [path][checkpoint][direction] of (S_n - E S_n) . u
  std::vector<double> terms;  // [path][checkpoint][direction] of X_n . u (uncentered)
  std::vector<double> lil;    // [path] max_n |S_n . u| / sqrt(2 v_n log log v_n), when requested
  bool lil_defined = false;

  double sum(std::size_t path, std::size_t c, std::size_t d) const {
    return sums[(path * checkpoints.size() + c) * directions.size() + d];
  }
  double term(std::size_t path, std::size_t c, std::size_t d) const {
    return terms[(path * checkpoints.size() + c) * directions.size() + d];
  }
  /// All paths' values for one (checkpoint, direction).
  std::vector<double> column(std::size_t c, std::size_t d) const;
  std::vector<double> term_column(std::size_t c, std::size_t d) const;
};

PathBatch sample_paths(const ChainSpec& chain, const SampleRequest& request);

/// Independent Gaussian vectors Z_j with Cov(Z_j) = Cov(Theta_j).
struct Surrogate {
  std::uint64_t seed = 0;
  std::size_t paths = 0;
  std::vector<Matrix> roots;   // symmetric square roots of Cov(Theta_j)
  std::vector<Matrix> covariances;
  std::size_t clipped = 0;     // eigenvalues in [-1e-10, 0) set to 0
  std::vector<Vector> directions;
  std::vector<double> sums;    // [path][k][direction] of sum_{j<=k} Z_j . u

  double sum(std::size_t path, std::size_t k, std::size_t d) const {
    return sums[(path * roots.size() + k) * directions.size() + d];
  }
  std::vector<double> column(std::size_t k, std::size_t d) const;
  /// Var(sum_{j<=k} Z_j . u), exactly.
  double variance(std::size_t k, const Vector& u) const;
};

/// Throws ConstructionError when some Cov(Theta_j) has an eigenvalue below -1e-10.
Surrogate gaussian_surrogate(const BlockPartition& partition, std::size_t blocks,
                             const std::vector<Vector>& directions, std::size_t paths,
                             std::uint64_t seed, int threads = 0);

struct KsPoint {
  Time n = 1;
  std::size_t direction = 0;
  double ks = 0.0;
  double std_error = 0.0;
  double exact_variance = 0.0;
  bool skipped = false;  // zero exact variance
};

/// KS distance of (S_n . u) / sqrt(Var(S_n . u)) against N(0, 1), per checkpoint and direction.
std::vector<KsPoint> clt_diagnostic(const ChainSpec& chain, const PathBatch& batch);

struct VariancePoint {
  std::size_t k = 1;
  Time end = 1;              // e_k = max I_k
  std::size_t direction = 0;
  double variance = 0.0;     // Var(S_{e_k} . u)
  double surrogate = 0.0;    // sum_{j<=k} Var(Theta_j . u)
  double gap = 0.0;
  double s_n = 0.0;          // lambda_min(V_{e_k})
  double normalized = 0.0;   // gap / s^{1/2 + delta}
  double running_max = 0.0;
};

struct VarianceMatching {
  double delta = 0.1;
  Time horizon = 1;
  std::vector<VariancePoint> points;
  double constant = 0.0;  // max normalized gap
};

/// Exact gap curve between Var(S_{e_k} . u) and the surrogate's variance.
VarianceMatching variance_matching_diagnostic(const ChainSpec& chain, const BlockPartition& partition,
                                              const std::vector<Vector>& directions, double delta,
                                              Time horizon);

struct RatePoint {
  std::size_t k = 1;
  Time end = 1;
  std::size_t direction = 0;
  double w1 = 0.0;            // against the exact Gaussian law of sum Z_j . u
  double w1_std_error = 0.0;  // batch means
  double w1_samples = 0.0;    // against the surrogate's own samples
  double s_n = 0.0;
  double ratio = 0.0;         // w1 / s^{1/4 + delta}
};

/// W_1 proxy for the pathwise rate. The batch must have checkpoints e_1, e_2, ...
std::vector<RatePoint> rate_scaling_diagnostic(const ChainSpec& chain, const PathBatch& batch,
                                               const Surrogate& surrogate, double delta);

struct LilSummary {
  bool defined = false;
  std::size_t paths = 0;
  double median = 0.0;
  double q10 = 0.0;
  double q90 = 0.0;
  double max = 0.0;
  Time first_included = 0;  // first n with v_n >= e^e
};

/// Per-time normalizers 1 / sqrt(2 v log log v) along u, 0 where v < e^e.
std::vector<double> lil_normalizers(const ChainSpec& chain, Time horizon, const Vector& u);

LilSummary lil_diagnostic(const ChainSpec& chain, const PathBatch& batch);

}  // namespace asip
