#pragma once

#include "asip/battery.hpp"
#include "asip/blocks.hpp"
#include "asip/mixing.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace asip {

struct Check {
  std::string id;
  std::string chain;  // empty for suite-wide checks
  bool passed = false;
  bool hard = true;   // soft checks are diagnostics and never fail a run
  std::string detail;
};

struct PipelineOptions {
  double p = 4.0;
  double c_p = 8.0;
  Time k_max = 12;
  std::size_t min_blocks = 4;
  Time min_horizon = 2000;
  Time scan_limit = 4000000;
  QExponent exponent = QExponent::TwoMinus;
  int directions = 16;
};

/// Mixing analysis, envelope, r and A selection, blocks and their verification.
struct ChainAnalysis {
  std::string name;
  ChainSpec chain;
  bool iid = false;
  MixingReport mixing;
  SeparationChoice separation;
  double q0 = 0.0;
  AmplitudeChoice amplitude;
  QValues q;
  Time horizon = 0;  // max I_K of the last required block
  std::optional<BlockPartition> partition;
  std::optional<BlockVerification> verification;
  std::string error;  // why the partition is missing
};

ChainAnalysis analyze_chain(const BatteryEntry& entry, const PipelineOptions& options = {});

/// Kernels stochastic, marginals normalized, Chapman-Kolmogorov, two routes to
/// Var(S_n), two routes to the L^p norm, L^2 <= L^4 <= L^6.
std::vector<Check> check_exact_moments(const BatteryEntry& entry);

/// alpha(k) <= phi(k), rho_j <= sqrt(pi(Q_j)), envelope covers every alpha(k).
std::vector<Check> check_mixing_identities(const ChainAnalysis& analysis);

/// The reference chain's alpha(1), phi(1), pi, rho against hand-enumerated values.
std::vector<Check> check_reference_chain();

/// Block-sum covariance inequality with exact L^p norms and the local alpha.
struct CovarianceTally {
  std::size_t pairs = 0;
  std::size_t violations = 0;
  std::size_t inexact = 0;
  double worst_ratio = 0.0;  // max |cov| / bound
};
Check check_covariance_inequality(const ChainAnalysis& analysis, double p, CovarianceTally* tally = nullptr);

/// Structure, prefix sandwich, block-variance deviation and the two-sided norm bounds.
std::vector<Check> check_partition(const ChainAnalysis& analysis);

/// Standardized fourth moment of S_n . u at the analysis horizon, within 0.3 of 3.
Check check_kurtosis(const ChainAnalysis& analysis);

/// Fitted c' > 0 for k = 1..k_max, and every gap below the floor for i.i.d. chains.
Check check_condition_h(const BatteryEntry& entry, Time k_max = 12);

struct OracleTally {
  std::size_t comparisons = 0;
  std::size_t failures = 0;
  std::vector<std::string> failed;
};
/// Monte Carlo means of X_j . u and variances of S_n . u within `z` standard errors.
Check check_monte_carlo(const BatteryEntry& entry, std::size_t paths, std::uint64_t seed,
                        const std::vector<Time>& checkpoints, double z = 4.0, OracleTally* tally = nullptr);

/// Running maximum of the normalized variance gap at horizon H against 2H.
struct MatchingStability {
  double at_horizon = 0.0;
  double at_double = 0.0;
  double relative_change = 0.0;
};
Check check_variance_matching(const ChainAnalysis& analysis, double delta, MatchingStability* out = nullptr);

/// Same batch with 1 and 4 workers, compared bit for bit.
Check check_worker_independence(const BatteryEntry& entry, std::size_t paths, std::uint64_t seed);

/// Replaces a kernel row of the chain with one summing to 1.1, bypassing validation.
ChainSpec inject_kernel_fault(const ChainSpec& chain);

struct VerifyConfig {
  PipelineOptions pipeline;
  std::size_t paths = 2000;
  std::uint64_t seed = 42;
  std::vector<Time> checkpoints = {1, 2, 5, 10, 50, 100};
  bool inject_fault = false;
};

struct VerifySummary {
  std::vector<Check> checks;
  std::size_t hard_failures = 0;
  std::size_t soft_failures = 0;
  std::optional<Check> first_failure;  // first hard failure in run order
  bool passed() const { return hard_failures == 0; }
};

VerifySummary run_verify(const VerifyConfig& config);

}  // namespace asip
