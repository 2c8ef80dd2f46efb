#pragma once

#include "asip/chain.hpp"
#include "asip/lp_norm.hpp"
#include "asip/mixing.hpp"

#include <optional>
#include <string>
#include <vector>

namespace asip {

struct SeparationChoice {
  Time r = 1;
  double sum = 0.0;  // C^{1-2/p} q / (1 - q) with q = delta^{r (1-2/p)}
  double target = 0.0;  // 1 / (32 c_p)
};

/// Smallest r with sum_{m>=1} (C delta^{rm})^{1-2/p} < 1/(32 c_p).
SeparationChoice select_separation(double c, double delta, double p, double c_p);

enum class QExponent { TwoMinus, OneMinus };  // 2 - 2/p as printed, or 1 - 2/p

struct QValues {
  double q0 = 0.0;
  double q = 0.0;  // Q(A) = Q0 + 2 sqrt(3 A Q0)
};

double compute_q0(Time r, double p, double bound, double c, double delta, double c_p,
                  QExponent exponent = QExponent::TwoMinus);
double q_of_a(double q0, double a);
QValues compute_q(double a, Time r, double p, double bound, double c, double delta, double c_p,
                  QExponent exponent = QExponent::TwoMinus);

struct AmplitudeChoice {
  double a = 1.0;
  double closed_form = 1.0;  // root of x^2 - 8 sqrt(3 Q0) x - (4 Q0 + 1), squared
  double bisection = 1.0;
  double certificate = 0.0;  // A - 4 Q(A) - 1 >= 0
};

/// Smallest A >= 1 with A >= 4 Q(A) + 1.
AmplitudeChoice select_amplitude(double q0);

struct Block {
  Time a = 1;       // min M_j
  Time b = 1;       // max M_j
  Time i_last = 1;  // max I_j = b + r
  double variance = 0.0;  // Var(S(M_j) . u0)
  double norm = 0.0;
  Matrix theta_cov;       // Cov(Theta_j), Theta_j = sum_{k in I_j} X_k
};

struct BlockPartition {
  Vector u0;
  Time r = 1;
  double amplitude = 1.0;
  double bound = 0.0;        // L |u0|_1, the one-step growth allowance
  Time horizon = 1;
  std::vector<Block> blocks;

  /// k_n = max{k : b_k <= n}, 0 before the first block closes.
  Time k_of(Time n) const;
  IndexSet m_set(std::size_t j) const;
  IndexSet i_set(std::size_t j) const;
};

struct BuildOptions {
  std::optional<Time> scan_limit;  // default 2 * horizon + 1000, capped by the chain
  bool theta_covariances = true;
  std::size_t min_blocks = 0;      // keep adding blocks past the horizon until this many
};

/// Greedy construction: M_1 starts at 1, M_{j+1} starts at b_j + r + 1 and
/// closes at the first b with Var(S(M_{j+1}) . u0) >= A. Blocks are added until
/// the I_j cover [1, horizon]. Throws ConstructionError on variance starvation.
BlockPartition build_blocks(const ChainSpec& chain, const Vector& u0, double amplitude, Time r,
                            Time horizon, const BuildOptions& options = {});

/// Structural invariants; each entry describes one violation.
std::vector<std::string> check_structure(const BlockPartition& partition);

/// Deterministic unit vectors: {1} for d = 1, a half circle for d = 2, a
/// Fibonacci sphere for d = 3 and a Halton-based set beyond.
std::vector<Vector> direction_grid(int d, int count);

struct VerifyOptions {
  int directions = 64;
  std::optional<double> q_of_amplitude;  // enables the block-variance deviation check
  bool separation_certified = false;     // r came from select_separation
};

struct BlockVerification {
  Time horizon = 1;
  int directions = 1;
  std::size_t blocks_checked = 0;

  // A_1 <= ||Theta_j . u|| <= max_m ||sum_{a_j}^m X . u|| <= A_2
  double a1 = 0.0;
  double a2 = 0.0;
  bool a_ok = false;

  double c = 0.0;  // max_j max_{a in I_j} ||sum_{k=a}^{b_j} X_k||_2
  bool c_ok = false;

  // R_1 k_n <= Var(S_n . u) <= R_2 k_n; eigen extremes are exact over all u.
  double r1 = 0.0;
  double r2 = 0.0;
  double r1_grid = 0.0;
  double r2_grid = 0.0;
  Time r_from = 1;
  bool r_ok = false;

  std::vector<double> sandwich;  // Var(S(M^(k))) / sum_{i<=k} Var(S(M_i))
  double sandwich_min = 1.0;
  double sandwich_max = 1.0;
  bool sandwich_applicable = false;
  bool sandwich_ok = true;

  std::vector<double> deviation;  // |Var(S(M^(k))) / Var(S(I^(k))) - 1|
  double deviation_max = 0.0;
  double deviation_bound = 0.0;   // 2 Q(A) / A
  bool deviation_applicable = false;
  std::string deviation_note;
  bool deviation_ok = true;

  std::vector<std::string> structural;

  bool passed() const;
};

BlockVerification verify_partition(const ChainSpec& chain, const BlockPartition& partition, Time horizon,
                                   const VerifyOptions& options = {});

struct CovarianceCheck {
  Time r = 1;
  double cov = 0.0;
  double norm1 = 0.0;
  double norm2 = 0.0;
  double alpha = 0.0;
  double bound = 0.0;
  bool exact = true;  // both L^p norms from the DP
  bool pass = false;
};

/// |Cov(S(M1) . u, S(M2) . u)| <= 8 ||S(M1) . u||_p ||S(M2) . u||_p alpha(r)^{1-2/p}
/// with r = min M2 - max M1 and alpha taken between xi_{max M1} and xi_{min M2}.
CovarianceCheck covariance_inequality_check(const ChainSpec& chain, const IndexSet& m1,
                                            const IndexSet& m2, const Vector& u, double p,
                                            const LpOptions& options = {});

struct TailStatistics {
  std::vector<double> d_norms;  // ||D_q . u0||_{L^p}, q = 1..
  std::vector<bool> d_exact;
  double d_max = 0.0;
  double trivial_bound = 0.0;   // 2 r L |u0|_1
  bool bounded = true;
  std::size_t paths = 0;
  std::uint64_t seed = 0;
  std::vector<double> epsilons;
  std::vector<double> path_max;     // per epsilon: max over paths of max_q D_q / q^eps
  std::vector<double> path_median;  // per epsilon: median over paths
};

/// D_q = max_{b_q <= n <= b_q + r} |S_n - S_{b_q}| along u0, for every gap
/// ending by `horizon`.
TailStatistics tail_statistics(const ChainSpec& chain, const BlockPartition& partition, double p,
                               Time horizon, std::size_t paths = 200, std::uint64_t seed = 42,
                               const LpOptions& options = {});

}  // namespace asip
