#pragma once

#include "asip/chain.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace asip {

struct LpOptions {
  std::size_t atom_cap = 100000;   // (state, key) atoms alive at any step
  double grid = 1e-9;              // key spacing when values are not dyadic
  bool monte_carlo = true;         // fall back to sampling past the cap
  std::size_t mc_paths = 20000;
  std::uint64_t mc_seed = 0x5eed;
  bool moment_route = true;        // even integer p: exact moment recursion, no atoms
};

/// Finite law of a centered scalar statistic, sorted by value.
struct DiscreteLaw {
  std::vector<double> values;
  std::vector<double> probs;
  bool lattice = true;  // keys were exact multiples of a dyadic unit (no rounding)

  double moment(double p) const;  // E|V|^p
  double cdf(double x) const;     // P(V <= x)
};

struct LpNorm {
  double value = 0.0;
  bool exact = true;        // from the DP; false means Monte Carlo
  bool lattice = true;
  double std_error = 0.0;   // 0 when exact
  std::size_t atoms = 0;
};

/// Law of sum_{t in set} (X_t - E X_t) . u by dynamic programming over
/// (state, accumulated sum). Throws CapacityError past options.atom_cap.
DiscreteLaw partial_sum_law(const ChainSpec& chain, const IndexSet& set, const Vector& u,
                            const LpOptions& options = {});

/// E[(S(set) . u - E S(set) . u)^k] by a forward recursion on the joint
/// moments E[S^i ; xi_t = x], i <= k. Cost is linear in the span of the set.
double central_moment(const ChainSpec& chain, const IndexSet& set, const Vector& u, int k);

/// || S(set) . u ||_{L^p}, centered. Even integer p uses central_moment. Exact when the DP fits, else Monte Carlo
/// (or CapacityError "support overflow" when sampling is disabled).
LpNorm lp_norm(const ChainSpec& chain, const IndexSet& set, const Vector& u, double p,
               const LpOptions& options = {});

LpNorm lp_norm_partial_sum(const ChainSpec& chain, Time n, Time m, const Vector& u, double p,
                           const LpOptions& options = {});

/// Law of max_{base <= n <= last} |S_n . u - S_base . u| (centered sums), by DP
/// over (state, running sum, running max) started from the law of xi_base.
DiscreteLaw running_max_law(const ChainSpec& chain, Time base, Time last, const Vector& u,
                            const LpOptions& options = {});

LpNorm running_max_norm(const ChainSpec& chain, Time base, Time last, const Vector& u, double p,
                        const LpOptions& options = {});

}  // namespace asip
