#pragma once

#include "asip/chain.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace asip {

/// E[X_j].
Vector mean_obs(const ChainSpec& chain, Time j);

/// Cov(X_i, X_j) for i <= j, as a d x d matrix with rows indexed by X_i.
Matrix cov_pair(const ChainSpec& chain, Time i, Time j);

/// Forward accumulator for Cov(sum_t w_t X_t . U), where the columns of U are
/// projection directions (U = I gives the full covariance matrix).
///
/// Carries the pushed-forward centered measure of the past, so every step costs
/// one small kernel product and the whole window is exact in linear time.
class CovarianceSweep {
 public:
  CovarianceSweep(const ChainSpec& chain, Time start, Matrix projection);

  /// Adds w * X_t for the current time t, then moves to t + 1.
  void step(double weight = 1.0);
  /// Next time to be processed.
  Time time() const { return time_; }
  /// Cov of the accumulated weighted sum, q x q.
  const Matrix& covariance() const { return cov_; }

 private:
  const ChainSpec& chain_;
  Matrix projection_;
  Time start_;
  Time time_;
  Matrix pushed_;  // |X_t| x q: sum_{i < t} w_i (diag(pi_i) G_i) pushed to time t
  Matrix cov_;
};

/// V_{n,m} = Cov(S_{n,m}).
Matrix cov_partial_sum(const ChainSpec& chain, Time n, Time m);

/// V_{first,t} for every t in [first, last].
std::vector<Matrix> prefix_covariances(const ChainSpec& chain, Time first, Time last);

/// Var(S_{first,t} . u) for every t in [first, last].
std::vector<double> prefix_variances(const ChainSpec& chain, Time first, Time last, const Vector& u);

/// Var(S_{a,last} . u) for every a in [first, last], by a backward recursion on
/// conditional expectations.
std::vector<double> suffix_variances(const ChainSpec& chain, Time first, Time last, const Vector& u);

/// Var(sum_{t in set} X_t . u).
double set_variance(const ChainSpec& chain, const IndexSet& set, const Vector& u);

/// Cov(S(left) . u, S(right) . u) for max(left) < min(right).
double cross_covariance(const ChainSpec& chain, const IndexSet& left, const IndexSet& right,
                        const Vector& u);

struct EigenWindow {
  Time n = 1;
  Time m = 1;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double l2_norm = 0.0;  // trace(V_{n,m})^{1/2}
  bool included = false; // l2_norm >= c1
  double ratio = 1.0;    // lambda_max / lambda_min, +inf when singular
};

struct EigenRatioReport {
  double c1 = 1.0;
  std::vector<EigenWindow> windows;
  double c2 = 1.0;  // max ratio over included windows
  std::optional<std::pair<Time, Time>> singular_window;
};

/// Checks the bounded eigenvalue-ratio condition on the requested windows. A window
/// whose lambda_min is below 1e-12 max(lambda_max, 1) counts as singular.
EigenRatioReport eigen_ratio_report(const ChainSpec& chain,
                                    const std::vector<std::pair<Time, Time>>& windows,
                                    double c1 = 1.0);

/// s_n = min_{|u| = 1} V_n u . u.
double min_eigenvalue(const Matrix& symmetric);

/// Largest and smallest eigenvalues with their eigenvectors.
struct EigenSummary {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  Matrix vectors;  // columns, ascending eigenvalues
};
EigenSummary eigen_summary(const Matrix& symmetric);

}  // namespace asip
