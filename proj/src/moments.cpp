#include "asip/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace asip {

namespace {

// Centered observable G_t = F_t U - 1 mu^T and its marginal mean mu (q).
struct Centered {
  Matrix values;
  Vector mean;
};

Centered centered(const ChainSpec& chain, Time t, const Matrix& projection) {
  const Vector& pi = chain.marginal(t);
  Centered c;
  c.values = chain.observable(t) * projection;
  c.mean = c.values.transpose() * pi;
  c.values.rowwise() -= c.mean.transpose();
  return c;
}

Matrix as_column(const Vector& u) { return Matrix(u); }

}  // namespace

Vector mean_obs(const ChainSpec& chain, Time j) {
  return chain.observable(j).transpose() * chain.marginal(j);
}

Matrix cov_pair(const ChainSpec& chain, Time i, Time j) {
  if (i > j) throw InputError("cov_pair requires i <= j");
  const int d = chain.dimension();
  const Matrix identity = Matrix::Identity(d, d);
  const Centered gi = centered(chain, i, identity);
  if (i == j) return gi.values.transpose() * chain.marginal(i).asDiagonal() * gi.values;
  const Centered gj = centered(chain, j, identity);
  const JointLaw law = pair_joint(chain, i, j);
  return gi.values.transpose() * law.joint * gj.values;
}

CovarianceSweep::CovarianceSweep(const ChainSpec& chain, Time start, Matrix projection)
    : chain_(chain), projection_(std::move(projection)), start_(start), time_(start) {
  chain_.require_time(start);
  const auto q = projection_.cols();
  pushed_ = Matrix::Zero(chain_.states(start), q);
  cov_ = Matrix::Zero(q, q);
}

void CovarianceSweep::step(double weight) {
  if (time_ > start_) pushed_ = chain_.kernel(time_ - 1).transpose() * pushed_;
  if (weight != 0.0) {
    const Vector& pi = chain_.marginal(time_);
    const Centered g = centered(chain_, time_, projection_);
    const Matrix weighted = pi.asDiagonal() * g.values;
    const Matrix cross = pushed_.transpose() * g.values;
    cov_ += weight * weight * (g.values.transpose() * weighted) + weight * (cross + cross.transpose());
    pushed_ += weight * weighted;
  }
  ++time_;
}

Matrix cov_partial_sum(const ChainSpec& chain, Time n, Time m) {
  if (n > m) throw InputError("cov_partial_sum requires n <= m");
  const int d = chain.dimension();
  CovarianceSweep sweep(chain, n, Matrix::Identity(d, d));
  for (Time t = n; t <= m; ++t) sweep.step();
  return sweep.covariance();
}

std::vector<Matrix> prefix_covariances(const ChainSpec& chain, Time first, Time last) {
  const int d = chain.dimension();
  CovarianceSweep sweep(chain, first, Matrix::Identity(d, d));
  std::vector<Matrix> out;
  out.reserve(static_cast<std::size_t>(std::max<Time>(last - first + 1, 0)));
  for (Time t = first; t <= last; ++t) {
    sweep.step();
    out.push_back(sweep.covariance());
  }
  return out;
}

std::vector<double> prefix_variances(const ChainSpec& chain, Time first, Time last, const Vector& u) {
  CovarianceSweep sweep(chain, first, as_column(u));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(std::max<Time>(last - first + 1, 0)));
  for (Time t = first; t <= last; ++t) {
    sweep.step();
    out.push_back(sweep.covariance()(0, 0));
  }
  return out;
}

std::vector<double> suffix_variances(const ChainSpec& chain, Time first, Time last, const Vector& u) {
  if (first > last) throw InputError("suffix_variances requires first <= last");
  const Matrix projection = as_column(u);
  std::vector<double> out(static_cast<std::size_t>(last - first + 1));
  // h(x) = E[S_{a+1,last} . u - mean | xi_a = x]
  Vector h = Vector::Zero(chain.states(last));
  double var = 0.0;
  for (Time a = last; a >= first; --a) {
    const Vector& pi = chain.marginal(a);
    const Vector g = centered(chain, a, projection).values.col(0);
    if (a < last) h = chain.kernel(a) * h;
    var += pi.dot(g.cwiseProduct(g)) + 2.0 * pi.dot(g.cwiseProduct(h));
    out[static_cast<std::size_t>(a - first)] = var;
    h += g;
  }
  return out;
}

double set_variance(const ChainSpec& chain, const IndexSet& set, const Vector& u) {
  if (set.empty()) return 0.0;
  CovarianceSweep sweep(chain, set.min(), as_column(u));
  for (const auto& iv : set.intervals()) {
    while (sweep.time() < iv.first) sweep.step(0.0);
    while (sweep.time() <= iv.last) sweep.step(1.0);
  }
  return sweep.covariance()(0, 0);
}

double cross_covariance(const ChainSpec& chain, const IndexSet& left, const IndexSet& right,
                        const Vector& u) {
  if (left.empty() || right.empty()) return 0.0;
  if (left.max() >= right.min()) throw InputError("cross_covariance requires max(left) < min(right)");
  const Matrix projection = as_column(u);
  Vector pushed = Vector::Zero(chain.states(left.min()));
  double cov = 0.0;
  for (Time t = left.min(); t <= right.max(); ++t) {
    if (t > left.min()) pushed = chain.kernel(t - 1).transpose() * pushed;
    const bool in_left = left.contains(t);
    const bool in_right = right.contains(t);
    if (!in_left && !in_right) continue;
    const Vector g = centered(chain, t, projection).values.col(0);
    if (in_right) cov += pushed.dot(g);
    if (in_left) pushed += chain.marginal(t).cwiseProduct(g);
  }
  return cov;
}

double min_eigenvalue(const Matrix& symmetric) {
  if (symmetric.rows() == 1) return symmetric(0, 0);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

EigenSummary eigen_summary(const Matrix& symmetric) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric);
  EigenSummary s;
  s.lambda_min = solver.eigenvalues()(0);
  s.lambda_max = solver.eigenvalues()(solver.eigenvalues().size() - 1);
  s.vectors = solver.eigenvectors();
  return s;
}

EigenRatioReport eigen_ratio_report(const ChainSpec& chain,
                                    const std::vector<std::pair<Time, Time>>& windows, double c1) {
  EigenRatioReport report;
  report.c1 = c1;
  report.c2 = 1.0;
  for (const auto& [n, m] : windows) {
    EigenWindow w;
    w.n = n;
    w.m = m;
    const Matrix v = cov_partial_sum(chain, n, m);
    w.l2_norm = std::sqrt(std::max(v.trace(), 0.0));
    if (chain.dimension() == 1) {
      w.lambda_min = w.lambda_max = v(0, 0);
    } else {
      const auto s = eigen_summary(v);
      w.lambda_min = s.lambda_min;
      w.lambda_max = s.lambda_max;
    }
    w.included = w.l2_norm >= c1;
    if (chain.dimension() == 1) {
      w.ratio = 1.0;
    } else if (w.lambda_min <= 1e-12 * std::max(w.lambda_max, 1.0)) {
      w.ratio = std::numeric_limits<double>::infinity();
    } else {
      w.ratio = std::max(1.0, w.lambda_max / w.lambda_min);
    }
    if (w.included) {
      if (std::isinf(w.ratio) && !report.singular_window) report.singular_window = std::make_pair(n, m);
      report.c2 = std::max(report.c2, w.ratio);
    }
    report.windows.push_back(w);
  }
  return report;
}

}  // namespace asip
