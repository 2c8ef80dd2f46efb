#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace asip {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Time indices are 1-based, matching the usual X_1, X_2, ... convention.
using Time = std::int64_t;
inline constexpr Time kUnbounded = std::numeric_limits<Time>::max();

// Absolute tolerance for stochasticity and mass checks.
inline constexpr double kProbabilityTolerance = 1e-12;

// Magnitudes of differences of O(1) probabilities below this are numerical zero.
inline constexpr double kNumericalFloor = 1e-14;

struct TimeRange {
  Time first = 1;
  Time last = 1;
  Time size() const { return last >= first ? last - first + 1 : 0; }
};

/// Closed integer interval [first, last].
struct Interval {
  Time first = 1;
  Time last = 0;
  Time size() const { return last >= first ? last - first + 1 : 0; }
  bool contains(Time t) const { return t >= first && t <= last; }
};

/// Finite set of time indices stored as sorted, disjoint, non-adjacent intervals.
class IndexSet {
 public:
  IndexSet() = default;
  IndexSet(Time first, Time last);
  explicit IndexSet(std::vector<Interval> intervals);

  static IndexSet from_indices(std::vector<Time> indices);

  bool empty() const { return intervals_.empty(); }
  Time min() const;
  Time max() const;
  Time size() const;
  bool contains(Time t) const;
  const std::vector<Interval>& intervals() const { return intervals_; }

  IndexSet united(const IndexSet& other) const;

 private:
  void normalize();
  std::vector<Interval> intervals_;
};

// Error hierarchy. The CLI maps these onto its exit codes.

/// Malformed or inconsistent input (chain documents, parameters).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A construction that the inputs cannot support (e.g. a block that never closes).
class ConstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact enumeration would exceed a configured cap.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace asip
