#include "asip/types.hpp"

#include <algorithm>

namespace asip {

IndexSet::IndexSet(Time first, Time last) {
  if (last >= first) intervals_.push_back({first, last});
}

IndexSet::IndexSet(std::vector<Interval> intervals) : intervals_(std::move(intervals)) {
  normalize();
}

IndexSet IndexSet::from_indices(std::vector<Time> indices) {
  std::vector<Interval> parts;
  parts.reserve(indices.size());
  for (Time t : indices) parts.push_back({t, t});
  return IndexSet(std::move(parts));
}

void IndexSet::normalize() {
  std::erase_if(intervals_, [](const Interval& iv) { return iv.size() == 0; });
  std::sort(intervals_.begin(), intervals_.end(),
            [](const Interval& a, const Interval& b) { return a.first < b.first; });
  std::vector<Interval> merged;
  for (const auto& iv : intervals_) {
    if (!merged.empty() && iv.first <= merged.back().last + 1) {
      merged.back().last = std::max(merged.back().last, iv.last);
    } else {
      merged.push_back(iv);
    }
  }
  intervals_ = std::move(merged);
}

Time IndexSet::min() const {
  if (empty()) throw InputError("empty index set has no minimum");
  return intervals_.front().first;
}

Time IndexSet::max() const {
  if (empty()) throw InputError("empty index set has no maximum");
  return intervals_.back().last;
}

Time IndexSet::size() const {
  Time n = 0;
  for (const auto& iv : intervals_) n += iv.size();
  return n;
}

bool IndexSet::contains(Time t) const {
  auto it = std::upper_bound(intervals_.begin(), intervals_.end(), t,
                             [](Time v, const Interval& iv) { return v < iv.first; });
  if (it == intervals_.begin()) return false;
  return std::prev(it)->contains(t);
}

IndexSet IndexSet::united(const IndexSet& other) const {
  std::vector<Interval> all = intervals_;
  all.insert(all.end(), other.intervals_.begin(), other.intervals_.end());
  return IndexSet(std::move(all));
}

}  // namespace asip
