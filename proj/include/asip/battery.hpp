#pragma once

#include "asip/chain.hpp"

#include <string>
#include <vector>

namespace asip {

struct BatteryEntry {
  std::string name;
  ChainSpec chain;
  bool iid = false;
};

/// Two-state chain on {+1, -1} that stays put with probability (1 + lambda) / 2,
/// started from the uniform law. lambda = 0.5 is the reference chain.
ChainSpec symmetric_chain(double lambda);

/// Slow asymmetric chain with phi(k) >= 1/2 over any short range of k.
ChainSpec sticky_chain();

/// The built-in battery: 2 to 4 states, d in {1, 2}, Dobrushin coefficients in [0, 0.9].
std::vector<BatteryEntry> default_battery();

/// Looks a battery chain up by name; throws InputError listing the names.
ChainSpec battery_chain(const std::string& name);

}  // namespace asip
