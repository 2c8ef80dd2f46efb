// One PASS/FAIL line per acceptance criterion on stdout; exit status 1 if any fails.
#include "asip/battery.hpp"
#include "asip/lp_norm.hpp"
#include "asip/moments.hpp"
#include "asip/simulation.hpp"
#include "asip/statistics.hpp"
#include "asip/verify.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <vector>

namespace fs = std::filesystem;
using asip::Time;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Analyzed {
  asip::BatteryEntry entry;
  std::optional<asip::ChainAnalysis> analysis;
  std::string error;
};

template <class... Args>
std::string str(const Args&... args) {
  std::ostringstream out;
  out.precision(6);
  (out << ... << args);
  return out.str();
}

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& run) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = run();
  } catch (const std::exception& e) {
    o = {false, str("threw: ", e.what())};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.passed) ++failures;
  std::cout << (o.passed ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << o.detail << " ("
            << str(secs) << " s)" << std::endl;
}

// Analyses are shared by criteria 1, 2, 3, 6 and 7; their cost is charged to criterion 1.
std::vector<Analyzed>& analyses() {
  static std::vector<Analyzed> all = [] {
    std::vector<Analyzed> out;
    for (auto& e : asip::default_battery()) {
      Analyzed a{e, std::nullopt, {}};
      try {
        a.analysis = asip::analyze_chain(e);
      } catch (const std::exception& ex) {
        a.error = ex.what();
      }
      out.push_back(std::move(a));
    }
    return out;
  }();
  return all;
}

std::string first_failure(const std::vector<asip::Check>& checks) {
  for (const auto& c : checks) {
    if (!c.passed) return c.chain + " " + c.id + ": " + c.detail;
  }
  return {};
}

Outcome exact_inequalities() {
  std::vector<asip::Check> checks;
  std::size_t pairs = 0;
  double worst = 0.0;
  for (const auto& a : analyses()) {
    if (!a.analysis) {
      checks.push_back({"pipeline", a.entry.name, false, true, a.error});
      continue;
    }
    asip::CovarianceTally t;
    checks.push_back(asip::check_covariance_inequality(*a.analysis, 4.0, &t));
    pairs += t.pairs;
    worst = std::max(worst, t.worst_ratio);
    for (auto& c : asip::check_partition(*a.analysis)) {
      if (c.id == "prefix-sandwich" || c.id == "block-variance-deviation" || c.id == "block-construction") {
        checks.push_back(std::move(c));
      }
    }
  }
  const std::string bad = first_failure(checks);
  return {bad.empty(), bad.empty() ? str(analyses().size(), " chains, ", pairs,
                                         " covariance pairs, max |cov| / bound = ", worst,
                                         "; sandwich and deviation hold on every partition")
                                   : bad};
}

Outcome structural() {
  std::vector<asip::Check> checks;
  std::size_t blocks = 0;
  for (const auto& a : analyses()) {
    if (!a.analysis) {
      checks.push_back({"pipeline", a.entry.name, false, true, a.error});
      continue;
    }
    if (a.analysis->partition) blocks += a.analysis->partition->blocks.size();
    for (auto& c : asip::check_partition(*a.analysis)) {
      if (c.id == "block-structure" || c.id == "theta-norm-range" || c.id == "block-construction") {
        checks.push_back(std::move(c));
      }
    }
  }
  const std::string bad = first_failure(checks);
  return {bad.empty(), bad.empty() ? str(blocks, " blocks over ", analyses().size(), " partitions") : bad};
}

Outcome mixing_identities() {
  std::vector<asip::Check> checks = asip::check_reference_chain();
  for (const auto& a : analyses()) {
    if (!a.analysis) continue;
    for (auto& c : asip::check_mixing_identities(*a.analysis)) {
      if (c.id == "alpha-le-phi" || c.id == "rho-le-sqrt-pi") checks.push_back(std::move(c));
    }
  }
  const std::string bad = first_failure(checks);
  return {bad.empty(), bad.empty() ? checks.front().detail + "; alpha <= phi and rho <= sqrt(pi) on every chain" : bad};
}

Outcome oracle_equivalence() {
  std::size_t comparisons = 0;
  std::size_t misses = 0;
  std::string first;
  const std::vector<Time> checkpoints = {1, 2, 5, 10, 20, 50, 100, 200, 500};
  for (const auto& e : asip::default_battery()) {
    asip::OracleTally t;
    asip::check_monte_carlo(e, 10000, 42, checkpoints, 4.0, &t);
    comparisons += t.comparisons;
    misses += t.failures;
    if (first.empty() && !t.failed.empty()) first = t.failed.front();
  }
  const double rate = static_cast<double>(misses) / static_cast<double>(comparisons);
  return {rate <= 0.01, str(misses, " of ", comparisons, " outside 4 SE (rate ", rate, ")",
                            first.empty() ? "" : "; first: " + first)};
}

Outcome clt() {
  const asip::ChainSpec chain = asip::symmetric_chain(0.5);
  const asip::Vector u = asip::Vector::Ones(1);
  const auto var = asip::prefix_variances(chain, 1, 1000, u);
  Time n = 1;
  while (var[static_cast<std::size_t>(n - 1)] < 200.0) ++n;
  asip::SampleRequest req;
  req.horizon = n;
  req.paths = 100000;
  req.seed = 42;
  req.checkpoints = {n};
  req.directions = {u};
  const auto ks = asip::clt_diagnostic(chain, asip::sample_paths(chain, req));
  const double sd = std::sqrt(var[static_cast<std::size_t>(n - 1)]);
  asip::DiscreteLaw law = asip::partial_sum_law(chain, asip::IndexSet(1, n), u);
  for (double& v : law.values) v /= sd;
  const double exact = asip::ks_normal(law);
  return {ks.front().ks <= 0.02, str("n = ", n, ", s_n = ", var[static_cast<std::size_t>(n - 1)], ", KS = ",
                                     ks.front().ks, " (se ", ks.front().std_error,
                                     "); KS of the exact lattice law = ", exact)};
}

Outcome variance_matching() {
  std::size_t stable = 0;
  std::size_t total = 0;
  std::string first;
  for (const auto& a : analyses()) {
    ++total;
    if (!a.analysis) {
      if (first.empty()) first = a.entry.name + ": " + a.error;
      continue;
    }
    asip::MatchingStability s;
    const auto c = asip::check_variance_matching(*a.analysis, 0.1, &s);
    if (c.passed && std::isfinite(s.at_horizon)) {
      ++stable;
    } else if (first.empty()) {
      first = a.entry.name + ": " + c.detail;
    }
  }
  return {stable == total, str(stable, " of ", total, " chains stable", first.empty() ? "" : "; first: " + first)};
}

Outcome condition_h() {
  std::vector<asip::Check> checks;
  std::size_t eligible = 0;
  for (const auto& a : analyses()) {
    if (a.analysis && !(a.analysis->mixing.delta_pi < 1.0)) continue;
    ++eligible;
    checks.push_back(asip::check_condition_h(a.entry, 12));
  }
  const std::string bad = first_failure(checks);
  return {bad.empty(), bad.empty() ? str(eligible, " chains with delta_pi < 1 decay; i.i.d. gaps vanish") : bad};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Every regular file under dir, keyed by relative path.
std::vector<std::pair<std::string, std::string>> snapshot(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out.emplace_back(fs::relative(e.path(), dir).string(), slurp(e.path()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

Outcome determinism(const std::string& cli, const fs::path& work) {
  struct Run {
    std::string label;
    int threads;
  };
  const std::vector<Run> runs = {{"a", 1}, {"b", 1}, {"c", 4}};
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "simulate --chain battery:three-periodic-2d --horizon 400 --paths 4000 --seed 42"},
      {"verify", "verify --seed 42"}};
  std::vector<std::string> notes;
  bool ok = true;
  for (const auto& [name, args] : commands) {
    std::vector<std::vector<std::pair<std::string, std::string>>> snaps;
    for (const auto& r : runs) {
      const fs::path out = work / (name + "-" + r.label);
      fs::remove_all(out);
      const std::string cmd = "ASIP_THREADS=" + std::to_string(r.threads) + " \"" + cli + "\" " + args +
                              " --out \"" + out.string() + "\" > \"" + (work / (name + "-" + r.label + ".log")).string() +
                              "\" 2>&1";
      const int status = std::system(cmd.c_str());
      if (status == -1 || !fs::exists(out)) {
        ok = false;
        notes.push_back(name + " run " + r.label + " produced no output");
        continue;
      }
      snaps.push_back(snapshot(out));
    }
    if (snaps.size() != runs.size()) continue;
    const bool same = snaps[0] == snaps[1] && snaps[0] == snaps[2] && !snaps[0].empty();
    ok = ok && same;
    notes.push_back(str(name, ": ", snaps[0].size(), " files ", same ? "identical" : "DIFFER",
                        " across 2 runs and workers {1, 4}"));
  }
  std::string detail;
  for (const auto& n : notes) detail += (detail.empty() ? "" : "; ") + n;
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string cli;
  std::string work = "acceptance-work";
  std::vector<int> only;
  app.add_option("--cli", cli, "path to the asip executable")->required();
  app.add_option("--work", work, "scratch directory");
  app.add_option("--only", only, "run a subset of criteria");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);

  auto want = [&](int id) { return only.empty() || std::find(only.begin(), only.end(), id) != only.end(); };
  if (want(1)) report(1, "exact-inequality-suite", exact_inequalities);
  if (want(2)) report(2, "structural-postconditions", structural);
  if (want(3)) report(3, "mixing-identities", mixing_identities);
  if (want(4)) report(4, "oracle-equivalence", oracle_equivalence);
  if (want(5)) report(5, "clt-diagnostic", clt);
  if (want(6)) report(6, "variance-matching", variance_matching);
  if (want(7)) report(7, "condition-h-decay", condition_h);
  if (want(8)) report(8, "determinism", [&] { return determinism(cli, work); });
  return failures == 0 ? 0 : 1;
}
