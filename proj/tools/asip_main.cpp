#include "asip/battery.hpp"
#include "asip/blocks.hpp"
#include "asip/chain_io.hpp"
#include "asip/mixing.hpp"
#include "asip/moments.hpp"
#include "asip/report.hpp"
#include "asip/sampling.hpp"
#include "asip/simulation.hpp"
#include "asip/statistics.hpp"
#include "asip/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

using asip::ChainSpec;
using asip::CsvTable;
using asip::Time;
using asip::Vector;
using asip::format_number;
using asip::json_number;
using nlohmann::json;
namespace fs = std::filesystem;

enum Exit : int { kPass = 0, kInternal = 1, kInput = 2, kHypothesis = 3, kConstruction = 4 };

struct Config {
  std::string chain;
  double p = 4.0;
  double delta = 0.1;
  std::optional<Time> horizon;
  std::size_t paths = 0;
  std::uint64_t seed = 42;
  double c_p = 8.0;
  std::optional<double> amplitude;
  std::optional<Time> separation;
  int directions = 0;
  Time k_max = 12;
  std::string out;
  bool json = false;
  bool inject_fault = false;
};

struct LoadedChain {
  ChainSpec chain;
  json source;
};

LoadedChain load(const Config& cfg) {
  if (cfg.chain.empty()) throw asip::InputError("--chain is required");
  const std::string prefix = "battery:";
  if (cfg.chain.rfind(prefix, 0) == 0) {
    return {asip::battery_chain(cfg.chain.substr(prefix.size())), {{"battery", cfg.chain.substr(prefix.size())}}};
  }
  const json doc = asip::read_json_file(cfg.chain);
  return {asip::parse_chain(doc), {{"path", cfg.chain}, {"document", doc}}};
}

void validate(const Config& cfg) {
  if (!(cfg.p >= 2.0)) throw asip::InputError("--p must be >= 2");
  if (!(cfg.delta > 0.0 && cfg.delta < 0.5)) throw asip::InputError("--delta must lie in (0, 0.5)");
  if (cfg.horizon && *cfg.horizon < 1) throw asip::InputError("--horizon must be >= 1");
  if (!(cfg.c_p > 0.0)) throw asip::InputError("--cp must be positive");
  if (cfg.amplitude && !(*cfg.amplitude >= 1.0)) throw asip::InputError("--amplitude must be >= 1");
  if (cfg.separation && *cfg.separation < 1) throw asip::InputError("--separation must be >= 1");
  if (cfg.directions < 0) throw asip::InputError("--directions must be positive");
  if (cfg.k_max < 1) throw asip::InputError("--k-max must be >= 1");
}

json base_config(const Config& cfg, const json& source) {
  return {{"chain", source}, {"seed", cfg.seed}};
}

void emit(const Config& cfg, const json& report, const std::string& name, const std::string& summary) {
  if (!cfg.out.empty()) asip::write_json(fs::path(cfg.out) / name, report);
  if (cfg.json) {
    std::cout << report.dump(2) << "\n";
  } else {
    std::cout << summary;
  }
}

void write_csv(const Config& cfg, const std::string& name, const CsvTable& table) {
  if (!cfg.out.empty()) asip::write_text(fs::path(cfg.out) / name, table.str());
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(json_number(v[i]));
  return out;
}

json matrix_json(const asip::Matrix& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vector_json(m.row(i).transpose()));
  return out;
}

// ---------------------------------------------------------------- moments

int cmd_moments(const Config& cfg) {
  const LoadedChain lc = load(cfg);
  const ChainSpec& chain = lc.chain;
  const Time horizon = cfg.horizon.value_or(100);
  chain.require_time(horizon);
  const int d = chain.dimension();
  const auto covs = asip::prefix_covariances(chain, 1, horizon);

  CsvTable table;
  table.header = {"n"};
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) table.header.push_back("v" + std::to_string(i + 1) + std::to_string(j + 1));
  }
  table.header.insert(table.header.end(), {"s_n", "lambda_max", "mean_sum"});
  json rows = json::array();
  Vector mean_sum = Vector::Zero(d);
  for (Time n = 1; n <= horizon; ++n) {
    const auto& v = covs[static_cast<std::size_t>(n - 1)];
    mean_sum += asip::mean_obs(chain, n);
    const asip::EigenSummary es = asip::eigen_summary(v);
    std::vector<std::string> row = {std::to_string(n)};
    for (int i = 0; i < d; ++i) {
      for (int j = i; j < d; ++j) row.push_back(format_number(v(i, j)));
    }
    row.push_back(format_number(es.lambda_min));
    row.push_back(format_number(es.lambda_max));
    row.push_back(format_number(mean_sum.sum()));
    table.add(row);
    rows.push_back({{"n", n}, {"V", matrix_json(v)}, {"s_n", json_number(es.lambda_min)},
                    {"lambda_max", json_number(es.lambda_max)}, {"E_S", vector_json(mean_sum)}});
  }

  std::vector<std::pair<Time, Time>> windows;
  for (Time len = 1; len <= horizon; len *= 2) {
    for (Time n = 1; n + len - 1 <= horizon; n += len) windows.emplace_back(n, n + len - 1);
  }
  const asip::EigenRatioReport er = asip::eigen_ratio_report(chain, windows, 1.0);
  CsvTable ratio;
  ratio.header = {"n", "m", "lambda_min", "lambda_max", "l2_norm", "included", "ratio"};
  json er_rows = json::array();
  for (const auto& w : er.windows) {
    ratio.add({std::to_string(w.n), std::to_string(w.m), format_number(w.lambda_min), format_number(w.lambda_max),
               format_number(w.l2_norm), w.included ? "1" : "0", format_number(w.ratio)});
    er_rows.push_back({{"n", w.n}, {"m", w.m}, {"lambda_min", json_number(w.lambda_min)},
                       {"lambda_max", json_number(w.lambda_max)}, {"included", w.included},
                       {"ratio", json_number(w.ratio)}});
  }

  json config = base_config(cfg, lc.source);
  config["horizon"] = horizon;
  json report = asip::report_header("moments", config);
  report["exact"] = true;
  report["dimension"] = d;
  report["table"] = rows;
  report["eigen_ratio"] = {{"c1", er.c1}, {"c2", json_number(er.c2)}, {"windows", er_rows}};
  if (er.singular_window) {
    report["eigen_ratio"]["singular_window"] = {er.singular_window->first, er.singular_window->second};
  }

  write_csv(cfg, "moments.csv", table);
  write_csv(cfg, "eigen_ratio.csv", ratio);
  const auto& last = covs.back();
  std::ostringstream s;
  s << "moments: n = 1.." << horizon << ", Var(S_n) trace at n = " << horizon << ": " << format_number(last.trace())
    << ", s_n = " << format_number(asip::min_eigenvalue(last)) << ", eigen ratio C2 = " << format_number(er.c2)
    << "\n";
  emit(cfg, report, "moments.json", s.str());
  return kPass;
}

// ---------------------------------------------------------------- mixing

int cmd_mixing(const Config& cfg) {
  const LoadedChain lc = load(cfg);
  const ChainSpec& chain = lc.chain;
  const asip::MixingReport m = asip::analyze_mixing(chain, cfg.k_max);
  const asip::Envelope& e = m.envelope;

  CsvTable coeffs;
  coeffs.header = {"k", "alpha", "phi"};
  json alpha = json::array();
  json phi = json::array();
  for (std::size_t k = 0; k < m.alpha.size(); ++k) {
    coeffs.add({std::to_string(k + 1), format_number(m.alpha[k]), format_number(m.phi[k])});
    alpha.push_back(m.alpha[k]);
    phi.push_back(m.phi[k]);
  }
  CsvTable per_j;
  per_j.header = {"j", "dobrushin", "rho"};
  for (std::size_t i = 0; i < m.rho.size(); ++i) {
    per_j.add({std::to_string(m.j_range.first + static_cast<Time>(i)), format_number(m.dobrushin[i]),
               format_number(m.rho[i])});
  }

  std::vector<Time> ks;
  for (Time k = 1; k <= cfg.k_max; ++k) ks.push_back(k);
  const asip::HLayout layout = asip::standard_h_layout(chain, 1, 2, 2, 2);
  const asip::HScan h = asip::condition_h_scan(chain, layout, ks);
  CsvTable hgrid;
  hgrid.header = {"k", "gap"};
  json hpoints = json::array();
  for (const auto& pt : h.points) {
    hgrid.add({std::to_string(pt.k), format_number(pt.gap)});
    hpoints.push_back({{"k", pt.k}, {"gap", pt.gap}});
  }

  json config = base_config(cfg, lc.source);
  config["k_max"] = cfg.k_max;
  json report = asip::report_header("mixing", config);
  report["exact"] = true;
  report["j_range"] = {m.j_range.first, m.j_range.last};
  report["alpha"] = alpha;
  report["phi"] = phi;
  report["delta_pi"] = m.delta_pi;
  report["rho_sup"] = m.rho_sup;
  report["envelope"] = {{"C", e.c}, {"delta", e.delta}, {"degenerate", e.degenerate},
                        {"nonmonotone", e.nonmonotone}};
  report["envelope"]["n0"] = e.n0 ? json(*e.n0) : json(nullptr);
  report["condition_h"] = {{"layout", {{"cuts", layout.cuts}, {"n", layout.n}}},
                           {"points", hpoints},
                           {"c_prime", json_number(h.c_prime)},
                           {"C_prime", json_number(h.c_const)},
                           {"degenerate", h.degenerate},
                           {"decays", h.decays()}};

  write_csv(cfg, "mixing.csv", coeffs);
  write_csv(cfg, "dobrushin_rho.csv", per_j);
  write_csv(cfg, "condition_h.csv", hgrid);
  std::ostringstream s;
  s << "alpha(1) = " << format_number(m.alpha.front()) << ", phi(1) = " << format_number(m.phi.front())
    << ", pi = " << format_number(m.delta_pi) << ", rho = " << format_number(m.rho_sup) << "\n"
    << "envelope: C = " << format_number(e.c) << ", delta = " << format_number(e.delta)
    << (e.degenerate ? " (degenerate)" : "") << "\n"
    << "n0 = " << (e.n0 ? std::to_string(*e.n0) : "not found in range") << "\n"
    << "condition H: c' = " << format_number(h.c_prime) << "\n";
  emit(cfg, report, "mixing.json", s.str());
  if (!e.n0) {
    std::cerr << "warning: n0 not found in range k = 1.." << cfg.k_max << " (phi(k) >= 1/2 throughout)\n";
    return kHypothesis;
  }
  return kPass;
}

// ---------------------------------------------------------------- blocks

struct Choice {
  Time r = 1;
  double a = 1.0;
  bool r_auto = true;
  bool a_auto = true;
  asip::Envelope envelope;
  asip::SeparationChoice separation;
  double q0 = 0.0;
  asip::AmplitudeChoice amplitude;
  std::optional<double> q;
};

Choice choose(const Config& cfg, const ChainSpec& chain) {
  Choice c;
  bool have_envelope = true;
  try {
    c.envelope = asip::analyze_mixing(chain, cfg.k_max).envelope;
  } catch (const asip::InputError&) {
    // Fully overridden runs do not need the envelope (short horizons cannot supply it).
    if (!(cfg.separation && cfg.amplitude)) throw;
    have_envelope = false;
    c.envelope.delta = 1.0;
  }
  if (cfg.separation) {
    c.r = *cfg.separation;
    c.r_auto = false;
  } else {
    c.separation = asip::select_separation(c.envelope.c, c.envelope.delta, cfg.p, cfg.c_p);
    c.r = c.separation.r;
  }
  if (have_envelope && c.envelope.delta < 1.0) {
    c.q0 = asip::compute_q0(c.r, cfg.p, chain.bound(), c.envelope.c, c.envelope.delta, cfg.c_p);
  }
  if (cfg.amplitude) {
    c.a = *cfg.amplitude;
    c.a_auto = false;
  } else {
    c.amplitude = asip::select_amplitude(c.q0);
    c.a = c.amplitude.a;
  }
  if (have_envelope && c.envelope.delta < 1.0) c.q = c.a > 1.0 ? asip::q_of_a(c.q0, c.a) : c.q0;
  return c;
}

json block_json(const asip::Block& b, std::size_t j) {
  return {{"j", j + 1}, {"a", b.a}, {"b", b.b}, {"i_last", b.i_last}, {"variance", b.variance}, {"norm", b.norm}};
}

int cmd_blocks(const Config& cfg) {
  const LoadedChain lc = load(cfg);
  const ChainSpec& chain = lc.chain;
  const Choice c = choose(cfg, chain);

  asip::BuildOptions build;
  Time target = cfg.horizon.value_or(1);
  if (!cfg.horizon) {
    build.min_blocks = 4;
    build.scan_limit = 4000000;
  }
  const asip::BlockPartition part =
      asip::build_blocks(chain, Vector::Unit(chain.dimension(), 0), c.a, c.r, target, build);
  const Time horizon = cfg.horizon.value_or(part.blocks.back().i_last);

  asip::VerifyOptions vo;
  vo.directions = cfg.directions > 0 ? cfg.directions : 64;
  vo.q_of_amplitude = c.q;
  vo.separation_certified = c.r_auto;
  const asip::BlockVerification v = asip::verify_partition(chain, part, horizon, vo);
  const asip::TailStatistics tail = asip::tail_statistics(chain, part, cfg.p, horizon, 200, cfg.seed);

  CsvTable table;
  table.header = {"j", "a", "b", "i_last", "variance", "norm"};
  json blocks = json::array();
  for (std::size_t j = 0; j < part.blocks.size(); ++j) {
    const auto& b = part.blocks[j];
    table.add({std::to_string(j + 1), std::to_string(b.a), std::to_string(b.b), std::to_string(b.i_last),
               format_number(b.variance), format_number(b.norm)});
    blocks.push_back(block_json(b, j));
  }

  json config = base_config(cfg, lc.source);
  config["p"] = cfg.p;
  config["c_p"] = cfg.c_p;
  config["horizon"] = horizon;
  config["k_max"] = cfg.k_max;
  config["directions"] = vo.directions;
  config["amplitude"] = cfg.amplitude ? json(*cfg.amplitude) : json("auto");
  config["separation"] = cfg.separation ? json(*cfg.separation) : json("auto");
  json report = asip::report_header("blocks", config);
  report["exact"] = {{"variances", true}, {"d_norms", tail.d_exact}};
  report["choice"] = {{"p", cfg.p}, {"c_p", cfg.c_p}, {"r", c.r}, {"A", c.a}, {"r_auto", c.r_auto},
                      {"A_auto", c.a_auto}, {"envelope", {{"C", c.envelope.c}, {"delta", c.envelope.delta},
                                                          {"degenerate", c.envelope.degenerate}}}};
  if (c.r_auto) {
    report["choice"]["separation_certificate"] = {{"sum", c.separation.sum}, {"target", c.separation.target}};
  }
  if (c.a_auto) {
    report["choice"]["amplitude_certificate"] = {{"closed_form", c.amplitude.closed_form},
                                                 {"bisection", c.amplitude.bisection},
                                                 {"certificate", c.amplitude.certificate}};
  }
  report["choice"]["Q0"] = c.q0;
  report["choice"]["Q"] = c.q ? json(*c.q) : json(nullptr);
  report["blocks"] = blocks;
  report["verification"] = {
      {"horizon", v.horizon},
      {"directions", v.directions},
      {"blocks_checked", v.blocks_checked},
      {"structural", v.structural},
      {"theta_norm_range", {{"A1", json_number(v.a1)}, {"A2", json_number(v.a2)}, {"ok", v.a_ok}}},
      {"suffix_norm_bound", {{"c", json_number(v.c)}, {"ok", v.c_ok}}},
      {"variance_growth", {{"R1", json_number(v.r1)}, {"R2", json_number(v.r2)}, {"R1_grid", json_number(v.r1_grid)},
                           {"R2_grid", json_number(v.r2_grid)}, {"from", v.r_from}, {"ok", v.r_ok}}},
      {"prefix_sandwich", {{"min", json_number(v.sandwich_min)}, {"max", json_number(v.sandwich_max)},
                           {"applicable", v.sandwich_applicable}, {"ok", v.sandwich_ok}}},
      {"deviation", {{"max", v.deviation_max}, {"bound", v.deviation_bound},
                     {"applicable", v.deviation_applicable}, {"note", v.deviation_note}, {"ok", v.deviation_ok}}},
      {"passed", v.passed()}};
  report["tail"] = {{"d_norms", tail.d_norms},   {"d_max", tail.d_max},     {"trivial_bound", tail.trivial_bound},
                    {"bounded", tail.bounded},   {"paths", tail.paths},     {"seed", tail.seed},
                    {"epsilons", tail.epsilons}, {"path_max", tail.path_max}, {"path_median", tail.path_median}};

  write_csv(cfg, "blocks.csv", table);
  std::ostringstream s;
  s << "r = " << c.r << ", A = " << format_number(c.a) << ", " << part.blocks.size() << " blocks to n = "
    << horizon << "\n";
  for (std::size_t j = 0; j < std::min<std::size_t>(part.blocks.size(), 5); ++j) {
    s << "  M_" << j + 1 << " = [" << part.blocks[j].a << ", " << part.blocks[j].b << "]\n";
  }
  s << "verification: " << (v.passed() ? "pass" : "FAIL") << "\n";
  emit(cfg, report, "blocks.json", s.str());
  if (!v.passed()) {
    std::cerr << "warning: block verification failed";
    if (!v.structural.empty()) std::cerr << ": " << v.structural.front();
    std::cerr << "\n";
    return kHypothesis;
  }
  return kPass;
}

// ---------------------------------------------------------------- simulate

std::vector<Time> checkpoint_grid(Time horizon) {
  std::vector<Time> out;
  for (Time base = 1; base <= horizon; base *= 10) {
    for (Time m : {1, 2, 5}) {
      if (base * m <= horizon) out.push_back(base * m);
    }
  }
  if (out.empty() || out.back() != horizon) out.push_back(horizon);
  return out;
}

asip::PathBatch select(const asip::PathBatch& batch, const std::vector<std::size_t>& idx) {
  asip::PathBatch out;
  out.seed = batch.seed;
  out.paths = batch.paths;
  out.horizon = batch.horizon;
  out.directions = batch.directions;
  for (std::size_t c : idx) out.checkpoints.push_back(batch.checkpoints[c]);
  const std::size_t nd = batch.directions.size();
  out.sums.reserve(batch.paths * idx.size() * nd);
  out.terms.reserve(batch.paths * idx.size() * nd);
  for (std::size_t p = 0; p < batch.paths; ++p) {
    for (std::size_t c : idx) {
      for (std::size_t d = 0; d < nd; ++d) {
        out.sums.push_back(batch.sum(p, c, d));
        out.terms.push_back(batch.term(p, c, d));
      }
    }
  }
  return out;
}

int cmd_simulate(const Config& cfg) {
  const LoadedChain lc = load(cfg);
  const ChainSpec& chain = lc.chain;
  const Time horizon = cfg.horizon.value_or(2000);
  const std::size_t paths = cfg.paths ? cfg.paths : 10000;
  if (paths < 2) throw asip::InputError("--paths must be >= 2");
  chain.require_time(horizon);
  const int d = chain.dimension();
  const std::vector<Vector> dirs = asip::direction_grid(d, cfg.directions > 0 ? cfg.directions : 4);

  // Blocks for the surrogate and the variance and rate curves.
  json blocks_note;
  std::optional<asip::BlockPartition> part;
  Choice c;
  try {
    c = choose(cfg, chain);
    part = asip::build_blocks(chain, Vector::Unit(d, 0), c.a, c.r, horizon);
  } catch (const asip::ConstructionError& e) {
    blocks_note = e.what();
  } catch (const asip::InputError& e) {
    blocks_note = e.what();
  }
  std::vector<Time> ends;
  if (part) {
    for (const auto& b : part->blocks) {
      if (b.i_last <= horizon) ends.push_back(b.i_last);
    }
  }

  std::vector<Time> grid = checkpoint_grid(horizon);
  std::vector<Time> all = grid;
  all.insert(all.end(), ends.begin(), ends.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  auto indices = [&all](const std::vector<Time>& want) {
    std::vector<std::size_t> idx;
    for (Time t : want) idx.push_back(static_cast<std::size_t>(std::lower_bound(all.begin(), all.end(), t) - all.begin()));
    return idx;
  };

  asip::SampleRequest req;
  req.horizon = horizon;
  req.paths = paths;
  req.seed = cfg.seed;
  req.checkpoints = all;
  req.directions = dirs;
  req.lil = true;
  const asip::PathBatch batch = asip::sample_paths(chain, req);

  const auto ks = asip::clt_diagnostic(chain, select(batch, indices(grid)));
  CsvTable ks_csv;
  ks_csv.header = {"n", "direction_id", "ks", "stderr"};
  json ks_json = json::array();
  for (const auto& pt : ks) {
    ks_csv.add({std::to_string(pt.n), std::to_string(pt.direction), format_number(pt.ks), format_number(pt.std_error)});
    ks_json.push_back({{"n", pt.n}, {"direction_id", pt.direction}, {"ks", pt.ks}, {"stderr", pt.std_error},
                       {"exact_variance", pt.exact_variance}, {"skipped", pt.skipped}});
  }

  json config = base_config(cfg, lc.source);
  config["horizon"] = horizon;
  config["paths"] = paths;
  config["delta"] = cfg.delta;
  config["p"] = cfg.p;
  config["c_p"] = cfg.c_p;
  config["checkpoints"] = grid;
  json dir_json = json::array();
  for (const auto& u : dirs) dir_json.push_back(vector_json(u));
  config["directions"] = dir_json;
  json report = asip::report_header("simulate", config);
  report["caveat"] = asip::kPathwiseCaveat;
  report["seeds"] = {{"paths", cfg.seed}, {"surrogate", asip::derive_stream_seed(cfg.seed, 0x6761757373ULL)}};
  report["exact"] = {{"variances", true}, {"ks", false}, {"w1", false}};
  report["ks"] = ks_json;

  const asip::LilSummary lil = asip::lil_diagnostic(chain, batch);
  report["lil"] = {{"defined", lil.defined}, {"paths", lil.paths}, {"median", lil.median}, {"q10", lil.q10},
                   {"q90", lil.q90}, {"max", lil.max}, {"first_included", lil.first_included}};

  CsvTable var_csv;
  var_csv.header = {"k", "end", "direction_id", "variance", "surrogate", "gap", "s_n", "normalized", "running_max"};
  CsvTable rate_csv;
  rate_csv.header = {"k", "end", "direction_id", "w1", "w1_stderr", "w1_samples", "s_n", "ratio"};
  if (part && !ends.empty()) {
    report["blocks"] = {{"r", c.r}, {"A", c.a}, {"count", ends.size()}};
    const asip::VarianceMatching vm = asip::variance_matching_diagnostic(chain, *part, dirs, cfg.delta, horizon);
    for (const auto& pt : vm.points) {
      var_csv.add({std::to_string(pt.k), std::to_string(pt.end), std::to_string(pt.direction), format_number(pt.variance),
                   format_number(pt.surrogate), format_number(pt.gap), format_number(pt.s_n),
                   format_number(pt.normalized), format_number(pt.running_max)});
    }
    report["variance_matching"] = {{"delta", vm.delta}, {"constant", json_number(vm.constant)}};

    const asip::Surrogate sur = asip::gaussian_surrogate(*part, ends.size(), dirs, paths, cfg.seed);
    const auto rate = asip::rate_scaling_diagnostic(chain, select(batch, indices(ends)), sur, cfg.delta);
    json rate_json = json::array();
    for (const auto& pt : rate) {
      rate_csv.add({std::to_string(pt.k), std::to_string(pt.end), std::to_string(pt.direction), format_number(pt.w1),
                    format_number(pt.w1_std_error), format_number(pt.w1_samples), format_number(pt.s_n),
                    format_number(pt.ratio)});
      rate_json.push_back({{"k", pt.k}, {"end", pt.end}, {"direction_id", pt.direction}, {"w1", pt.w1},
                           {"w1_stderr", pt.w1_std_error}, {"ratio", json_number(pt.ratio)}});
    }
    report["rate"] = rate_json;
    report["surrogate"] = {{"clipped", sur.clipped}};
  } else {
    report["blocks"] = {{"note", blocks_note.is_null() ? json("no complete block inside the horizon") : blocks_note}};
  }

  write_csv(cfg, "ks.csv", ks_csv);
  write_csv(cfg, "variance.csv", var_csv);
  write_csv(cfg, "rate.csv", rate_csv);
  std::ostringstream s;
  s << "simulated " << paths << " paths to n = " << horizon << " (seed " << cfg.seed << ")\n";
  for (const auto& pt : ks) {
    if (pt.direction == 0) s << "  n = " << pt.n << ": KS = " << format_number(pt.ks) << "\n";
  }
  emit(cfg, report, "simulate.json", s.str());
  return kPass;
}

// ---------------------------------------------------------------- verify

int cmd_verify(const Config& cfg) {
  asip::VerifyConfig vc;
  if (cfg.paths) vc.paths = cfg.paths;
  vc.seed = cfg.seed;
  vc.inject_fault = cfg.inject_fault;
  vc.pipeline.p = cfg.p;
  vc.pipeline.c_p = cfg.c_p;
  vc.pipeline.k_max = cfg.k_max;
  const asip::VerifySummary sum = asip::run_verify(vc);

  json checks = json::array();
  std::ostringstream s;
  for (const auto& c : sum.checks) {
    checks.push_back({{"id", c.id}, {"chain", c.chain}, {"status", c.passed ? "pass" : "fail"},
                      {"hard", c.hard}, {"detail", c.detail}});
    s << (c.passed ? "PASS " : (c.hard ? "FAIL " : "WARN ")) << c.id << (c.chain.empty() ? "" : " [" + c.chain + "]")
      << ": " << c.detail << "\n";
  }
  s << sum.checks.size() << " checks, " << sum.hard_failures << " hard failures, " << sum.soft_failures
    << " soft failures\n";
  json config = {{"seed", vc.seed},
                 {"paths", vc.paths},
                 {"checkpoints", vc.checkpoints},
                 {"p", vc.pipeline.p},
                 {"c_p", vc.pipeline.c_p},
                 {"k_max", vc.pipeline.k_max},
                 {"inject_fault", vc.inject_fault}};
  json report = asip::report_header("verify", config);
  report["checks"] = checks;
  report["summary"] = {{"checks", sum.checks.size()}, {"hard_failures", sum.hard_failures},
                       {"soft_failures", sum.soft_failures}, {"passed", sum.passed()}};
  if (sum.first_failure) {
    report["summary"]["first_failure"] = {{"id", sum.first_failure->id}, {"chain", sum.first_failure->chain},
                                          {"detail", sum.first_failure->detail}};
  }
  emit(cfg, report, "verify.json", s.str());
  if (!sum.passed()) {
    std::cerr << "first failing invariant: " << sum.first_failure->id << " [" << sum.first_failure->chain
              << "]: " << sum.first_failure->detail << "\n";
    return kInternal;
  }
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact moments, mixing coefficients, block partitions and Gaussian-approximation diagnostics "
               "for finite inhomogeneous Markov chains"};
  app.require_subcommand(1);
  Config cfg;
  std::optional<Time> horizon;
  std::optional<double> amplitude;
  std::optional<Time> separation;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--chain", cfg.chain, "chain document (JSON) or battery:<name>");
    sub->add_option("--p", cfg.p, "moment order p >= 2")->capture_default_str();
    sub->add_option("--delta", cfg.delta, "rate exponent slack in (0, 1/2)")->capture_default_str();
    sub->add_option("--horizon", horizon, "last time index");
    sub->add_option("--paths", cfg.paths, "Monte Carlo paths");
    sub->add_option("--seed", cfg.seed, "base seed")->capture_default_str();
    sub->add_option("--cp", cfg.c_p, "Rosenthal-type constant c_p")->capture_default_str();
    sub->add_option("--amplitude", amplitude, "override block amplitude A");
    sub->add_option("--separation", separation, "override block separation r");
    sub->add_option("--directions", cfg.directions, "direction grid size");
    sub->add_option("--k-max", cfg.k_max, "largest mixing lag")->capture_default_str();
    sub->add_option("--out", cfg.out, "output directory");
    sub->add_flag("--json", cfg.json, "print the JSON report on stdout");
  };
  auto* moments = app.add_subcommand("moments", "exact covariance tables and eigenvalue ratios");
  auto* mixing = app.add_subcommand("mixing", "alpha, phi, Dobrushin, rho, envelope and condition H");
  auto* blocks = app.add_subcommand("blocks", "block partition with its verification");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo diagnostics");
  auto* verify = app.add_subcommand("verify", "invariant suite over the built-in battery");
  for (auto* sub : {moments, mixing, blocks, simulate, verify}) common(sub);
  verify->add_flag("--inject-fault", cfg.inject_fault, "corrupt a kernel row of one battery chain");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kInput;
  }
  cfg.horizon = horizon;
  cfg.amplitude = amplitude;
  cfg.separation = separation;

  try {
    validate(cfg);
    if (*moments) return cmd_moments(cfg);
    if (*mixing) return cmd_mixing(cfg);
    if (*blocks) return cmd_blocks(cfg);
    if (*simulate) return cmd_simulate(cfg);
    return cmd_verify(cfg);
  } catch (const asip::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const asip::ConstructionError& e) {
    std::cerr << "construction failure: " << e.what() << "\n";
    return kConstruction;
  } catch (const asip::CapacityError& e) {
    std::cerr << "construction failure: " << e.what() << "\n";
    return kConstruction;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}
