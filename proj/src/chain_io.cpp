#include "asip/chain_io.hpp"

#include <fstream>

namespace asip {

namespace {

using nlohmann::json;

double number(const json& v, const std::string& where) {
  if (!v.is_number()) throw InputError(where + ": expected a number");
  return v.get<double>();
}

Matrix parse_matrix(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw InputError(where + ": expected a non-empty matrix");
  const auto rows = static_cast<Eigen::Index>(v.size());
  Eigen::Index cols = -1;
  Matrix m;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = v[static_cast<std::size_t>(r)];
    if (!row.is_array()) throw InputError(where + ": row " + std::to_string(r) + " is not a list");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      m.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw InputError(where + ": dimension mismatch, row " + std::to_string(r) + " has " +
                       std::to_string(row.size()) + " entries, expected " + std::to_string(cols));
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = number(row[static_cast<std::size_t>(c)], where);
    }
  }
  return m;
}

Matrix parse_table(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw InputError(where + ": expected a non-empty table");
  if (v.front().is_number()) {
    Matrix m(static_cast<Eigen::Index>(v.size()), 1);
    for (std::size_t x = 0; x < v.size(); ++x) m(static_cast<Eigen::Index>(x), 0) = number(v[x], where);
    return m;
  }
  return parse_matrix(v, where);
}

std::vector<Matrix> parse_list(const json& v, const std::string& where, bool tables) {
  if (!v.is_array() || v.empty()) throw InputError(where + ": expected a non-empty list");
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto at = where + "[" + std::to_string(i) + "]";
    out.push_back(tables ? parse_table(v[i], at) : parse_matrix(v[i], at));
  }
  return out;
}

MixtureWeights parse_weights(const json& v) {
  MixtureWeights w;
  const auto kind = v.value("kind", std::string("sine"));
  if (kind == "sine") {
    w.kind = MixtureWeights::Kind::Sine;
    if (!v.contains("period") || !v["period"].is_number_integer() || v["period"].get<Time>() < 1) {
      throw InputError("kernels.mixture.weights: sine weights need a positive integer period");
    }
    w.period = v["period"].get<Time>();
    w.center = v.value("center", 0.5);
    w.amplitude = v.value("amplitude", 0.0);
  } else if (kind == "power") {
    w.kind = MixtureWeights::Kind::Power;
    w.gamma = v.value("gamma", 1.0);
    w.start = v.value("start", 1.0);
    w.limit = v.value("limit", 0.5);
  } else {
    throw InputError("kernels.mixture.weights: unknown kind '" + kind + "'");
  }
  return w;
}

void check_declared_states(const json& doc, const ChainSpec& chain) {
  if (!doc.contains("states")) return;
  const auto& s = doc["states"];
  if (s.is_number_integer()) {
    const Time last = std::min(chain.horizon(), chain.span() + 1);
    for (Time j = 1; j <= last; ++j) {
      if (chain.states(j) != s.get<Eigen::Index>()) {
        throw InputError("dimension mismatch: |X_" + std::to_string(j) + "| = " +
                         std::to_string(chain.states(j)) + " but states = " + std::to_string(s.get<long>()));
      }
    }
  } else if (s.is_array()) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      const Time j = static_cast<Time>(i) + 1;
      if (j > chain.horizon()) break;
      if (chain.states(j) != s[i].get<Eigen::Index>()) {
        throw InputError("dimension mismatch: |X_" + std::to_string(j) + "| = " +
                         std::to_string(chain.states(j)) + " but states[" + std::to_string(i) +
                         "] = " + std::to_string(s[i].get<long>()));
      }
    }
  } else {
    throw InputError("states: expected an integer or a list of integers");
  }
}

}  // namespace

ChainSpec parse_chain(const json& doc) {
  if (!doc.is_object()) throw InputError("chain document must be a JSON object");
  if (!doc.contains("initial")) throw InputError("chain document is missing 'initial'");
  if (!doc.contains("kernels")) throw InputError("chain document is missing 'kernels'");
  if (!doc.contains("observable")) throw InputError("chain document is missing 'observable'");

  const auto& ini = doc["initial"];
  if (!ini.is_array() || ini.empty()) throw InputError("initial: expected a non-empty list");
  Vector initial(static_cast<Eigen::Index>(ini.size()));
  for (std::size_t x = 0; x < ini.size(); ++x) initial[static_cast<Eigen::Index>(x)] = number(ini[x], "initial");

  ObservableSchedule obs;
  const auto& o = doc["observable"];
  if (o.is_object() && o.contains("periodic")) {
    obs = {parse_list(o["periodic"], "observable.periodic", true), Repeat::Periodic};
  } else if (o.is_object() && o.contains("table")) {
    obs = {parse_list(o["table"], "observable.table", true), Repeat::Finite};
  } else if (o.is_array()) {
    obs = {{parse_table(o, "observable")}, Repeat::Periodic};
  } else {
    throw InputError("observable: expected a table, {\"periodic\": [...]} or {\"table\": [...]}");
  }
  if (doc.contains("d")) {
    const auto d = doc["d"].get<Eigen::Index>();
    for (const auto& t : obs.tables) {
      if (t.cols() != d) {
        throw InputError("dimension mismatch: observable table has " + std::to_string(t.cols()) +
                         " coordinates but d = " + std::to_string(d));
      }
    }
  }
  std::optional<double> bound;
  if (doc.contains("L")) bound = number(doc["L"], "L");

  const auto& k = doc["kernels"];
  std::optional<ChainSpec> chain;
  if (k.is_array()) {
    chain = make_chain({parse_list(k, "kernels", false), Repeat::Finite}, initial, obs, bound);
  } else if (k.is_object() && k.contains("periodic")) {
    chain = make_chain({parse_list(k["periodic"], "kernels.periodic", false), Repeat::Periodic}, initial,
                       obs, bound);
  } else if (k.is_object() && k.contains("mixture")) {
    const auto& mix = k["mixture"];
    const auto comps = parse_list(mix.at("components"), "kernels.mixture.components", false);
    if (comps.size() != 2) throw InputError("kernels.mixture.components: expected exactly two kernels");
    chain = make_mixture_chain(comps[0], comps[1], parse_weights(mix.value("weights", json::object())),
                               initial, obs, bound);
  } else {
    throw InputError("kernels: expected a list, {\"periodic\": [...]} or {\"mixture\": {...}}");
  }
  check_declared_states(doc, *chain);
  return *chain;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open chain file '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("cannot parse '" + path.string() + "': " + e.what());
  }
}

ChainSpec load_chain(const std::filesystem::path& path) {
  const auto doc = read_json_file(path);
  try {
    return parse_chain(doc);
  } catch (const json::exception& e) {
    throw InputError("invalid chain document '" + path.string() + "': " + e.what());
  }
}

}  // namespace asip
