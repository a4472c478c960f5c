/*
 *   Copyright 2026 The dlocal Authors
 *
 *   Licensed under the Apache License, Version 2.0 (the "License");
 *   you may not use this file except in compliance with the License.
 *   You may obtain a copy of the License at
 *
 *       http://www.apache.org/licenses/LICENSE-2.0
 *
 *   Unless required by applicable law or agreed to in writing, software
 *   distributed under the License is distributed on an "AS IS" BASIS,
 *   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *   See the License for the specific language governing permissions and
 *   limitations under the License.
 */

#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dlocal/errors.hpp"
#include "dlocal/graph.hpp"
#include "dlocal/mis_algorithms.hpp"
#include "dlocal/sim.hpp"
#include "dlocal/spanner.hpp"

namespace dlocal {

inline constexpr int kSchemaVersion = 1;

/// Invalid or inconsistent run configuration (exit status 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class Algorithm { rand_mis, det_mis, det_mis_bounded, det_mis_congest, color, rand_spanner, det_spanner };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::rand_mis: return "rand-mis";
    case Algorithm::det_mis: return "det-mis";
    case Algorithm::det_mis_bounded: return "det-mis-bounded";
    case Algorithm::det_mis_congest: return "det-mis-congest";
    case Algorithm::color: return "color";
    case Algorithm::rand_spanner: return "rand-spanner";
    case Algorithm::det_spanner: return "det-spanner";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view s) {
  for (auto a : {Algorithm::rand_mis, Algorithm::det_mis, Algorithm::det_mis_bounded, Algorithm::det_mis_congest,
                 Algorithm::color, Algorithm::rand_spanner, Algorithm::det_spanner})
    if (s == to_string(a)) return a;
  throw ConfigError("unknown algorithm '" + std::string(s) + "'");
}

inline bool is_deterministic(Algorithm a) { return a != Algorithm::rand_mis && a != Algorithm::rand_spanner; }

/// Everything a run depends on. Defaults are written into every output.
struct RunConfig {
  Algorithm algo = Algorithm::det_mis;
  std::optional<ModelKind> model;
  std::string graph;  // file; empty means generate
  GenKind gen = GenKind::gnp;
  std::size_t n = 16;
  GenParams gen_params{0.3, 3, 0, 10};
  std::uint64_t graph_seed = 1;
  unsigned k = 2;
  std::optional<unsigned> d;
  double c_prime = 50;
  unsigned c_bandwidth = 8;
  unsigned t_max = 26;
  unsigned spanner_t_max = 18;
  bool strict_k = true;
  Rational xi_factor = 1;
  Rational cap_factor = 1;
  std::optional<Rational> c_size;
  std::uint64_t rng_seed = 1;
  bool traces = false;
  std::string out;
  std::string csv;

  ModelKind effective_model() const {
    if (model) return *model;
    return algo == Algorithm::det_mis_congest ? ModelKind::congest : ModelKind::clique;
  }

  std::string graph_label() const {
    if (!graph.empty()) return graph;
    std::ostringstream os;
    os << to_string(gen) << "(n=" << n;
    if (gen == GenKind::gnp || gen == GenKind::weighted_gnp) os << ";p=" << gen_params.p;
    if (gen == GenKind::random_regular) os << ";degree=" << gen_params.degree;
    if (gen == GenKind::grid && gen_params.width) os << ";width=" << gen_params.width;
    if (gen == GenKind::weighted_gnp) os << ";max_weight=" << gen_params.max_weight;
    os << ";seed=" << graph_seed << ")";
    return os.str();
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["algo"] = to_string(algo);
    j["model"] = to_string(effective_model());
    j["graph"] = graph_label();
    j["k"] = k;
    j["d"] = d ? nlohmann::ordered_json(*d) : nlohmann::ordered_json("auto");
    j["c_prime"] = c_prime;
    j["bandwidth_factor"] = c_bandwidth;
    j["t_max"] = t_max;
    j["spanner_t_max"] = spanner_t_max;
    j["strict_k"] = strict_k;
    j["xi_factor"] = to_fraction_string(xi_factor);
    j["cap_factor"] = to_fraction_string(cap_factor);
    j["c_size"] = c_size ? nlohmann::ordered_json(to_fraction_string(*c_size)) : nlohmann::ordered_json(nullptr);
    j["rng_seed"] = rng_seed;
    j["traces"] = traces;
    return j;
  }
};

namespace detail {

template <class T>
T parse_number(std::string_view key, const std::string& value) {
  try {
    std::size_t used = 0;
    T out;
    if constexpr (std::is_same_v<T, double>) {
      out = std::stod(value, &used);
    } else {
      if (!value.empty() && value[0] == '-') throw std::invalid_argument("negative");
      const auto v = std::stoull(value, &used);
      if (v > std::numeric_limits<T>::max()) throw std::out_of_range("range");
      out = static_cast<T>(v);
    }
    if (used != value.size()) throw std::invalid_argument("trailing");
    return out;
  } catch (const std::exception&) {
    throw ConfigError("bad value '" + value + "' for " + std::string(key));
  }
}

inline bool parse_bool(std::string_view key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("bad boolean '" + value + "' for " + std::string(key));
}

inline Rational parse_positive_rational(std::string_view key, const std::string& value) {
  try {
    Rational r = parse_rational(value);
    if (r <= 0) throw std::invalid_argument("not positive");
    return r;
  } catch (const std::exception&) {
    throw ConfigError("bad positive rational '" + value + "' for " + std::string(key));
  }
}

}  // namespace detail

/// Sets one key. Keys match the command-line flags without dashes;
/// underscores and dashes are interchangeable.
inline void apply_setting(RunConfig& c, std::string key, const std::string& value) {
  std::replace(key.begin(), key.end(), '_', '-');
  try {
    if (key == "algo") c.algo = parse_algorithm(value);
    else if (key == "model") c.model = parse_model_kind(value);
    else if (key == "graph") c.graph = value;
    else if (key == "gen") c.gen = parse_gen_kind(value);
    else if (key == "n") c.n = detail::parse_number<std::size_t>(key, value);
    else if (key == "p") c.gen_params.p = detail::parse_number<double>(key, value);
    else if (key == "degree") c.gen_params.degree = detail::parse_number<unsigned>(key, value);
    else if (key == "width") c.gen_params.width = detail::parse_number<unsigned>(key, value);
    else if (key == "max-weight") c.gen_params.max_weight = detail::parse_number<unsigned>(key, value);
    else if (key == "graph-seed") c.graph_seed = detail::parse_number<std::uint64_t>(key, value);
    else if (key == "k") c.k = detail::parse_number<unsigned>(key, value);
    else if (key == "d") c.d = value == "auto" ? std::nullopt : std::optional(detail::parse_number<unsigned>(key, value));
    else if (key == "c-prime") c.c_prime = detail::parse_number<double>(key, value);
    else if (key == "bandwidth-factor") c.c_bandwidth = detail::parse_number<unsigned>(key, value);
    else if (key == "t-max") c.t_max = detail::parse_number<unsigned>(key, value);
    else if (key == "spanner-t-max") c.spanner_t_max = detail::parse_number<unsigned>(key, value);
    else if (key == "strict-k") c.strict_k = detail::parse_bool(key, value);
    else if (key == "xi-factor") c.xi_factor = detail::parse_positive_rational(key, value);
    else if (key == "cap-factor") c.cap_factor = detail::parse_positive_rational(key, value);
    else if (key == "c-size") c.c_size = detail::parse_positive_rational(key, value);
    else if (key == "rng-seed") c.rng_seed = detail::parse_number<std::uint64_t>(key, value);
    else if (key == "traces") c.traces = detail::parse_bool(key, value);
    else if (key == "out") c.out = value;
    else if (key == "csv") c.csv = value;
    else throw ConfigError("unknown setting '" + key + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

/// Flat "key = value" lines; '#' starts a comment.
inline void apply_config_text(RunConfig& c, std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    apply_setting(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

inline void apply_config_file(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  apply_config_text(c, in);
}

/// Rejects algorithm/model pairs the algorithm does not run in.
inline void validate(const RunConfig& c) {
  const ModelKind m = c.effective_model();
  bool ok = false;
  switch (c.algo) {
    case Algorithm::det_mis: ok = m == ModelKind::clique || m == ModelKind::broadcast_clique; break;
    case Algorithm::det_mis_congest: ok = m == ModelKind::congest; break;
    default: ok = m == ModelKind::clique; break;
  }
  if (!ok) throw ConfigError(to_string(c.algo) + " does not run in the " + to_string(m) + " model");
  if (c.graph.empty() && c.n == 0) throw ConfigError("n must be positive");
  if (c.k < 1) throw ConfigError("k must be >= 1");
  if (c.c_prime <= 0) throw ConfigError("c-prime must be positive");
  if (c.c_bandwidth < 1) throw ConfigError("bandwidth-factor must be >= 1");
}

inline Graph load_graph(const RunConfig& c) {
  try {
    if (!c.graph.empty()) {
      std::ifstream in(c.graph);
      if (!in) throw ConfigError("cannot open graph '" + c.graph + "'");
      return read_graph(in);
    }
    return generate(c.gen, c.n, c.gen_params, c.graph_seed);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

/// Round budget without its constant, per algorithm.
inline std::uint64_t budget_unit(const RunConfig& c, const Graph& g) {
  const std::uint64_t ln = std::max(1U, ceil_log2(g.size()));
  const std::uint64_t ld = std::max(1U, ceil_log2(g.max_degree()));
  switch (c.algo) {
    case Algorithm::det_mis_congest: return std::max<std::uint64_t>(1, g.diameter()) * ln * ln;
    case Algorithm::rand_spanner:
    case Algorithm::det_spanner: return c.k * ln;
    case Algorithm::rand_mis:
    case Algorithm::det_mis_bounded: return ld;
    default: return ld * ln;
  }
}

inline std::string budget_formula(Algorithm a) {
  switch (a) {
    case Algorithm::det_mis_congest: return "D*log2(n)^2";
    case Algorithm::rand_spanner:
    case Algorithm::det_spanner: return "k*log2(n)";
    case Algorithm::rand_mis:
    case Algorithm::det_mis_bounded: return "log2(Delta)";
    default: return "log2(Delta)*log2(n)";
  }
}

struct RunOutcome {
  int exit_code = 0;
  std::string status;  // ok | violation | infeasible | config_error
  std::string message;
  nlohmann::ordered_json json;
  std::vector<std::string> csv_row;
};

inline const std::vector<std::string>& csv_header() {
  static const std::vector<std::string> h{
      "schema_version", "algo",        "model",        "graph",           "n",           "m",
      "max_degree",     "diameter",    "k",            "rng_seed",        "status",      "exit_code",
      "verdict",        "solution_size", "max_stretch", "phases",         "rounds",      "tree_build_rounds",
      "total_rounds",   "messages",    "max_message_bits", "oversized_charges", "budget_formula", "budget_unit",
      "rounds_per_unit", "message"};
  return h;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::string csv_line(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(cells[i]);
  }
  return out + "\n";
}

namespace detail {

inline nlohmann::ordered_json ids_json(const std::vector<NodeId>& ids) {
  auto a = nlohmann::ordered_json::array();
  for (auto v : ids) a.push_back(v);
  return a;
}

inline nlohmann::ordered_json mis_json(const MisResult& r) {
  nlohmann::ordered_json j;
  j["mis"] = ids_json(r.mis.members);
  j["phase_budget"] = r.phase_budget;
  j["phases_run"] = r.phases.size();
  j["undecided_at_handoff"] = r.undecided_at_handoff;
  j["residual_edges"] = r.residual_edges;
  auto ph = nlohmann::ordered_json::array();
  for (const auto& p : r.phases) ph.push_back(p.to_json());
  j["phases"] = std::move(ph);
  return j;
}

inline std::string ratio_string(std::uint64_t rounds, std::uint64_t unit) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(4);
  os << static_cast<double>(rounds) / static_cast<double>(unit);
  return os.str();
}

}  // namespace detail

/// Runs one configuration, verifies the output, and builds the JSON and
/// CSV row. Never throws for run failures; the outcome carries the status.
inline RunOutcome run(const RunConfig& c) {
  RunOutcome o;
  o.json["schema_version"] = kSchemaVersion;
  o.json["config"] = c.to_json();
  Graph g;
  RunMetrics metrics;
  std::string verdict = "";
  std::size_t solution_size = 0;
  std::string max_stretch;
  std::size_t phases = 0;
  std::vector<std::string> violations;
  bool ran = false;
  try {
    validate(c);
    g = load_graph(c);
    nlohmann::ordered_json gj;
    gj["n"] = g.size();
    gj["m"] = g.edge_count();
    gj["max_degree"] = g.max_degree();
    gj["diameter"] = g.diameter();
    o.json["graph"] = gj;

    MisConfig mc;
    mc.c_prime = c.c_prime;
    mc.t_max = c.t_max;
    mc.c_bandwidth = c.c_bandwidth;
    mc.model = c.effective_model();
    mc.rng_seed = c.rng_seed;
    mc.record_traces = c.traces;

    SpannerConfig sc;
    sc.k = c.k;
    sc.d = c.d;
    sc.t_max = c.spanner_t_max;
    sc.strict_k = c.strict_k;
    sc.xi_factor = c.xi_factor;
    sc.cap_factor = c.cap_factor;
    sc.c_size = c.c_size;
    sc.c_bandwidth = c.c_bandwidth;
    sc.rng_seed = c.rng_seed;
    sc.record_traces = c.traces;

    switch (c.algo) {
      case Algorithm::rand_mis:
      case Algorithm::det_mis:
      case Algorithm::det_mis_bounded:
      case Algorithm::det_mis_congest: {
        MisResult r = c.algo == Algorithm::rand_mis          ? rand_mis_clique(g, mc)
                      : c.algo == Algorithm::det_mis         ? det_mis_clique(g, mc)
                      : c.algo == Algorithm::det_mis_bounded ? det_mis_bounded_delta(g, mc)
                                                             : det_mis_congest(g, mc);
        const auto v = check_mis(g, r.mis);
        verdict = v.str();
        o.json["result"] = detail::mis_json(r);
        o.json["verification"] = {{"check_mis", verdict}};
        metrics = r.metrics;
        solution_size = r.mis.size();
        phases = r.phases.size();
        violations = r.violations;
        if (!v.valid()) violations.push_back("check_mis: " + verdict);
        break;
      }
      case Algorithm::color: {
        ColoringResult r = color_via_mis(g, mc);
        const bool ok = check_coloring(g, r.colors, r.palette);
        verdict = ok ? "valid" : "invalid";
        nlohmann::ordered_json j;
        j["colors"] = r.colors;
        j["palette"] = r.palette;
        j["used_bounded"] = r.used_bounded;
        j["blowup_nodes"] = r.blowup_nodes;
        j["inner"] = detail::mis_json(r.inner);
        o.json["result"] = std::move(j);
        o.json["verification"] = {{"check_coloring", verdict}};
        metrics = r.inner.metrics;
        solution_size = r.palette;
        phases = r.inner.phases.size();
        violations = r.inner.violations;
        if (!ok) violations.push_back("check_coloring: invalid");
        break;
      }
      case Algorithm::rand_spanner:
      case Algorithm::det_spanner: {
        SpannerResult r = c.algo == Algorithm::rand_spanner ? rand_spanner(g, sc) : det_spanner(g, sc);
        const auto v = check_spanner(g, r.edges, c.k);
        verdict = v.str();
        max_stretch = to_fraction_string(v.max_stretch);
        nlohmann::ordered_json j;
        auto edges = nlohmann::ordered_json::array();
        for (const auto& [a, b] : r.edges.pairs()) edges.push_back({a, b});
        j["edges"] = std::move(edges);
        j["k"] = c.k;
        j["d"] = r.d;
        j["size"] = r.edges.size();
        j["max_stretch"] = max_stretch;
        j["xi"] = to_fraction_string(r.constants.xi);
        j["edge_cap"] = r.constants.edge_cap;
        j["cluster_exp"] = r.constants.cluster_exp;
        auto its = nlohmann::ordered_json::array();
        for (const auto& it : r.iterations) its.push_back(it.to_json());
        j["iterations"] = std::move(its);
        o.json["result"] = std::move(j);
        o.json["verification"] = {{"check_spanner", verdict}};
        metrics = r.metrics;
        solution_size = r.edges.size();
        phases = r.iterations.size();
        if (!v.valid) violations.push_back("check_spanner: " + verdict);
        break;
      }
    }
    ran = true;
    o.json["metrics"] = metrics.to_json();
    o.json["violations"] = violations;
    if (violations.empty()) {
      o.status = "ok";
      o.exit_code = 0;
    } else {
      o.status = "violation";
      o.exit_code = 1;
      o.message = violations.front();
    }
  } catch (const ConfigError& e) {
    o.status = "config_error";
    o.exit_code = 2;
    o.message = e.what();
  } catch (const ParameterError& e) {
    o.status = "config_error";
    o.exit_code = 2;
    o.message = e.what();
  } catch (const BudgetError& e) {
    o.status = "config_error";
    o.exit_code = 2;
    o.message = e.what();
  } catch (const InfeasibleError& e) {
    o.status = "infeasible";
    o.exit_code = 1;
    o.message = e.what();
  } catch (const Error& e) {
    o.status = "violation";
    o.exit_code = 1;
    o.message = e.what();
  }
  o.json["status"] = o.status;
  if (!o.message.empty()) o.json["message"] = o.message;

  const bool have_graph = ran || o.json.contains("graph");
  const std::uint64_t unit = have_graph ? budget_unit(c, g) : 0;
  auto num = [](auto x) { return std::to_string(x); };
  o.csv_row = {num(kSchemaVersion),
               to_string(c.algo),
               to_string(c.effective_model()),
               c.graph_label(),
               have_graph ? num(g.size()) : "",
               have_graph ? num(g.edge_count()) : "",
               have_graph ? num(g.max_degree()) : "",
               have_graph ? num(g.diameter()) : "",
               num(c.k),
               num(c.rng_seed),
               o.status,
               num(o.exit_code),
               verdict,
               ran ? num(solution_size) : "",
               max_stretch,
               ran ? num(phases) : "",
               ran ? num(metrics.rounds) : "",
               ran ? num(metrics.tree_build_rounds) : "",
               ran ? num(metrics.total_rounds()) : "",
               ran ? num(metrics.messages) : "",
               ran ? num(metrics.max_message_bits) : "",
               ran ? num(metrics.oversized_charges) : "",
               budget_formula(c.algo),
               have_graph ? num(unit) : "",
               ran ? detail::ratio_string(metrics.total_rounds(), unit) : "",
               o.message};
  return o;
}

/// One run per line of whitespace-separated key=value pairs; '#' comments.
inline std::vector<RunConfig> parse_bench(std::istream& in, const RunConfig& base = {}) {
  std::vector<RunConfig> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream words(line);
    std::string w;
    RunConfig c = base;
    bool any = false;
    while (words >> w) {
      const auto eq = w.find('=');
      if (eq == std::string::npos) throw ConfigError("bench line " + std::to_string(lineno) + ": expected key=value");
      apply_setting(c, w.substr(0, eq), w.substr(eq + 1));
      any = true;
    }
    if (any) out.push_back(std::move(c));
  }
  return out;
}

struct BenchOutcome {
  int exit_code = 0;
  std::string csv;
  std::size_t failed = 0;
};

/// Runs every config; failures are recorded per row and the batch goes on.
/// The exit code is the worst run's.
inline BenchOutcome bench(const std::vector<RunConfig>& configs) {
  BenchOutcome b;
  b.csv = csv_line(csv_header());
  for (const auto& c : configs) {
    auto o = run(c);
    b.csv += csv_line(o.csv_row);
    if (o.exit_code != 0) ++b.failed;
    b.exit_code = std::max(b.exit_code, o.exit_code);
  }
  return b;
}

}  // namespace dlocal
