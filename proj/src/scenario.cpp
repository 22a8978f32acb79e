#include "oscmarket/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "oscmarket/errors.hpp"

namespace oscmarket {

namespace {

struct RawValue {
  std::string text;
  std::size_t line = 0;
};

using RawSection = std::map<std::string, RawValue>;

struct RawConfig {
  std::map<std::string, RawSection> sections;
  std::map<std::string, std::size_t> section_lines;
};

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"system", {"n", "net_input", "P", "alpha", "period"}},
      {"topology", {"kind", "couplings", "k", "values", "phases_file", "edges", "coupling_scale"}},
      {"market", {"epsilon_d", "epsilon_s", "p0"}},
      {"integration", {"dt", "dt_record", "horizon"}},
      {"initial", {"kind", "theta", "anchor"}},
      {"clusters", {"window_fraction", "tolerance"}},
      {"run", {"seed", "output_dir"}},
  };
  return keys;
}

const std::set<std::string> kShockKeys = {"from", "to", "magnitude", "onset"};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool is_shock_section(std::string_view name) {
  constexpr std::string_view prefix = "shock.";
  if (name.substr(0, prefix.size()) != prefix || name.size() == prefix.size()) return false;
  const auto digits = name.substr(prefix.size());
  return std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; });
}

RawConfig tokenize(std::string_view text) {
  RawConfig raw;
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string buffer;
  while (std::getline(in, buffer)) {
    ++line_no;
    std::string_view line = buffer;
    if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!known_keys().count(section) && !is_shock_section(section)) {
        throw ConfigError("unknown section [" + section + "]", line_no);
      }
      if (raw.section_lines.count(section)) {
        throw ConfigError("duplicate section [" + section + "]", line_no);
      }
      raw.section_lines[section] = line_no;
      raw.sections[section];
    } else {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
      if (section.empty()) throw ConfigError("key outside of any section", line_no);
      const std::string key(trim(line.substr(0, eq)));
      const std::string value(trim(line.substr(eq + 1)));
      if (key.empty()) throw ConfigError("empty key", line_no);
      const auto& allowed = is_shock_section(section) ? kShockKeys : known_keys().at(section);
      if (!allowed.count(key)) {
        throw ConfigError("unknown key '" + key + "' in [" + section + "]", line_no);
      }
      auto [it, inserted] = raw.sections[section].emplace(key, RawValue{value, line_no});
      if (!inserted) throw ConfigError("duplicate key '" + key + "'", line_no);
    }
  }
  return raw;
}

// Typed access to one section with "section.key" in every error.
class SectionReader {
 public:
  SectionReader(const RawConfig& raw, std::string name) : name_(std::move(name)) {
    if (auto it = raw.sections.find(name_); it != raw.sections.end()) section_ = &it->second;
  }

  bool has(const std::string& key) const { return section_ && section_->count(key); }

  const RawValue& require(const std::string& key) const {
    if (!has(key)) throw ConfigError("missing required key " + qualified(key));
    return section_->at(key);
  }

  std::string text(const std::string& key, std::string fallback) const {
    return has(key) ? section_->at(key).text : fallback;
  }

  double number(const std::string& key, double fallback) const {
    return has(key) ? parse_number(key, section_->at(key)) : fallback;
  }

  double required_number(const std::string& key) const {
    return parse_number(key, require(key));
  }

  std::size_t index(const std::string& key) const {
    const auto& v = require(key);
    std::size_t out = 0;
    const auto* first = v.text.data();
    const auto* last = first + v.text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) {
      throw ConfigError(qualified(key) + " must be a nonnegative integer, got '" + v.text + "'",
                        v.line);
    }
    return out;
  }

  std::vector<double> vector(const std::string& key) const {
    const auto& v = require(key);
    std::vector<double> out;
    std::string_view rest = v.text;
    while (true) {
      const auto comma = rest.find(',');
      const auto item = trim(rest.substr(0, comma));
      out.push_back(parse_number(key, RawValue{std::string(item), v.line}));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    return out;
  }

  std::string qualified(const std::string& key) const { return name_ + "." + key; }

 private:
  double parse_number(const std::string& key, const RawValue& v) const {
    double out = 0.0;
    const auto* first = v.text.data();
    const auto* last = first + v.text.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last || first == last || !std::isfinite(out)) {
      throw ConfigError(qualified(key) + " must be a finite number, got '" + v.text + "'", v.line);
    }
    return out;
  }

  std::string name_;
  const RawSection* section_ = nullptr;
};

std::vector<Edge> parse_edges(const SectionReader& topo) {
  const auto& raw = topo.require("edges");
  std::vector<Edge> edges;
  std::string_view rest = raw.text;
  while (!trim(rest).empty()) {
    const auto comma = rest.find(',');
    const auto item = trim(rest.substr(0, comma));
    const auto dash = item.find('-');
    const auto colon = item.find(':');
    if (dash == std::string_view::npos || colon == std::string_view::npos || colon < dash) {
      throw ConfigError("topology.edges entries must look like 'i-j:k', got '" +
                            std::string(item) + "'",
                        raw.line);
    }
    Edge e{};
    const auto a = trim(item.substr(0, dash));
    const auto b = trim(item.substr(dash + 1, colon - dash - 1));
    const auto k = trim(item.substr(colon + 1));
    auto ra = std::from_chars(a.data(), a.data() + a.size(), e.a);
    auto rb = std::from_chars(b.data(), b.data() + b.size(), e.b);
    auto rk = std::from_chars(k.data(), k.data() + k.size(), e.coupling);
    if (ra.ec != std::errc{} || ra.ptr != a.data() + a.size() || rb.ec != std::errc{} ||
        rb.ptr != b.data() + b.size() || rk.ec != std::errc{} || rk.ptr != k.data() + k.size()) {
      throw ConfigError("malformed edge '" + std::string(item) + "'", raw.line);
    }
    edges.push_back(e);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return edges;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

ScenarioConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  const RawConfig raw = tokenize(text);
  ScenarioConfig cfg;

  const SectionReader system(raw, "system");
  cfg.n = system.index("n");
  const std::string pattern = system.text("net_input", "endpoints");
  if (pattern == "endpoints") {
    cfg.endpoint_pattern = true;
    cfg.endpoint_p = system.number("P", 1.0);
  } else {
    if (system.has("P")) {
      throw ConfigError("system.P only applies to net_input = endpoints",
                        system.require("P").line);
    }
    cfg.endpoint_pattern = false;
    cfg.net_input = system.vector("net_input");
  }
  cfg.alpha = system.number("alpha", 1.0);
  cfg.period = system.number("period", 60.0);

  const SectionReader topo(raw, "topology");
  const std::string kind = topo.require("kind").text;
  if (kind == "chain") {
    cfg.topology = TopologyKind::chain;
  } else if (kind == "complete") {
    cfg.topology = TopologyKind::complete;
  } else if (kind == "custom") {
    cfg.topology = TopologyKind::custom;
  } else {
    throw ConfigError("topology.kind must be chain, complete or custom, got '" + kind + "'",
                      topo.require("kind").line);
  }
  if (cfg.topology == TopologyKind::custom) {
    if (topo.has("couplings")) {
      throw ConfigError("topology.couplings does not apply to custom topologies",
                        topo.require("couplings").line);
    }
    cfg.custom_edges = parse_edges(topo);
  } else {
    const std::string source = topo.require("couplings").text;
    if (source == "uniform") {
      cfg.couplings = CouplingSource::uniform;
      cfg.uniform_k = topo.required_number("k");
    } else if (source == "explicit") {
      cfg.couplings = CouplingSource::explicit_values;
      cfg.coupling_values = topo.vector("values");
    } else if (source == "calibrate") {
      cfg.couplings = CouplingSource::calibrate;
      cfg.phases_file = resolve(base_dir, topo.require("phases_file").text);
    } else {
      throw ConfigError("topology.couplings must be uniform, explicit or calibrate, got '" +
                            source + "'",
                        topo.require("couplings").line);
    }
  }
  cfg.coupling_scale = topo.number("coupling_scale", 1.0);

  const SectionReader market(raw, "market");
  cfg.market.epsilon_d = market.number("epsilon_d", -1.0);
  cfg.market.epsilon_s = market.number("epsilon_s", 0.0);
  cfg.market.p0 = market.number("p0", 1.0);

  const SectionReader integ(raw, "integration");
  cfg.integration.dt = integ.number("dt", 0.01);
  cfg.integration.dt_record = integ.number("dt_record", 0.5);
  cfg.integration.horizon = integ.required_number("horizon");

  const SectionReader initial(raw, "initial");
  const std::string init_kind = initial.text("kind", "stationary");
  if (init_kind == "stationary") {
    cfg.initial = InitialKind::stationary;
  } else if (init_kind == "zero") {
    cfg.initial = InitialKind::zero;
  } else if (init_kind == "explicit") {
    cfg.initial = InitialKind::explicit_values;
    cfg.initial_theta = initial.vector("theta");
  } else {
    throw ConfigError("initial.kind must be stationary, zero or explicit, got '" + init_kind + "'",
                      initial.require("kind").line);
  }
  if (initial.has("anchor")) cfg.anchor = initial.index("anchor");

  const SectionReader clusters(raw, "clusters");
  cfg.cluster_window_fraction = clusters.number("window_fraction", 0.25);
  cfg.cluster_tolerance = clusters.number("tolerance", 0.05);

  const SectionReader run(raw, "run");
  if (run.has("seed")) cfg.seed = run.index("seed");
  cfg.output_dir = run.text("output_dir", ".");

  // Shock sections in numeric order.
  std::vector<std::pair<std::size_t, std::string>> shock_names;
  for (const auto& [name, section] : raw.sections) {
    if (is_shock_section(name)) shock_names.emplace_back(std::stoull(name.substr(6)), name);
  }
  std::sort(shock_names.begin(), shock_names.end());
  for (const auto& [number, name] : shock_names) {
    const SectionReader shock(raw, name);
    ShockEvent ev;
    ev.from = shock.index("from");
    ev.to = shock.index("to");
    ev.magnitude = shock.required_number("magnitude");
    ev.onset = shock.required_number("onset");
    cfg.shocks.push_back(ev);
  }

  validate_config(cfg);
  return cfg;
}

void validate_config(const ScenarioConfig& cfg) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (cfg.n < 2) fail("system.n must be >= 2");
  if (!cfg.endpoint_pattern && cfg.net_input.size() != cfg.n) {
    fail("system.net_input must list n = " + std::to_string(cfg.n) + " values");
  }
  if (!(cfg.alpha >= 0.0)) fail("system.alpha must be >= 0");
  if (!(cfg.period > 0.0)) fail("system.period must be > 0");

  if (!(cfg.coupling_scale > 0.0)) fail("topology.coupling_scale must be > 0");
  if (cfg.topology == TopologyKind::complete && cfg.couplings != CouplingSource::uniform) {
    fail("topology.kind = complete requires couplings = uniform");
  }
  if (cfg.topology != TopologyKind::custom) {
    switch (cfg.couplings) {
      case CouplingSource::uniform:
        if (!(cfg.uniform_k > 0.0)) fail("topology.k must be > 0");
        break;
      case CouplingSource::explicit_values:
        if (cfg.coupling_values.size() + 1 != cfg.n) {
          fail("topology.values must list n - 1 = " + std::to_string(cfg.n - 1) + " couplings");
        }
        for (double k : cfg.coupling_values) {
          if (!(k > 0.0)) fail("topology.values must all be > 0");
        }
        break;
      case CouplingSource::calibrate:
        if (!cfg.endpoint_pattern) fail("topology.couplings = calibrate requires net_input = endpoints");
        if (!std::filesystem::exists(cfg.phases_file)) {
          fail("topology.phases_file not found: " + cfg.phases_file.string());
        }
        break;
    }
  } else {
    for (const auto& e : cfg.custom_edges) {
      if (e.a >= cfg.n || e.b >= cfg.n) fail("topology.edges references an oscillator >= n");
      if (e.a == e.b) fail("topology.edges contains a self-loop");
      if (!(e.coupling > 0.0)) fail("topology.edges couplings must be > 0");
    }
  }

  if (!(cfg.market.epsilon_d <= 0.0)) fail("market.epsilon_d must be <= 0");
  if (!(cfg.market.epsilon_s >= 0.0)) fail("market.epsilon_s must be >= 0");
  if (!(cfg.market.p0 > 0.0)) fail("market.p0 must be > 0");

  try {
    cfg.integration.validate();
  } catch (const ContractViolation& e) {
    fail(std::string("integration: ") + e.what());
  }

  if (cfg.initial == InitialKind::stationary &&
      (cfg.topology != TopologyKind::chain || !cfg.endpoint_pattern)) {
    fail("initial.kind = stationary requires a chain with net_input = endpoints");
  }
  if (cfg.initial == InitialKind::explicit_values && cfg.initial_theta.size() != cfg.n) {
    fail("initial.theta must list n = " + std::to_string(cfg.n) + " phases");
  }
  if (cfg.anchor && *cfg.anchor >= cfg.n) fail("initial.anchor must be < n");

  if (!(cfg.cluster_window_fraction > 0.0 && cfg.cluster_window_fraction <= 1.0)) {
    fail("clusters.window_fraction must be in (0, 1]");
  }
  if (!(cfg.cluster_tolerance > 0.0)) fail("clusters.tolerance must be > 0");

  for (std::size_t s = 0; s < cfg.shocks.size(); ++s) {
    const auto& ev = cfg.shocks[s];
    const std::string name = "shock." + std::to_string(s);
    if (ev.from >= cfg.n || ev.to >= cfg.n) fail(name + " references an oscillator >= n");
    if (ev.from == ev.to) fail(name + ": from and to must differ");
    if (!(ev.onset >= 0.0)) fail(name + ".onset must be >= 0");
  }
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.parent_path());
}

std::vector<double> read_phases_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read phases file " + path.string());
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::pair<std::size_t, double>> rows;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto comma = body.find(',');
    if (comma == std::string_view::npos) {
      throw ConfigError(path.filename().string() + ": expected 'index,theta_observed'", line_no);
    }
    const auto first = trim(body.substr(0, comma));
    const auto second = trim(body.substr(comma + 1));
    if (!header_seen) {
      header_seen = true;
      if (first != "index" || second != "theta_observed") {
        throw ConfigError(path.filename().string() + ": header must be 'index,theta_observed'",
                          line_no);
      }
      continue;
    }
    std::size_t index = 0;
    double theta = 0.0;
    auto ri = std::from_chars(first.data(), first.data() + first.size(), index);
    auto rt = std::from_chars(second.data(), second.data() + second.size(), theta);
    if (ri.ec != std::errc{} || ri.ptr != first.data() + first.size() || rt.ec != std::errc{} ||
        rt.ptr != second.data() + second.size() || !std::isfinite(theta)) {
      throw ConfigError(path.filename().string() + ": malformed row", line_no);
    }
    rows.emplace_back(index, theta);
  }
  std::sort(rows.begin(), rows.end());
  std::vector<double> phases;
  phases.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].first != i) {
      throw ConfigError(path.filename().string() + ": indices must be 0..n-1 without gaps");
    }
    phases.push_back(rows[i].second);
  }
  if (phases.size() < 2) throw ConfigError(path.filename().string() + ": need at least 2 phases");
  return phases;
}

Scenario build_scenario(const ScenarioConfig& cfg) {
  validate_config(cfg);
  const std::size_t n = cfg.n;
  SystemParams params(cfg.endpoint_pattern ? endpoint_net_input(n, cfg.endpoint_p) : cfg.net_input,
                      cfg.alpha, cfg.period);

  std::optional<Topology> base;
  switch (cfg.topology) {
    case TopologyKind::custom:
      base = Topology::custom(n, cfg.custom_edges);
      break;
    case TopologyKind::complete:
      base = Topology::complete(n, cfg.uniform_k);
      break;
    case TopologyKind::chain:
      switch (cfg.couplings) {
        case CouplingSource::uniform:
          base = Topology::chain_uniform(n, cfg.uniform_k);
          break;
        case CouplingSource::explicit_values:
          base = Topology::chain(cfg.coupling_values);
          break;
        case CouplingSource::calibrate: {
          const auto phases = read_phases_csv(cfg.phases_file);
          if (phases.size() != n) {
            throw ConfigError("phases file lists " + std::to_string(phases.size()) +
                              " sectors but system.n = " + std::to_string(n));
          }
          base = Topology::chain(calibrate_couplings(phases, cfg.endpoint_p));
          break;
        }
      }
      break;
  }
  Topology scaled = base->scaled(cfg.coupling_scale);

  std::optional<StationaryProfile> profile;
  if (cfg.topology == TopologyKind::chain && cfg.endpoint_pattern) {
    const auto k = base->chain_couplings();
    if (cfg.initial == InitialKind::stationary) {
      profile = chain_stationary(cfg.endpoint_p, k, n);
    } else {
      try {
        profile = chain_stationary(cfg.endpoint_p, k, n);
      } catch (const NoStationarySolution&) {
      }
    }
  }

  PhaseState initial;
  switch (cfg.initial) {
    case InitialKind::stationary:
      initial = PhaseState::at_rest(profile->reanchored(cfg.anchor.value_or(n - 1)).theta_star);
      break;
    case InitialKind::zero:
      initial = PhaseState::at_rest(std::vector<double>(n, 0.0));
      break;
    case InitialKind::explicit_values:
      initial = PhaseState::at_rest(cfg.initial_theta);
      break;
  }

  for (const auto& ev : cfg.shocks) {
    if (!scaled.has_edge(ev.from, ev.to)) {
      throw ConfigError("shock on (" + std::to_string(ev.from) + ", " + std::to_string(ev.to) +
                        ") is not a market edge");
    }
  }

  return Scenario{std::move(params), std::move(*base), std::move(scaled), std::move(initial),
                  cfg.shocks,        cfg.market,       cfg.integration,   std::move(profile)};
}

}  // namespace oscmarket
