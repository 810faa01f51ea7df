#pragma once

// Experiment configuration files.
//
// INI syntax, `;` starts a comment, lists are comma separated.
//
//   [experiment]    N (required), seed
//   [system]        family (required), space, mass, omega, delta, deltas, k, e,
//                   kappa, b_tilde, ms_flags, potential, vector_potential,
//                   mass_function
//   [verification]  sample_points, bracket_tol, rank_tol
//   [simulation]    q0, p0 (required when present), t_final, step, method,
//                   monitors, record_every, closure_tol
//
// Profiles (potential, vector_potential, mass_function) are written as
// "poly: c0, c1, ...", "power: c, a" or "conformal: c, kappa, a".
// Monitors are H, universal, extra, or individual names (C^(2), C_(3), I_1, ...).

#include <cstdint>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "qms/catalog.hpp"
#include "qms/cli/format.hpp"
#include "qms/dynamics.hpp"
#include "qms/errors.hpp"

namespace qms::cli {

struct VerificationSettings {
  std::size_t sample_points = 20;
  double bracket_tol = 1e-9;
  double rank_tol = 1e-8;
};

struct SimulationSettings {
  PhasePoint x0;
  double t_final = 10.0;
  double step = 1e-3;
  Method method = Method::GaussLegendre2;
  std::vector<std::string> monitors{"H", "universal", "extra"};
  std::size_t record_every = 1;
  std::optional<double> closure_tol;
};

struct ExperimentConfig {
  SystemDescriptor system;
  std::size_t n = 0;
  std::uint64_t seed = 20240601;
  VerificationSettings verification;
  std::optional<SimulationSettings> simulation;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is{std::string(s)};
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline Vec parse_reals(std::string_view s) {
  Vec out;
  for (const auto& t : split_list(s)) out.push_back(parse_double(t));
  return out;
}

inline long long parse_integer(std::string_view key, std::string_view s) {
  const std::string t = trim(s);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    throw ConfigError(std::string(key) + ": expected an integer, got '" + t + "'");
  return v;
}

inline std::size_t parse_count(std::string_view key, std::string_view s) {
  const long long v = parse_integer(key, s);
  if (v < 0) throw ConfigError(std::string(key) + " must be nonnegative");
  return static_cast<std::size_t>(v);
}

inline double parse_positive(std::string_view key, std::string_view s) {
  const double v = parse_double(s);
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(key) + " must be positive");
  return v;
}

using Section = std::map<std::string, std::string, std::less<>>;

inline const std::map<std::string, std::set<std::string>, std::less<>>& schema() {
  static const std::map<std::string, std::set<std::string>, std::less<>> s = {
      {"experiment", {"N", "seed"}},
      {"system",
       {"family", "space", "mass", "omega", "delta", "deltas", "k", "e", "kappa", "b_tilde", "ms_flags", "potential",
        "vector_potential", "mass_function"}},
      {"verification", {"sample_points", "bracket_tol", "rank_tol"}},
      {"simulation", {"q0", "p0", "t_final", "step", "method", "monitors", "record_every", "closure_tol"}},
  };
  return s;
}

inline std::map<std::string, Section, std::less<>> read_sections(std::istream& in, std::string_view origin) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string(origin) + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  std::map<std::string, Section, std::less<>> out;
  for (const auto& [name, section] : tree) {
    auto it = schema().find(name);
    if (it == schema().end()) throw ConfigError(std::string(origin) + ": unknown section [" + name + "]");
    if (section.empty() && !section.data().empty())
      throw ConfigError(std::string(origin) + ": key '" + name + "' outside of a section");
    Section& dst = out[name];
    for (const auto& [key, value] : section) {
      if (!it->second.count(key))
        throw ConfigError(std::string(origin) + ": unknown key '" + key + "' in [" + name + "]");
      dst[key] = trim(value.data());
    }
  }
  return out;
}

inline const std::string* lookup(const Section* s, std::string_view key) {
  if (!s) return nullptr;
  auto it = s->find(key);
  return it == s->end() ? nullptr : &it->second;
}

}  // namespace detail

/// "poly: c0, c1, ...", "power: c, a" or "conformal: c, kappa, a".
inline Profile parse_profile(std::string_view text) {
  const std::string t = detail::trim(text);
  const auto colon = t.find(':');
  if (colon == std::string::npos) throw ConfigError("profile '" + t + "' needs a kind prefix (poly:, power:, conformal:)");
  const std::string kind = detail::trim(std::string_view(t).substr(0, colon));
  const Vec args = detail::parse_reals(std::string_view(t).substr(colon + 1));
  if (kind == "poly") {
    if (args.empty()) throw ConfigError("poly profile needs at least one coefficient");
    return Profile::polynomial(args);
  }
  if (kind == "power") {
    if (args.size() != 2) throw ConfigError("power profile takes 'c, a'");
    return Profile::power(args[0], args[1]);
  }
  if (kind == "conformal") {
    if (args.size() != 3) throw ConfigError("conformal profile takes 'c, kappa, a'");
    return Profile::conformal(args[0], args[1], args[2]);
  }
  throw ConfigError("unknown profile kind '" + kind + "'");
}

inline ExperimentConfig parse_config(std::istream& in, std::string_view origin = "config") {
  const auto sections = detail::read_sections(in, origin);
  auto section = [&](std::string_view name) -> const detail::Section* {
    auto it = sections.find(name);
    return it == sections.end() ? nullptr : &it->second;
  };

  ExperimentConfig cfg;
  const auto* exp = section("experiment");
  const auto* n_text = detail::lookup(exp, "N");
  if (!n_text) throw ConfigError("[experiment] N is required");
  cfg.n = detail::parse_count("N", *n_text);
  if (cfg.n < 2) throw ConfigError("N must be at least 2");
  if (const auto* s = detail::lookup(exp, "seed"))
    cfg.seed = static_cast<std::uint64_t>(detail::parse_integer("seed", *s));

  const auto* sys = section("system");
  const auto* family = detail::lookup(sys, "family");
  if (!family) throw ConfigError("[system] family is required");
  SystemDescriptor& d = cfg.system;
  d.family = parse_family(*family);
  if (const auto* s = detail::lookup(sys, "space")) d.space = parse_space(*s);
  SystemParams& p = d.params;
  auto real = [&](std::string_view key, double& dst) {
    if (const auto* s = detail::lookup(sys, key)) dst = parse_double(*s);
  };
  real("mass", p.mass);
  real("omega", p.omega);
  real("delta", p.delta);
  real("k", p.coupling);
  real("e", p.charge);
  real("kappa", p.kappa);
  if (const auto* s = detail::lookup(sys, "deltas")) p.deltas = detail::parse_reals(*s);
  p.b_tilde = Vec(cfg.n, 0.0);
  if (const auto* s = detail::lookup(sys, "b_tilde")) {
    p.b_tilde = detail::parse_reals(*s);
    if (p.b_tilde.size() != cfg.n)
      throw ConfigError("b_tilde has " + std::to_string(p.b_tilde.size()) + " entries, N = " + std::to_string(cfg.n));
  }
  if (const auto* s = detail::lookup(sys, "ms_flags"))
    for (const auto& t : detail::split_list(*s)) d.ms_flags.push_back(detail::parse_count("ms_flags", t));
  if (const auto* s = detail::lookup(sys, "potential")) d.potential = parse_profile(*s);
  if (const auto* s = detail::lookup(sys, "vector_potential")) d.vector_profile = parse_profile(*s);
  if (const auto* s = detail::lookup(sys, "mass_function")) d.mass_profile = parse_profile(*s);
  validate(d);

  const auto* ver = section("verification");
  if (const auto* s = detail::lookup(ver, "sample_points")) {
    cfg.verification.sample_points = detail::parse_count("sample_points", *s);
    if (cfg.verification.sample_points == 0) throw ConfigError("sample_points must be positive");
  }
  if (const auto* s = detail::lookup(ver, "bracket_tol")) cfg.verification.bracket_tol = detail::parse_positive("bracket_tol", *s);
  if (const auto* s = detail::lookup(ver, "rank_tol")) cfg.verification.rank_tol = detail::parse_positive("rank_tol", *s);

  if (const auto* sim = section("simulation")) {
    SimulationSettings st;
    const auto* q0 = detail::lookup(sim, "q0");
    const auto* p0 = detail::lookup(sim, "p0");
    if (!q0 || !p0) throw ConfigError("[simulation] needs q0 and p0");
    const Vec q = detail::parse_reals(*q0);
    const Vec pp = detail::parse_reals(*p0);
    if (q.size() != cfg.n || pp.size() != cfg.n) throw ConfigError("q0 and p0 must have N entries");
    try {
      st.x0 = PhasePoint::make(q, pp);
    } catch (const Error& e) {
      throw ConfigError(std::string("initial state: ") + e.what());
    }
    if (const auto* s = detail::lookup(sim, "t_final")) {
      st.t_final = parse_double(*s);
      if (!(st.t_final >= 0.0) || !std::isfinite(st.t_final)) throw ConfigError("t_final must be finite and >= 0");
    }
    if (const auto* s = detail::lookup(sim, "step")) st.step = detail::parse_positive("step", *s);
    if (const auto* s = detail::lookup(sim, "method")) st.method = parse_method(*s);
    if (const auto* s = detail::lookup(sim, "monitors")) st.monitors = detail::split_list(*s);
    if (const auto* s = detail::lookup(sim, "record_every")) {
      st.record_every = detail::parse_count("record_every", *s);
      if (st.record_every == 0) throw ConfigError("record_every must be positive");
    }
    if (const auto* s = detail::lookup(sim, "closure_tol")) st.closure_tol = detail::parse_positive("closure_tol", *s);
    cfg.simulation = std::move(st);
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  return parse_config(in, path.string());
}

}  // namespace qms::cli
