#pragma once

// The verify, simulate and catalog commands. Each returns the process exit
// code: 0 pass, 1 verification failure or halted simulation, 2 usage or
// configuration error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qms/catalog.hpp"
#include "qms/cli/config.hpp"
#include "qms/cli/format.hpp"
#include "qms/dynamics.hpp"
#include "qms/integrals.hpp"
#include "qms/poisson.hpp"

namespace qms::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitUsage = 2;

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides [experiment] seed
  std::filesystem::path out_dir = ".";
  unsigned threads = 1;
  FloatFormat float_format = FloatFormat::Decimal;
};

/// Output directory: an explicit flag wins, then QMS_OUT_DIR, then ".".
inline std::filesystem::path resolve_out_dir(const std::optional<std::string>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("QMS_OUT_DIR"); env && *env) return env;
  return ".";
}

namespace detail {

inline std::string join(const std::vector<std::string>& items, std::string_view sep = ", ") {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

inline std::filesystem::path output_path(const RunOptions& opt, const std::filesystem::path& config,
                                         std::string_view extension) {
  std::filesystem::create_directories(opt.out_dir);
  return opt.out_dir / (config.stem().string() + std::string(extension));
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

/// Resolves monitor names against the system's universal and extra integrals.
inline std::vector<ConservedQuantity> resolve_monitors(const std::vector<std::string>& names,
                                                       const HamiltonianSpec& spec, const IntegralSet& set,
                                                       const std::vector<ConservedQuantity>& extras) {
  std::vector<ConservedQuantity> out;
  auto add = [&out](const ConservedQuantity& q) {
    for (const auto& existing : out)
      if (existing.name == q.name) return;
    out.push_back(q);
  };
  for (const auto& name : names) {
    if (name == "H") {
      add(as_quantity(spec));
    } else if (name == "universal") {
      for (const auto& q : set.all()) add(q);
    } else if (name == "extra") {
      for (const auto& q : extras) add(q);
    } else {
      bool found = false;
      for (const auto& q : set.all())
        if (q.name == name) add(q), found = true;
      for (const auto& q : extras)
        if (q.name == name) add(q), found = true;
      if (!found) throw ConfigError("unknown monitor '" + name + "'");
    }
  }
  return out;
}

}  // namespace detail

struct VerifyOutcome {
  bool passed = false;
  std::string report;
};

/// Runs the involution, independence and extra-integral checks and renders
/// the key/value report.
inline VerifyOutcome verify_experiment(const ExperimentConfig& cfg, const RunOptions& opt) {
  const SystemDescriptor& d = cfg.system;
  const std::size_t n = cfg.n;
  const HamiltonianSpec spec = make_system(d);
  const IntegralSet set = universal_integrals(spec.realization);
  const std::vector<ConservedQuantity> extras = extra_integrals(d);
  auto fmt = [&](double v) { return format_double(v, opt.float_format); };

  VerifyOptions vo;
  vo.sampling.seed = opt.seed.value_or(cfg.seed);
  vo.tolerance = cfg.verification.bracket_tol;
  vo.threads = opt.threads;

  std::vector<ConservedQuantity> sampled = set.all();
  sampled.insert(sampled.end(), extras.begin(), extras.end());
  std::vector<PhasePoint> points = sample_points_for(spec, sampled, cfg.verification.sample_points, vo.sampling);

  const BracketResidualTable table = involution_table_at(spec, set, points, vo);

  const ConservedQuantity h = as_quantity(spec);
  std::vector<BracketEntry> extra_entries;
  for (const auto& e : extras) extra_entries.push_back(bracket_residual(h, e, points, "extra", opt.threads));
  const bool extras_ok = std::all_of(extra_entries.begin(), extra_entries.end(), [&](const BracketEntry& e) {
    return e.max_normalized < cfg.verification.bracket_tol;
  });

  std::vector<ConservedQuantity> universal{h};
  for (const auto& q : set.all()) universal.push_back(q);
  const IndependenceCertificate cert_universal =
      independence_rank_at(universal, points, cfg.verification.rank_tol, opt.threads);
  const std::size_t expected_universal = 2 * n - 2;
  const bool universal_ok = cert_universal.numerical_rank == expected_universal;

  std::optional<IndependenceCertificate> cert_full;
  bool full_ok = true;
  const std::size_t expected_full = 2 * n - 1;
  if (!extras.empty()) {
    std::vector<ConservedQuantity> full = universal;
    full.insert(full.end(), extras.begin(), extras.end());
    cert_full = independence_rank_at(full, points, cfg.verification.rank_tol, opt.threads);
    full_ok = cert_full->numerical_rank == expected_full;
  }

  const bool passed = table.passed() && extras_ok && universal_ok && full_ok;
  const std::size_t certified = cert_full ? cert_full->numerical_rank : cert_universal.numerical_rank;

  std::ostringstream os;
  auto status = [](bool ok) { return ok ? "PASS" : "FAIL"; };
  os << "# qms verification report\n";
  os << "system = " << to_string(d) << "\n";
  os << "N = " << n << "\n";
  os << "seed = " << vo.sampling.seed << "\n";
  os << "sample_points = " << points.size() << "\n";
  os << "bracket_tol = " << fmt(cfg.verification.bracket_tol) << "\n";
  os << "rank_tol = " << fmt(cfg.verification.rank_tol) << "\n";
  os << "residual_normalization = |{F,G}| / (1 + |grad F| |grad G|)\n";

  os << "\n[involution]\n";
  for (const auto& e : table.pairs) {
    const std::string key = e.family + ".{" + e.a + "," + e.b + "}";
    os << key << ".max_raw = " << fmt(e.max_raw) << "\n";
    os << key << ".max_normalized = " << fmt(e.max_normalized) << "\n";
    os << key << ".status = " << status(e.max_normalized < table.tolerance) << "\n";
  }
  os << "involution.worst_normalized = " << fmt(table.worst_normalized()) << "\n";
  os << "involution.status = " << status(table.passed()) << "\n";

  auto certificate = [&](std::string_view tag, const IndependenceCertificate& c, std::size_t expected, bool ok) {
    std::size_t best = 0;
    for (std::size_t k = 0; k < c.ranks.size(); ++k)
      if (c.ranks[k] > c.ranks[best]) best = k;
    os << tag << ".functions = " << detail::join(c.functions) << "\n";
    os << tag << ".points = " << c.num_points << "\n";
    os << tag << ".rank = " << c.numerical_rank << "\n";
    os << tag << ".expected = " << expected << "\n";
    os << tag << ".singular_values =";
    for (double s : c.singular_values[best]) os << " " << fmt(s);
    os << "\n" << tag << ".status = " << status(ok) << "\n";
  };
  os << "\n[rank]\n";
  certificate("universal", cert_universal, expected_universal, universal_ok);
  if (cert_full) certificate("with_extra", *cert_full, expected_full, full_ok);

  os << "\n[extra]\n";
  os << "extra.count = " << extras.size() << "\n";
  for (const auto& e : extra_entries) {
    const std::string key = "{" + e.a + "," + e.b + "}";
    os << key << ".max_raw = " << fmt(e.max_raw) << "\n";
    os << key << ".max_normalized = " << fmt(e.max_normalized) << "\n";
    os << key << ".status = " << status(e.max_normalized < cfg.verification.bracket_tol) << "\n";
  }

  os << "\n[summary]\n";
  os << "universal_integrals = " << set.all().size() << "\n";
  os << "independent_functions = " << certified << "\n";
  os << "label = " << superintegrability_label(n, certified) << "\n";
  os << "result = " << status(passed) << "\n";
  return {passed, os.str()};
}

struct SimulationOutcome {
  int exit_code = kExitPass;
  std::string text;
  std::string message;  // diagnostic for a halted run
};

inline std::string render_trajectory(const ExperimentConfig& cfg, const SimulationSettings& st, const Trajectory& traj,
                                     const std::optional<ClosureReport>& closure, const std::string& closure_note,
                                     FloatFormat ff) {
  auto fmt = [&](double v) { return format_double(v, ff); };
  const std::size_t n = cfg.n;
  std::ostringstream os;
  os << "# qms trajectory\n";
  os << "# system: " << to_string(cfg.system) << "\n";
  os << "# integrator: " << to_string(st.method) << " fixed step " << fmt(traj.step) << " steps " << traj.steps
     << " t_final " << fmt(st.t_final) << " record_every " << st.record_every << "\n";
  os << "# float_format: " << (ff == FloatFormat::Hex ? "hex" : "decimal") << "\n";
  os << "# t";
  for (std::size_t i = 1; i <= n; ++i) os << " q" << i;
  for (std::size_t i = 1; i <= n; ++i) os << " p" << i;
  for (const auto& name : traj.monitor_names) os << " " << name;
  os << "\n";
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    os << fmt(traj.times[k]);
    for (double v : traj.states[k].q) os << " " << fmt(v);
    for (double v : traj.states[k].p) os << " " << fmt(v);
    for (double v : traj.monitor_values[k]) os << " " << fmt(v);
    os << "\n";
  }
  double worst = 0.0;
  for (std::size_t m = 0; m < traj.drift.size(); ++m) {
    os << "# drift " << traj.monitor_names[m] << " = " << fmt(traj.drift[m]) << "\n";
    worst = std::max(worst, traj.drift[m]);
  }
  os << "# max_drift = " << fmt(worst) << "\n";
  if (closure) {
    os << "# closure_tol = " << fmt(*st.closure_tol) << "\n";
    os << "# closure_distance = " << fmt(closure->closure_distance) << "\n";
    os << "# is_closed = " << (closure->is_closed ? "true" : "false") << "\n";
    os << "# period_estimate = " << (closure->period_estimate ? fmt(*closure->period_estimate) : "none") << "\n";
  } else if (!closure_note.empty()) {
    os << "# closure = " << closure_note << "\n";
  }
  return os.str();
}

inline SimulationOutcome simulate_experiment(const ExperimentConfig& cfg, const RunOptions& opt) {
  if (!cfg.simulation) throw ConfigError("config has no [simulation] section");
  const SimulationSettings& st = *cfg.simulation;
  const HamiltonianSpec spec = make_system(cfg.system);
  const IntegralSet set = universal_integrals(spec.realization);
  const auto extras = extra_integrals(cfg.system);
  const auto monitors = detail::resolve_monitors(st.monitors, spec, set, extras);

  IntegratorConfig ic;
  ic.method = st.method;
  ic.step = st.step;
  ic.record_every = st.record_every;

  Trajectory traj;
  try {
    traj = integrate(spec, st.x0, st.t_final, ic, monitors);
  } catch (const SingularApproach& e) {
    std::ostringstream msg;
    msg << e.what() << " at t = " << format_double(e.time(), opt.float_format) << "; last safe state q = [";
    for (std::size_t i = 0; i < e.last_safe().q.size(); ++i)
      msg << (i ? ", " : "") << format_double(e.last_safe().q[i], opt.float_format);
    msg << "], p = [";
    for (std::size_t i = 0; i < e.last_safe().p.size(); ++i)
      msg << (i ? ", " : "") << format_double(e.last_safe().p[i], opt.float_format);
    msg << "]";
    return {kExitFail, {}, msg.str()};
  } catch (const NonConvergence& e) {
    return {kExitFail, {}, e.what()};
  } catch (const DomainError& e) {
    throw ConfigError(std::string("initial state: ") + e.what());
  }

  std::optional<ClosureReport> closure;
  std::string note;
  if (st.closure_tol) {
    try {
      closure = detect_closure(traj, *st.closure_tol);
    } catch (const InsufficientData& e) {
      note = "insufficient data";
    }
  }
  return {kExitPass, render_trajectory(cfg, st, traj, closure, note, opt.float_format), {}};
}

/// `verify <cfg>`: writes <out>/<stem>.report.
inline int cmd_verify(const std::filesystem::path& config, const RunOptions& opt, std::ostream& out,
                      std::ostream& err) {
  try {
    const ExperimentConfig cfg = load_config(config);
    const VerifyOutcome r = verify_experiment(cfg, opt);
    const auto path = detail::output_path(opt, config, ".report");
    detail::write_file(path, r.report);
    out << (r.passed ? "PASS" : "FAIL") << " " << path.string() << "\n";
    return r.passed ? kExitPass : kExitFail;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "verification error: " << e.what() << "\n";
    return kExitFail;
  }
}

/// `simulate <cfg>`: writes <out>/<stem>.traj.
inline int cmd_simulate(const std::filesystem::path& config, const RunOptions& opt, std::ostream& out,
                        std::ostream& err) {
  try {
    const ExperimentConfig cfg = load_config(config);
    const SimulationOutcome r = simulate_experiment(cfg, opt);
    if (r.exit_code != kExitPass) {
      err << "simulation halted: " << r.message << "\n";
      return r.exit_code;
    }
    const auto path = detail::output_path(opt, config, ".traj");
    detail::write_file(path, r.text);
    out << "OK " << path.string() << "\n";
    return kExitPass;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "simulation error: " << e.what() << "\n";
    return kExitFail;
  }
}

/// `catalog`: lists every family.
inline int cmd_catalog(std::ostream& out) {
  const auto entries = catalog_entries();
  out << "families = " << entries.size() << "\n";
  for (const auto& e : entries) {
    out << "\n[" << to_string(e.family) << "]\n";
    out << "name = " << e.title << "\n";
    out << "hamiltonian = " << e.hamiltonian << "\n";
    out << "parameters = " << e.parameters << "\n";
    out << "spaces = " << e.spaces << "\n";
    out << "superintegrability = " << e.superintegrability << "\n";
    out << "extra_integrals = " << e.extra_integrals << "\n";
  }
  return kExitPass;
}

}  // namespace qms::cli
