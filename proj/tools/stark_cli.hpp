// Command-line front end: configuration, scans and CSV/JSON emission.
//
// Everything except main() lives here so the test suite can drive the
// subcommands in-process.
#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "stark/stark.hpp"

#ifndef STARK_VERSION
#define STARK_VERSION "unknown"
#endif

namespace stark::cli {

enum Exit : int { ok = 0, usage = 1, numerical = 2 };

struct RunConfig {
  std::string subcommand;
  ModelParams params;
  double emin = -8, emax = 8;
  int n = 4001;
  std::string offset = "auto";  // auto, none or half
  double rmin = 0.5, rmax = 5.0, rstep = 0.01;
  std::string format = "csv";
  std::string out = "-";
  unsigned threads = 0;
  double d_avoid = 0.05;
  int window = 5;
  bool scan = true;  // add continuum resonances to the pole pool
  std::vector<double> pcf_args;  // pcf-eval: a_re a_im z_re z_im
  bool grid_given = false;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ------------------------------------------------------------------ parsing

inline void add_options(CLI::App& app, RunConfig& cfg) {
  app.set_config("--config", "", "read key=value settings; flags given on the command line take precedence");
  app.add_option("--g", cfg.params.g, "well strength")->check(CLI::NonNegativeNumber);
  app.add_option("--R", cfg.params.R, "half distance between the wells")->check(CLI::PositiveNumber);
  app.add_option("--F", cfg.params.F, "field strength")->check(CLI::NonNegativeNumber);
  app.add_option("--m", cfg.params.m, "mass")->check(CLI::PositiveNumber);
  app.add_option("--c", cfg.params.c, "speed of light")->check(CLI::PositiveNumber);
  app.add_option("--emin", cfg.emin, "lowest energy of the grid");
  app.add_option("--emax", cfg.emax, "highest energy of the grid");
  app.add_option("--n", cfg.n, "number of grid points")->check(CLI::Range(2, 100000000));
  app.add_option("--offset", cfg.offset, "grid offset: none, half, or auto (half only for the default grid)")
      ->check(CLI::IsMember({"auto", "none", "half"}));
  app.add_option("--rmin", cfg.rmin, "first well separation R of a pole scan")->check(CLI::PositiveNumber);
  app.add_option("--rmax", cfg.rmax, "last well separation R of a pole scan")->check(CLI::PositiveNumber);
  app.add_option("--rstep", cfg.rstep, "R increment of a pole scan")->check(CLI::PositiveNumber);
  app.add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", cfg.out, "output path, - for standard output");
  app.add_option("--threads", cfg.threads, "worker threads, 0 for all cores");
  app.add_option("--d-avoid", cfg.d_avoid, "avoided-crossing distance threshold")->check(CLI::PositiveNumber);
  app.add_option("--window", cfg.window, "slope-exchange window in R steps")->check(CLI::PositiveNumber);
  app.add_option("--scan", cfg.scan, "seed continuum resonances as well as the molecular ones");
  for (const char* name : {"free-density", "zero-field", "stark-density", "poles", "pcf-eval"}) {
    CLI::App* sub = app.add_subcommand(name)->fallthrough()->callback([&cfg, name] { cfg.subcommand = name; });
    if (std::string(name) == "pcf-eval") {
      sub->add_option("args", cfg.pcf_args, "a_re a_im z_re z_im")->expected(4)->required();
    }
  }
  app.require_subcommand(1);
}

// Parse argv; returns nullopt and sets the exit code when parsing ends the
// run (help or a usage error).
inline std::optional<RunConfig> parse(int argc, const char* const* argv, int& exit_code, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Spectral densities and resonance poles of the 1-D Dirac double point well in a constant field"};
  app.set_version_flag("--version", std::string(STARK_VERSION));
  add_options(app, cfg);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    exit_code = Exit::ok;
    return std::nullopt;
  } catch (const CLI::CallForVersion& e) {
    std::cout << STARK_VERSION << "\n";
    exit_code = Exit::ok;
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    exit_code = Exit::usage;
    return std::nullopt;
  }
  for (const char* k : {"--emin", "--emax", "--n"}) {
    if (app.count(k) > 0) cfg.grid_given = true;
  }
  exit_code = Exit::ok;
  return cfg;
}

// ----------------------------------------------------------------- numerics

inline std::vector<double> energy_grid(const RunConfig& cfg) {
  if (!(cfg.n >= 2)) throw UsageError("grid needs n >= 2");
  if (!(cfg.emin < cfg.emax)) throw UsageError("grid needs emin < emax");
  const bool half = cfg.offset == "half" || (cfg.offset == "auto" && !cfg.grid_given);
  std::vector<double> grid(std::size_t(cfg.n));
  if (half) {
    // Cell midpoints: n points strictly inside [emin, emax].
    const double h = (cfg.emax - cfg.emin) / cfg.n;
    for (int i = 0; i < cfg.n; ++i) grid[std::size_t(i)] = cfg.emin + h * (i + 0.5);
    return grid;
  }
  const double h = (cfg.emax - cfg.emin) / (cfg.n - 1);
  for (int i = 0; i < cfg.n; ++i) grid[std::size_t(i)] = cfg.emin + h * i;
  grid.back() = cfg.emax;
  return grid;
}

inline unsigned worker_count(unsigned requested) {
  return requested ? requested : std::max(1u, std::thread::hardware_concurrency());
}

// Evaluate f on every grid point with a pool of workers; results keep the
// grid order.
template <class F>
std::vector<SpectralSample<double>> parallel_scan(const std::vector<double>& grid, unsigned threads, F f) {
  std::vector<SpectralSample<double>> out(grid.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) out[i] = f(grid[i]);
  };
  const unsigned n = std::min<unsigned>(worker_count(threads), unsigned(std::max<std::size_t>(1, grid.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return out;
}

// ----------------------------------------------------------------- emission

inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline nlohmann::json json_number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return x;
}

// Effective configuration as ordered key/value pairs.
inline std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& c) {
  std::vector<std::pair<std::string, std::string>> kv{
      {"subcommand", c.subcommand}, {"version", STARK_VERSION}, {"m", fmt(c.params.m)},
      {"c", fmt(c.params.c)},       {"g", fmt(c.params.g)},     {"R", fmt(c.params.R)},
      {"F", fmt(c.params.F)}};
  if (c.subcommand == "poles") {
    kv.insert(kv.end(), {{"rmin", fmt(c.rmin)},
                         {"rmax", fmt(c.rmax)},
                         {"rstep", fmt(c.rstep)},
                         {"d-avoid", fmt(c.d_avoid)},
                         {"window", std::to_string(c.window)},
                         {"scan", c.scan ? "true" : "false"}});
  } else if (c.subcommand == "pcf-eval") {
    const auto arg = [&c](std::size_t i) { return i < c.pcf_args.size() ? fmt(c.pcf_args[i]) : std::string("nan"); };
    kv.insert(kv.end(), {{"a_re", arg(0)}, {"a_im", arg(1)}, {"z_re", arg(2)}, {"z_im", arg(3)}});
  } else {
    kv.insert(kv.end(), {{"emin", fmt(c.emin)}, {"emax", fmt(c.emax)}, {"n", std::to_string(c.n)}, {"offset", c.offset}});
  }
  kv.emplace_back("format", c.format);
  return kv;
}

inline void csv_header(std::ostream& os, const RunConfig& c) {
  os << "# stark " << c.subcommand << "\n";
  for (const auto& [k, v] : config_echo(c)) os << "# " << k << "=" << v << "\n";
}

inline nlohmann::json json_config(const RunConfig& c) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [k, v] : config_echo(c)) out[k] = v;
  return out;
}

struct BoundLine {
  std::string kind;
  double E;
};

inline void emit_density(std::ostream& os, const RunConfig& c, const std::vector<SpectralSample<double>>& s,
                         const std::vector<BoundLine>& bound, bool with_bound_block) {
  if (c.format == "json") {
    nlohmann::json j;
    j["config"] = json_config(c);
    j["samples"] = nlohmann::json::array();
    for (const auto& x : s) {
      j["samples"].push_back({{"E", x.E}, {"rho", json_number(x.rho)}, {"is_gap", x.is_gap}, {"singular", x.singular}});
    }
    if (with_bound_block) {
      j["bound_states"] = nlohmann::json::array();
      for (const auto& b : bound) j["bound_states"].push_back({{"kind", b.kind}, {"E", b.E}});
    }
    os << j.dump(1) << "\n";
    return;
  }
  csv_header(os, c);
  os << "E,rho,is_gap\n";
  for (const auto& x : s) {
    if (x.singular) os << "# singular sample at E=" << fmt(x.E) << "\n";
    os << fmt(x.E) << "," << fmt(x.rho) << "," << (x.is_gap ? 1 : 0) << "\n";
  }
  if (with_bound_block) {
    os << "# bound states\n";
    os << "kind,E\n";
    for (const auto& b : bound) os << b.kind << "," << fmt(b.E) << "\n";
  }
}

// ---------------------------------------------------------------- commands

inline int cmd_free_density(const RunConfig& c, std::ostream& os) {
  const auto grid = energy_grid(c);
  ModelParams p = c.params;
  const auto s = parallel_scan(grid, c.threads, [&](double E) { return free_density(E, p); });
  emit_density(os, c, s, {}, false);
  return Exit::ok;
}

inline std::vector<BoundLine> bound_lines(const ModelParams& p) {
  const auto b = bound_states(p);
  std::vector<BoundLine> out;
  if (b.ground) out.push_back({"ground", *b.ground});
  if (b.excited) out.push_back({"excited", *b.excited});
  return out;
}

inline int cmd_zero_field(const RunConfig& c, std::ostream& os) {
  const auto grid = energy_grid(c);
  ModelParams p = c.params;
  p.F = 0;
  const auto s = parallel_scan(grid, c.threads, [&](double E) { return double_delta_density(E, p); });
  emit_density(os, c, s, bound_lines(p), true);
  return Exit::ok;
}

inline int cmd_stark_density(const RunConfig& c, std::ostream& os) {
  if (!(c.params.F > 0)) throw UsageError("stark-density needs --F > 0");
  const auto grid = energy_grid(c);
  const ModelParams p = c.params;
  const auto s = parallel_scan(grid, c.threads, [&](double E) { return stark_density(E, p); });
  emit_density(os, c, s, {}, false);
  const bool bad = std::any_of(s.begin(), s.end(), [](const auto& x) { return !std::isfinite(x.rho) && !x.singular; });
  return bad ? Exit::numerical : Exit::ok;
}

// Pole pool at rmin: the zero-field bound states pushed slightly below the
// real axis, plus (optionally) the resonances found near the real axis.
inline std::vector<cplx> pole_seeds(const RunConfig& c) {
  ModelParams p = c.params;
  p.R = c.rmin;
  ModelParams zero = p;
  zero.F = 0;
  std::vector<cplx> guesses;
  for (const auto& b : bound_lines(zero)) guesses.emplace_back(b.E, -1e-3);
  if (c.scan) {
    ScanWindow w;
    w.re_min = -3 * p.rest();
    w.re_max = p.rest();
    for (const auto& r : scan_poles(p, w)) guesses.push_back(r.E);
  }
  return converge_seeds(guesses, p);
}

inline int cmd_poles(const RunConfig& c, std::ostream& os) {
  if (!(c.params.F > 0)) throw UsageError("poles needs --F > 0");
  if (!(c.rmax >= c.rmin)) throw UsageError("poles needs rmax >= rmin");
  const auto seeds = pole_seeds(c);
  ContinuationOptions co;
  co.threads = c.threads;
  auto traces = continue_in_R(seeds, c.params, c.rmin, c.rmax, c.rstep, co);
  EventOptions eo;
  eo.d_avoid = c.d_avoid;
  eo.window = c.window;
  classify_events(traces, eo);
  const bool any_complete =
      std::any_of(traces.begin(), traces.end(), [](const PoleTrace& t) { return !t.aborted && !t.records.empty(); });
  if (c.format == "json") {
    nlohmann::json j;
    j["config"] = json_config(c);
    j["samples"] = nlohmann::json::array();
    j["events"] = nlohmann::json::array();
    j["failures"] = nlohmann::json::array();
    for (const auto& t : traces) {
      for (const auto& r : t.records) {
        j["samples"].push_back({{"branch", t.branch_id},
                                {"R", r.R},
                                {"re", r.E.real()},
                                {"im", r.E.imag()},
                                {"residual", r.residual},
                                {"iterations", r.iterations}});
      }
      for (const auto& e : t.events) {
        j["events"].push_back({{"branch", t.branch_id},
                               {"R", e.R},
                               {"kind", std::string(to_string(e.kind))},
                               {"partner", e.partner},
                               {"re", e.E.real()},
                               {"im", e.E.imag()}});
      }
      if (t.failure) {
        j["failures"].push_back({{"branch", t.branch_id},
                                 {"R", t.failure->record.R},
                                 {"status", std::string(to_string(t.failure->status))}});
      }
    }
    os << j.dump(1) << "\n";
  } else {
    csv_header(os, c);
    for (const auto& t : traces) {
      if (t.failure) {
        os << "# branch " << t.branch_id << " stopped at R=" << fmt(t.failure->record.R) << ": "
           << to_string(t.failure->status) << "\n";
      }
      for (double R : t.collisions) os << "# branch " << t.branch_id << " collides with another branch at R=" << fmt(R) << "\n";
    }
    os << "branch,R,re,im,residual\n";
    for (const auto& t : traces) {
      for (const auto& r : t.records) {
        os << t.branch_id << "," << fmt(r.R) << "," << fmt(r.E.real()) << "," << fmt(r.E.imag()) << ","
           << fmt(r.residual) << "\n";
      }
    }
    os << "# events\n";
    os << "branch,R,kind,partner,re,im\n";
    for (const auto& t : traces) {
      for (const auto& e : t.events) {
        os << t.branch_id << "," << fmt(e.R) << "," << to_string(e.kind) << "," << e.partner << "," << fmt(e.E.real())
           << "," << fmt(e.E.imag()) << "\n";
      }
    }
  }
  return any_complete ? Exit::ok : Exit::numerical;
}

inline int cmd_pcf_eval(const RunConfig& c, std::ostream& os) {
  if (c.pcf_args.size() != 4) throw UsageError("pcf-eval needs a_re a_im z_re z_im");
  const cplx a(c.pcf_args[0], c.pcf_args[1]), z(c.pcf_args[2], c.pcf_args[3]);
  const PcfResult r = pcf_evaluate(a, z);
  const cplx u = r.value.value(), du = r.derivative.value();
  const cplx lu = r.value.log();
  if (c.format == "json") {
    nlohmann::json j;
    j["config"] = json_config(c);
    j["samples"] = nlohmann::json::array({{{"u_re", json_number(u.real())},
                                           {"u_im", json_number(u.imag())},
                                           {"du_re", json_number(du.real())},
                                           {"du_im", json_number(du.imag())},
                                           {"log_modulus", json_number(lu.real())},
                                           {"phase", json_number(lu.imag())},
                                           {"route", std::string(to_string(r.route))},
                                           {"error", r.error},
                                           {"accuracy_loss", r.accuracy_loss}}});
    os << j.dump(1) << "\n";
  } else {
    csv_header(os, c);
    os << "u_re,u_im,du_re,du_im,log_modulus,phase,route,error,accuracy_loss\n";
    os << fmt(u.real()) << "," << fmt(u.imag()) << "," << fmt(du.real()) << "," << fmt(du.imag()) << ","
       << fmt(lu.real()) << "," << fmt(lu.imag()) << "," << to_string(r.route) << "," << fmt(r.error) << ","
       << (r.accuracy_loss ? 1 : 0) << "\n";
  }
  return r.accuracy_loss || !r.value.finite() ? Exit::numerical : Exit::ok;
}

// Run a parsed configuration, writing to `os`. Errors are reported on `err`.
inline int run(const RunConfig& c, std::ostream& os, std::ostream& err) {
  try {
    if (!c.params.valid()) throw UsageError("invalid model parameters: need m>0, c>0, g>=0, R>0, F>=0");
    if (c.subcommand == "free-density") return cmd_free_density(c, os);
    if (c.subcommand == "zero-field") return cmd_zero_field(c, os);
    if (c.subcommand == "stark-density") return cmd_stark_density(c, os);
    if (c.subcommand == "poles") return cmd_poles(c, os);
    if (c.subcommand == "pcf-eval") return cmd_pcf_eval(c, os);
    throw UsageError("unknown subcommand '" + c.subcommand + "'");
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return Exit::usage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return Exit::usage;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return Exit::numerical;
  }
}

// Full program: parse, open the output and run.
inline int main_entry(int argc, const char* const* argv) {
  int code = Exit::ok;
  const auto cfg = parse(argc, argv, code, std::cerr);
  if (!cfg) return code;
  if (cfg->out == "-") return run(*cfg, std::cout, std::cerr);
  std::ostringstream buf;
  const int rc = run(*cfg, buf, std::cerr);
  if (rc == Exit::usage) return rc;
  std::ofstream file(cfg->out, std::ios::binary);
  if (!file) {
    std::cerr << "error: cannot write '" << cfg->out << "'\n";
    return Exit::usage;
  }
  file << buf.str();
  return rc;
}

}  // namespace stark::cli
