#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dcone/cone_ansatz.hpp"
#include "dcone/degree.hpp"
#include "dcone/disk_grid.hpp"
#include "dcone/minimizer.hpp"

namespace dcone {

inline constexpr const char* kToolVersion = "0.1.0";

using nlohmann::json;

// ---- configuration -----------------------------------------------------------

struct GridConfig {
  int n_r = 96;
  int n_theta = 192;
  double grading_ratio = 1.03;
  double r_min = 0.001;
};

struct DegreeConfig {
  int resolution = 200;
  double margin = 0.25;
  int samples = 2048;
  double h = 0.05;
};

struct ExperimentConfig {
  BoundaryProfile profile = paper_default_profile();
  std::string profile_name = "paper-default";
  double p = 2.5;
  std::vector<double> h_schedule{0.1, 0.05, 0.025, 0.0125};
  GridConfig grid;
  MinimizeConfig minimizer;
  QuadratureSpec ansatz_quad;
  DegreeConfig degree;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  int threads = 1;

  std::shared_ptr<const DiskGrid> build_grid() const {
    return DiskGrid::build(grid.n_r, grid.n_theta, grid.grading_ratio, grid.r_min);
  }

  MinimizeConfig minimize_config() const {
    MinimizeConfig cfg = minimizer;
    cfg.h_schedule = h_schedule;
    cfg.seed = seed;
    return cfg;
  }
};

namespace detail {

inline void reject_unknown_keys(const json& obj, const char* where,
                                std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed)
      if (item.key() == key) {
        known = true;
        break;
      }
    if (!known)
      throw ConfigError(std::string("unknown key '") + item.key() + "' in " + where);
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

inline void check(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace detail

inline BoundaryProfile profile_from_json(const json& node, std::string* name) {
  if (node.is_string()) {
    const std::string preset = node.get<std::string>();
    if (preset == "paper-default") {
      if (name) *name = preset;
      return paper_default_profile();
    }
    throw ConfigError("unknown profile preset '" + preset + "'");
  }
  if (!node.is_object())
    throw ConfigError("profile must be a preset name or {cos, sin} object");
  detail::reject_unknown_keys(node, "profile", {"cos", "sin"});
  const auto cos = detail::get_or<std::vector<double>>(node, "cos", {});
  const auto sin = detail::get_or<std::vector<double>>(node, "sin", {});
  detail::check(!cos.empty() || !sin.empty(), "profile has no coefficients");
  if (name) *name = "custom";
  try {
    return BoundaryProfile(cos, sin);
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string("invalid profile: ") + e.what());
  }
}

/// Parses and range-checks a configuration document.
inline ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  detail::reject_unknown_keys(doc, "config",
                              {"profile", "p", "h_schedule", "grid", "minimizer",
                               "ansatz", "degree", "output_dir", "seed", "threads"});
  ExperimentConfig cfg;
  if (doc.contains("profile"))
    cfg.profile = profile_from_json(doc.at("profile"), &cfg.profile_name);
  cfg.p = detail::get_or(doc, "p", cfg.p);
  detail::check(cfg.p > 2.0 && cfg.p < 8.0 / 3.0,
                "p must lie in (2, 8/3), got " + std::to_string(cfg.p));
  cfg.h_schedule = detail::get_or(doc, "h_schedule", cfg.h_schedule);
  detail::check(!cfg.h_schedule.empty(), "h_schedule must not be empty");
  for (std::size_t k = 0; k < cfg.h_schedule.size(); ++k) {
    detail::check(cfg.h_schedule[k] > 0.0 && cfg.h_schedule[k] < 1.0,
                  "h_schedule entries must lie in (0,1)");
    if (k > 0)
      detail::check(cfg.h_schedule[k] < cfg.h_schedule[k - 1],
                    "h_schedule must be strictly decreasing");
  }

  if (doc.contains("grid")) {
    const json& g = doc.at("grid");
    detail::reject_unknown_keys(g, "grid", {"Nr", "n_theta", "grading_ratio", "r_min"});
    cfg.grid.n_r = detail::get_or(g, "Nr", cfg.grid.n_r);
    cfg.grid.n_theta = detail::get_or(g, "n_theta", cfg.grid.n_theta);
    cfg.grid.grading_ratio = detail::get_or(g, "grading_ratio", cfg.grid.grading_ratio);
    cfg.grid.r_min = detail::get_or(g, "r_min", cfg.grid.r_min);
    detail::check(cfg.grid.n_r >= 8, "grid.Nr must be at least 8");
    detail::check(cfg.grid.n_theta >= 16 && cfg.grid.n_theta % 2 == 0,
                  "grid.n_theta must be even and at least 16");
    detail::check(cfg.grid.grading_ratio >= 1.0, "grid.grading_ratio must be >= 1");
    detail::check(cfg.grid.r_min > 0.0 && cfg.grid.r_min < 1.0,
                  "grid.r_min must lie in (0,1)");
  }

  if (doc.contains("minimizer")) {
    const json& m = doc.at("minimizer");
    detail::reject_unknown_keys(
        m, "minimizer",
        {"max_iters", "grad_tol", "memory", "ls_shrink", "ls_armijo",
         "stall_window", "stall_rel_decrease", "perturbed_starts", "perturbation"});
    cfg.minimizer.max_iters = detail::get_or(m, "max_iters", cfg.minimizer.max_iters);
    cfg.minimizer.grad_tol = detail::get_or(m, "grad_tol", cfg.minimizer.grad_tol);
    cfg.minimizer.memory = detail::get_or(m, "memory", cfg.minimizer.memory);
    cfg.minimizer.ls_shrink = detail::get_or(m, "ls_shrink", cfg.minimizer.ls_shrink);
    cfg.minimizer.ls_armijo = detail::get_or(m, "ls_armijo", cfg.minimizer.ls_armijo);
    cfg.minimizer.stall_window =
        detail::get_or(m, "stall_window", cfg.minimizer.stall_window);
    cfg.minimizer.stall_rel_decrease =
        detail::get_or(m, "stall_rel_decrease", cfg.minimizer.stall_rel_decrease);
    cfg.minimizer.perturbed_starts =
        detail::get_or(m, "perturbed_starts", cfg.minimizer.perturbed_starts);
    cfg.minimizer.perturbation =
        detail::get_or(m, "perturbation", cfg.minimizer.perturbation);
  }

  if (doc.contains("ansatz")) {
    const json& a = doc.at("ansatz");
    detail::reject_unknown_keys(a, "ansatz", {"n_radial", "n_angular", "inner_cells"});
    cfg.ansatz_quad.n_radial = detail::get_or(a, "n_radial", cfg.ansatz_quad.n_radial);
    cfg.ansatz_quad.n_angular = detail::get_or(a, "n_angular", cfg.ansatz_quad.n_angular);
    cfg.ansatz_quad.inner_cells =
        detail::get_or(a, "inner_cells", cfg.ansatz_quad.inner_cells);
    detail::check(cfg.ansatz_quad.n_angular >= 16, "ansatz.n_angular too small");
  }

  if (doc.contains("degree")) {
    const json& d = doc.at("degree");
    detail::reject_unknown_keys(d, "degree", {"resolution", "margin", "samples", "h"});
    cfg.degree.resolution = detail::get_or(d, "resolution", cfg.degree.resolution);
    cfg.degree.margin = detail::get_or(d, "margin", cfg.degree.margin);
    cfg.degree.samples = detail::get_or(d, "samples", cfg.degree.samples);
    cfg.degree.h = detail::get_or(d, "h", cfg.degree.h);
    detail::check(cfg.degree.resolution >= 8, "degree.resolution must be >= 8");
    detail::check(cfg.degree.h > 0.0 && cfg.degree.h < 1.0,
                  "degree.h must lie in (0,1)");
  }

  cfg.output_dir = detail::get_or<std::string>(doc, "output_dir", cfg.output_dir);
  cfg.seed = detail::get_or<std::uint64_t>(doc, "seed", cfg.seed);
  cfg.threads = detail::get_or(doc, "threads", cfg.threads);
  detail::check(cfg.threads >= 1, "threads must be >= 1");

  try {
    MinimizeConfig probe = cfg.minimize_config();
    probe.validate();
  } catch (const InvalidParameter& e) {
    throw ConfigError(std::string("invalid minimizer settings: ") + e.what());
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

inline json config_echo(const ExperimentConfig& cfg) {
  json doc;
  doc["profile"] = {{"cos", cfg.profile.cos_coeffs()}, {"sin", cfg.profile.sin_coeffs()}};
  doc["profile_name"] = cfg.profile_name;
  doc["p"] = cfg.p;
  doc["h_schedule"] = cfg.h_schedule;
  doc["grid"] = {{"Nr", cfg.grid.n_r},
                 {"n_theta", cfg.grid.n_theta},
                 {"grading_ratio", cfg.grid.grading_ratio},
                 {"r_min", cfg.grid.r_min}};
  doc["minimizer"] = {{"max_iters", cfg.minimizer.max_iters},
                      {"grad_tol", cfg.minimizer.grad_tol},
                      {"memory", cfg.minimizer.memory},
                      {"ls_shrink", cfg.minimizer.ls_shrink},
                      {"ls_armijo", cfg.minimizer.ls_armijo},
                      {"stall_window", cfg.minimizer.stall_window},
                      {"stall_rel_decrease", cfg.minimizer.stall_rel_decrease},
                      {"perturbed_starts", cfg.minimizer.perturbed_starts},
                      {"perturbation", cfg.minimizer.perturbation}};
  doc["ansatz"] = {{"n_radial", cfg.ansatz_quad.n_radial},
                   {"n_angular", cfg.ansatz_quad.n_angular},
                   {"inner_cells", cfg.ansatz_quad.inner_cells}};
  doc["degree"] = {{"resolution", cfg.degree.resolution},
                   {"margin", cfg.degree.margin},
                   {"samples", cfg.degree.samples},
                   {"h", cfg.degree.h}};
  doc["seed"] = cfg.seed;
  return doc;
}

// ---- output plumbing ---------------------------------------------------------

inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline void atomic_write(const std::filesystem::path& path, const std::string& body) {
  namespace fs = std::filesystem;
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out << body;
  }
  fs::rename(tmp, path);
}

inline std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

/// Run ledger written next to the outputs: configuration echo, tool version,
/// wall-clock stamps, entry statuses and the complete file inventory.
struct RunManifest {
  json config;
  std::string command;
  std::string started_at;
  std::string finished_at;
  std::vector<json> entries;
  std::vector<std::string> files;
  std::string status = "incomplete";

  void add_file(const std::string& name) { files.push_back(name); }

  void write(const std::filesystem::path& dir) const {
    json doc;
    doc["tool"] = "dconelab";
    doc["version"] = kToolVersion;
    doc["command"] = command;
    doc["config"] = config;
    doc["started_at"] = started_at;
    doc["finished_at"] = finished_at;
    doc["status"] = status;
    doc["entries"] = entries;
    doc["files"] = files;
    atomic_write(dir / "run_manifest.json", doc.dump(2) + "\n");
  }
};

/// Simple deterministic work splitter; results must be written by index.
inline void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
    });
  for (auto& th : pool) th.join();
}

// ---- commands ----------------------------------------------------------------

inline int cmd_validate_profile(const ExperimentConfig& cfg,
                                const std::filesystem::path& out_dir,
                                std::ostream& log = std::cout) {
  RunManifest manifest;
  manifest.command = "validate-profile";
  manifest.config = config_echo(cfg);
  manifest.started_at = timestamp_utc();

  const AdmissibilityReport rep = check_admissibility(cfg.profile);
  json doc;
  doc["condition1"] = rep.condition1;
  doc["condition1_closed"] = rep.condition1_closed;
  doc["condition2"] = rep.condition2;
  doc["admissible"] = rep.admissible;
  atomic_write(out_dir / "admissibility.json", doc.dump(2) + "\n");
  manifest.add_file("admissibility.json");

  log << "profile " << cfg.profile_name << ": condition1 = " << rep.condition1
      << ", condition2 = " << rep.condition2 << "\n";
  if (rep.admissible) {
    log << "admissible\n";
  } else if (std::abs(rep.condition1) > kAdmissibilityTol) {
    log << "NOT admissible: the stretch integral int(beta^2 - beta'^2) dt = "
        << rep.condition1 << " does not vanish\n";
  } else {
    log << "NOT admissible: int |beta + beta''| dt = " << rep.condition2
        << " is not positive (profile is a rigid tilt)\n";
  }
  manifest.status = rep.admissible ? "ok" : "inadmissible";
  manifest.finished_at = timestamp_utc();
  manifest.write(out_dir);
  return rep.admissible ? 0 : 1;
}

inline int cmd_ansatz_sweep(const ExperimentConfig& cfg,
                            const std::filesystem::path& out_dir,
                            std::ostream& log = std::cout) {
  RunManifest manifest;
  manifest.command = "ansatz-sweep";
  manifest.config = config_echo(cfg);
  manifest.started_at = timestamp_utc();

  const ConeTrace trace = ConeTrace::build(cfg.profile);
  const int n = static_cast<int>(cfg.h_schedule.size());
  std::vector<EnergyBreakdown> rows(n);
  parallel_for(n, cfg.threads, [&](int i) {
    const SmoothedCone sc(trace, cfg.h_schedule[i], cfg.p);
    rows[i] = ansatz_energy(sc, cfg.ansatz_quad);
  });

  std::ostringstream csv;
  csv << "h,core_radius,E_membrane,E_bending_raw,E_bending,E_total\n";
  std::vector<double> hs, es;
  for (int i = 0; i < n; ++i) {
    const double core = std::pow(cfg.h_schedule[i], dual_exponent(cfg.p) / 2.0);
    csv << format_double(cfg.h_schedule[i]) << ',' << format_double(core) << ','
        << format_double(rows[i].membrane) << ',' << format_double(rows[i].bending_raw)
        << ',' << format_double(rows[i].bending) << ',' << format_double(rows[i].total)
        << '\n';
    hs.push_back(cfg.h_schedule[i]);
    es.push_back(rows[i].total);
  }
  atomic_write(out_dir / "ansatz_sweep.csv", csv.str());
  manifest.add_file("ansatz_sweep.csv");

  const PowerLawFit fit = fit_power_law(hs, es);
  if (!std::isfinite(fit.slope))
    log << "warning: slope fit needs at least two h values, reporting NaN\n";
  json rep;
  rep["fitted_slope"] = fit.slope;
  rep["theoretical_slope"] = dual_exponent(cfg.p);
  rep["slope_stderr"] = fit.slope_stderr;
  atomic_write(out_dir / "ansatz_report.json", rep.dump(2) + "\n");
  manifest.add_file("ansatz_report.json");

  log << "ansatz sweep: fitted slope = " << fit.slope
      << ", theoretical p' = " << dual_exponent(cfg.p) << "\n";
  manifest.status = "ok";
  manifest.finished_at = timestamp_utc();
  manifest.write(out_dir);
  return 0;
}

namespace detail {

inline std::string entry_state_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "state_%03d.csv", index);
  return buf;
}

inline json entry_to_json(const ScalingEntry& e) {
  json doc;
  doc["h"] = e.h;
  doc["membrane"] = e.breakdown.membrane;
  doc["bending_raw"] = e.breakdown.bending_raw;
  doc["bending"] = e.breakdown.bending;
  doc["total"] = e.breakdown.total;
  doc["iters"] = e.iters;
  doc["final_grad_metric"] = e.final_grad_metric;
  doc["converged"] = e.converged;
  doc["start"] = e.start;
  return doc;
}

inline ScalingEntry entry_from_json(const json& doc) {
  ScalingEntry e;
  e.h = doc.at("h").get<double>();
  e.breakdown.membrane = doc.at("membrane").get<double>();
  e.breakdown.bending_raw = doc.at("bending_raw").get<double>();
  e.breakdown.bending = doc.at("bending").get<double>();
  e.breakdown.total = doc.at("total").get<double>();
  e.iters = doc.at("iters").get<int>();
  e.final_grad_metric = doc.at("final_grad_metric").get<double>();
  e.converged = doc.at("converged").get<bool>();
  e.start = doc.at("start").get<std::string>();
  return e;
}

}  // namespace detail

/// Warm-started minimization sweep with per-entry persistence. Finished
/// entries (state snapshot plus progress record) are reloaded on a re-run
/// with the same configuration, so an interrupted sweep resumes after the
/// last persisted entry.
inline int cmd_minimize_sweep(const ExperimentConfig& cfg,
                              const std::filesystem::path& out_dir,
                              std::ostream& log = std::cout) {
  namespace fs = std::filesystem;
  RunManifest manifest;
  manifest.command = "minimize-sweep";
  manifest.config = config_echo(cfg);
  manifest.started_at = timestamp_utc();

  require_admissible(cfg.profile);
  const ConeTrace trace = ConeTrace::build(cfg.profile);
  auto grid = cfg.build_grid();
  const BoundaryCondition bc = BoundaryCondition::from_trace(*grid, trace);
  MinimizeConfig mcfg = cfg.minimize_config();

  const std::string config_key = config_echo(cfg).dump();
  const fs::path progress_path = out_dir / "minimize_progress.json";
  std::vector<ScalingEntry> entries;
  int first_pending = 0;
  FieldState warm;
  bool have_warm = false;

  if (fs::exists(progress_path)) {
    try {
      json prog;
      std::ifstream in(progress_path);
      in >> prog;
      if (prog.at("config").get<std::string>() == config_key) {
        for (const auto& e : prog.at("entries")) entries.push_back(detail::entry_from_json(e));
        first_pending = static_cast<int>(entries.size());
        if (first_pending > 0) {
          std::ifstream snap(out_dir / detail::entry_state_name(first_pending - 1));
          warm = read_snapshot(snap, grid, bc);
          have_warm = true;
          log << "resuming after " << first_pending << " persisted entries\n";
        }
      } else {
        log << "existing progress belongs to a different config, starting fresh\n";
      }
    } catch (const std::exception& e) {
      log << "warning: ignoring unreadable progress file (" << e.what() << ")\n";
      entries.clear();
      first_pending = 0;
      have_warm = false;
    }
  }

  std::mt19937_64 rng(cfg.seed);
  bool all_converged = true;
  for (const auto& e : entries) all_converged = all_converged && e.converged;

  for (int idx = first_pending; idx < static_cast<int>(cfg.h_schedule.size()); ++idx) {
    const double h = cfg.h_schedule[idx];
    FieldState ansatz = ansatz_state(grid, bc, trace, h, cfg.p);
    FieldState* start = &ansatz;
    std::string label = "ansatz";
    if (have_warm && energy(warm, h, cfg.p).total < energy(ansatz, h, cfg.p).total) {
      start = &warm;
      label = "warm";
    }
    MinimizeResult best = minimize(*start, h, cfg.p, mcfg);

    rng.seed(cfg.seed + 0x9e3779b97f4a7c15ull * (idx + 1));
    for (int k = 0; k < mcfg.perturbed_starts; ++k) {
      FieldState perturbed = ansatz;
      std::normal_distribution<double> noise(0.0, mcfg.perturbation);
      for (int i = 0; i < grid->n_r() - 1; ++i)
        for (int j = 0; j < grid->n_theta(); ++j) {
          perturbed.u1(i, j) += noise(rng);
          perturbed.u2(i, j) += noise(rng);
          perturbed.v(i, j) += noise(rng);
        }
      MinimizeResult alt = minimize(perturbed, h, cfg.p, mcfg);
      if (alt.breakdown.total < best.breakdown.total) {
        best = std::move(alt);
        label = "perturbed";
      }
    }

    ScalingEntry entry;
    entry.h = h;
    entry.breakdown = best.breakdown;
    entry.iters = best.iters;
    entry.final_grad_metric = best.final_grad_metric;
    entry.converged = best.converged;
    entry.start = label;
    entries.push_back(entry);
    all_converged = all_converged && entry.converged;

    // per-iteration log and the minimizer state, then the progress record
    std::ostringstream iter_csv;
    iter_csv << "iter,energy,grad_metric,step\n";
    for (const auto& rec : best.history)
      iter_csv << rec.iter << ',' << format_double(rec.energy) << ','
               << format_double(rec.grad_metric) << ',' << format_double(rec.step)
               << '\n';
    char logname[32];
    std::snprintf(logname, sizeof(logname), "minimize_log_%03d.csv", idx);
    atomic_write(out_dir / logname, iter_csv.str());

    std::ostringstream snap;
    write_snapshot(snap, best.state);
    atomic_write(out_dir / detail::entry_state_name(idx), snap.str());

    json prog;
    prog["config"] = config_key;
    json jentries = json::array();
    for (const auto& e : entries) jentries.push_back(detail::entry_to_json(e));
    prog["entries"] = jentries;
    atomic_write(progress_path, prog.dump(2) + "\n");

    log << "h = " << h << ": E_total = " << entry.breakdown.total << " after "
        << entry.iters << " iterations (start = " << label
        << ", grad metric = " << entry.final_grad_metric << ")\n";

    warm = best.state;
    have_warm = true;
  }

  // final report
  std::vector<double> hs, es;
  for (const auto& e : entries)
    if (e.breakdown.total > 0.0) {
      hs.push_back(e.h);
      es.push_back(e.breakdown.total);
    }
  const PowerLawFit fit = fit_power_law(hs, es);

  std::ostringstream csv;
  csv << "h,E_membrane,E_bending_raw,E_bending,E_total,iters,grad_metric,converged,"
         "start\n";
  for (const auto& e : entries)
    csv << format_double(e.h) << ',' << format_double(e.breakdown.membrane) << ','
        << format_double(e.breakdown.bending_raw) << ','
        << format_double(e.breakdown.bending) << ','
        << format_double(e.breakdown.total) << ',' << e.iters << ','
        << format_double(e.final_grad_metric) << ',' << (e.converged ? 1 : 0) << ','
        << e.start << '\n';
  atomic_write(out_dir / "scaling_report.csv", csv.str());

  json rep;
  rep["fitted_slope"] = fit.slope;
  rep["theoretical_slope"] = dual_exponent(cfg.p);
  rep["slope_stderr"] = fit.slope_stderr;
  json jentries = json::array();
  for (const auto& e : entries) jentries.push_back(detail::entry_to_json(e));
  rep["entries"] = jentries;
  atomic_write(out_dir / "scaling_report.json", rep.dump(2) + "\n");

  manifest.add_file("scaling_report.csv");
  manifest.add_file("scaling_report.json");
  manifest.add_file("minimize_progress.json");
  for (int idx = 0; idx < static_cast<int>(entries.size()); ++idx) {
    manifest.add_file(detail::entry_state_name(idx));
    char logname[32];
    std::snprintf(logname, sizeof(logname), "minimize_log_%03d.csv", idx);
    manifest.add_file(logname);
  }
  for (const auto& e : entries) manifest.entries.push_back(detail::entry_to_json(e));

  log << "minimize sweep: fitted slope = " << fit.slope
      << ", theoretical p' = " << dual_exponent(cfg.p) << "\n";
  manifest.status = all_converged ? "ok" : "unconverged";
  manifest.finished_at = timestamp_utc();
  manifest.write(out_dir);
  return all_converged ? 0 : 1;
}

inline int cmd_degree_map(const ExperimentConfig& cfg,
                          const std::filesystem::path& out_dir,
                          std::ostream& log = std::cout) {
  RunManifest manifest;
  manifest.command = "degree-map";
  manifest.config = config_echo(cfg);
  manifest.started_at = timestamp_utc();

  const BoundaryCurve curve = build_boundary_curve(cfg.profile, cfg.degree.samples);
  const DegreeBox box = default_degree_box(curve, cfg.degree.margin);
  DegreeField field;
  {
    // row-parallel fill, deterministic by construction
    field.lo = box.lo;
    field.hi = box.hi;
    field.nx = field.ny = cfg.degree.resolution;
    field.values.assign(field.nx * field.ny, 0);
    field.masked.assign(field.nx * field.ny, 0);
    field.dist.assign(field.nx * field.ny, 0.0);
    parallel_for(field.nx, cfg.threads, [&](int ix) {
      for (int iy = 0; iy < field.ny; ++iy) {
        const int k = field.index(ix, iy);
        const Vec2 z = field.center(ix, iy);
        field.dist[k] = curve.distance_to(z);
        if (field.dist[k] <= curve.exclusion_width()) {
          field.masked[k] = 1;
          continue;
        }
        const double w = winding_sum(curve, z);
        const double rounded = std::round(w);
        if (!(std::abs(w - rounded) < 0.25)) {
          field.masked[k] = 1;
          continue;
        }
        field.values[k] = static_cast<int>(rounded);
      }
    });
  }

  std::ostringstream csv;
  csv << "z1,z2,deg\n";
  for (int ix = 0; ix < field.nx; ++ix)
    for (int iy = 0; iy < field.ny; ++iy) {
      const int k = field.index(ix, iy);
      if (field.masked[k]) continue;
      const Vec2 z = field.center(ix, iy);
      csv << format_double(z[0]) << ',' << format_double(z[1]) << ','
          << field.values[k] << '\n';
    }
  atomic_write(out_dir / "degree_field.csv", csv.str());
  manifest.add_file("degree_field.csv");

  int exit_code = 0;
  json rep;
  rep["admissible"] = check_admissibility(cfg.profile).admissible;
  try {
    const TestFunctionSearch found = find_test_function(field);
    const SmoothedCone sc(ConeTrace::build(cfg.profile, false), cfg.degree.h, cfg.p);
    const PullbackCheck check =
        pullback_identity_check(sc, found.phi, field, found.component_degree);
    rep["witness"] = {{"center", {found.phi.center[0], found.phi.center[1]}},
                      {"radius", found.phi.radius},
                      {"amplitude", found.phi.amplitude},
                      {"component_degree", found.component_degree},
                      {"degree_integral", found.integral}};
    rep["pullback"] = {{"lhs", check.lhs}, {"rhs", check.rhs}, {"rel_err", check.rel_err}};
    log << "degree witness: integral = " << found.integral
        << ", pullback rel_err = " << check.rel_err << "\n";
    manifest.status = "ok";
  } catch (const NoWitness& e) {
    rep["witness"] = nullptr;
    log << "no witness: " << e.what() << "\n";
    manifest.status = "no-witness";
    exit_code = 1;
  }
  atomic_write(out_dir / "witness_report.json", rep.dump(2) + "\n");
  manifest.add_file("witness_report.json");

  manifest.finished_at = timestamp_utc();
  manifest.write(out_dir);
  return exit_code;
}

inline int cmd_exponents(const ExperimentConfig& cfg,
                         const std::filesystem::path& out_dir,
                         std::ostream& log = std::cout) {
  RunManifest manifest;
  manifest.command = "exponents";
  manifest.config = config_echo(cfg);
  manifest.started_at = timestamp_utc();

  const ExponentTable t = exponent_table(cfg.p);
  json doc;
  doc["p"] = cfg.p;
  doc["p_prime"] = t.p_prime;
  doc["alpha"] = t.alpha;
  doc["theta"] = t.theta;
  atomic_write(out_dir / "exponents.json", doc.dump(2) + "\n");
  manifest.add_file("exponents.json");

  log << "p = " << cfg.p << ": p' = " << t.p_prime << ", alpha = " << t.alpha
      << ", theta = " << t.theta << "\n";
  manifest.status = "ok";
  manifest.finished_at = timestamp_utc();
  manifest.write(out_dir);
  return 0;
}

}  // namespace dcone
