#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qwalk/decoherence.hpp"
#include "qwalk/ensemble.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/observables.hpp"
#include "qwalk/transition.hpp"
#include "qwalk/walk.hpp"

namespace qwalk {

inline constexpr const char* tool_version = "0.3.1";

struct FitWindow {
  int first_step = 1;
  int last_step = 8;
};

// Everything needed to reproduce a run bit-exactly. The seed lives in
// ensemble.master_seed; the thread count is deliberately absent.
struct RunManifest {
  WalkConfig walk;
  SEConfig se;
  EnsembleConfig ensemble;
  PowerCalibration calibration;
  FitWindow fit;
  std::string tool_version = qwalk::tool_version;
  std::string timestamp;

  void validate() const {
    prefixed("walk", [&] { walk.validate(); });
    prefixed("se", [&] { se.validate(); });
    prefixed("ensemble", [&] { ensemble.validate(); });
    if (fit.first_step < 0) throw ConfigError("fit.first_step", "must be >= 0");
    if (fit.last_step < fit.first_step) throw ConfigError("fit.last_step", "must be >= fit.first_step");
    if (!(calibration.gamma > 0.0)) throw ConfigError("calibration.gamma", "must be > 0");
    if (!(calibration.ref_power > 0.0)) throw ConfigError("calibration.ref_power_uW", "must be > 0");
    if (!(calibration.ref_rho > 0.0 && calibration.ref_rho <= 1.0))
      throw ConfigError("calibration.ref_rho", "must lie in (0, 1]");
  }

 private:
  template <class F>
  static void prefixed(const std::string& section, F&& f) {
    try {
      f();
    } catch (const ConfigError& e) {
      const std::string what = e.what();
      const auto colon = what.find(": ");
      throw ConfigError(section + "." + e.key(), colon == std::string::npos ? what : what.substr(colon + 2));
    }
  }
};

// Locale-independent shortest round-trip formatting.
inline std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error("number formatting failed");
  return std::string(buf, end);
}

inline std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) now = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace detail {

using nlohmann::json;

class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_.empty() ? "<document>" : path_, "must be a JSON object");
  }

  std::string key(const std::string& name) const { return path_.empty() ? name : path_ + "." + name; }

  const json* find(const std::string& name) {
    seen_.insert(name);
    auto it = obj_.find(name);
    if (it == obj_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  void number(const std::string& name, double& out) {
    if (const json* v = find(name)) {
      if (!v->is_number()) throw ConfigError(key(name), "expected a number");
      out = v->get<double>();
    }
  }

  void integer(const std::string& name, int& out) {
    if (const json* v = find(name)) {
      if (!v->is_number_integer()) throw ConfigError(key(name), "expected an integer");
      const auto x = v->get<std::int64_t>();
      if (x < INT32_MIN || x > INT32_MAX) throw ConfigError(key(name), "out of range");
      out = static_cast<int>(x);
    }
  }

  void count(const std::string& name, std::size_t& out) {
    if (const json* v = find(name)) {
      if (!v->is_number_integer()) throw ConfigError(key(name), "expected an integer");
      if (v->is_number_unsigned()) {
        out = v->get<std::size_t>();
      } else {
        const auto x = v->get<std::int64_t>();
        if (x < 0) throw ConfigError(key(name), "must be >= 0");
        out = static_cast<std::size_t>(x);
      }
    }
  }

  void seed(const std::string& name, std::uint64_t& out) {
    if (const json* v = find(name)) {
      if (!v->is_number_unsigned()) throw ConfigError(key(name), "expected an unsigned 64-bit integer");
      out = v->get<std::uint64_t>();
    }
  }

  void boolean(const std::string& name, bool& out) {
    if (const json* v = find(name)) {
      if (!v->is_boolean()) throw ConfigError(key(name), "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(const std::string& name, std::string& out) {
    if (const json* v = find(name)) {
      if (!v->is_string()) throw ConfigError(key(name), "expected a string");
      out = v->get<std::string>();
    }
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(key(it.key()), "unknown key");
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

inline json manifest_json(const RunManifest& m) {
  json walk = {
      {"k", m.walk.k},
      {"steps", m.walk.steps},
      {"tau", m.walk.tau},
      {"phi_global", m.walk.phi_global ? json(*m.walk.phi_global) : json(nullptr)},
      {"compensated", m.walk.compensated},
      {"coin_alpha", m.walk.coin_alpha},
      {"coin_chi_first", m.walk.coin_chi_first},
      {"coin_chi_rest", m.walk.coin_chi_rest},
      {"angle_grid_size", m.walk.angle_grid_size},
      {"half_width", m.walk.half_width},
      {"ratchet_phase", m.walk.ratchet_phase},
      {"trunc_eps", m.walk.trunc_eps},
  };
  json se = {
      {"rho", m.se.rho},
      {"t_coin", m.se.t_coin},
      {"t_on", m.se.t_on},
      {"t_se", m.se.t_se},
      {"max_draws", m.se.max_draws},
      {"mode", to_string(m.se.mode)},
      {"recoil_half_width", m.se.recoil_half_width},
  };
  json ens = {
      {"n_traj", m.ensemble.n_traj},
      {"delta_beta", m.ensemble.delta_beta},
      {"beta_dist", to_string(m.ensemble.beta_dist)},
      {"master_seed", m.ensemble.master_seed},
      {"record_per_step", m.ensemble.record_per_step},
  };
  json cal = {
      {"gamma", m.calibration.gamma},
      {"ref_power_uW", m.calibration.ref_power},
      {"ref_rho", m.calibration.ref_rho},
  };
  return json{
      {"tool_version", m.tool_version},
      {"timestamp", m.timestamp},
      {"walk", walk},
      {"se", se},
      {"ensemble", ens},
      {"calibration", cal},
      {"fit", {{"first_step", m.fit.first_step}, {"last_step", m.fit.last_step}}},
  };
}

}  // namespace detail

/// Resolve a JSON document into a validated manifest. Missing keys take
/// their defaults; unknown keys and out-of-range values raise ConfigError
/// naming the key. se.power_uW, when given, sets rho through the calibration.
inline RunManifest parse_manifest(const nlohmann::json& doc) {
  using detail::ObjectReader;
  RunManifest m;
  ObjectReader top(doc, "");
  std::string version;
  top.string("tool_version", version);
  top.string("timestamp", m.timestamp);

  std::optional<double> power;
  bool rho_given = false;
  if (const auto* w = top.find("walk")) {
    ObjectReader r(*w, "walk");
    r.number("k", m.walk.k);
    r.integer("steps", m.walk.steps);
    r.number("tau", m.walk.tau);
    double phi = 0.0;
    if (r.find("phi_global") != nullptr) {
      r.number("phi_global", phi);
      m.walk.phi_global = phi;
    }
    r.boolean("compensated", m.walk.compensated);
    r.number("coin_alpha", m.walk.coin_alpha);
    r.number("coin_chi_first", m.walk.coin_chi_first);
    r.number("coin_chi_rest", m.walk.coin_chi_rest);
    r.integer("angle_grid_size", m.walk.angle_grid_size);
    r.integer("half_width", m.walk.half_width);
    r.number("ratchet_phase", m.walk.ratchet_phase);
    r.number("trunc_eps", m.walk.trunc_eps);
    r.finish();
  }
  if (const auto* s = top.find("se")) {
    ObjectReader r(*s, "se");
    rho_given = r.find("rho") != nullptr;
    r.number("rho", m.se.rho);
    r.number("t_coin", m.se.t_coin);
    r.number("t_on", m.se.t_on);
    r.number("t_se", m.se.t_se);
    r.integer("max_draws", m.se.max_draws);
    std::string mode;
    r.string("mode", mode);
    if (mode == "unconditional") {
      m.se.mode = ProjectionMode::unconditional;
    } else if (mode == "population-weighted") {
      m.se.mode = ProjectionMode::population_weighted;
    } else if (!mode.empty()) {
      throw ConfigError("se.mode", "expected unconditional or population-weighted, got '" + mode + "'");
    }
    r.number("recoil_half_width", m.se.recoil_half_width);
    double p = 0.0;
    if (r.find("power_uW") != nullptr) {
      r.number("power_uW", p);
      power = p;
    }
    r.finish();
  }
  if (const auto* e = top.find("ensemble")) {
    ObjectReader r(*e, "ensemble");
    r.count("n_traj", m.ensemble.n_traj);
    r.number("delta_beta", m.ensemble.delta_beta);
    std::string dist;
    r.string("beta_dist", dist);
    if (dist == "uniform") {
      m.ensemble.beta_dist = BetaDistribution::uniform;
    } else if (dist == "gaussian") {
      m.ensemble.beta_dist = BetaDistribution::gaussian;
    } else if (!dist.empty()) {
      throw ConfigError("ensemble.beta_dist", "expected uniform or gaussian, got '" + dist + "'");
    }
    r.seed("master_seed", m.ensemble.master_seed);
    r.boolean("record_per_step", m.ensemble.record_per_step);
    r.finish();
  }
  if (const auto* c = top.find("calibration")) {
    ObjectReader r(*c, "calibration");
    r.number("gamma", m.calibration.gamma);
    r.number("ref_power_uW", m.calibration.ref_power);
    r.number("ref_rho", m.calibration.ref_rho);
    r.finish();
  }
  if (const auto* f = top.find("fit")) {
    ObjectReader r(*f, "fit");
    r.integer("first_step", m.fit.first_step);
    r.integer("last_step", m.fit.last_step);
    r.finish();
  }
  top.finish();

  if (power) {
    if (rho_given) throw ConfigError("se.power_uW", "give either se.rho or se.power_uW, not both");
    if (!(*power >= 0.0)) throw ConfigError("se.power_uW", "must be >= 0");
    if (!(m.calibration.gamma > 0.0)) throw ConfigError("calibration.gamma", "must be > 0");
    try {
      m.se.rho = m.calibration.rho_at(*power, m.se.t_se);
    } catch (const Error& ex) {
      throw ConfigError("se.power_uW", ex.what());
    }
  }
  m.validate();
  if (m.timestamp.empty()) m.timestamp = utc_timestamp();
  return m;
}

inline RunManifest parse_manifest(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = text.find_first_not_of(" \t\r\n") == std::string::npos ? nlohmann::json::object()
                                                                  : nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    throw ConfigError("<document>", std::string("malformed JSON: ") + ex.what());
  }
  return parse_manifest(doc);
}

inline RunManifest load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

inline std::string manifest_text(const RunManifest& m) { return detail::manifest_json(m).dump(2) + "\n"; }

namespace detail {

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

inline nlohmann::json fit_json(const RateFit& fit) {
  return {{"R", fit.slope},
          {"intercept", fit.intercept},
          {"rss", fit.rss},
          {"first_step", fit.first_step},
          {"last_step", fit.last_step},
          {"points", fit.points}};
}

inline std::optional<RateFit> window_fit(const EnsembleStatistics& stats, const FitWindow& window) {
  auto pts = energy_series(stats, window.first_step, window.last_step);
  if (pts.size() < 3) return std::nullopt;
  return fit_energy_rate(pts);
}

inline nlohmann::json units_json() {
  return {{"momentum", "hbar*G"}, {"energy", "(hbar*G)^2/(2m), sum_n P(n) n^2/2"}};
}

}  // namespace detail

// Distribution table: header "step,n,P"; steps 1..S (step 0 when S = 0).
inline std::string distributions_csv(const EnsembleStatistics& stats) {
  std::string out = "step,n,P\n";
  for (const auto& d : stats.distributions) {
    if (d.step_index == 0 && stats.steps > 0) continue;
    for (std::size_t i = 0; i < d.probabilities.size(); ++i) {
      out += std::to_string(d.step_index);
      out += ',';
      out += std::to_string(static_cast<int>(i) - d.half_width);
      out += ',';
      out += format_number(d.probabilities[i]);
      out += '\n';
    }
  }
  return out;
}

inline nlohmann::json summary_json(const EnsembleStatistics& stats, const FitWindow& window) {
  nlohmann::json steps = nlohmann::json::array();
  for (int s = 0; s <= stats.steps; ++s) {
    const auto i = static_cast<std::size_t>(s);
    steps.push_back({{"step", s},
                     {"mean_momentum", stats.mean_momentum[i]},
                     {"mean_momentum_se", stats.mean_momentum_se[i]},
                     {"mean_energy", stats.mean_energy[i]},
                     {"mean_energy_se", stats.mean_energy_se[i]}});
  }
  nlohmann::json j = {{"units", detail::units_json()},
                      {"n_traj", stats.n_traj},
                      {"steps", steps},
                      {"se_events", {{"sampled", stats.se_events_sampled},
                                     {"accepted", stats.se_events_accepted},
                                     {"degenerate_projections", stats.degenerate_projections}}}};
  if (auto fit = detail::window_fit(stats, window)) j["rate_fit"] = detail::fit_json(*fit);
  return j;
}

struct CommandOptions {
  unsigned threads = 1;
  std::function<void(std::size_t, std::size_t)> progress;
};

inline RunOptions run_options(const CommandOptions& opts) { return RunOptions{opts.threads, opts.progress}; }

/// Writes distributions.csv, summary.json and manifest.json into out_dir.
inline EnsembleStatistics cmd_simulate(const RunManifest& manifest, const std::filesystem::path& out_dir,
                                       const CommandOptions& opts = {}) {
  manifest.validate();
  detail::ensure_directory(out_dir);
  auto stats = run_ensemble(manifest.walk, manifest.se, manifest.ensemble, run_options(opts));
  detail::write_file(out_dir / "distributions.csv", distributions_csv(stats));
  detail::write_file(out_dir / "summary.json", summary_json(stats, manifest.fit).dump(2) + "\n");
  detail::write_file(out_dir / "manifest.json", manifest_text(manifest));
  return stats;
}

enum class SweepAxis { rho, power, k, steps };

inline SweepAxis parse_sweep_axis(const std::string& name) {
  if (name == "rho") return SweepAxis::rho;
  if (name == "power") return SweepAxis::power;
  if (name == "k") return SweepAxis::k;
  if (name == "steps") return SweepAxis::steps;
  throw ConfigError("--axis", "unknown sweep axis '" + name + "' (expected rho, power, k or steps)");
}

inline const char* to_string(SweepAxis a) noexcept {
  switch (a) {
    case SweepAxis::rho: return "rho";
    case SweepAxis::power: return "power";
    case SweepAxis::k: return "k";
    case SweepAxis::steps: return "steps";
  }
  return "?";
}

struct SweepRow {
  double value = 0.0;
  double rho = 0.0;
  double k = 0.0;
  int steps = 0;
  double mean_momentum = 0.0;
  double mean_momentum_se = 0.0;
  double mean_energy = 0.0;
  double mean_energy_se = 0.0;
  std::optional<double> rate;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::rho;
  std::vector<SweepRow> rows;
  std::optional<RateFit> steps_fit;  // energy against step count, steps axis only
};

/// One summary row per value. The steps axis runs the longest walk once and
/// reads each shorter walk off it; the per-step random streams make that
/// identical to separate runs.
inline SweepResult cmd_sweep(const RunManifest& manifest, SweepAxis axis, const std::vector<double>& values,
                             const std::filesystem::path& out_dir, const CommandOptions& opts = {}) {
  if (values.empty()) throw ConfigError("--values", "sweep needs at least one value");
  manifest.validate();
  detail::ensure_directory(out_dir);
  SweepResult result;
  result.axis = axis;

  auto row_from = [&](const RunManifest& m, const EnsembleStatistics& stats, int step, double value, bool with_rate) {
    const auto i = static_cast<std::size_t>(step);
    SweepRow row{value, m.se.rho, m.walk.k, step, stats.mean_momentum[i], stats.mean_momentum_se[i],
                 stats.mean_energy[i], stats.mean_energy_se[i], std::nullopt};
    if (with_rate)
      if (auto fit = detail::window_fit(stats, m.fit)) row.rate = fit->slope;
    return row;
  };

  if (axis == SweepAxis::steps) {
    int max_steps = 0;
    for (double v : values) {
      if (!(v >= 0.0) || v != std::floor(v)) throw ConfigError("--values", "step counts must be non-negative integers");
      max_steps = std::max(max_steps, static_cast<int>(v));
    }
    RunManifest m = manifest;
    m.walk.steps = max_steps;
    auto stats = run_ensemble(m.walk, m.se, m.ensemble, run_options(opts));
    std::vector<EnergyPoint> pts;
    for (double v : values) {
      result.rows.push_back(row_from(m, stats, static_cast<int>(v), v, false));
      pts.push_back({v, result.rows.back().mean_energy});
    }
    if (pts.size() >= 3) result.steps_fit = fit_energy_rate(pts);
  } else {
    for (double v : values) {
      RunManifest m = manifest;
      switch (axis) {
        case SweepAxis::rho: m.se.rho = v; break;
        case SweepAxis::power:
          try {
            m.se.rho = m.calibration.rho_at(v, m.se.t_se);
          } catch (const Error& ex) {
            throw ConfigError("--values", "power " + format_number(v) + ": " + ex.what());
          }
          break;
        case SweepAxis::k: m.walk.k = v; break;
        case SweepAxis::steps: break;
      }
      m.validate();
      auto stats = run_ensemble(m.walk, m.se, m.ensemble, run_options(opts));
      result.rows.push_back(row_from(m, stats, m.walk.steps, v, true));
    }
  }

  std::string csv = "axis,value,rho,k,steps,mean_momentum,mean_momentum_se,mean_energy,mean_energy_se,R\n";
  for (const auto& r : result.rows) {
    csv += std::string(to_string(axis)) + "," + format_number(r.value) + "," + format_number(r.rho) + "," +
           format_number(r.k) + "," + std::to_string(r.steps) + "," + format_number(r.mean_momentum) + "," +
           format_number(r.mean_momentum_se) + "," + format_number(r.mean_energy) + "," +
           format_number(r.mean_energy_se) + "," + (r.rate ? format_number(*r.rate) : std::string()) + "\n";
  }
  nlohmann::json summary = {{"units", detail::units_json()}, {"axis", to_string(axis)}, {"values", values}};
  if (result.steps_fit) summary["rate_fit"] = detail::fit_json(*result.steps_fit);
  detail::write_file(out_dir / "sweep.csv", csv);
  detail::write_file(out_dir / "sweep_summary.json", summary.dump(2) + "\n");
  detail::write_file(out_dir / "manifest.json", manifest_text(manifest));
  return result;
}

struct CompareResult {
  EnsembleStatistics quantum;
  EnsembleStatistics classical;
  TransitionReport report;
};

/// Quantum walk at the configured rho next to the classical baseline.
inline CompareResult cmd_compare(const RunManifest& manifest, const std::filesystem::path& out_dir,
                                 const CommandOptions& opts = {}) {
  manifest.validate();
  detail::ensure_directory(out_dir);
  CompareResult r;
  r.quantum = run_ensemble(manifest.walk, manifest.se, manifest.ensemble, run_options(opts));
  r.classical = run_classical_baseline(manifest.walk, manifest.ensemble, run_options(opts));
  r.report = transition_metrics(r.quantum, r.classical);

  std::string csv =
      "step,qw_mean_momentum,qw_mean_energy,qw_mean_energy_se,cw_mean_momentum,cw_mean_energy,cw_mean_energy_se,"
      "energy_gap,energy_gap_se,tv_distance\n";
  nlohmann::json steps = nlohmann::json::array();
  for (int s = 0; s <= manifest.walk.steps; ++s) {
    const auto i = static_cast<std::size_t>(s);
    std::string tv;
    std::optional<double> tv_value;
    if (manifest.ensemble.record_per_step && i < r.report.tv_distance.size()) tv_value = r.report.tv_distance[i];
    else if (s == manifest.walk.steps && !r.report.tv_distance.empty()) tv_value = r.report.tv_distance.back();
    if (tv_value) tv = format_number(*tv_value);
    csv += std::to_string(s) + "," + format_number(r.quantum.mean_momentum[i]) + "," +
           format_number(r.quantum.mean_energy[i]) + "," + format_number(r.quantum.mean_energy_se[i]) + "," +
           format_number(r.classical.mean_momentum[i]) + "," + format_number(r.classical.mean_energy[i]) + "," +
           format_number(r.classical.mean_energy_se[i]) + "," + format_number(r.report.energy_gap[i]) + "," +
           format_number(r.report.energy_gap_se[i]) + "," + tv + "\n";
    nlohmann::json entry = {{"step", s}, {"energy_gap", r.report.energy_gap[i]}, {"energy_gap_se", r.report.energy_gap_se[i]}};
    if (tv_value) entry["tv_distance"] = *tv_value;
    steps.push_back(entry);
  }
  nlohmann::json report = {{"units", detail::units_json()}, {"rho", manifest.se.rho}, {"steps", steps}};
  if (auto fq = detail::window_fit(r.quantum, manifest.fit)) report["quantum_rate_fit"] = detail::fit_json(*fq);
  if (auto fc = detail::window_fit(r.classical, manifest.fit)) report["classical_rate_fit"] = detail::fit_json(*fc);
  detail::write_file(out_dir / "compare.csv", csv);
  detail::write_file(out_dir / "compare_report.json", report.dump(2) + "\n");
  detail::write_file(out_dir / "manifest.json", manifest_text(manifest));
  return r;
}

struct CalibrationPoint {
  double power = 0.0;
  std::optional<double> rho;  // empty where the model breaks down (rho > 1)
};

/// Fixes the power scale from the reference point and tabulates rho(power).
inline std::vector<CalibrationPoint> cmd_calibrate(const RunManifest& manifest, const std::vector<double>& powers,
                                                   const std::filesystem::path& out_dir) {
  manifest.validate();
  detail::ensure_directory(out_dir);
  const double t_se_s = manifest.se.t_se * 1e-6;
  const double scale = manifest.calibration.power_scale(manifest.se.t_se);
  std::vector<CalibrationPoint> table;
  nlohmann::json rows = nlohmann::json::array();
  std::string csv = "power_uW,rho\n";
  for (double p : powers) {
    CalibrationPoint pt{p, std::nullopt};
    try {
      pt.rho = power_to_rho(p, scale, manifest.calibration.gamma, t_se_s);
    } catch (const ModelValidity&) {
    } catch (const DomainError& ex) {
      throw ConfigError("--powers", ex.what());
    }
    table.push_back(pt);
    rows.push_back({{"power_uW", p}, {"rho", pt.rho ? nlohmann::json(*pt.rho) : nlohmann::json(nullptr)}});
    csv += format_number(p) + "," + (pt.rho ? format_number(*pt.rho) : std::string()) + "\n";
  }
  nlohmann::json out = {{"gamma", manifest.calibration.gamma},
                        {"t_se_us", manifest.se.t_se},
                        {"ref_power_uW", manifest.calibration.ref_power},
                        {"ref_rho", manifest.calibration.ref_rho},
                        {"power_scale_uW", scale},
                        {"rho_ceiling", manifest.calibration.gamma * t_se_s / 2.0},
                        {"table", rows}};
  detail::write_file(out_dir / "calibration.json", out.dump(2) + "\n");
  detail::write_file(out_dir / "calibration.csv", csv);
  detail::write_file(out_dir / "manifest.json", manifest_text(manifest));
  return table;
}

}  // namespace qwalk
