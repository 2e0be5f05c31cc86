// Acceptance checks. One PASS/FAIL line per criterion, informational lines
// prefixed with "info". Exit status is nonzero when any criterion fails.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qwalk/qwalk.hpp"

using namespace qwalk;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(const std::string& id, bool ok, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", id.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

RunOptions all_cores() {
  RunOptions o;
  o.threads = 0;
  return o;
}

EnsembleStatistics walk(double k, int steps, double rho) {
  WalkConfig w;
  w.k = k;
  w.steps = steps;
  SEConfig se;
  se.rho = rho;
  return run_ensemble(w, se, EnsembleConfig{}, all_cores());
}

// k = 1.4, steps 1-8, 1000 trajectories, delta_beta 0.025
void rate_table() {
  const double rhos[] = {0.0, 0.24, 0.35, 0.54};
  const double target[] = {0.84, 0.68, 0.64, 0.58};
  const auto t0 = std::chrono::steady_clock::now();
  double rate[4];
  for (int i = 0; i < 4; ++i) {
    auto stats = walk(1.4, 8, rhos[i]);
    rate[i] = fit_energy_rate(energy_series(stats, 1, 8)).slope;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  bool ordered = rate[0] > rate[1] && rate[1] > rate[2] && rate[2] > rate[3];
  bool close = true;
  std::string detail;
  for (int i = 0; i < 4; ++i) {
    close = close && std::abs(rate[i] - target[i]) <= 0.15;
    detail += "R(" + format_number(rhos[i]) + ")=" + fmt("%.3f", rate[i]) + " [" + fmt("%.2f", target[i]) + "] ";
  }
  report("1 rate table ordering", ordered, detail);
  report("1 rate table within 0.15", close, detail);
  report("1 runtime < 60 s", secs < 60.0, fmt("%.2f s", secs));
}

// 5-step walks: asymmetry grows with rho; rho = 0 |<n>| < 0.2
void asymmetry() {
  double worst_mean = 0.0;
  for (double k : {1.45, 2.0}) {
    std::vector<EnsembleStatistics> runs;
    for (double rho : {0.0, 0.35, 0.8}) runs.push_back(walk(k, 5, rho));
    const auto m = [&](int i) { return runs[static_cast<std::size_t>(i)].mean_momentum.back(); };
    const auto se = [&](int i) { return runs[static_cast<std::size_t>(i)].mean_momentum_se.back(); };
    const double sep = (m(2) - m(0)) / std::hypot(se(0), se(2));
    const bool ok = m(0) < m(1) && m(1) < m(2) && sep >= 3.0;
    std::string detail = "k=" + format_number(k) + " <n>=" + fmt("%.4f", m(0)) + ", " + fmt("%.4f", m(1)) + ", " +
                         fmt("%.4f", m(2)) + " (rho 0, 0.35, 0.8), extremes " + fmt("%.1f", sep) + " SE apart";
    report("2 asymmetry increasing k=" + format_number(k), ok, detail);
    worst_mean = std::max(worst_mean, std::abs(m(0)));
  }
  report("2 rho=0 |<n>| < 0.2", worst_mean < 0.2,
         "max |<n>| = " + fmt("%.4f", worst_mean) + "; the ratchet starts at <n> = 1/2 and the coherent walk keeps it");
}

// QW minus classical energy gap at k = 2.0
void transition() {
  const double rhos[] = {0.0, 0.35, 0.8};
  WalkConfig w;
  w.k = 2.0;
  w.steps = 8;
  EnsembleConfig ens;
  auto classical = run_classical_baseline(w, ens, all_cores());
  std::vector<TransitionReport> reports;
  for (double rho : rhos) {
    SEConfig se;
    se.rho = rho;
    reports.push_back(transition_metrics(run_ensemble(w, se, ens, all_cores()), classical));
  }
  bool positive = true, shrinking = true;
  std::string gaps;
  for (int s = 4; s <= 8; ++s) {
    const auto i = static_cast<std::size_t>(s);
    positive = positive && reports[0].energy_gap[i] > 0.0;
    for (std::size_t r = 1; r < reports.size(); ++r) {
      const double tol = 2.0 * std::hypot(reports[r].energy_gap_se[i], reports[r - 1].energy_gap_se[i]);
      shrinking = shrinking && reports[r].energy_gap[i] <= reports[r - 1].energy_gap[i] + tol;
    }
    gaps += "s" + std::to_string(s) + ":" + fmt("%.2f", reports[0].energy_gap[i]) + "/" +
            fmt("%.2f", reports[1].energy_gap[i]) + "/" + fmt("%.2f", reports[2].energy_gap[i]) + " ";
  }
  report("3 gap positive steps 4-8 (k=2)", positive, gaps + "(rho 0/0.35/0.8)");
  report("3 gap shrinks with rho (k=2)", shrinking, gaps);

  for (double k : {1.4, 1.45}) {
    WalkConfig wk;
    wk.k = k;
    wk.steps = 8;
    auto r = transition_metrics(run_ensemble(wk, SEConfig{}, ens, all_cores()),
                                run_classical_baseline(wk, ens, all_cores()));
    std::string line;
    for (int s = 4; s <= 8; ++s)
      line += "s" + std::to_string(s) + ":" + fmt("%.3f", r.energy_gap[static_cast<std::size_t>(s)]) + "+-" +
              fmt("%.3f", r.energy_gap_se[static_cast<std::size_t>(s)]) + " ";
    std::printf("info 3 rho=0 gap at k=%s: %s\n", format_number(k).c_str(), line.c_str());
  }
}

void unitarity() {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    WalkConfig w;
    w.k = 0.5 + 1.5 * u(gen);
    w.compensated = u(gen) < 0.5;
    w.ratchet_phase = 2 * pi * u(gen);
    auto s = new_ratchet_state(w.half_width, w.ratchet_phase, 0.05 * u(gen));
    KickPropagator kick(w.half_width, w.angle_grid_size, w.k);
    for (int step = 1; step <= 10; ++step) walk_step(s, w, step, kick);
    worst = std::max(worst, std::abs(s.norm() - 1.0));
  }
  report("4 norm drift < 1e-8 (100 configs, 10 steps)", worst < 1e-8, fmt("max drift %.3g", worst));

  double col = 0.0;
  for (double k : {0.5, 1.4, 1.45, 2.0, 3.0}) {
    double sum = 0.0;
    for (int dn = -80; dn <= 80; ++dn) sum += std::norm(kick_kernel(dn, k));
    col = std::max(col, std::abs(sum - 1.0));
  }
  report("4 Bessel column norm within 1e-10", col < 1e-10, fmt("max |sum J^2 - 1| = %.3g", col));

  std::normal_distribution<double> g(0.0, 1.0);
  double diff = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    SpinorState a(24, u(gen));
    for (auto& x : a.amplitudes()) x = complex(g(gen), g(gen));
    a.normalize();
    auto b = a;
    const double k = 0.5 + 2.0 * u(gen);
    const double phase = 2 * pi * u(gen);
    KickPropagator prop(24, 128, k);
    prop.apply(a, phase);
    apply_kick_convolution(b, k, phase);
    for (std::size_t i = 0; i < a.amplitudes().size(); ++i)
      diff = std::max(diff, std::abs(a.amplitudes()[i] - b.amplitudes()[i]));
  }
  report("4 angle-grid vs convolution within 1e-10", diff < 1e-10, fmt("max |diff| = %.3g", diff));
}

void oracles() {
  const double gamma = rb87_d2_linewidth;
  const bool rate_ok = effective_se_rate(1.0, gamma) == gamma / 4 &&
                       effective_se_rate(std::numeric_limits<double>::infinity(), gamma) == gamma / 2 &&
                       std::abs(effective_se_rate(1e15, gamma) - gamma / 2) < gamma * 1e-12;
  report("5 effective rate s=1 -> gamma/4, saturation -> gamma/2", rate_ok,
         fmt("gamma_eff(1)/gamma = %.17g", effective_se_rate(1.0, gamma) / gamma));

  SEConfig cfg;
  const double rho = 0.35;
  const int draws = 100000;
  int hit = 0;
  for (int i = 0; i < draws; ++i) {
    RandomStream rng(99, static_cast<std::uint64_t>(i), 1);
    hit += sample_se_events(rho, cfg, rng).empty() ? 0 : 1;
  }
  const double frac = static_cast<double>(hit) / draws;
  const double expect = 1.0 - std::exp(-rho);
  report("5 SE event fraction vs 1-exp(-rho) within 0.005", std::abs(frac - expect) <= 0.005,
         fmt("%.5f", frac) + " vs " + fmt("%.5f", expect));

  SpinorState s(4);
  s.at(Spin::one, 0) = 1.0;
  SEConfig uncond;
  uncond.mode = ProjectionMode::unconditional;
  RandomStream rng(0, 0, 0);
  apply_interrupted_coin(s, {{0.29, 0.0, false}}, pi / 2, pi, uncond, rng);
  const double direct = std::pow(std::cos(pi * 0.71 / 4), 2);
  const double err = std::abs(population(s, Spin::two) - direct);
  report("5 population after event at 0.29T within 1e-12", err < 1e-12,
         fmt("%.15f", population(s, Spin::two)) + " vs cos^2(0.1775 pi) = " + fmt("%.15f", direct));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void determinism() {
  const fs::path root = fs::temp_directory_path() / ("qwalk_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  auto m = parse_manifest(std::string(R"({"se": {"rho": 0.35}, "walk": {"steps": 6}})"));
  bool same = true;
  std::string detail;
  for (unsigned threads : {1u, 3u, 8u}) {
    CommandOptions opts;
    opts.threads = threads;
    const auto dir = root / std::to_string(threads);
    cmd_simulate(m, dir / "sim", opts);
    cmd_compare(m, dir / "cmp", opts);
    // rerun from the written manifest
    cmd_simulate(load_config(dir / "sim" / "manifest.json"), dir / "re", opts);
  }
  for (const char* f : {"sim/distributions.csv", "sim/summary.json", "sim/manifest.json", "cmp/compare.csv",
                        "cmp/compare_report.json"}) {
    const auto ref = slurp(root / "1" / f);
    for (const char* t : {"3", "8"}) same = same && slurp(root / t / f) == ref;
    same = same && !ref.empty();
  }
  for (const char* f : {"distributions.csv", "summary.json", "manifest.json"})
    same = same && slurp(root / "1" / "re" / f) == slurp(root / "1" / "sim" / f);
  detail = "simulate + compare at 1, 3, 8 threads and a manifest rerun";
  report("6 byte-identical outputs across --threads", same, detail);
  fs::remove_all(root);
}

}  // namespace

int main() {
  std::printf("acceptance: %u hardware threads\n", std::thread::hardware_concurrency());
  try {
    rate_table();
    asymmetry();
    transition();
    unitarity();
    oracles();
    determinism();
  } catch (const std::exception& e) {
    std::printf("FAIL aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%d failing\n", failures);
  return failures == 0 ? 0 : 1;
}
