// qwalk: command-line front end for the spinor kicked-rotor walk simulator.
//
//   qwalk simulate  --config run.json --out out/
//   qwalk sweep     --axis rho --values 0,0.2,0.35 --out sweep/
//   qwalk compare   --config run.json --out cmp/
//   qwalk calibrate --powers 0,3,7.2
//
// Exit codes: 0 ok, 2 configuration or usage error, 3 runtime failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qwalk/qwalk.hpp"

namespace {

constexpr int exit_config = 2;
constexpr int exit_runtime = 3;

struct Common {
  std::string config;
  std::string out = "qwalk_out";
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  bool progress = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "JSON run configuration (defaults when omitted)")->check(CLI::ExistingFile);
    app->add_option("--out", out, "output directory")->envname("QWALK_OUT_DIR");
    app->add_option("--seed", seed, "master seed, overrides ensemble.master_seed");
    app->add_option("--threads", threads, "worker threads, 0 = all cores; results do not depend on it")
        ->envname("QWALK_THREADS");
    app->add_flag("--progress", progress, "report trajectory progress on stderr");
  }

  qwalk::RunManifest manifest() const {
    qwalk::RunManifest m = config.empty() ? qwalk::parse_manifest(std::string("{}")) : qwalk::load_config(config);
    if (seed) m.ensemble.master_seed = *seed;
    return m;
  }

  qwalk::CommandOptions options() const {
    qwalk::CommandOptions opts;
    opts.threads = threads;
    if (progress)
      opts.progress = [](std::size_t done, std::size_t total) {
        std::fprintf(stderr, "\r%zu/%zu trajectories", done, total);
        if (done == total) std::fputc('\n', stderr);
      };
    return opts;
  }
};

void print_summary(const qwalk::EnsembleStatistics& stats) {
  std::printf("%-5s %12s %10s %12s %10s\n", "step", "<n>", "se", "energy", "se");
  for (int s = 0; s <= stats.steps; ++s) {
    const auto i = static_cast<std::size_t>(s);
    std::printf("%-5d %12.6f %10.6f %12.6f %10.6f\n", s, stats.mean_momentum[i], stats.mean_momentum_se[i],
                stats.mean_energy[i], stats.mean_energy_se[i]);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo wavefunction simulator for a spinor kicked-rotor quantum walk with spontaneous emission"};
  app.set_version_flag("--version", qwalk::tool_version);
  app.require_subcommand(1);

  Common sim_opts, sweep_opts, cmp_opts, cal_opts;
  auto* sim = app.add_subcommand("simulate", "run one ensemble; writes distributions.csv, summary.json");
  sim_opts.attach(sim);

  auto* sweep = app.add_subcommand("sweep", "scan one parameter; writes sweep.csv, sweep_summary.json");
  sweep_opts.attach(sweep);
  std::string axis;
  std::vector<double> values;
  sweep->add_option("--axis", axis, "rho | power | k | steps")->required();
  sweep->add_option("--values", values, "comma-separated values (power in uW)")->required()->delimiter(',');

  auto* cmp = app.add_subcommand("compare", "quantum walk against the measured-spin baseline");
  cmp_opts.attach(cmp);

  auto* cal = app.add_subcommand("calibrate", "tabulate rho against SE beam power");
  cal_opts.attach(cal);
  std::vector<double> powers{0, 1, 2, 3, 4, 5, 6, 7, 7.2};
  cal->add_option("--powers", powers, "powers in uW")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_config;
  }

  try {
    if (*sim) {
      auto m = sim_opts.manifest();
      auto stats = qwalk::cmd_simulate(m, sim_opts.out, sim_opts.options());
      print_summary(stats);
    } else if (*sweep) {
      auto m = sweep_opts.manifest();
      auto result = qwalk::cmd_sweep(m, qwalk::parse_sweep_axis(axis), values, sweep_opts.out, sweep_opts.options());
      std::printf("%-10s %12s %10s %12s %10s\n", axis.c_str(), "<n>", "se", "energy", "R");
      for (const auto& r : result.rows)
        std::printf("%-10g %12.6f %10.6f %12.6f %10s\n", r.value, r.mean_momentum, r.mean_momentum_se, r.mean_energy,
                    r.rate ? qwalk::format_number(*r.rate).c_str() : "-");
      if (result.steps_fit) std::printf("R = %.6f over %zu step counts\n", result.steps_fit->slope, result.steps_fit->points);
    } else if (*cmp) {
      auto m = cmp_opts.manifest();
      auto r = qwalk::cmd_compare(m, cmp_opts.out, cmp_opts.options());
      std::printf("%-5s %12s %10s\n", "step", "gap", "se");
      for (std::size_t i = 0; i < r.report.energy_gap.size(); ++i)
        std::printf("%-5zu %12.6f %10.6f\n", i, r.report.energy_gap[i], r.report.energy_gap_se[i]);
    } else if (*cal) {
      auto m = cal_opts.manifest();
      auto table = qwalk::cmd_calibrate(m, powers, cal_opts.out);
      std::printf("power scale %.6g uW\n", m.calibration.power_scale(m.se.t_se));
      for (const auto& p : table)
        std::printf("%8.3f uW  rho = %s\n", p.power, p.rho ? qwalk::format_number(*p.rho).c_str() : "out of model");
    }
  } catch (const qwalk::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const qwalk::ModelValidity& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const qwalk::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_runtime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_runtime;
  }
  return 0;
}
