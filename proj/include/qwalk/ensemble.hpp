#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "qwalk/decoherence.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/observables.hpp"
#include "qwalk/random.hpp"
#include "qwalk/spinor.hpp"
#include "qwalk/walk.hpp"

namespace qwalk {

// Stream index reserved for per-trajectory draws made before step 1.
inline constexpr std::uint64_t initial_stream = 0;

/// One walk step: coin (interrupted when emission events are given), free
/// evolution, kick, and the uncompensated |2> phase. Step 1 uses
/// coin_chi_first, later steps coin_chi_rest.
inline InterruptedCoinResult walk_step(SpinorState& state, const WalkConfig& cfg, int step_index, KickPropagator& kick,
                                       const std::vector<SEEvent>* events = nullptr, const SEConfig* se = nullptr,
                                       RandomStream* rng = nullptr) {
  if (step_index < 1) throw Error("step_index must be >= 1");
  InterruptedCoinResult coin;
  const double chi = cfg.coin_chi(step_index);
  if (events != nullptr && !events->empty()) {
    if (se == nullptr || rng == nullptr) throw Error("interrupted coin needs an SE config and a random stream");
    coin = apply_interrupted_coin(state, *events, cfg.coin_alpha, chi, *se, *rng);
  } else {
    apply_coin(state, cfg.coin_alpha, chi);
  }
  apply_free_evolution(state, cfg.tau);
  kick.apply(state, cfg.compensated ? 0.0 : cfg.global_phase());
  check_edge_leakage(state, cfg.trunc_eps);
  return coin;
}

inline InterruptedCoinResult walk_step(SpinorState& state, const WalkConfig& cfg, int step_index) {
  KickPropagator kick(state.half_width(), cfg.angle_grid_size, cfg.k);
  return walk_step(state, cfg, step_index, kick);
}

enum class BetaDistribution { uniform, gaussian };

inline const char* to_string(BetaDistribution d) noexcept { return d == BetaDistribution::uniform ? "uniform" : "gaussian"; }

struct EnsembleConfig {
  std::size_t n_traj = 1000;
  double delta_beta = 0.025;  // full width: uniform support, or Gaussian FWHM
  BetaDistribution beta_dist = BetaDistribution::uniform;
  std::uint64_t master_seed = 20230717;
  bool record_per_step = true;

  void validate() const {
    if (n_traj < 1) throw ConfigError("n_traj", "must be >= 1");
    if (!(delta_beta >= 0.0)) throw ConfigError("delta_beta", "must be >= 0");
  }
};

// Centered on 0, wrapped into [0, 1).
inline double draw_initial_beta(const EnsembleConfig& ens, RandomStream& rng) {
  if (ens.delta_beta == 0.0) return 0.0;
  double beta = 0.0;
  if (ens.beta_dist == BetaDistribution::uniform) {
    beta = rng.uniform(-0.5 * ens.delta_beta, 0.5 * ens.delta_beta);
  } else {
    const double sigma = ens.delta_beta / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    beta = rng.normal(0.0, sigma);
  }
  return wrap_quasimomentum(beta);
}

enum class WalkKind {
  quantum,
  classical,  // spin measured in the {|1>,|2>} basis after every coin
};

// Born-rule projective measurement of the spin.
inline Spin measure_spin(SpinorState& state, RandomStream& rng) {
  const double p2 = population(state, Spin::two);
  const Spin outcome = rng.uniform() < p2 ? Spin::two : Spin::one;
  const Spin other = outcome == Spin::two ? Spin::one : Spin::two;
  for (auto& a : state.component(other)) a = complex{};
  state.normalize();
  return outcome;
}

struct StepEvents {
  int step = 0;
  std::vector<SEEvent> events;
  bool degenerate = false;
};

struct TrajectoryResult {
  std::vector<MomentumDistribution> per_step;  // steps 0..S when record_per_step
  MomentumDistribution final_distribution;
  std::vector<StepEvents> se_log;             // steps with at least one sampled event
  double initial_beta = 0.0;
  double final_beta = 0.0;
};

namespace detail {

template <typename Visit>
double run_walk(const WalkConfig& walk, const SEConfig& se, const EnsembleConfig& ens, std::uint64_t trajectory,
                KickPropagator& kick, WalkKind kind, std::vector<StepEvents>* log, Visit&& visit) {
  RandomStream init(ens.master_seed, trajectory, initial_stream);
  const double beta0 = draw_initial_beta(ens, init);
  SpinorState state = new_ratchet_state(walk.half_width, walk.ratchet_phase, beta0);
  visit(0, state);
  for (int step = 1; step <= walk.steps; ++step) {
    RandomStream rng(ens.master_seed, trajectory, static_cast<std::uint64_t>(step));
    if (kind == WalkKind::quantum) {
      auto events = sample_se_events(se.rho, se, rng);
      auto coin = walk_step(state, walk, step, kick, &events, &se, &rng);
      if (log != nullptr && !coin.events.empty()) log->push_back({step, std::move(coin.events), coin.degenerate});
    } else {
      apply_coin(state, walk.coin_alpha, walk.coin_chi(step));
      measure_spin(state, rng);
      apply_free_evolution(state, walk.tau);
      kick.apply(state, walk.compensated ? 0.0 : walk.global_phase());
      check_edge_leakage(state, walk.trunc_eps);
    }
    visit(step, state);
  }
  return beta0;
}

}  // namespace detail

/// A single stochastic realization; trajectory index selects the random stream.
inline TrajectoryResult run_trajectory(const WalkConfig& walk, const SEConfig& se, const EnsembleConfig& ens,
                                       std::uint64_t trajectory, KickPropagator& kick,
                                       WalkKind kind = WalkKind::quantum) {
  TrajectoryResult result;
  double beta_end = 0.0;
  result.initial_beta =
      detail::run_walk(walk, se, ens, trajectory, kick, kind, &result.se_log, [&](int step, const SpinorState& s) {
        if (ens.record_per_step) result.per_step.push_back(momentum_distribution(s, step));
        if (step == walk.steps) {
          result.final_distribution = momentum_distribution(s, step);
          beta_end = s.beta();
        }
      });
  result.final_beta = beta_end;
  return result;
}

inline TrajectoryResult run_trajectory(const WalkConfig& walk, const SEConfig& se, const EnsembleConfig& ens,
                                       std::uint64_t trajectory, WalkKind kind = WalkKind::quantum) {
  KickPropagator kick(walk.half_width, walk.angle_grid_size, walk.k);
  return run_trajectory(walk, se, ens, trajectory, kick, kind);
}

struct EnsembleStatistics {
  int steps = 0;
  int half_width = 0;
  std::size_t n_traj = 0;
  // Averaged P(n) for steps 0..S (only the final step unless record_per_step).
  std::vector<MomentumDistribution> distributions;
  std::vector<double> mean_momentum;  // per step 0..S, hbar*G
  std::vector<double> mean_momentum_se;
  std::vector<double> mean_energy;  // per step 0..S, (hbar*G)^2/2m
  std::vector<double> mean_energy_se;
  std::size_t se_events_sampled = 0;
  std::size_t se_events_accepted = 0;
  std::size_t degenerate_projections = 0;

  const MomentumDistribution& final_distribution() const { return distributions.back(); }

  bool operator==(const EnsembleStatistics&) const = default;
};

struct RunOptions {
  unsigned threads = 1;  // 0 = hardware concurrency; never changes results
  std::function<void(std::size_t done, std::size_t total)> progress;
  std::size_t block_size = 32;  // trajectories per reduction block
};

namespace detail {

struct Accumulator {
  std::vector<double> dist;  // (S+1) x (2N+1)
  std::vector<double> m_sum, m_sq, e_sum, e_sq;
  std::size_t sampled = 0, accepted = 0, degenerate = 0;

  Accumulator(int steps, std::size_t width)
      : dist(static_cast<std::size_t>(steps + 1) * width, 0.0),
        m_sum(static_cast<std::size_t>(steps + 1), 0.0),
        m_sq(m_sum.size(), 0.0),
        e_sum(m_sum.size(), 0.0),
        e_sq(m_sum.size(), 0.0) {}

  void merge(const Accumulator& o) {
    for (std::size_t i = 0; i < dist.size(); ++i) dist[i] += o.dist[i];
    for (std::size_t i = 0; i < m_sum.size(); ++i) {
      m_sum[i] += o.m_sum[i];
      m_sq[i] += o.m_sq[i];
      e_sum[i] += o.e_sum[i];
      e_sq[i] += o.e_sq[i];
    }
    sampled += o.sampled;
    accepted += o.accepted;
    degenerate += o.degenerate;
  }
};

inline double standard_error(double sum, double sq, std::size_t n) {
  if (n < 2) return 0.0;
  const double dn = static_cast<double>(n);
  const double var = std::max(0.0, (sq - sum * sum / dn) / (dn - 1.0));
  return std::sqrt(var / dn);
}

inline EnsembleStatistics run_ensemble_impl(const WalkConfig& walk, const SEConfig& se, const EnsembleConfig& ens,
                                            WalkKind kind, const RunOptions& opts) {
  walk.validate();
  se.validate();
  ens.validate();
  const std::size_t width = static_cast<std::size_t>(2 * walk.half_width + 1);
  const std::size_t block = std::max<std::size_t>(1, opts.block_size);
  const std::size_t n_blocks = (ens.n_traj + block - 1) / block;

  std::vector<Accumulator> partial(n_blocks, Accumulator(walk.steps, width));
  std::vector<std::exception_ptr> failures(n_blocks);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  auto worker = [&] {
    KickPropagator kick(walk.half_width, walk.angle_grid_size, walk.k);
    std::vector<StepEvents> log;
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= n_blocks || abort.load()) return;
      Accumulator& acc = partial[b];
      const std::size_t first = b * block;
      const std::size_t last = std::min(ens.n_traj, first + block);
      std::uint64_t t = first;
      try {
        for (; t < last; ++t) {
          log.clear();
          run_walk(walk, se, ens, t, kick, kind, &log, [&](int step, const SpinorState& s) {
            const auto st = static_cast<std::size_t>(step);
            auto a1 = s.component(Spin::one);
            auto a2 = s.component(Spin::two);
            double m = 0.0, e = 0.0;
            double* row = acc.dist.data() + st * width;
            for (std::size_t i = 0; i < width; ++i) {
              const double p = std::norm(a1[i]) + std::norm(a2[i]);
              const double n = static_cast<double>(i) - walk.half_width;
              row[i] += p;
              m += p * n;
              e += 0.5 * p * n * n;
            }
            acc.m_sum[st] += m;
            acc.m_sq[st] += m * m;
            acc.e_sum[st] += e;
            acc.e_sq[st] += e * e;
          });
          for (const auto& entry : log) {
            acc.sampled += entry.events.size();
            acc.degenerate += entry.degenerate ? 1 : 0;
            for (const auto& ev : entry.events) acc.accepted += ev.accepted ? 1 : 0;
          }
        }
      } catch (const GridTooSmall& ex) {
        failures[b] = std::make_exception_ptr(GridTooSmall("trajectory " + std::to_string(t) + ": " + ex.what()));
        abort = true;
        return;
      } catch (...) {
        failures[b] = std::current_exception();
        abort = true;
        return;
      }
      const std::size_t finished = done.fetch_add(last - first) + (last - first);
      if (opts.progress) {
        std::lock_guard lock(progress_mutex);
        opts.progress(finished, ens.n_traj);
      }
    }
  };

  unsigned threads = opts.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opts.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_blocks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  // Fixed-order reduction keeps results independent of the thread count.
  Accumulator total(walk.steps, width);
  for (const auto& p : partial) total.merge(p);

  EnsembleStatistics stats;
  stats.steps = walk.steps;
  stats.half_width = walk.half_width;
  stats.n_traj = ens.n_traj;
  stats.se_events_sampled = total.sampled;
  stats.se_events_accepted = total.accepted;
  stats.degenerate_projections = total.degenerate;
  for (int step = 0; step <= walk.steps; ++step) {
    const auto st = static_cast<std::size_t>(step);
    MomentumDistribution d;
    d.half_width = walk.half_width;
    d.step_index = step;
    d.probabilities.assign(total.dist.begin() + static_cast<std::ptrdiff_t>(st * width),
                           total.dist.begin() + static_cast<std::ptrdiff_t>((st + 1) * width));
    double sum = 0.0;
    for (double p : d.probabilities) sum += p;
    for (double& p : d.probabilities) p /= sum;
    stats.mean_momentum.push_back(mean_momentum(d));
    stats.mean_energy.push_back(mean_energy(d));
    stats.mean_momentum_se.push_back(standard_error(total.m_sum[st], total.m_sq[st], ens.n_traj));
    stats.mean_energy_se.push_back(standard_error(total.e_sum[st], total.e_sq[st], ens.n_traj));
    if (ens.record_per_step || step == walk.steps) stats.distributions.push_back(std::move(d));
  }
  return stats;
}

}  // namespace detail

/// Monte Carlo over trajectories and the initial quasimomentum spread. A pure
/// function of the configs and master seed.
inline EnsembleStatistics run_ensemble(const WalkConfig& walk, const SEConfig& se, const EnsembleConfig& ens,
                                       const RunOptions& opts = {}) {
  return detail::run_ensemble_impl(walk, se, ens, WalkKind::quantum, opts);
}

/// Same walk with the spin measured after every coin and no emission channel.
inline EnsembleStatistics run_classical_baseline(const WalkConfig& walk, const EnsembleConfig& ens,
                                                 const RunOptions& opts = {}) {
  return detail::run_ensemble_impl(walk, SEConfig{}, ens, WalkKind::classical, opts);
}

// Per-step (step, mean energy) points over [first, last], clipped to what the run holds.
inline std::vector<EnergyPoint> energy_series(const EnsembleStatistics& stats, int first, int last) {
  std::vector<EnergyPoint> pts;
  for (int s = std::max(first, 0); s <= std::min(last, stats.steps); ++s)
    pts.push_back({static_cast<double>(s), stats.mean_energy[static_cast<std::size_t>(s)]});
  return pts;
}

}  // namespace qwalk
