#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "qwalk/errors.hpp"
#include "qwalk/random.hpp"
#include "qwalk/spinor.hpp"
#include "qwalk/walk.hpp"

namespace qwalk {

// Natural linewidth of the 87Rb D2 line, 2*pi * 6.0666 MHz.
inline constexpr double rb87_d2_linewidth = 2.0 * std::numbers::pi * 6.0666e6;

enum class ProjectionMode {
  unconditional,  // every sampled event projects onto |2>
  population_weighted,  // an event projects with probability = |2> population at that instant
};

inline const char* to_string(ProjectionMode mode) noexcept {
  return mode == ProjectionMode::unconditional ? "unconditional" : "population-weighted";
}

struct SEConfig {
  double rho = 0.0;        // mean number of emission events per SE pulse
  double t_coin = 103.4;   // coin pulse length T, us
  double t_on = 30.0;      // SE light onset after coin start, us
  double t_se = 30.0;      // SE pulse length, us
  int max_draws = 3;
  ProjectionMode mode = ProjectionMode::population_weighted;
  double recoil_half_width = 0.5;  // hbar*G

  double window_begin() const noexcept { return t_on / t_coin; }
  double window_end() const noexcept { return (t_on + t_se) / t_coin; }

  void validate() const {
    if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError("rho", "must lie in [0, 1], got " + std::to_string(rho));
    if (!(t_coin > 0.0)) throw ConfigError("t_coin", "must be > 0");
    if (!(t_on >= 0.0)) throw ConfigError("t_on", "must be >= 0");
    if (!(t_se >= 0.0)) throw ConfigError("t_se", "must be >= 0");
    if (t_on + t_se > t_coin) throw ConfigError("t_se", "t_on + t_se must not exceed t_coin");
    if (max_draws < 1) throw ConfigError("max_draws", "must be >= 1");
    if (!(recoil_half_width >= 0.0)) throw ConfigError("recoil_half_width", "must be >= 0");
  }
};

struct SEEvent {
  double t_prime = 0.0;  // fraction of the coin pulse T
  double recoil = 0.0;   // quasimomentum kick, hbar*G
  bool accepted = false;
};

/// Scattering rate gamma/2 * s/(1+s) of a resonantly driven two-level atom
/// at saturation parameter s = I/I_s.
inline double effective_se_rate(double i_over_is, double gamma) {
  if (!(i_over_is >= 0.0)) throw DomainError("intensity ratio must be >= 0");
  if (std::isinf(i_over_is)) return gamma / 2.0;
  return gamma / 2.0 * i_over_is / (1.0 + i_over_is);
}

// rho = gamma_eff * t_se. t_se in seconds.
inline double event_probability(double gamma_eff, double t_se_s) {
  if (!(gamma_eff >= 0.0) || !(t_se_s >= 0.0)) throw DomainError("rate and duration must be >= 0");
  const double rho = gamma_eff * t_se_s;
  if (rho > 1.0) throw ModelValidity("event probability " + std::to_string(rho) + " > 1 is outside the model");
  return rho;
}

// power and power_scale in uW; the scale plays the role of the saturation power.
inline double power_to_rho(double power, double power_scale, double gamma, double t_se_s) {
  if (!(power >= 0.0)) throw DomainError("power must be >= 0");
  if (!(power_scale > 0.0)) throw DomainError("power scale must be > 0");
  return event_probability(effective_se_rate(power / power_scale, gamma), t_se_s);
}

// Power scale that maps ref_power onto ref_rho.
inline double calibrate_power_scale(double ref_power, double ref_rho, double gamma, double t_se_s) {
  if (!(ref_power > 0.0)) throw DomainError("reference power must be > 0");
  const double ceiling = gamma * t_se_s / 2.0;
  if (!(ref_rho > 0.0) || !(ref_rho < ceiling))
    throw DomainError("reference rho must lie in (0, gamma*t_se/2)");
  const double saturation = ref_rho / (ceiling - ref_rho);
  return ref_power / saturation;
}

struct PowerCalibration {
  double gamma = rb87_d2_linewidth;  // 1/s
  double ref_power = 3.0;            // uW
  double ref_rho = 0.35;

  double power_scale(double t_se_us) const { return calibrate_power_scale(ref_power, ref_rho, gamma, t_se_us * 1e-6); }
  double rho_at(double power, double t_se_us) const {
    return power_to_rho(power, power_scale(t_se_us), gamma, t_se_us * 1e-6);
  }
};

/// Emission times inside the SE window from a Poisson process with mean rho
/// per pulse, at most max_draws of them, ascending. Each carries a uniform
/// recoil in [-recoil_half_width, recoil_half_width].
inline std::vector<SEEvent> sample_se_events(double rho, const SEConfig& cfg, RandomStream& rng) {
  std::vector<SEEvent> events;
  if (!(rho > 0.0) || !(cfg.t_se > 0.0)) return events;
  const double rate = rho / cfg.t_se;
  const double end = cfg.t_on + cfg.t_se;
  double t = cfg.t_on;
  for (int d = 0; d < cfg.max_draws; ++d) {
    t += rng.exponential(rate);
    if (t > end) break;
    events.push_back({t / cfg.t_coin, rng.uniform(-cfg.recoil_half_width, cfg.recoil_half_width), false});
  }
  return events;
}

// Partial coin exp(i (alpha/2) * fraction * sigma_x); alpha = pi/2 gives the
// exp(i pi t / 4T sigma_x) segment between emission events.
inline void apply_partial_coin(SpinorState& state, double alpha, double fraction) noexcept {
  const double angle = 0.5 * alpha * fraction;
  const double c = std::cos(angle);
  const complex is{0.0, std::sin(angle)};
  auto a1 = state.component(Spin::one);
  auto a2 = state.component(Spin::two);
  for (std::size_t i = 0; i < a1.size(); ++i) {
    const complex x = a1[i];
    const complex y = a2[i];
    a1[i] = c * x + is * y;
    a2[i] = is * x + c * y;
  }
}

struct InterruptedCoinResult {
  std::vector<SEEvent> events;  // input events with accepted flags set
  int accepted = 0;
  bool degenerate = false;      // an unconditional projection found no |2> population
};

/// Coin pulse interrupted by emission events. Between events the spin evolves
/// under the partial coin; an accepted event projects onto |2> (keeping that
/// component's momentum profile), renormalizes and adds its recoil to beta.
/// The pulse then runs to its end. With no accepted event the ordinary coin
/// M(alpha, chi) is applied.
inline InterruptedCoinResult apply_interrupted_coin(SpinorState& state, std::vector<SEEvent> events, double alpha,
                                                    double chi, const SEConfig& cfg, RandomStream& rng) {
  InterruptedCoinResult result;
  std::sort(events.begin(), events.end(), [](const SEEvent& a, const SEEvent& b) { return a.t_prime < b.t_prime; });

  SpinorState work = state;
  double elapsed = 0.0;
  double recoil = 0.0;
  for (auto& ev : events) {
    apply_partial_coin(work, alpha, ev.t_prime - elapsed);
    elapsed = ev.t_prime;
    const double p2 = population(work, Spin::two);
    bool accept = false;
    if (cfg.mode == ProjectionMode::unconditional) {
      accept = p2 > 1e-14;
      if (!accept) result.degenerate = true;
    } else {
      accept = rng.uniform() < p2;
    }
    ev.accepted = accept;
    if (!accept) continue;
    for (auto& a : work.component(Spin::one)) a = complex{};
    work.normalize();
    recoil += ev.recoil;
    ++result.accepted;
  }

  if (result.accepted == 0) {
    apply_coin(state, alpha, chi);
  } else {
    apply_partial_coin(work, alpha, 1.0 - elapsed);
    work.set_beta(work.beta() + recoil);
    state = std::move(work);
  }
  result.events = std::move(events);
  return result;
}

}  // namespace qwalk
