#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "oracles.hpp"
#include "qwalk/qwalk.hpp"

using namespace qwalk;
using std::numbers::pi;

TEST(EffectiveRate, SaturationLimits) {
  const double g = 2 * pi * 6.0666e6;
  EXPECT_EQ(effective_se_rate(0.0, g), 0.0);
  EXPECT_EQ(effective_se_rate(1.0, g), g / 4);
  EXPECT_EQ(effective_se_rate(std::numeric_limits<double>::infinity(), g), g / 2);
  EXPECT_NEAR(effective_se_rate(1e12, g), g / 2, g * 1e-11);
  EXPECT_NEAR(effective_se_rate(3.0, 2.0), 0.75, 1e-15);
  EXPECT_THROW(effective_se_rate(-0.1, g), DomainError);
}

TEST(EffectiveRate, MonotoneInIntensity) {
  double prev = -1.0;
  for (double s = 0.0; s < 20.0; s += 0.25) {
    const double r = effective_se_rate(s, 1.0);
    EXPECT_GT(r, prev);
    EXPECT_LT(r, 0.5);
    prev = r;
  }
}

TEST(EventProbability, RateTimesDuration) {
  EXPECT_NEAR(event_probability(0.35 / 30e-6, 30e-6), 0.35, 1e-15);
  EXPECT_NEAR(0.35 / 30e-6, 1.1667e4, 1.0);
  EXPECT_EQ(event_probability(0.0, 30e-6), 0.0);
  EXPECT_THROW(event_probability(1e5, 30e-6), ModelValidity);
}

TEST(PowerCalibration, ReferencePointReproduced) {
  PowerCalibration cal;
  EXPECT_NEAR(cal.rho_at(3.0, 30.0), 0.35, 1e-12);
  EXPECT_EQ(cal.rho_at(0.0, 30.0), 0.0);
  double prev = 0.0;
  for (double p = 0.5; p <= 7.2; p += 0.5) {
    const double r = cal.rho_at(p, 30.0);
    EXPECT_GT(r, prev);
    prev = r;
  }
  EXPECT_LT(cal.rho_at(7.2, 30.0), 1.0);
}

TEST(PowerCalibration, SaturatesWithSmallLinewidth) {
  // gamma * t_se / 2 = 0.5, so rho approaches 0.5 from below
  PowerCalibration cal;
  cal.gamma = 1.0 / 30e-6;
  cal.ref_rho = 0.2;
  const double scale = cal.power_scale(30.0);
  EXPECT_NEAR(scale, 3.0 / (0.2 / 0.3), 1e-12);
  EXPECT_NEAR(cal.rho_at(scale, 30.0), 0.25, 1e-12);
  EXPECT_LT(cal.rho_at(1e9, 30.0), 0.5);
  EXPECT_GT(cal.rho_at(1e9, 30.0), 0.4999);
}

TEST(PowerCalibration, HighPowerLeavesModel) {
  PowerCalibration cal;
  EXPECT_THROW(cal.rho_at(100.0, 30.0), ModelValidity);
  EXPECT_THROW(cal.rho_at(-1.0, 30.0), DomainError);
  EXPECT_THROW(calibrate_power_scale(3.0, 0.0, cal.gamma, 30e-6), DomainError);
}

TEST(SampleEvents, FractionMatchesPoisson) {
  SEConfig cfg;
  const double rho = 0.35;
  const int draws = 100000;
  int with_event = 0, two_or_more = 0;
  for (int i = 0; i < draws; ++i) {
    RandomStream rng(42, static_cast<std::uint64_t>(i), 1);
    auto ev = sample_se_events(rho, cfg, rng);
    with_event += ev.empty() ? 0 : 1;
    two_or_more += ev.size() >= 2 ? 1 : 0;
    for (const auto& e : ev) {
      ASSERT_GE(e.t_prime, 30.0 / 103.4);
      ASSERT_LE(e.t_prime, 60.0 / 103.4);
      ASSERT_GE(e.recoil, -0.5);
      ASSERT_LE(e.recoil, 0.5);
    }
    for (std::size_t j = 1; j < ev.size(); ++j) ASSERT_LE(ev[j - 1].t_prime, ev[j].t_prime);
  }
  EXPECT_NEAR(static_cast<double>(with_event) / draws, 1.0 - oracle::poisson_pmf(0, rho), 0.005);
  EXPECT_NEAR(static_cast<double>(two_or_more) / draws,
              1.0 - oracle::poisson_pmf(0, rho) - oracle::poisson_pmf(1, rho), 0.005);
}

TEST(SampleEvents, CapAtMaxDraws) {
  SEConfig cfg;
  cfg.max_draws = 1;
  for (int i = 0; i < 2000; ++i) {
    RandomStream rng(1, static_cast<std::uint64_t>(i), 3);
    ASSERT_LE(sample_se_events(1.0, cfg, rng).size(), 1u);
  }
  RandomStream rng(1, 0, 0);
  EXPECT_TRUE(sample_se_events(0.0, cfg, rng).empty());
}

namespace {

SpinorState spin_one_packet() {
  SpinorState s(8);
  s.at(Spin::one, 0) = 1.0 / std::sqrt(2.0);
  s.at(Spin::one, 1) = complex(0.0, 1.0 / std::sqrt(2.0));
  return s;
}

SEConfig unconditional() {
  SEConfig cfg;
  cfg.mode = ProjectionMode::unconditional;
  return cfg;
}

}  // namespace

TEST(InterruptedCoin, EventAtPulseEndLeavesSpinTwo) {
  auto s = spin_one_packet();
  RandomStream rng(0, 0, 0);
  auto r = apply_interrupted_coin(s, {{1.0, 0.0, false}}, pi / 2, pi, unconditional(), rng);
  EXPECT_EQ(r.accepted, 1);
  EXPECT_NEAR(population(s, Spin::two), 1.0, 1e-15);
  EXPECT_NEAR(s.norm(), 1.0, 1e-15);
}

TEST(InterruptedCoin, PopulationAfterEventMatchesDirectEvaluation) {
  for (double tp : {0.29, 0.35, 0.45, 0.58}) {
    auto s = spin_one_packet();
    RandomStream rng(0, 0, 0);
    apply_interrupted_coin(s, {{tp, 0.0, false}}, pi / 2, pi, unconditional(), rng);
    EXPECT_NEAR(population(s, Spin::two), oracle::population_after_event(tp), 1e-12) << tp;
  }
  EXPECT_NEAR(oracle::population_after_event(0.29), std::pow(std::cos(0.1775 * pi), 2), 1e-15);
  EXPECT_NEAR(oracle::population_after_event(0.29), 0.71997, 1e-5);
}

TEST(InterruptedCoin, MomentumProfileSurvivesProjection) {
  auto s = spin_one_packet();
  RandomStream rng(0, 0, 0);
  apply_interrupted_coin(s, {{0.4, 0.0, false}}, pi / 2, pi, unconditional(), rng);
  auto d = momentum_distribution(s);
  EXPECT_NEAR(d.at(0), 0.5, 1e-14);
  EXPECT_NEAR(d.at(1), 0.5, 1e-14);
}

TEST(InterruptedCoin, NoEventsIsOrdinaryCoin) {
  auto a = spin_one_packet();
  auto b = a;
  RandomStream rng(0, 0, 0);
  auto r = apply_interrupted_coin(a, {}, pi / 2, -pi / 2, SEConfig{}, rng);
  apply_coin(b, pi / 2, -pi / 2);
  EXPECT_EQ(r.accepted, 0);
  for (std::size_t i = 0; i < a.amplitudes().size(); ++i) EXPECT_EQ(a.amplitudes()[i], b.amplitudes()[i]);
}

TEST(InterruptedCoin, RecoilShiftsQuasimomentum) {
  auto s = spin_one_packet();
  s.set_beta(0.1);
  RandomStream rng(0, 0, 0);
  apply_interrupted_coin(s, {{0.3, -0.3, false}, {0.5, 0.05, false}}, pi / 2, pi, unconditional(), rng);
  EXPECT_NEAR(s.beta(), 0.85, 1e-14);
}

TEST(InterruptedCoin, DegenerateProjectionIsFlagged) {
  SpinorState s(4);
  s.at(Spin::one, 0) = 1.0;
  RandomStream rng(0, 0, 0);
  auto r = apply_interrupted_coin(s, {{0.0, 0.0, false}}, pi / 2, pi, unconditional(), rng);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.accepted, 0);
}

TEST(InterruptedCoin, WeightedModeAcceptsWithSpinTwoPopulation) {
  const double tp = 0.4;
  const double p2 = std::pow(std::sin(pi * tp / 4), 2);
  SEConfig cfg;  // population-weighted
  int accepted = 0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    auto s = spin_one_packet();
    RandomStream rng(3, static_cast<std::uint64_t>(i), 1);
    accepted += apply_interrupted_coin(s, {{tp, 0.0, false}}, pi / 2, pi, cfg, rng).accepted;
  }
  const double sigma = std::sqrt(p2 * (1 - p2) / n);
  EXPECT_NEAR(static_cast<double>(accepted) / n, p2, 4 * sigma);
}

// After any accepted emission the coin has run at most 0.71 T from a pure
// |2>, so |2> keeps at least half the population.
TEST(InterruptedCoinProperty, SpinTwoDominatesAfterEmission) {
  SEConfig cfg = unconditional();
  for (int i = 0; i < 2000; ++i) {
    RandomStream draw(5, static_cast<std::uint64_t>(i), 1);
    auto events = sample_se_events(0.8, cfg, draw);
    if (events.empty()) continue;
    auto s = spin_one_packet();
    s.set_beta(draw.uniform());
    auto r = apply_interrupted_coin(s, events, pi / 2, -pi / 2, cfg, draw);
    ASSERT_GE(r.accepted, 1);
    ASSERT_GE(population(s, Spin::two), 0.5);
    ASSERT_NEAR(s.norm(), 1.0, 1e-13);
    ASSERT_GE(s.beta(), 0.0);
    ASSERT_LT(s.beta(), 1.0);
  }
}

TEST(Decoherence, TinyRhoStaysCloseToCoherentWalk) {
  WalkConfig walk;
  EnsembleConfig ens;
  ens.n_traj = 200;
  SEConfig coherent, faint;
  faint.rho = 1e-3;
  auto a = run_ensemble(walk, coherent, ens);
  auto b = run_ensemble(walk, faint, ens);
  EXPECT_LT(total_variation(a.final_distribution(), b.final_distribution()), 0.02);
  EXPECT_NEAR(a.mean_energy.back(), b.mean_energy.back(), 0.05);
}

TEST(SEConfig, ValidationNamesKey) {
  SEConfig cfg;
  cfg.rho = 1.5;
  try {
    cfg.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "rho");
  }
  cfg = SEConfig{};
  cfg.t_se = 90.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_NEAR(SEConfig{}.window_begin(), 0.29, 0.001);
  EXPECT_NEAR(SEConfig{}.window_end(), 0.58, 0.001);
}
