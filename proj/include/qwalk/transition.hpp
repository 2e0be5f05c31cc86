#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qwalk/ensemble.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/observables.hpp"

namespace qwalk {

struct TransitionReport {
  std::vector<double> energy_gap;     // quantum minus classical, per step 0..S
  std::vector<double> energy_gap_se;  // combined standard error
  std::vector<double> tv_distance;    // per step with stored distributions, else empty
};

/// Quantum-vs-classical comparison. A gap that shrinks toward zero as the
/// emission probability grows marks the walk turning classical.
inline TransitionReport transition_metrics(const EnsembleStatistics& qw, const EnsembleStatistics& cw) {
  if (qw.steps != cw.steps)
    throw Error("step counts differ: " + std::to_string(qw.steps) + " vs " + std::to_string(cw.steps));
  if (qw.half_width != cw.half_width) throw InvalidGrid("ensembles use different momentum grids");
  TransitionReport report;
  for (int s = 0; s <= qw.steps; ++s) {
    const auto i = static_cast<std::size_t>(s);
    report.energy_gap.push_back(qw.mean_energy[i] - cw.mean_energy[i]);
    report.energy_gap_se.push_back(std::hypot(qw.mean_energy_se[i], cw.mean_energy_se[i]));
  }
  if (qw.distributions.size() == cw.distributions.size()) {
    for (std::size_t i = 0; i < qw.distributions.size(); ++i)
      report.tv_distance.push_back(total_variation(qw.distributions[i], cw.distributions[i]));
  }
  return report;
}

}  // namespace qwalk
