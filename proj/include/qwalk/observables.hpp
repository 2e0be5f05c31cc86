#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qwalk/errors.hpp"
#include "qwalk/spinor.hpp"

namespace qwalk {

// <n> in units of hbar*G.
inline double mean_momentum(const MomentumDistribution& dist) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < dist.probabilities.size(); ++i)
    sum += dist.probabilities[i] * (static_cast<double>(i) - dist.half_width);
  return sum;
}

// <n^2>/2 in units of (hbar*G)^2 / 2m; the O(delta_beta^2) quasimomentum part is left out.
inline double mean_energy(const MomentumDistribution& dist) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < dist.probabilities.size(); ++i) {
    const double n = static_cast<double>(i) - dist.half_width;
    sum += dist.probabilities[i] * n * n;
  }
  return 0.5 * sum;
}

inline double total_variation(const MomentumDistribution& a, const MomentumDistribution& b) {
  if (a.half_width != b.half_width) throw InvalidGrid("distributions live on different grids");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.probabilities.size(); ++i) sum += std::abs(a.probabilities[i] - b.probabilities[i]);
  return 0.5 * sum;
}

struct EnergyPoint {
  double step = 0.0;
  double energy = 0.0;
};

struct RateFit {
  double slope = 0.0;  // R
  double intercept = 0.0;
  double rss = 0.0;
  double first_step = 0.0;
  double last_step = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares of energy against step.
inline RateFit fit_energy_rate(std::span<const EnergyPoint> points) {
  if (points.size() < 3) throw FitError("rate fit needs at least 3 points, got " + std::to_string(points.size()));
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += p.step;
    my += p.energy;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  RateFit fit;
  fit.first_step = points.front().step;
  fit.last_step = points.front().step;
  for (const auto& p : points) {
    sxx += (p.step - mx) * (p.step - mx);
    sxy += (p.step - mx) * (p.energy - my);
    fit.first_step = std::min(fit.first_step, p.step);
    fit.last_step = std::max(fit.last_step, p.step);
  }
  if (!(sxx > 0.0)) throw FitError("degenerate abscissae: all steps equal");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (const auto& p : points) {
    const double r = p.energy - (fit.intercept + fit.slope * p.step);
    fit.rss += r * r;
  }
  fit.points = points.size();
  if (!std::isfinite(fit.slope)) throw FitError("non-finite slope");
  return fit;
}

inline RateFit fit_energy_rate(const std::vector<EnergyPoint>& points) {
  return fit_energy_rate(std::span<const EnergyPoint>(points));
}

// Coefficient of determination of a straight-line fit.
inline double r_squared(std::span<const EnergyPoint> points, const RateFit& fit) {
  double my = 0.0;
  for (const auto& p : points) my += p.energy;
  my /= static_cast<double>(points.size());
  double tss = 0.0;
  for (const auto& p : points) tss += (p.energy - my) * (p.energy - my);
  return tss > 0.0 ? 1.0 - fit.rss / tss : 1.0;
}

}  // namespace qwalk
