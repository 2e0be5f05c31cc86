#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qwalk/errors.hpp"

namespace qwalk {

using complex = std::complex<double>;

// Internal states: one = |F=1, mF=0>, two = |F=2, mF=0>.
enum class Spin : int { one = 0, two = 1 };

// Fractional part into [0, 1).
inline double wrap_quasimomentum(double beta) noexcept {
  double w = beta - std::floor(beta);
  return w >= 1.0 ? 0.0 : w;
}

// Two spin components over momentum classes n in [-N, N] (units of hbar*G),
// plus the quasimomentum beta in [0, 1).
class SpinorState {
 public:
  explicit SpinorState(int half_width, double beta = 0.0)
      : half_width_(half_width), beta_(wrap_quasimomentum(beta)) {
    if (half_width < 1) throw InvalidGrid("half_width must be >= 1, got " + std::to_string(half_width));
    amps_.assign(2 * width(), complex{});
  }

  int half_width() const noexcept { return half_width_; }
  std::size_t width() const noexcept { return static_cast<std::size_t>(2 * half_width_ + 1); }

  double beta() const noexcept { return beta_; }
  void set_beta(double beta) noexcept { beta_ = wrap_quasimomentum(beta); }

  std::span<complex> component(Spin s) noexcept {
    return {amps_.data() + offset(s), width()};
  }
  std::span<const complex> component(Spin s) const noexcept {
    return {amps_.data() + offset(s), width()};
  }

  complex& at(Spin s, int n) { return amps_[offset(s) + index(n)]; }
  const complex& at(Spin s, int n) const { return amps_[offset(s) + index(n)]; }

  std::span<complex> amplitudes() noexcept { return amps_; }
  std::span<const complex> amplitudes() const noexcept { return amps_; }

  double norm() const noexcept {
    double sum = 0.0;
    for (const auto& a : amps_) sum += std::norm(a);
    return sum;
  }

  void normalize() {
    const double nrm = norm();
    if (!(nrm > 0.0)) throw Error("cannot normalize a zero state");
    const double scale = 1.0 / std::sqrt(nrm);
    for (auto& a : amps_) a *= scale;
  }

  // Probability sitting on the outermost classes n = -N and n = +N.
  double edge_leakage() const noexcept {
    double sum = 0.0;
    for (Spin s : {Spin::one, Spin::two}) {
      auto c = component(s);
      sum += std::norm(c.front()) + std::norm(c.back());
    }
    return sum;
  }

 private:
  std::size_t offset(Spin s) const noexcept {
    return s == Spin::one ? 0 : width();
  }
  std::size_t index(int n) const {
    if (n < -half_width_ || n > half_width_)
      throw InvalidGrid("momentum class " + std::to_string(n) + " outside grid");
    return static_cast<std::size_t>(n + half_width_);
  }

  int half_width_;
  double beta_;
  std::vector<complex> amps_;
};

struct MomentumDistribution {
  int half_width = 0;
  int step_index = 0;
  std::vector<double> probabilities;  // index n + half_width

  double at(int n) const { return probabilities.at(static_cast<std::size_t>(n + half_width)); }

  double total() const noexcept {
    double sum = 0.0;
    for (double p : probabilities) sum += p;
    return sum;
  }

  bool operator==(const MomentumDistribution&) const = default;
};

/// Bragg-prepared ratchet (|n=0> + e^{i phi}|n=1>)/sqrt(2), spin in |1>.
inline SpinorState new_ratchet_state(int half_width, double phi, double beta) {
  if (half_width < 2) throw InvalidGrid("ratchet state needs half_width >= 2, got " + std::to_string(half_width));
  SpinorState state(half_width, beta);
  const double amp = 1.0 / std::sqrt(2.0);
  state.at(Spin::one, 0) = amp;
  state.at(Spin::one, 1) = std::polar(amp, phi);
  return state;
}

inline double population(const SpinorState& state, Spin s) noexcept {
  double sum = 0.0;
  for (const auto& a : state.component(s)) sum += std::norm(a);
  return sum;
}

inline MomentumDistribution momentum_distribution(const SpinorState& state, int step_index = 0) {
  MomentumDistribution dist;
  dist.half_width = state.half_width();
  dist.step_index = step_index;
  dist.probabilities.resize(state.width());
  auto c1 = state.component(Spin::one);
  auto c2 = state.component(Spin::two);
  for (std::size_t i = 0; i < state.width(); ++i) dist.probabilities[i] = std::norm(c1[i]) + std::norm(c2[i]);
  return dist;
}

inline void check_edge_leakage(const SpinorState& state, double eps) {
  const double leak = state.edge_leakage();
  if (leak >= eps)
    throw GridTooSmall("edge leakage " + std::to_string(leak) + " exceeds tolerance; increase grid half_width (N=" +
                       std::to_string(state.half_width()) + ")");
}

}  // namespace qwalk
