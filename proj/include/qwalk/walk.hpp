#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qwalk/errors.hpp"
#include "qwalk/spinor.hpp"

namespace qwalk {

struct WalkConfig {
  double k = 1.45;                          // kick strength
  int steps = 5;
  double tau = 4.0 * std::numbers::pi;      // scaled pulse period; 4pi is the Talbot resonance
  std::optional<double> phi_global;         // relative |2> phase per kick; unset means 2k + pi
  bool compensated = true;
  double coin_alpha = std::numbers::pi / 2;
  double coin_chi_first = std::numbers::pi;
  double coin_chi_rest = -std::numbers::pi / 2;
  int angle_grid_size = 256;
  int half_width = 64;
  double ratchet_phase = std::numbers::pi / 2;
  double trunc_eps = 1e-8;

  double global_phase() const noexcept { return phi_global.value_or(2.0 * k + std::numbers::pi); }

  double coin_chi(int step_index) const noexcept { return step_index == 1 ? coin_chi_first : coin_chi_rest; }

  void validate() const {
    if (steps < 0) throw ConfigError("steps", "must be >= 0, got " + std::to_string(steps));
    if (!(k >= 0.0)) throw ConfigError("k", "must be >= 0");
    if (half_width < 2) throw ConfigError("half_width", "must be >= 2");
    if (angle_grid_size < 2 * half_width + 1)
      throw ConfigError("angle_grid_size", "must be >= 2*half_width+1 = " + std::to_string(2 * half_width + 1));
    if ((angle_grid_size & (angle_grid_size - 1)) != 0)
      throw ConfigError("angle_grid_size", "must be a power of two, got " + std::to_string(angle_grid_size));
    if (!(trunc_eps > 0.0)) throw ConfigError("trunc_eps", "must be > 0");
    if (!std::isfinite(tau)) throw ConfigError("tau", "must be finite");
  }
};

// M(alpha, chi) = [[cos(a/2), e^{i chi} sin(a/2)], [-e^{-i chi} sin(a/2), cos(a/2)]]
// on (a_{1,n}, a_{2,n}); M(pi/2, pi)|1> = (|1> + |2>)/sqrt(2).
inline void apply_coin(SpinorState& state, double alpha, double chi) noexcept {
  const double c = std::cos(alpha / 2);
  const double s = std::sin(alpha / 2);
  const complex upper = s * std::polar(1.0, chi);
  const complex lower = -s * std::polar(1.0, -chi);
  auto a1 = state.component(Spin::one);
  auto a2 = state.component(Spin::two);
  for (std::size_t i = 0; i < a1.size(); ++i) {
    const complex x = a1[i];
    const complex y = a2[i];
    a1[i] = c * x + upper * y;
    a2[i] = lower * x + c * y;
  }
}

// Integer-order Bessel J_n(x) for any sign of n.
inline double bessel_j(int n, double x) {
  const int m = n < 0 ? -n : n;
  const double j = std::cyl_bessel_j(static_cast<double>(m), x);
  return (n < 0 && (m & 1)) ? -j : j;
}

// <n|exp(-i k cos theta)|m> = (-i)^{n-m} J_{n-m}(k)
inline complex kick_kernel(int delta_n, double k) {
  static constexpr complex minus_i_pow[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
  return minus_i_pow[((delta_n % 4) + 4) % 4] * bessel_j(delta_n, k);
}

// Spin-dependent kick on a uniform angle grid. Spin |1> is multiplied by
// exp(-i k cos theta), spin |2> by exp(+i k cos theta), so the |2> part of the
// phi = pi/2 ratchet is pushed toward positive momenta.
//
// Owns its FFTW plans and buffer; one instance per worker thread.
class KickPropagator {
 public:
  KickPropagator(int half_width, int grid_size, double k) : half_width_(half_width), grid_size_(grid_size) {
    if (grid_size < 2 * half_width + 1)
      throw InvalidGrid("angle grid " + std::to_string(grid_size) + " smaller than 2N+1");
    buffer_ = fftw_alloc_complex(static_cast<std::size_t>(grid_size));
    {
      std::lock_guard lock(planner_mutex());
      to_angle_ = fftw_plan_dft_1d(grid_size, buffer_, buffer_, FFTW_BACKWARD, FFTW_ESTIMATE);
      to_momentum_ = fftw_plan_dft_1d(grid_size, buffer_, buffer_, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    set_kick_strength(k);
  }

  KickPropagator(const KickPropagator&) = delete;
  KickPropagator& operator=(const KickPropagator&) = delete;

  KickPropagator(KickPropagator&& other) noexcept { swap(other); }
  KickPropagator& operator=(KickPropagator&& other) noexcept {
    if (this != &other) {
      release();
      swap(other);
    }
    return *this;
  }

  ~KickPropagator() { release(); }

  int half_width() const noexcept { return half_width_; }
  int grid_size() const noexcept { return grid_size_; }
  double kick_strength() const noexcept { return k_; }

  void set_kick_strength(double k) {
    k_ = k;
    phase_one_.resize(static_cast<std::size_t>(grid_size_));
    const double scale = 1.0 / grid_size_;
    for (int j = 0; j < grid_size_; ++j) {
      const double theta = 2.0 * std::numbers::pi * j / grid_size_;
      phase_one_[static_cast<std::size_t>(j)] = std::polar(scale, -k * std::cos(theta));
    }
  }

  // Kick both components; |2> additionally picks up exp(-i phase_two).
  void apply(SpinorState& state, double phase_two = 0.0) {
    if (state.half_width() != half_width_) throw InvalidGrid("state grid does not match propagator grid");
    kick_component(state.component(Spin::one), false);
    kick_component(state.component(Spin::two), true);
    if (phase_two != 0.0) {
      const complex rot = std::polar(1.0, -phase_two);
      for (auto& a : state.component(Spin::two)) a *= rot;
    }
  }

 private:
  static std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
  }

  void kick_component(std::span<complex> amps, bool conjugate) {
    const int n_half = half_width_;
    auto* buf = reinterpret_cast<complex*>(buffer_);
    std::fill(buf, buf + grid_size_, complex{});
    for (int n = -n_half; n <= n_half; ++n) buf[wrap(n)] = amps[static_cast<std::size_t>(n + n_half)];
    fftw_execute(to_angle_);
    for (int j = 0; j < grid_size_; ++j) {
      const complex p = phase_one_[static_cast<std::size_t>(j)];
      buf[j] *= conjugate ? std::conj(p) : p;
    }
    fftw_execute(to_momentum_);
    for (int n = -n_half; n <= n_half; ++n) amps[static_cast<std::size_t>(n + n_half)] = buf[wrap(n)];
  }

  std::size_t wrap(int n) const noexcept {
    return static_cast<std::size_t>(((n % grid_size_) + grid_size_) % grid_size_);
  }

  void release() noexcept {
    if (buffer_ == nullptr) return;
    {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(to_angle_);
      fftw_destroy_plan(to_momentum_);
    }
    fftw_free(buffer_);
    buffer_ = nullptr;
  }

  void swap(KickPropagator& other) noexcept {
    std::swap(half_width_, other.half_width_);
    std::swap(grid_size_, other.grid_size_);
    std::swap(k_, other.k_);
    std::swap(phase_one_, other.phase_one_);
    std::swap(buffer_, other.buffer_);
    std::swap(to_angle_, other.to_angle_);
    std::swap(to_momentum_, other.to_momentum_);
  }

  int half_width_ = 0;
  int grid_size_ = 0;
  double k_ = 0.0;
  std::vector<complex> phase_one_;  // exp(-i k cos theta_j) / M
  fftw_complex* buffer_ = nullptr;
  fftw_plan to_angle_ = nullptr;
  fftw_plan to_momentum_ = nullptr;
};

// One-off kick with edge check. Ensemble code holds a KickPropagator instead.
inline void apply_kick(SpinorState& state, double k, double phi_global, int angle_grid_size = 256,
                       double trunc_eps = 1e-8) {
  KickPropagator prop(state.half_width(), angle_grid_size, k);
  prop.apply(state, phi_global);
  check_edge_leakage(state, trunc_eps);
}

// Same kick by direct convolution with the Bessel kernel, O(N^2).
inline void apply_kick_convolution(SpinorState& state, double k, double phi_global = 0.0) {
  const int n_half = state.half_width();
  std::vector<complex> kernel(static_cast<std::size_t>(4 * n_half + 1));
  for (int d = -2 * n_half; d <= 2 * n_half; ++d) kernel[static_cast<std::size_t>(d + 2 * n_half)] = kick_kernel(d, k);
  for (Spin s : {Spin::one, Spin::two}) {
    auto amps = state.component(s);
    std::vector<complex> out(amps.size());
    for (int n = -n_half; n <= n_half; ++n) {
      complex acc{};
      for (int m = -n_half; m <= n_half; ++m) {
        complex kern = kernel[static_cast<std::size_t>(n - m + 2 * n_half)];
        if (s == Spin::two) kern = std::conj(kern);
        acc += kern * amps[static_cast<std::size_t>(m + n_half)];
      }
      out[static_cast<std::size_t>(n + n_half)] = acc;
    }
    std::copy(out.begin(), out.end(), amps.begin());
  }
  if (phi_global != 0.0) {
    const complex rot = std::polar(1.0, -phi_global);
    for (auto& a : state.component(Spin::two)) a *= rot;
  }
}

// Each class picks up exp(-i tau (n + beta)^2 / 2).
inline void apply_free_evolution(SpinorState& state, double tau) noexcept {
  const int n_half = state.half_width();
  const double beta = state.beta();
  auto a1 = state.component(Spin::one);
  auto a2 = state.component(Spin::two);
  for (int n = -n_half; n <= n_half; ++n) {
    const double p = n + beta;
    const complex ph = std::polar(1.0, -0.5 * tau * p * p);
    const auto i = static_cast<std::size_t>(n + n_half);
    a1[i] *= ph;
    a2[i] *= ph;
  }
}

}  // namespace qwalk
