#pragma once

// Pseudospectral solver for the 2-D complex Euler equations in vorticity form
//     d_t omega + conj(u) . grad omega = 0
// with velocity recovered by u(k) = i k_perp omega(k) / |k|^2, k_perp = (-k_y, k_x),
// so that omega = d_y u_1 - d_x u_2. The k = 0 velocity mode is carried
// separately and evolves by
//     d/dt mean_c = <conj(u_l) d_c u_l> = i sum_j j_c |u_l(j)|^2.

#include "cxeuler/fourier.hpp"
#include "cxeuler/shear.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

namespace cxeuler::spectral {

using fourier::Complex;
using fourier::FourierField;
using fourier::Wavevector;
using Vec2 = std::array<Complex, 2>;

class SpectralError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Spectral energy has leaked into the outer shell beyond the configured level.
class ResolutionExhausted : public std::runtime_error {
 public:
  ResolutionExhausted(double t, double fraction);
  double time() const { return time_; }
  double fraction() const { return fraction_; }

 private:
  double time_;
  double fraction_;
};

struct VorticityState {
  FourierField omega;  // 2-D scalar, omega(0) == 0
  Vec2 mean_u{};
  double t = 0.0;

  void validate() const;
};

struct SolverConfig {
  int cutoff = 32;  // K
  double dt = 1e-3;
  bool dealias = true;  // keep max(|k_x|, |k_y|) <= floor(2K/3)
  /// Fraction of non-mean kinetic energy allowed in the shell
  /// max(|k_x|, |k_y|) > floor(2 K_a / 3), K_a the active cutoff.
  double tail_threshold = 1e-4;
  bool filter = false;
  double filter_strength = 36.0;
  int filter_order = 16;

  void validate() const;
  int active_cutoff() const { return dealias ? (2 * cutoff) / 3 : cutoff; }
};

/// Velocity field (2 components) of a vorticity field and mean flow.
FourierField biot_savart(const FourierField& omega, const Vec2& mean_u);

/// Inverse of biot_savart on the nonzero modes: omega = d_y u_1 - d_x u_2.
FourierField curl(const FourierField& velocity);

struct Diagnostics {
  double energy = 0.0;             // (1/2) <|u|^2>, mean included
  Complex enstrophy;               // <omega^2>
  double enstrophy_hermitian = 0;  // <|omega|^2>
  Complex casimir3;                // <omega^3>
  std::array<double, 2> mean_re{};
};

struct Rhs {
  FourierField domega;
  Vec2 dmean{};
};

/// Owns the transform plans and work arrays for one cutoff.
class Solver {
 public:
  explicit Solver(const SolverConfig& config);
  ~Solver();
  Solver(const Solver&) = delete;
  Solver& operator=(const Solver&) = delete;
  Solver(Solver&&) noexcept;
  Solver& operator=(Solver&&) noexcept;

  const SolverConfig& config() const;
  int grid_size() const;

  /// Throws ResolutionExhausted when the tail fraction exceeds the threshold.
  Rhs rhs(const VorticityState& s);
  /// One classical RK4 step of length config().dt.
  VorticityState step(const VorticityState& s);
  /// Advance to t_end with steps of config().dt (the last one shortened).
  VorticityState advance(VorticityState s, double t_end);

  double tail_fraction(const VorticityState& s) const;
  /// Zero the modes outside the active cutoff.
  void project(VorticityState& s) const;
  Diagnostics diagnostics(const VorticityState& s);
  /// max over grid points of |Im u(x)|.
  double max_imag_velocity(const VorticityState& s);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Stateless conveniences; each builds a Solver for the call.
Rhs vorticity_rhs(const VorticityState& s, const SolverConfig& config);
VorticityState step(const VorticityState& s, const SolverConfig& config);
Diagnostics diagnostics(const VorticityState& s);

/// Smallest 2^a 3^b 5^c >= n.
int fft_size_at_least(int n);

/// y-independent embedding: omega(k, 0) = -i k b_k, mean = (iq, 0).
VorticityState from_shear(const shear::ShearState& s, int cutoff);
/// Inverse of from_shear; requires y-independent data with mean (iq, 0).
shear::ShearState to_shear(const VorticityState& s);

/// Re(-i conj(a) . k).
double predicted_growth_rate(const Vec2& a, Wavevector k);

struct GrowthResult {
  double measured_rate = 0.0;
  double predicted_rate = 0.0;
  double max_amplification = 0.0;
  std::vector<double> times;
  std::vector<double> log_amplitude;
};

/// Evolve the background a plus a mode-k vorticity perturbation of size delta
/// and fit the exponential rate of |omega(k, t)| on [0, horizon].
GrowthResult linear_growth_check(const Vec2& a, Wavevector k, double horizon, double delta = 1e-6,
                                 SolverConfig config = {8, 1e-3});

struct ExhaustionParams {
  int cutoff = 32;
  Vec2 background{Complex{0.0, -1.0}, Complex{}};
  double delta = 1e-6;
  double decay_exponent = 3.0;  // |omega(k)| = delta <k>^{-p}
  double tail_threshold = 1e-2;
  double dt = 1e-3;
  double horizon = 5.0;
  std::uint64_t seed = 1;
};

struct ExhaustionResult {
  bool exhausted = false;
  double time = 0.0;
  double fraction = 0.0;
  double initial_fraction = 0.0;
};

/// Background plus a broadband perturbation with seeded phases, run until the
/// tail check fires or the horizon is reached.
ExhaustionResult exhaustion_experiment(const ExhaustionParams& p);

}  // namespace cxeuler::spectral
