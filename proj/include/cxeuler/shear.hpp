#pragma once

// Complex shear flows u = (iq(t), 0) + b(x,t) e_2 on the torus. The velocity
// reduces to the mode system
//     dq/dt   = sum_k k |b_k|^2
//     db_k/dt = -q k b_k
// which conserves q^2 + sum |b_k|^2.

#include "cxeuler/fourier.hpp"

#include <functional>
#include <stdexcept>
#include <vector>

namespace cxeuler::shear {

using fourier::Complex;
using fourier::FourierField;

class ShearError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ShearState {
  double q = 0.0;
  FourierField b;  // 1-D, scalar, b(0) == 0
  double t = 0.0;

  void validate() const;
};

/// Build a state with the given shear coefficients b_k for k != 0.
ShearState make_state(double q, int cutoff, const std::vector<std::pair<int, Complex>>& modes,
                      double t = 0.0);

double energy(const ShearState& s);
/// H^s norm of u = (iq, b): (q^2 + sum <k>^{2s} |b_k|^2)^{1/2}.
double sobolev_norm(const ShearState& s, double sobolev_index);

struct ShearRhs {
  double dq = 0.0;
  FourierField db;
};
ShearRhs shear_rhs(const ShearState& s);

using QPath = std::function<double(double)>;

/// One step of length dt. b is advanced by the exact integrating factor
/// b_k <- exp(-k \int q) b_k. With an empty q_path, q follows classical RK4
/// on the (q, \int q) pair with b rebuilt exactly at each stage; with a
/// q_path, q is prescribed and its integral is taken by 5-point Gauss-Legendre.
ShearState step_exact_b(const ShearState& s, double dt, const QPath& q_path = {});

/// Spatial reflection x -> -x combined with t -> -t: b_k <- b_{-k}, t <- -t.
ShearState time_reverse(const ShearState& s);

/// Rate scale of the mode dynamics: max(sqrt(E) k_rms, |q| <k^2>/<|k|>) with
/// averages weighted by |b_k|^2.
double characteristic_rate(const ShearState& s);

struct TrajectorySample {
  double t;
  double q;
  double energy;
};

struct IntegrateOptions {
  double dt_max = 1e-3;
  /// Substeps satisfy dt * characteristic_rate <= rate_cap.
  double rate_cap = 0.005;
};

/// Integrate to t_end, invoking on_step after every accepted step.
ShearState integrate(ShearState s, double t_end, const IntegrateOptions& opts,
                     const std::function<void(const ShearState&)>& on_step = {});

// Single-mode reduction q = -sqrt(E) cos(theta), b_k = sqrt(E) sin(theta).

struct ThetaState {
  double theta = 0.0;
  double energy = 0.0;
  int k = 1;
};

double theta_rhs(const ThetaState& ts);
/// theta(t) = 2 atan(exp(sqrt(E) k t) tan(theta0 / 2)) for theta0 in (0, pi).
double theta_closed_form(double theta0, double energy, int k, double t);
ShearState theta_to_shear(const ThetaState& ts, int cutoff, double t = 0.0);
/// Angle of a real single-mode state: atan2(b_k, -q).
double shear_to_theta(const ShearState& s, int k);

// Norm inflation from small data (q = -eps/2, b = eps/(2<k>^s) e^{ikx}).

struct InflationParams {
  double eps = 0.1;
  double sobolev_index = 1.0;
  double threshold = 10.0;  // M
  double horizon = 10.0;    // T
  int forced_k = 0;         // 0: select the smallest admissible k
};

struct InflationResult {
  int k = 0;
  double initial_norm = 0.0;
  double predicted_t0 = 0.0;
  bool crossed = false;
  double t0 = 0.0;
  double sup_norm = 0.0;
  std::vector<double> times;
  std::vector<double> q;
  std::vector<double> energy;
  std::vector<double> hs_norm;
};

/// Smallest k with (eps/4)<k>^s > M and (pi/(k eps)) log<k>^s < T.
int select_inflation_mode(const InflationParams& p);
double predicted_inflation_time(double eps, double sobolev_index, int k);
InflationResult norm_inflation_experiment(const InflationParams& p);

// Forward smoothing of rough data and the radius law radius(t) = \int_0^t q.

struct AnalyticityParams {
  double q_in = 1.0;
  double decay_exponent = 1.0;  // |b_k| = <k>^{-p}, k = 1..K
  int cutoff = 256;
  double horizon = 2.0;
  int samples = 20;  // radius fits on [T/2, T]
  IntegrateOptions integrate;
};

struct AnalyticitySample {
  double t;
  double q;
  double energy;
  double q_integral;  // trapezoid over the step history
  double radius;      // fitted
  double relative_error;
};

struct AnalyticityResult {
  std::vector<AnalyticitySample> samples;
  std::vector<TrajectorySample> history;
  double max_relative_error = 0.0;
  double energy_drift = 0.0;
  bool q_monotone = true;
  double q_max = 0.0;
  double energy_bound = 0.0;  // sqrt(E)
  ShearState final_state;
};

AnalyticityResult loss_of_analyticity_experiment(const AnalyticityParams& p);

}  // namespace cxeuler::shear
