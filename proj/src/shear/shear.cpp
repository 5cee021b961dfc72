#include "cxeuler/shear.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace cxeuler::shear {

using fourier::Wavevector;

void ShearState::validate() const {
  if (b.empty() || b.dim() != 1 || b.components() != 1)
    throw ShearError("ShearState: b must be a 1-D scalar field");
  if (b.get({0, 0}) != Complex{}) throw ShearError("ShearState: b(0) must vanish");
  if (!std::isfinite(q) || !std::isfinite(t)) throw ShearError("ShearState: nonfinite q or t");
  for (const auto& c : b.data())
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw ShearError("ShearState: nonfinite coefficient");
}

ShearState make_state(double q, int cutoff, const std::vector<std::pair<int, Complex>>& modes,
                      double t) {
  ShearState s{q, FourierField(1, cutoff, 1), t};
  for (const auto& [k, v] : modes) {
    if (k == 0) throw ShearError("make_state: mode k = 0 is not allowed");
    s.b.at({k, 0}) = v;
  }
  return s;
}

double energy(const ShearState& s) {
  double e = s.q * s.q;
  for (const auto& c : s.b.data()) e += std::norm(c);
  return e;
}

double sobolev_norm(const ShearState& s, double sobolev_index) {
  const double bs = fourier::sobolev_norm(s.b, sobolev_index);
  return std::sqrt(s.q * s.q + bs * bs);
}

ShearRhs shear_rhs(const ShearState& s) {
  ShearRhs r{0.0, FourierField::zeros_like(s.b)};
  for (std::size_t i = 0; i < s.b.mode_count(); ++i) {
    const int k = s.b.wavevector(i).x;
    const Complex v = s.b.data()[i];
    r.dq += k * std::norm(v);
    r.db.data()[i] = -s.q * static_cast<double>(k) * v;
  }
  return r;
}

namespace {

struct Weight {
  int k;
  double w;  // |b_k|^2
};

std::vector<Weight> weights(const FourierField& b) {
  std::vector<Weight> out;
  for (std::size_t i = 0; i < b.mode_count(); ++i) {
    const double w = std::norm(b.data()[i]);
    if (w != 0.0) out.push_back({b.wavevector(i).x, w});
  }
  return out;
}

// sum k |b_k|^2 e^{-2 k Q}
double forcing(const std::vector<Weight>& ws, double big_q) {
  double sum = 0.0;
  for (const auto& w : ws) sum += w.k * w.w * std::exp(-2.0 * w.k * big_q);
  return sum;
}

void apply_factor(FourierField& b, double big_q) {
  for (std::size_t i = 0; i < b.mode_count(); ++i) {
    auto& c = b.data()[i];
    if (c == Complex{}) continue;
    c *= std::exp(-static_cast<double>(b.wavevector(i).x) * big_q);
  }
}

// 5-point Gauss-Legendre on [0, 1].
constexpr std::array<double, 5> kGaussNodes = {0.046910077030668, 0.230765344947158, 0.5,
                                               0.769234655052842, 0.953089922969332};
constexpr std::array<double, 5> kGaussWeights = {0.118463442528095, 0.239314335249683,
                                                 0.284444444444444, 0.239314335249683,
                                                 0.118463442528095};

bool finite_state(const ShearState& s) {
  if (!std::isfinite(s.q)) return false;
  for (const auto& c : s.b.data())
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  return true;
}

}  // namespace

ShearState step_exact_b(const ShearState& s, double dt, const QPath& q_path) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ShearError("step_exact_b: dt must be positive");
  ShearState out = s;
  out.t = s.t + dt;
  double big_q = 0.0;
  if (q_path) {
    for (std::size_t j = 0; j < kGaussNodes.size(); ++j)
      big_q += kGaussWeights[j] * q_path(s.t + kGaussNodes[j] * dt);
    big_q *= dt;
    out.q = q_path(out.t);
  } else {
    const auto ws = weights(s.b);
    // RK4 on y = (q, Q) with q' = forcing(Q), Q' = q.
    const double q1 = s.q, f1 = forcing(ws, 0.0);
    const double q2 = s.q + 0.5 * dt * f1, f2 = forcing(ws, 0.5 * dt * q1);
    const double q3 = s.q + 0.5 * dt * f2, f3 = forcing(ws, 0.5 * dt * q2);
    const double q4 = s.q + dt * f3, f4 = forcing(ws, dt * q3);
    out.q = s.q + dt / 6.0 * (f1 + 2.0 * f2 + 2.0 * f3 + f4);
    big_q = dt / 6.0 * (q1 + 2.0 * q2 + 2.0 * q3 + q4);
  }
  apply_factor(out.b, big_q);
  if (!finite_state(out)) throw ShearError("step_exact_b: nonfinite state, step rejected");
  return out;
}

ShearState time_reverse(const ShearState& s) {
  ShearState out = s;
  out.t = -s.t;
  for (std::size_t i = 0; i < s.b.mode_count(); ++i) {
    const Wavevector k = s.b.wavevector(i);
    out.b.at(-k) = s.b.data()[i];
  }
  return out;
}

double characteristic_rate(const ShearState& s) {
  double w = 0.0, wk = 0.0, wk2 = 0.0;
  for (std::size_t i = 0; i < s.b.mode_count(); ++i) {
    const double a = std::norm(s.b.data()[i]);
    const double k = s.b.wavevector(i).x;
    w += a;
    wk += std::abs(k) * a;
    wk2 += k * k * a;
  }
  if (w == 0.0) return 0.0;
  // Exchange rate between q and b, and the decay rate of the weighted modes.
  return std::max(std::sqrt(energy(s) * wk2 / w), std::abs(s.q) * wk2 / wk);
}

ShearState integrate(ShearState s, double t_end, const IntegrateOptions& opts,
                     const std::function<void(const ShearState&)>& on_step) {
  if (!(opts.dt_max > 0.0) || !(opts.rate_cap > 0.0))
    throw ShearError("integrate: step controls must be positive");
  while (s.t < t_end) {
    double h = opts.dt_max;
    const double rate = characteristic_rate(s);
    if (rate > 0.0) h = std::min(h, opts.rate_cap / rate);
    const double remaining = t_end - s.t;
    // Avoid a sliver step at the end.
    if (h >= remaining * (1.0 - 1e-12)) h = remaining;
    const double t_target = s.t + h;
    s = step_exact_b(s, h);
    if (h == remaining) s.t = t_end;
    else s.t = t_target;
    if (on_step) on_step(s);
  }
  return s;
}

double theta_rhs(const ThetaState& ts) {
  return std::sqrt(ts.energy) * ts.k * std::sin(ts.theta);
}

double theta_closed_form(double theta0, double energy, int k, double t) {
  if (!(theta0 > 0.0 && theta0 < std::numbers::pi))
    throw ShearError("theta_closed_form: theta0 must lie in (0, pi)");
  if (!(energy >= 0.0)) throw ShearError("theta_closed_form: energy must be >= 0");
  return 2.0 * std::atan(std::exp(std::sqrt(energy) * k * t) * std::tan(0.5 * theta0));
}

ShearState theta_to_shear(const ThetaState& ts, int cutoff, double t) {
  if (ts.k == 0 || std::abs(ts.k) > cutoff) throw ShearError("theta_to_shear: bad mode");
  const double r = std::sqrt(ts.energy);
  return make_state(-r * std::cos(ts.theta), cutoff, {{ts.k, Complex{r * std::sin(ts.theta), 0.0}}}, t);
}

double shear_to_theta(const ShearState& s, int k) {
  const Complex bk = s.b.get({k, 0});
  if (std::abs(bk.imag()) > 1e-12 * std::max(1.0, std::abs(bk)))
    throw ShearError("shear_to_theta: single-mode data must be real");
  return std::atan2(bk.real(), -s.q);
}

double predicted_inflation_time(double eps, double sobolev_index, int k) {
  const double bracket = std::sqrt(1.0 + static_cast<double>(k) * k);
  return std::numbers::pi / (k * eps) * sobolev_index * std::log(bracket);
}

int select_inflation_mode(const InflationParams& p) {
  if (!(p.eps > 0.0) || !(p.threshold > 0.0) || !(p.horizon > 0.0) || !(p.sobolev_index >= 0.0))
    throw ShearError("norm inflation: need eps, M, T > 0 and s >= 0");
  if (p.sobolev_index == 0.0) throw ShearError("norm inflation: no mode works for s = 0");
  // (eps/4) <k>^s > M
  const double need = std::pow(4.0 * p.threshold / p.eps, 1.0 / p.sobolev_index);
  const double kmin = std::sqrt(std::max(0.0, need * need - 1.0));
  int k = std::max(1, static_cast<int>(std::floor(kmin)));
  while (0.25 * p.eps * std::pow(std::sqrt(1.0 + static_cast<double>(k) * k), p.sobolev_index) <=
         p.threshold)
    ++k;
  for (int guard = 0; guard < 1000000; ++guard, ++k)
    if (predicted_inflation_time(p.eps, p.sobolev_index, k) < p.horizon) return k;
  throw ShearError("norm inflation: no admissible mode");
}

InflationResult norm_inflation_experiment(const InflationParams& p) {
  InflationResult res;
  res.k = p.forced_k > 0 ? p.forced_k : select_inflation_mode(p);
  res.predicted_t0 = predicted_inflation_time(p.eps, p.sobolev_index, res.k);
  const double s_idx = p.sobolev_index;
  const double bracket = std::sqrt(1.0 + static_cast<double>(res.k) * res.k);
  ShearState s = make_state(-0.5 * p.eps, res.k,
                            {{res.k, Complex{p.eps / (2.0 * std::pow(bracket, s_idx)), 0.0}}});
  res.initial_norm = sobolev_norm(s, s_idx);
  if (!(res.initial_norm < p.eps)) throw ShearError("norm inflation: initial data not small");

  auto record = [&](const ShearState& st) {
    const double n = sobolev_norm(st, s_idx);
    res.times.push_back(st.t);
    res.q.push_back(st.q);
    res.energy.push_back(energy(st));
    res.hs_norm.push_back(n);
    res.sup_norm = std::max(res.sup_norm, n);
  };
  record(s);

  const double rate = characteristic_rate(s);
  const double h = std::min(1e-3, 0.01 / rate);
  while (s.t < p.horizon) {
    const double step = std::min(h, p.horizon - s.t);
    ShearState next = step_exact_b(s, step);
    if (sobolev_norm(next, s_idx) > p.threshold) {
      double lo = 0.0, hi = step;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sobolev_norm(step_exact_b(s, mid), s_idx) > p.threshold) hi = mid;
        else lo = mid;
      }
      next = step_exact_b(s, hi);
      res.crossed = true;
      res.t0 = next.t;
      record(next);
      return res;
    }
    s = next;
    record(s);
  }
  return res;
}

AnalyticityResult loss_of_analyticity_experiment(const AnalyticityParams& p) {
  if (!(p.q_in > 0.0)) throw ShearError("analyticity experiment: q_in must be positive");
  if (p.cutoff < 3) throw ShearError("analyticity experiment: need K >= 3");
  if (!(p.horizon > 0.0) || p.samples < 2) throw ShearError("analyticity experiment: bad sampling");
  std::vector<std::pair<int, Complex>> modes;
  for (int k = 1; k <= p.cutoff; ++k)
    modes.emplace_back(k, Complex{std::pow(1.0 + static_cast<double>(k) * k, -0.5 * p.decay_exponent), 0.0});
  ShearState s = make_state(p.q_in, p.cutoff, modes);

  AnalyticityResult res;
  const double e0 = energy(s);
  res.energy_bound = std::sqrt(e0);
  res.history.push_back({0.0, s.q, e0});
  double q_int = 0.0;
  double prev_q = s.q;
  double prev_t = 0.0;
  res.q_max = s.q;
  auto on_step = [&](const ShearState& st) {
    q_int += 0.5 * (prev_q + st.q) * (st.t - prev_t);
    if (st.q < prev_q - 1e-14 * std::abs(prev_q)) res.q_monotone = false;
    prev_q = st.q;
    prev_t = st.t;
    const double e = energy(st);
    res.energy_drift = std::max(res.energy_drift, std::abs(e - e0) / e0);
    res.q_max = std::max(res.q_max, st.q);
    res.history.push_back({st.t, st.q, e});
  };

  for (int j = 0; j < p.samples; ++j) {
    const double ts = 0.5 * p.horizon + 0.5 * p.horizon * j / (p.samples - 1);
    s = integrate(std::move(s), ts, p.integrate, on_step);
    const auto fit = fourier::estimate_analyticity_radius(s.b);
    if (!fit) throw ShearError("analyticity experiment: radius fit failed");
    AnalyticitySample sample{ts, s.q, energy(s), q_int, *fit, std::abs(*fit - q_int) / std::abs(q_int)};
    res.max_relative_error = std::max(res.max_relative_error, sample.relative_error);
    res.samples.push_back(sample);
  }
  res.final_state = std::move(s);
  return res;
}

}  // namespace cxeuler::shear
