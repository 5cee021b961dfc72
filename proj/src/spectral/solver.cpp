#include "cxeuler/spectral.hpp"

#include "fft_grid.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace cxeuler::spectral {

using detail::FftGrid;
using detail::GridBuffer;

namespace {

constexpr Complex kI{0.0, 1.0};

std::string exhausted_message(double t, double fraction) {
  std::ostringstream os;
  os << "resolution exhausted at t = " << t << " (tail fraction " << fraction << ")";
  return os.str();
}

int max_abs(Wavevector k) { return std::max(std::abs(k.x), std::abs(k.y)); }

double k2(Wavevector k) { return static_cast<double>(k.x) * k.x + static_cast<double>(k.y) * k.y; }

void check_omega(const FourierField& omega) {
  if (omega.empty() || omega.dim() != 2 || omega.components() != 1)
    throw SpectralError("vorticity must be a 2-D scalar field");
  if (omega.get({0, 0}) != Complex{}) throw SpectralError("vorticity must have zero mean");
}

}  // namespace

ResolutionExhausted::ResolutionExhausted(double t, double fraction)
    : std::runtime_error(exhausted_message(t, fraction)), time_(t), fraction_(fraction) {}

void VorticityState::validate() const {
  check_omega(omega);
  for (const auto& c : omega.data())
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw SpectralError("nonfinite vorticity");
}

void SolverConfig::validate() const {
  if (cutoff < 4) throw SpectralError("SolverConfig: K must be at least 4");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw SpectralError("SolverConfig: dt must be positive");
  if (!(tail_threshold > 0.0)) throw SpectralError("SolverConfig: tail_threshold must be positive");
  if (filter && (filter_order < 2 || !(filter_strength > 0.0)))
    throw SpectralError("SolverConfig: bad filter parameters");
}

FourierField biot_savart(const FourierField& omega, const Vec2& mean_u) {
  check_omega(omega);
  FourierField u(2, omega.cutoff(), 2);
  for (std::size_t i = 0; i < omega.mode_count(); ++i) {
    const Wavevector k = omega.wavevector(i);
    auto dst = u.mode(i);
    if (k.x == 0 && k.y == 0) {
      dst[0] = mean_u[0];
      dst[1] = mean_u[1];
      continue;
    }
    const Complex w = omega.data()[i] / k2(k);
    dst[0] = kI * static_cast<double>(-k.y) * w;
    dst[1] = kI * static_cast<double>(k.x) * w;
  }
  return u;
}

FourierField curl(const FourierField& velocity) {
  if (velocity.dim() != 2 || velocity.components() != 2)
    throw SpectralError("curl: need a 2-D two-component field");
  FourierField omega(2, velocity.cutoff(), 1);
  for (std::size_t i = 0; i < velocity.mode_count(); ++i) {
    const Wavevector k = velocity.wavevector(i);
    const auto u = velocity.mode(i);
    omega.data()[i] = kI * static_cast<double>(k.y) * u[0] - kI * static_cast<double>(k.x) * u[1];
  }
  return omega;
}

int fft_size_at_least(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

struct Solver::Impl {
  explicit Impl(const SolverConfig& c)
      : config(c),
        grid(fft_size_at_least(2 * c.cutoff + 1)),
        w_x(grid.points()),
        w_y(grid.points()),
        u_1(grid.points()),
        u_2(grid.points()) {}

  SolverConfig config;
  FftGrid grid;
  GridBuffer w_x, w_y, u_1, u_2;
  std::unique_ptr<FftGrid> padded;

  bool active(Wavevector k) const { return max_abs(k) <= config.active_cutoff(); }

  void check_shape(const VorticityState& s) const {
    check_omega(s.omega);
    if (s.omega.cutoff() != config.cutoff) throw SpectralError("state cutoff does not match the solver");
  }

  double tail_fraction(const FourierField& omega) const {
    const int edge = (2 * config.active_cutoff()) / 3;
    double total = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < omega.mode_count(); ++i) {
      const Wavevector k = omega.wavevector(i);
      if (k.x == 0 && k.y == 0) continue;
      const double e = std::norm(omega.data()[i]) / k2(k);
      total += e;
      if (max_abs(k) > edge) tail += e;
    }
    return total > 0.0 ? tail / total : 0.0;
  }

  Rhs rhs(const VorticityState& s) {
    const double frac = tail_fraction(s.omega);
    if (frac > config.tail_threshold) throw ResolutionExhausted(s.t, frac);

    const FourierField& w = s.omega;
    grid.scatter(w, 0, w_x, [](Wavevector k) { return kI * static_cast<double>(k.x); });
    grid.scatter(w, 0, w_y, [](Wavevector k) { return kI * static_cast<double>(k.y); });
    grid.scatter(w, 0, u_1, [](Wavevector k) { return k.x == 0 && k.y == 0 ? Complex{} : kI * static_cast<double>(-k.y) / k2(k); });
    grid.scatter(w, 0, u_2, [](Wavevector k) { return k.x == 0 && k.y == 0 ? Complex{} : kI * static_cast<double>(k.x) / k2(k); });
    u_1[0] = s.mean_u[0];
    u_2[0] = s.mean_u[1];
    grid.to_physical(w_x);
    grid.to_physical(w_y);
    grid.to_physical(u_1);
    grid.to_physical(u_2);
    for (std::size_t p = 0; p < grid.points(); ++p)
      w_x[p] = -(std::conj(u_1[p]) * w_x[p] + std::conj(u_2[p]) * w_y[p]);
    grid.to_spectral(w_x);

    Rhs r{FourierField::zeros_like(w), {}};
    for (std::size_t i = 0; i < w.mode_count(); ++i) {
      const Wavevector k = w.wavevector(i);
      if ((k.x == 0 && k.y == 0) || !active(k)) continue;
      r.domega.data()[i] = w_x[grid.slot(k.x, k.y)];
      const double e = std::norm(w.data()[i]) / k2(k);
      r.dmean[0] += kI * static_cast<double>(k.x) * e;
      r.dmean[1] += kI * static_cast<double>(k.y) * e;
    }
    return r;
  }

  VorticityState step(const VorticityState& s, double h) {
    auto shifted = [&](const Rhs& d, double c) {
      VorticityState out{s.omega + Complex{c * h} * d.domega,
                         {s.mean_u[0] + c * h * d.dmean[0], s.mean_u[1] + c * h * d.dmean[1]},
                         s.t + c * h};
      return out;
    };
    const Rhs k1 = rhs(s);
    const Rhs k2v = rhs(shifted(k1, 0.5));
    const Rhs k3 = rhs(shifted(k2v, 0.5));
    const Rhs k4 = rhs(shifted(k3, 1.0));
    VorticityState out = s;
    const Complex c6{h / 6.0}, c3{h / 3.0};
    out.omega += c6 * k1.domega;
    out.omega += c3 * k2v.domega;
    out.omega += c3 * k3.domega;
    out.omega += c6 * k4.domega;
    for (int c = 0; c < 2; ++c)
      out.mean_u[c] += h / 6.0 * (k1.dmean[c] + 2.0 * k2v.dmean[c] + 2.0 * k3.dmean[c] + k4.dmean[c]);
    out.t = s.t + h;
    if (config.filter) {
      const double ka = config.active_cutoff();
      for (std::size_t i = 0; i < out.omega.mode_count(); ++i) {
        const double x = max_abs(out.omega.wavevector(i)) / ka;
        out.omega.data()[i] *= std::exp(-config.filter_strength * std::pow(x, config.filter_order));
      }
    }
    for (const auto& c : out.omega.data())
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw SpectralError("step produced nonfinite values");
    return out;
  }

  FftGrid& padded_grid() {
    if (!padded) padded = std::make_unique<FftGrid>(fft_size_at_least(3 * config.cutoff + 1));
    return *padded;
  }
};

Solver::Solver(const SolverConfig& config) {
  config.validate();
  impl_ = std::make_unique<Impl>(config);
}

Solver::~Solver() = default;
Solver::Solver(Solver&&) noexcept = default;
Solver& Solver::operator=(Solver&&) noexcept = default;

const SolverConfig& Solver::config() const { return impl_->config; }
int Solver::grid_size() const { return impl_->grid.n(); }

Rhs Solver::rhs(const VorticityState& s) {
  impl_->check_shape(s);
  return impl_->rhs(s);
}

void Solver::project(VorticityState& s) const {
  for (std::size_t i = 0; i < s.omega.mode_count(); ++i)
    if (!impl_->active(s.omega.wavevector(i))) s.omega.data()[i] = Complex{};
}

VorticityState Solver::step(const VorticityState& s) {
  impl_->check_shape(s);
  VorticityState in = s;
  project(in);
  return impl_->step(in, impl_->config.dt);
}

VorticityState Solver::advance(VorticityState s, double t_end) {
  impl_->check_shape(s);
  project(s);
  const double dt = impl_->config.dt;
  const double t0 = s.t;
  const auto n = static_cast<long long>(std::ceil((t_end - t0) / dt - 1e-9));
  for (long long i = 0; i < n; ++i) {
    const double target = std::min(t_end, t0 + static_cast<double>(i + 1) * dt);
    s = impl_->step(s, target - s.t);
    s.t = target;
  }
  return s;
}

double Solver::tail_fraction(const VorticityState& s) const { return impl_->tail_fraction(s.omega); }

Diagnostics Solver::diagnostics(const VorticityState& s) {
  impl_->check_shape(s);
  return spectral::diagnostics(s);
}

double Solver::max_imag_velocity(const VorticityState& s) {
  impl_->check_shape(s);
  auto& g = impl_->grid;
  const auto u = biot_savart(s.omega, s.mean_u);
  double out = 0.0;
  for (int c = 0; c < 2; ++c) {
    GridBuffer& b = c == 0 ? impl_->u_1 : impl_->u_2;
    g.scatter(u, c, b, [](Wavevector) { return Complex{1.0}; });
    g.to_physical(b);
    for (std::size_t p = 0; p < g.points(); ++p) out = std::max(out, std::abs(b[p].imag()));
  }
  return out;
}

Rhs vorticity_rhs(const VorticityState& s, const SolverConfig& config) {
  Solver solver(config);
  return solver.rhs(s);
}

VorticityState step(const VorticityState& s, const SolverConfig& config) {
  Solver solver(config);
  return solver.step(s);
}

Diagnostics diagnostics(const VorticityState& s) {
  check_omega(s.omega);
  Diagnostics d;
  double e = std::norm(s.mean_u[0]) + std::norm(s.mean_u[1]);
  for (std::size_t i = 0; i < s.omega.mode_count(); ++i) {
    const Wavevector k = s.omega.wavevector(i);
    const Complex w = s.omega.data()[i];
    if (w == Complex{}) continue;
    e += std::norm(w) / k2(k);
    d.enstrophy += w * s.omega.get(-k);
    d.enstrophy_hermitian += std::norm(w);
  }
  d.energy = 0.5 * e;
  d.mean_re = {s.mean_u[0].real(), s.mean_u[1].real()};

  FftGrid grid(fft_size_at_least(3 * s.omega.cutoff() + 1));
  GridBuffer b(grid.points());
  grid.scatter(s.omega, 0, b, [](Wavevector) { return Complex{1.0}; });
  grid.to_physical(b);
  Complex sum{};
  for (std::size_t p = 0; p < grid.points(); ++p) sum += b[p] * b[p] * b[p];
  d.casimir3 = sum / static_cast<double>(grid.points());
  return d;
}

VorticityState from_shear(const shear::ShearState& s, int cutoff) {
  if (s.b.cutoff() > cutoff) throw SpectralError("from_shear: shear profile exceeds the cutoff");
  VorticityState out{FourierField(2, cutoff, 1), {Complex{0.0, s.q}, Complex{}}, s.t};
  for (std::size_t i = 0; i < s.b.mode_count(); ++i) {
    const int k = s.b.wavevector(i).x;
    out.omega.at({k, 0}) = -kI * static_cast<double>(k) * s.b.data()[i];
  }
  return out;
}

shear::ShearState to_shear(const VorticityState& s) {
  check_omega(s.omega);
  if (s.mean_u[0].real() != 0.0 || s.mean_u[1] != Complex{})
    throw SpectralError("to_shear: mean flow must be (iq, 0)");
  shear::ShearState out{s.mean_u[0].imag(), FourierField(1, s.omega.cutoff(), 1), s.t};
  for (std::size_t i = 0; i < s.omega.mode_count(); ++i) {
    const Wavevector k = s.omega.wavevector(i);
    const Complex w = s.omega.data()[i];
    if (w == Complex{}) continue;
    if (k.y != 0) throw SpectralError("to_shear: vorticity depends on y");
    out.b.at({k.x, 0}) = kI * w / static_cast<double>(k.x);
  }
  return out;
}

double predicted_growth_rate(const Vec2& a, Wavevector k) {
  const Complex dot = std::conj(a[0]) * static_cast<double>(k.x) + std::conj(a[1]) * static_cast<double>(k.y);
  return (-kI * dot).real();
}

GrowthResult linear_growth_check(const Vec2& a, Wavevector k, double horizon, double delta,
                                 SolverConfig config) {
  if (!(horizon > 0.0) || !(delta > 0.0)) throw SpectralError("linear_growth_check: need T, delta > 0");
  if (k.x == 0 && k.y == 0) throw SpectralError("linear_growth_check: k must be nonzero");
  if (max_abs(k) > config.active_cutoff()) throw SpectralError("linear_growth_check: k outside the cutoff");
  Solver solver(config);
  VorticityState s{FourierField(2, config.cutoff, 1), a, 0.0};
  s.omega.at(k) = delta;

  GrowthResult res;
  res.predicted_rate = predicted_growth_rate(a, k);
  const double scale = std::max({std::abs(a[0]), std::abs(a[1]), 1.0});
  auto record = [&](const VorticityState& st) {
    const double amp = std::abs(st.omega.get(k));
    res.times.push_back(st.t);
    res.log_amplitude.push_back(std::log(amp / delta));
    res.max_amplification = std::max(res.max_amplification, amp / delta);
    if (amp > 1e-2 * scale) throw SpectralError("linear_growth_check: perturbation left the linear regime");
  };
  record(s);
  const auto n = static_cast<long long>(std::ceil(horizon / config.dt - 1e-9));
  for (long long i = 0; i < n; ++i) {
    s = solver.advance(std::move(s), std::min(horizon, static_cast<double>(i + 1) * config.dt));
    record(s);
  }

  const auto m = static_cast<Eigen::Index>(res.times.size());
  Eigen::MatrixXd design(m, 2);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = res.times[static_cast<std::size_t>(i)];
    rhs(i) = res.log_amplitude[static_cast<std::size_t>(i)];
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
  res.measured_rate = coef(1);
  return res;
}

ExhaustionResult exhaustion_experiment(const ExhaustionParams& p) {
  SolverConfig config;
  config.cutoff = p.cutoff;
  config.dt = p.dt;
  config.tail_threshold = p.tail_threshold;
  Solver solver(config);

  std::mt19937_64 rng(p.seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  VorticityState s{FourierField(2, p.cutoff, 1), p.background, 0.0};
  for (std::size_t i = 0; i < s.omega.mode_count(); ++i) {
    const Wavevector k = s.omega.wavevector(i);
    const double ph = phase(rng);
    if ((k.x == 0 && k.y == 0) || max_abs(k) > config.active_cutoff()) continue;
    s.omega.data()[i] = p.delta * std::pow(k.bracket(), -p.decay_exponent) * std::polar(1.0, ph);
  }

  ExhaustionResult res;
  res.initial_fraction = solver.tail_fraction(s);
  if (res.initial_fraction > p.tail_threshold)
    throw SpectralError("exhaustion_experiment: initial data already exceeds the tail threshold");
  try {
    s = solver.advance(std::move(s), p.horizon);
    res.fraction = solver.tail_fraction(s);
  } catch (const ResolutionExhausted& e) {
    res.exhausted = true;
    res.time = e.time();
    res.fraction = e.fraction();
  }
  return res;
}

}  // namespace cxeuler::spectral
