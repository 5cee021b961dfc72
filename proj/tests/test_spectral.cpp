#include <doctest.h>

#include "cxeuler/spectral.hpp"

#include <cmath>
#include <random>

using namespace cxeuler::spectral;
using cxeuler::fourier::FourierField;

namespace {

constexpr Complex kI{0.0, 1.0};

VorticityState smooth_state(int cutoff, double amp, bool real, std::uint64_t seed, int band = 3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  VorticityState s{FourierField(2, cutoff, 1), {Complex{0.2, real ? 0.0 : 0.1}, Complex{-0.1, real ? 0.0 : 0.05}}, 0.0};
  for (int ky = -band; ky <= band; ++ky)
    for (int kx = -band; kx <= band; ++kx) {
      if ((kx == 0 && ky == 0) || (real && (ky < 0 || (ky == 0 && kx < 0)))) continue;
      const Complex v = amp * Complex{g(rng), g(rng)} * std::exp(-0.5 * std::hypot(kx, ky));
      s.omega.at({kx, ky}) = v;
      if (real) s.omega.at({-kx, -ky}) = std::conj(v);
    }
  return s;
}

double max_diff(const FourierField& a, const FourierField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.mode_count(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace

TEST_CASE("fft sizes") {
  CHECK(fft_size_at_least(33) == 36);
  CHECK(fft_size_at_least(129) == 135);
  CHECK(fft_size_at_least(257) == 270);
  CHECK(fft_size_at_least(1) == 1);
}

TEST_CASE("biot-savart") {
  FourierField w(2, 4, 1);
  w.at({1, 0}) = 1.0;
  auto u = biot_savart(w, {});
  CHECK(u.get({1, 0}, 0) == Complex{});
  CHECK(u.get({1, 0}, 1) == kI);

  const Vec2 a{Complex{1.0, 2.0}, Complex{-0.5, 0.0}};
  u = biot_savart(FourierField(2, 4, 1), a);
  CHECK(u.get({0, 0}, 0) == a[0]);
  CHECK(u.get({0, 0}, 1) == a[1]);
  CHECK(u.nonzero_count() == 1u);

  const auto s = smooth_state(6, 1.0, false, 3, 6);
  u = biot_savart(s.omega, s.mean_u);
  for (std::size_t i = 0; i < u.mode_count(); ++i) {
    const auto k = u.wavevector(i);
    const Complex div = static_cast<double>(k.x) * u.mode(i)[0] + static_cast<double>(k.y) * u.mode(i)[1];
    CHECK(std::abs(div) <= 4e-16 * k.length() * u.magnitude(i));
  }
  CHECK(max_diff(curl(u), s.omega) < 1e-15);

  w.at({0, 0}) = 1.0;
  CHECK_THROWS_AS(biot_savart(w, {}), SpectralError);
}

TEST_CASE("rhs special cases") {
  const SolverConfig cfg{8, 1e-3};
  const auto real = smooth_state(8, 0.5, true, 5);
  const auto r = vorticity_rhs(real, cfg);
  CHECK(std::abs(r.dmean[0]) < 1e-15);
  CHECK(std::abs(r.dmean[1]) < 1e-15);

  const VorticityState calm{FourierField(2, 8, 1), {Complex{0.4, -1.0}, Complex{2.0, 0.3}}, 0.0};
  const auto rc = vorticity_rhs(calm, cfg);
  CHECK(rc.domega.nonzero_count() == 0u);
  CHECK(rc.dmean[0] == Complex{});
  CHECK(rc.dmean[1] == Complex{});
  const auto next = step(calm, cfg);
  CHECK(next.mean_u == calm.mean_u);

  const VorticityState zero{FourierField(2, 8, 1), {}, 0.0};
  CHECK(step(zero, cfg).omega.nonzero_count() == 0u);

  CHECK_THROWS_AS((SolverConfig{3, 1e-3}.validate()), SpectralError);
  CHECK_THROWS_AS((SolverConfig{8, 0.0}.validate()), SpectralError);
  CHECK_THROWS_AS(vorticity_rhs(calm, SolverConfig{10, 1e-3}), SpectralError);
}

TEST_CASE("advection of a single mode by a constant flow") {
  // Hand oracle: conj(a) . grad e^{ik.x} = i conj(a).k e^{ik.x}.
  const Vec2 a{Complex{0.3, -0.7}, Complex{1.1, 0.2}};
  VorticityState s{FourierField(2, 8, 1), a, 0.0};
  s.omega.at({2, -1}) = 1e-3;
  const auto r = vorticity_rhs(s, SolverConfig{8, 1e-3});
  const Complex expect = -kI * (std::conj(a[0]) * 2.0 - std::conj(a[1])) * 1e-3;
  CHECK(std::abs(r.domega.get({2, -1}) - expect) < 1e-16);
}

TEST_CASE("diagnostics") {
  FourierField w(2, 4, 1);
  w.at({1, 0}) = 1.0;
  VorticityState s{w, {Complex{0.0, 1.0}, Complex{}}, 0.0};
  auto d = diagnostics(s);
  CHECK(d.enstrophy == Complex{});
  CHECK(d.enstrophy_hermitian == doctest::Approx(1.0));
  CHECK(d.energy == doctest::Approx(1.0));
  CHECK(d.mean_re[0] == 0.0);

  FourierField tri(2, 4, 1);
  tri.at({1, 0}) = 1.0;
  tri.at({0, 1}) = 1.0;
  tri.at({-1, -1}) = 1.0;
  d = diagnostics({tri, {}, 0.0});
  CHECK(std::abs(d.casimir3 - Complex{6.0}) < 1e-12);

  const auto real = smooth_state(8, 1.0, true, 8);
  d = diagnostics(real);
  CHECK(std::abs(d.enstrophy.imag()) < 1e-14);
  CHECK(d.enstrophy.real() == doctest::Approx(d.enstrophy_hermitian));
  CHECK(d.enstrophy.real() > 0.0);
}

TEST_CASE("conservation on complex analytic data") {
  const SolverConfig cfg{24, 5e-3};
  Solver solver(cfg);
  auto s = smooth_state(24, 0.1, false, 17);
  const auto d0 = diagnostics(s);
  s = solver.advance(s, 1.0);
  const auto d1 = diagnostics(s);
  CHECK(std::abs(d1.energy - d0.energy) / d0.energy < 1e-6);
  CHECK(std::abs(d1.enstrophy - d0.enstrophy) / std::abs(d0.enstrophy) < 1e-6);
  CHECK(std::abs(d1.casimir3 - d0.casimir3) / std::abs(d0.casimir3) < 1e-6);
  CHECK(d1.mean_re == d0.mean_re);
  const auto u = biot_savart(s.omega, s.mean_u);
  for (std::size_t i = 0; i < u.mode_count(); ++i) {
    const auto k = u.wavevector(i);
    const Complex div = static_cast<double>(k.x) * u.mode(i)[0] + static_cast<double>(k.y) * u.mode(i)[1];
    CHECK(std::abs(div) <= 4e-16 * k.length() * u.magnitude(i));
  }
}

TEST_CASE("real data stays real") {
  Solver solver(SolverConfig{.cutoff = 16, .dt = 1e-2, .tail_threshold = 1.0});
  auto s = smooth_state(16, 0.5, true, 23);
  double worst = solver.max_imag_velocity(s);
  for (int j = 1; j <= 10; ++j) {
    s = solver.advance(s, 0.1 * j);
    worst = std::max(worst, solver.max_imag_velocity(s));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("time order") {
  const auto s0 = smooth_state(16, 0.5, false, 31);
  auto run = [&](double dt) {
    Solver solver(SolverConfig{.cutoff = 16, .dt = dt, .tail_threshold = 1.0});
    return solver.advance(s0, 0.5).omega;
  };
  const auto a = run(0.05), b = run(0.025), c = run(0.0125);
  const double order = std::log2(max_diff(a, b) / max_diff(b, c));
  CHECK(order >= 3.8);
}

TEST_CASE("shear consistency") {
  const auto sh = cxeuler::shear::make_state(0.5, 10, {{1, 0.3}, {-2, Complex{0.1, 0.2}}, {3, Complex{0.0, -0.15}}, {-5, 0.05}});
  const auto v0 = from_shear(sh, 16);
  const auto back = to_shear(v0);
  CHECK(back.q == sh.q);
  for (int k = -10; k <= 10; ++k) CHECK(std::abs(back.b.get({k, 0}) - sh.b.get({k, 0})) < 1e-16);

  Solver solver(SolverConfig{16, 1e-3});
  auto v = v0;
  auto s = sh;
  double err = 0.0;
  for (int j = 1; j <= 10; ++j) {
    v = solver.advance(v, 0.1 * j);
    s = cxeuler::shear::integrate(s, 0.1 * j, {});
    const auto vs = to_shear(v);
    err = std::max(err, std::abs(vs.q - s.q));
    for (int k = -10; k <= 10; ++k) err = std::max(err, std::abs(vs.b.get({k, 0}) - s.b.get({k, 0})));
  }
  CHECK(err <= 1e-8);
}

TEST_CASE("linear growth rates") {
  const Vec2 a{Complex{0.0, -1.0}, Complex{}};
  CHECK(predicted_growth_rate(a, {1, 0}) == doctest::Approx(1.0));
  CHECK(predicted_growth_rate(a, {-1, 0}) == doctest::Approx(-1.0));
  CHECK(predicted_growth_rate({Complex{0.7}, Complex{-0.2}}, {2, 3}) == 0.0);

  auto g = linear_growth_check(a, {1, 0}, 5.0);
  CHECK(std::abs(g.measured_rate - 1.0) <= 0.01);
  CHECK(g.max_amplification <= 1e3);
  g = linear_growth_check(a, {-1, 0}, 5.0);
  CHECK(std::abs(g.measured_rate + 1.0) <= 0.01);
  g = linear_growth_check({Complex{0.7}, Complex{-0.2}}, {2, 3}, 2.0);
  CHECK(std::abs(g.measured_rate) <= 0.01);
  CHECK_THROWS_AS(linear_growth_check(a, {1, 0}, 5.0, 1e-3), SpectralError);
}

TEST_CASE("resolution exhaustion") {
  auto s = smooth_state(16, 1.0, false, 1);
  s.omega.at({10, 10}) = 1.0;
  CHECK_THROWS_AS(vorticity_rhs(s, SolverConfig{16, 1e-3}), ResolutionExhausted);

  double previous = 1e300;
  for (int k : {32, 64, 128}) {
    ExhaustionParams p;
    p.cutoff = k;
    const auto r = exhaustion_experiment(p);
    REQUIRE(r.exhausted);
    CHECK(r.time < previous);
    previous = r.time;
  }
}
