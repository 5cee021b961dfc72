#include <doctest.h>

#include "cxeuler/shear.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace cxeuler::shear;
using cxeuler::fourier::Complex;

namespace {

ShearState random_state(std::mt19937_64& rng, int cutoff) {
  std::normal_distribution<double> g;
  std::vector<std::pair<int, Complex>> modes;
  for (int k = -cutoff; k <= cutoff; ++k)
    if (k != 0) modes.emplace_back(k, Complex{g(rng), g(rng)} / (1.0 + k * k));
  return make_state(g(rng), cutoff, modes);
}

// Test-side RK4 for the scalar angle equation.
double theta_rk4(double theta0, double e, int k, double t, double dt) {
  const auto f = [&](double th) { return std::sqrt(e) * k * std::sin(th); };
  double th = theta0;
  const int n = static_cast<int>(std::llround(t / dt));
  for (int i = 0; i < n; ++i) {
    const double a = f(th), b = f(th + 0.5 * dt * a), c = f(th + 0.5 * dt * b), d = f(th + dt * c);
    th += dt / 6.0 * (a + 2 * b + 2 * c + d);
  }
  return th;
}

}  // namespace

TEST_CASE("rhs examples") {
  auto r = shear_rhs(make_state(1.0, 2, {{1, 1.0}}));
  CHECK(r.dq == doctest::Approx(1.0));
  CHECK(r.db.get({1, 0}) == Complex{-1.0});

  r = shear_rhs(make_state(0.7, 3, {{2, Complex{1.0, 2.0}}, {-2, Complex{1.0, -2.0}}, {1, 0.5}, {-1, 0.5}}));
  CHECK(r.dq == doctest::Approx(0.0));

  r = shear_rhs(make_state(0.0, 3, {{2, Complex{0.0, 1.0}}}));
  CHECK(r.dq == doctest::Approx(2.0));
  CHECK(r.db.nonzero_count() == 0u);
}

TEST_CASE("state validation") {
  ShearState s = make_state(1.0, 2, {{1, 1.0}});
  s.b.at({0, 0}) = 1.0;
  CHECK_THROWS_AS(s.validate(), ShearError);
  CHECK_THROWS_AS(make_state(1.0, 2, {{0, 1.0}}), ShearError);
  CHECK_THROWS_AS(step_exact_b(make_state(1.0, 2, {{1, 1.0}}), 0.0), ShearError);
  CHECK_THROWS_AS(step_exact_b(make_state(1.0, 2, {{1, 1.0}}), 0.1, [](double) { return NAN; }), ShearError);
}

TEST_CASE("frozen q reproduces the integrating factor") {
  std::mt19937_64 rng(1);
  const auto s0 = random_state(rng, 12);
  const double q0 = 0.8;
  ShearState s = s0;
  for (int n = 0; n < 50; ++n) s = step_exact_b(s, 0.01, [&](double) { return q0; });
  for (int k = -12; k <= 12; ++k) {
    const Complex expect = std::exp(-q0 * k * 0.5) * s0.b.get({k, 0});
    CHECK(std::abs(s.b.get({k, 0}) - expect) <= 1e-14 * std::max(1.0, std::abs(expect)));
  }
  CHECK(s.q == q0);
}

TEST_CASE("zero profile is an equilibrium") {
  const auto s0 = make_state(1.3, 4, {});
  const auto s1 = step_exact_b(s0, 0.1);
  CHECK(s1.q == s0.q);
  CHECK(s1.b.nonzero_count() == 0u);
  CHECK(s1.t == doctest::Approx(0.1));
}

TEST_CASE("theta reduction") {
  CHECK(theta_rhs({0.0, 1.0, 1}) == 0.0);
  CHECK(std::abs(theta_rhs({std::numbers::pi, 1.0, 1})) < 1e-15);
  CHECK(theta_rhs({std::numbers::pi / 2, 1.0, 1}) == doctest::Approx(1.0));
  CHECK(theta_closed_form(0.3, 2.0, 2, 0.0) == doctest::Approx(0.3));
  CHECK(theta_closed_form(0.3, 2.0, 2, 50.0) == doctest::Approx(std::numbers::pi));
  CHECK_THROWS_AS(theta_closed_form(0.0, 1.0, 1, 1.0), ShearError);
  CHECK_THROWS_AS(theta_closed_form(std::numbers::pi, 1.0, 1, 1.0), ShearError);

  CHECK(std::abs(theta_closed_form(0.1, 1.0, 1, 1.0) - theta_rk4(0.1, 1.0, 1, 1.0, 1e-5)) < 1e-10);

  const auto s = theta_to_shear({0.7, 2.0, 3}, 4);
  CHECK(energy(s) == doctest::Approx(2.0));
  CHECK(shear_to_theta(s, 3) == doctest::Approx(0.7));
}

TEST_CASE("full solver follows the closed form") {
  const IntegrateOptions opts{1e-3, 0.01};
  for (double e : {1.0, 4.0})
    for (int k : {1, 3})
      for (double th0 : {0.1, 1.0}) {
        ShearState s = theta_to_shear({th0, e, k}, k);
        double err = 0.0;
        s = integrate(s, 5.0, opts, [&](const ShearState& st) {
          const double th = theta_closed_form(th0, e, k, st.t);
          err = std::max(err, std::abs(st.q + std::sqrt(e) * std::cos(th)));
          err = std::max(err, std::abs(st.b.get({k, 0}).real() - std::sqrt(e) * std::sin(th)));
        });
        CHECK(err <= 1e-8);
      }
}

TEST_CASE("energy conservation on random data") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 4; ++trial) {
    ShearState s = random_state(rng, 8);
    const double e0 = energy(s);
    double drift = 0.0;
    integrate(s, 10.0, IntegrateOptions{}, [&](const ShearState& st) {
      drift = std::max(drift, std::abs(energy(st) - e0) / e0);
    });
    CHECK(drift <= 1e-10);
  }
}

TEST_CASE("time reversal") {
  std::mt19937_64 rng(9);
  const auto s0 = random_state(rng, 6);
  const double dt = 0.05;
  ShearState s = integrate(s0, dt, IntegrateOptions{});
  s = time_reverse(s);
  s = integrate(s, s.t + dt, IntegrateOptions{});
  s = time_reverse(s);
  CHECK(std::abs(s.t - s0.t) < 1e-14);
  CHECK(std::abs(s.q - s0.q) < 1e-8);
  for (int k = -6; k <= 6; ++k) CHECK(std::abs(s.b.get({k, 0}) - s0.b.get({k, 0})) < 1e-8);
}

TEST_CASE("step order") {
  std::mt19937_64 rng(4);
  const auto s0 = random_state(rng, 5);
  auto run = [&](int n) {
    ShearState s = s0;
    for (int i = 0; i < n; ++i) s = step_exact_b(s, 0.5 / n);
    return s.q;
  };
  const double ref = run(4096);
  const double e1 = std::abs(run(16) - ref), e2 = std::abs(run(32) - ref);
  CHECK(std::log2(e1 / e2) > 3.7);
}

TEST_CASE("norm inflation") {
  const InflationParams p{0.1, 1.0, 10.0, 10.0, 0};
  CHECK(select_inflation_mode(p) == 400);
  const auto res = norm_inflation_experiment(p);
  CHECK(res.initial_norm < 0.1);
  REQUIRE(res.crossed);
  CHECK(res.t0 <= 5.0 * res.predicted_t0);
  CHECK(res.hs_norm.back() == doctest::Approx(10.0).epsilon(1e-9));

  InflationParams doubled = p;
  doubled.forced_k = 2 * res.k;
  const auto r2 = norm_inflation_experiment(doubled);
  doubled.forced_k = 4 * res.k;
  const auto r4 = norm_inflation_experiment(doubled);
  REQUIRE(r2.crossed);
  REQUIRE(r4.crossed);
  CHECK(r2.t0 <= res.t0);
  CHECK(r4.t0 <= r2.t0);

  // Threshold below the first-mode energy scale: crossing within a half-turn.
  const InflationParams easy{0.1, 1.0, 0.02, 100.0, 1};
  const auto re = norm_inflation_experiment(easy);
  REQUIRE(re.crossed);
  CHECK(re.t0 < std::numbers::pi / (std::sqrt(energy(make_state(-0.05, 1, {{1, 0.05 / std::sqrt(2.0)}}))) * 1));

  InflationParams tight = p;
  tight.horizon = 1e-3;
  tight.forced_k = 400;
  const auto rt = norm_inflation_experiment(tight);
  CHECK_FALSE(rt.crossed);
  CHECK(rt.sup_norm < 10.0);
}

TEST_CASE("radius law for rough data") {
  AnalyticityParams p;
  const auto res = loss_of_analyticity_experiment(p);
  CHECK(res.max_relative_error < 0.02);
  CHECK(res.energy_drift <= 1e-10);
  CHECK(res.q_monotone);
  CHECK(res.q_max <= res.energy_bound * (1 + 1e-12));
  CHECK(res.samples.size() == 20u);
  CHECK_THROWS_AS(loss_of_analyticity_experiment(AnalyticityParams{-1.0}), ShearError);
}
