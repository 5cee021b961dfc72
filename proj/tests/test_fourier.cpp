#include <doctest.h>

#include "cxeuler/fourier.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace cxeuler::fourier;

namespace {

FourierField random_field(std::mt19937_64& rng, int dim, int cutoff, int support) {
  FourierField f(dim, cutoff, 1);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> pick(-support, support);
  for (int n = 0; n < 12; ++n) {
    const Wavevector k{pick(rng), dim == 2 ? pick(rng) : 0};
    f.at(k) = Complex{g(rng), g(rng)};
  }
  return f;
}

// Independent oracle: brute-force sum over every wavevector pair.
double wiener_oracle(const FourierField& f, double r) {
  double sum = 0.0;
  for (int ky = -f.cutoff(); ky <= (f.dim() == 2 ? f.cutoff() : 0); ++ky)
    for (int kx = -f.cutoff(); kx <= f.cutoff(); ++kx)
      sum += std::exp(r * std::hypot(kx, ky)) * std::abs(f.get({kx, ky}));
  return sum;
}

}  // namespace

TEST_CASE("field storage and indexing") {
  FourierField f(2, 3, 2);
  CHECK(f.side() == 7);
  CHECK(f.mode_count() == 49u);
  for (std::size_t i = 0; i < f.mode_count(); ++i) CHECK(f.index(f.wavevector(i)) == i);
  f.at({-3, 2}, 1) = Complex{1.0, 2.0};
  CHECK(f.get({-3, 2}, 1) == Complex{1.0, 2.0});
  CHECK(f.get({4, 0}) == Complex{});
  CHECK_THROWS_AS(f.at({4, 0}), FieldError);
  CHECK(f.nonzero_count() == 1u);
  CHECK_THROWS_AS(FourierField(3, 1), FieldError);
  CHECK_THROWS_AS(FourierField(1, -1), FieldError);
  FourierField g(1, 3);
  CHECK_THROWS_AS(g += FourierField(1, 4), FieldError);
}

TEST_CASE("norm examples") {
  FourierField f(1, 4);
  f.at({2, 0}) = 3.0;
  CHECK(wiener_norm(f) == doctest::Approx(3.0));
  CHECK(wiener_norm(f, 1.0) == doctest::Approx(3.0 * std::exp(2.0)));
  CHECK(sobolev_norm(f, 1.0) == doctest::Approx(3.0 * std::sqrt(5.0)));
  CHECK(norm(FourierField(1, 4), NormSpec{0.3, 1.0, NormKind::sobolev}) == 0.0);
  CHECK_THROWS_AS(norm(f, NormSpec{-1.0, 0.0}), FieldError);
  CHECK_THROWS_AS(norm(f, NormSpec{0.0, -0.5}), FieldError);

  FourierField v(2, 2, 2);
  v.at({1, 1}, 0) = 3.0;
  v.at({1, 1}, 1) = Complex{0.0, 4.0};
  CHECK(wiener_norm(v, 0.0, 2.0) == doctest::Approx(5.0 * 3.0));
}

TEST_CASE("product examples") {
  FourierField a(1, 4), b(1, 4);
  a.at({1, 0}) = 1.0;
  b.at({2, 0}) = 1.0;
  const auto ab = product(a, b);
  CHECK(ab.get({3, 0}) == Complex{1.0});
  CHECK(ab.nonzero_count() == 1u);
  CHECK(product(a, FourierField(1, 4)).nonzero_count() == 0u);

  FourierField c(1, 4);
  c.at({1, 0}) = 1.0;
  c.at({-1, 0}) = 1.0;
  const auto cc = product(c, c);
  CHECK(cc.get({2, 0}) == Complex{1.0});
  CHECK(cc.get({-2, 0}) == Complex{1.0});
  CHECK(cc.get({0, 0}) == Complex{2.0});
  CHECK(cc.nonzero_count() == 3u);

  CHECK_THROWS_AS(product(a, FourierField(2, 4)), FieldError);
  CHECK_THROWS_AS(product(a, FourierField(1, 4, 2)), FieldError);

  FourierField top(1, 2);
  top.at({2, 0}) = 1.0;
  CHECK(product(top, top).nonzero_count() == 0u);
  CHECK(product_full(top, top).get({4, 0}) == Complex{1.0});
}

TEST_CASE("algebra property on random fields") {
  std::mt19937_64 rng(7);
  for (int dim = 1; dim <= 2; ++dim) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto f = random_field(rng, dim, 8, 4);
      const auto g = random_field(rng, dim, 8, 4);
      const auto fg = product(f, g);
      for (double r : {0.0, 0.1, 1.0}) {
        CHECK(wiener_norm(f, r) == doctest::Approx(wiener_oracle(f, r)).epsilon(1e-12));
        CHECK(wiener_norm(fg, r) <= wiener_norm(f, r) * wiener_norm(g, r) * (1 + 1e-12));
      }
    }
  }
}

TEST_CASE("derivative") {
  FourierField f(1, 3);
  f.at({1, 0}) = 1.0;
  f.at({0, 0}) = 5.0;
  const auto df = derivative(f, 0);
  CHECK(df.get({1, 0}) == Complex{0.0, 1.0});
  CHECK(df.get({0, 0}) == Complex{});
  CHECK_THROWS_AS(derivative(f, 1), FieldError);

  FourierField g(2, 2);
  g.at({1, -2}) = 1.0;
  CHECK(derivative(g, 1).get({1, -2}) == Complex{0.0, -2.0});
}

TEST_CASE("gradient estimate") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const auto f = random_field(rng, trial % 2 + 1, 10, 10);
    for (auto [r, rp] : {std::pair{1.0, 0.5}, std::pair{0.3, 0.0}, std::pair{2.0, 1.9}}) {
      const double lhs = wiener_norm(derivative(f, 0), rp);
      CHECK(lhs <= std::exp(1.0) / (r - rp) * wiener_norm(f, r));
    }
  }
}

TEST_CASE("homogeneity and triangle inequality") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = random_field(rng, 2, 6, 6);
    const auto g = random_field(rng, 2, 6, 6);
    const Complex a{-1.7, 0.4};
    for (const NormSpec spec : {NormSpec{0.0, 0.0}, NormSpec{0.5, 1.0}, NormSpec{0.0, 2.0, NormKind::sobolev}}) {
      CHECK(norm(a * f, spec) == doctest::Approx(std::abs(a) * norm(f, spec)).epsilon(1e-12));
      CHECK(norm(f + g, spec) <= (norm(f, spec) + norm(g, spec)) * (1 + 1e-12));
    }
  }
}

TEST_CASE("analyticity radius estimation") {
  FourierField f(1, 20);
  for (int k = 1; k <= 20; ++k) f.at({k, 0}) = std::exp(-2.0 * k);
  const auto r = estimate_analyticity_radius(f);
  REQUIRE(r.has_value());
  CHECK(std::abs(*r - 2.0) < 1e-6);

  FourierField flat(1, 5);
  for (int k = 1; k <= 5; ++k) flat.at({k, 0}) = 1.0;
  REQUIRE(estimate_analyticity_radius(flat).has_value());
  CHECK(*estimate_analyticity_radius(flat) == doctest::Approx(0.0).epsilon(1e-9));

  FourierField mixed(1, 40);
  for (int k = 1; k <= 40; ++k) mixed.at({k, 0}) = std::exp(-0.5 * k) / (1.0 + k * k);
  REQUIRE(estimate_analyticity_radius(mixed).has_value());
  CHECK(std::abs(*estimate_analyticity_radius(mixed) - 0.5) < 0.05);

  FourierField sparse(1, 5);
  sparse.at({1, 0}) = 1.0;
  sparse.at({-1, 0}) = 1.0;
  sparse.at({2, 0}) = 0.5;
  CHECK_FALSE(estimate_analyticity_radius(sparse).has_value());

  FourierField growing(1, 10);
  for (int k = 1; k <= 10; ++k) growing.at({k, 0}) = std::exp(0.3 * k);
  CHECK(*estimate_analyticity_radius(growing) == 0.0);

  FourierField floor_cut(1, 30);
  for (int k = 1; k <= 30; ++k) floor_cut.at({k, 0}) = k <= 10 ? std::exp(-1.0 * k) : 1e-15;
  CHECK(std::abs(*estimate_analyticity_radius(floor_cut) - 1.0) < 1e-9);
}

TEST_CASE("json round trip and csv") {
  std::mt19937_64 rng(5);
  const auto f = random_field(rng, 2, 4, 4);
  const auto g = from_json(to_json(f));
  REQUIRE(g.same_shape(f));
  for (std::size_t i = 0; i < f.mode_count(); ++i) CHECK(g.data()[i] == f.data()[i]);
  CHECK_THROWS_AS(from_json("{"), FieldError);
  CHECK_THROWS_AS(from_json(R"({"dim":1,"K":1,"modes":[{"k":[3],"re":[1],"im":[0]}]})"), FieldError);

  FourierField h(1, 1);
  h.at({1, 0}) = Complex{3.0, 4.0};
  std::ostringstream os;
  write_decay_csv(os, h);
  CHECK(os.str() == "k,abs\n-1,0\n0,0\n1,5\n");
}

TEST_CASE("real-valued flag") {
  FourierField f(2, 2);
  f.at({1, 2}) = Complex{1.0, 2.0};
  CHECK_FALSE(f.is_real_valued());
  f.at({-1, -2}) = Complex{1.0, -2.0};
  CHECK(f.is_real_valued());
}
