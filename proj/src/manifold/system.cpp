#include "cxeuler/manifold.hpp"

#include <json.hpp>

#include <cmath>
#include <numeric>
#include <ostream>

namespace cxeuler::manifold {

using json = nlohmann::json;

namespace {

constexpr Complex kI{0.0, 1.0};

}  // namespace

int TaylorTerm::degree() const {
  return std::accumulate(alpha.begin(), alpha.end(), 0) + std::accumulate(beta.begin(), beta.end(), 0);
}

void LinearSymbol::validate(double axis_tol) const {
  if (lbold.rows() == 0 || lbold.rows() != lbold.cols()) throw ManifoldError("symbol: lbold must be square and nonempty");
  if (l0.rows() != lbold.rows() || l0.cols() != lbold.cols()) throw ManifoldError("symbol: l0 and lbold differ in shape");
  Eigen::ComplexEigenSolver<Mat> es(lbold, false);
  for (Complex mu : es.eigenvalues())
    if (std::abs(mu.real()) <= axis_tol)
      throw ManifoldError("symbol: eigenvalue of the principal part on the imaginary axis (not hyperbolic)");
}

std::vector<Complex> LinearSymbol::distinct_eigenvalues() const {
  Eigen::ComplexEigenSolver<Mat> es(lbold, false);
  std::vector<Complex> out;
  for (Complex mu : es.eigenvalues()) {
    bool merged = false;
    for (auto& o : out)
      if (std::abs(o - mu) <= 1e-6 * std::max(1.0, std::abs(o))) merged = true;
    if (!merged) out.push_back(mu);
  }
  return out;
}

double LinearSymbol::min_positive_real_part() const {
  double best = std::numeric_limits<double>::infinity();
  Eigen::ComplexEigenSolver<Mat> es(lbold, false);
  for (Complex l : es.eigenvalues())
    if (l.real() > 0.0) best = std::min(best, l.real());
  return best;
}

void LocalSystem::validate() const {
  if (m < 1) throw ManifoldError("system: m must be positive");
  if (static_cast<int>(c.size()) != m) throw ManifoldError("system: c must have m entries");
  if (a_u.rows() != m || a_u.cols() != m) throw ManifoldError("system: A_u must be m x m");
  if (a_p.rows() != m || a_p.cols() != m) throw ManifoldError("system: A_p must be m x m");
  if (!(rho > 0.0)) throw ManifoldError("system: rho must be positive");
  for (const auto& t : taylor) {
    if (static_cast<int>(t.alpha.size()) != m || static_cast<int>(t.beta.size()) != m ||
        static_cast<int>(t.coeff.size()) != m)
      throw ManifoldError("system: taylor term arrays must have m entries");
    for (int a : t.alpha)
      if (a < 0) throw ManifoldError("system: negative multi-index");
    for (int b : t.beta)
      if (b < 0) throw ManifoldError("system: negative multi-index");
    if (t.degree() < 2) throw ManifoldError("system: remainder terms must be of degree >= 2");
  }
  symbol().validate();
}

LinearSymbol LocalSystem::symbol() const {
  LinearSymbol s;
  s.l0 = -a_u.cast<Complex>();
  s.lbold = -kI * a_p.cast<Complex>();
  return s;
}

LocalSystem burgers_system() {
  LocalSystem s;
  s.m = 2;
  s.c = {0.0, 1.0};
  s.a_u = Eigen::MatrixXd::Zero(2, 2);
  s.a_p.resize(2, 2);
  s.a_p << 0.0, -3.0, 3.0, 0.0;
  // Ft = -3 (w p - linear part), w p the complex product in (re, im) pairs.
  s.taylor = {
      {{1, 0}, {1, 0}, {-3.0, 0.0}},
      {{0, 1}, {0, 1}, {3.0, 0.0}},
      {{1, 0}, {0, 1}, {0.0, -3.0}},
      {{0, 1}, {1, 0}, {0.0, -3.0}},
  };
  return s;
}

LocalSystem system_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ManifoldError(std::string("system json: ") + e.what());
  }
  try {
    LocalSystem s;
    s.m = j.at("m").get<int>();
    s.c = j.at("c").get<std::vector<double>>();
    auto matrix = [&](const char* key) {
      const auto rows = j.at(key).get<std::vector<std::vector<double>>>();
      Eigen::MatrixXd a(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (static_cast<Eigen::Index>(rows[r].size()) != a.cols()) throw ManifoldError(std::string("system json: ragged ") + key);
        for (std::size_t q = 0; q < rows[r].size(); ++q) a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(q)) = rows[r][q];
      }
      return a;
    };
    s.a_u = matrix("A_u");
    s.a_p = matrix("A_p");
    for (const auto& t : j.at("taylor"))
      s.taylor.push_back({t.at("alpha").get<std::vector<int>>(), t.at("beta").get<std::vector<int>>(),
                          t.at("tensor").get<std::vector<double>>()});
    if (j.contains("rho") && !j["rho"].is_null()) s.rho = j["rho"].get<double>();
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ManifoldError(std::string("system json: ") + e.what());
  }
}

std::string system_to_json(const LocalSystem& sys) {
  auto rows = [](const Eigen::MatrixXd& a) {
    json r = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index q = 0; q < a.cols(); ++q) row.push_back(a(i, q));
      r.push_back(row);
    }
    return r;
  };
  json j{{"m", sys.m}, {"c", sys.c}, {"A_u", rows(sys.a_u)}, {"A_p", rows(sys.a_p)}};
  j["taylor"] = json::array();
  for (const auto& t : sys.taylor) j["taylor"].push_back({{"alpha", t.alpha}, {"beta", t.beta}, {"tensor", t.coeff}});
  if (std::isfinite(sys.rho)) j["rho"] = sys.rho;
  return j.dump(2);
}

void write_trajectory_csv(std::ostream& os, const WeightedTrajectory& w) {
  os << "t,k,component,re,im\n";
  os.precision(17);
  for (std::size_t n = 0; n < w.times.size(); ++n) {
    const auto& f = w.fields[n];
    for (std::size_t i = 0; i < f.mode_count(); ++i) {
      const auto mode = f.mode(i);
      for (int c = 0; c < f.components(); ++c) {
        const Complex v = mode[static_cast<std::size_t>(c)];
        if (v == Complex{}) continue;
        os << w.times[n] << ',' << f.wavevector(i).x << ',' << c << ',' << v.real() << ',' << v.imag() << '\n';
      }
    }
  }
}

std::array<double, 2> geometric_burgers_hyperbolicity(double a, double b) {
  const double r = std::sqrt(4.0 * a * a + 3.0 * b * b);
  return {a + r, a - r};
}

}  // namespace cxeuler::manifold
