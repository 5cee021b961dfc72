#include "cxeuler/fourier.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>

namespace cxeuler::fourier {

void NormSpec::validate() const {
  if (!(r >= 0.0) || !std::isfinite(r)) throw FieldError("NormSpec: r must be a finite value >= 0");
  if (!(s >= 0.0) || !std::isfinite(s)) throw FieldError("NormSpec: s must be a finite value >= 0");
}

double norm(const FourierField& f, const NormSpec& spec) {
  spec.validate();
  double sum = 0.0;
  for (std::size_t i = 0; i < f.mode_count(); ++i) {
    const double mag = f.magnitude(i);
    if (mag == 0.0) continue;
    const Wavevector k = f.wavevector(i);
    if (spec.kind == NormKind::wiener) {
      sum += std::pow(k.bracket(), spec.s) * std::exp(spec.r * k.length()) * mag;
    } else {
      sum += std::pow(k.bracket(), 2.0 * spec.s) * mag * mag;
    }
  }
  return spec.kind == NormKind::wiener ? sum : std::sqrt(sum);
}

double wiener_norm(const FourierField& f, double r, double s) {
  return norm(f, NormSpec{r, s, NormKind::wiener});
}

double sobolev_norm(const FourierField& f, double s) {
  return norm(f, NormSpec{0.0, s, NormKind::sobolev});
}

namespace {

struct Entry {
  Wavevector k;
  Complex value;
};

std::vector<Entry> nonzero_entries(const FourierField& f) {
  std::vector<Entry> out;
  for (std::size_t i = 0; i < f.mode_count(); ++i) {
    const Complex v = f.data()[i];
    if (v != Complex{}) out.push_back({f.wavevector(i), v});
  }
  return out;
}

void check_scalar_pair(const FourierField& f, const FourierField& g) {
  if (f.dim() != g.dim()) throw FieldError("product: dimension mismatch");
  if (f.components() != 1 || g.components() != 1)
    throw FieldError("product: inputs must be scalar fields");
}

FourierField convolve(const FourierField& f, const FourierField& g, int cutoff) {
  FourierField out(f.dim(), cutoff, 1);
  const auto fe = nonzero_entries(f);
  const auto ge = nonzero_entries(g);
  for (const auto& a : fe) {
    for (const auto& b : ge) {
      const Wavevector k = a.k + b.k;
      if (out.contains(k)) out.at(k) += a.value * b.value;
    }
  }
  return out;
}

}  // namespace

FourierField product(const FourierField& f, const FourierField& g) {
  check_scalar_pair(f, g);
  return convolve(f, g, std::min(f.cutoff(), g.cutoff()));
}

FourierField product_full(const FourierField& f, const FourierField& g) {
  check_scalar_pair(f, g);
  return convolve(f, g, f.cutoff() + g.cutoff());
}

FourierField derivative(const FourierField& f, int axis) {
  if (axis < 0 || axis >= f.dim()) throw FieldError("derivative: invalid axis");
  FourierField out = f;
  for (std::size_t i = 0; i < out.mode_count(); ++i) {
    const Wavevector k = out.wavevector(i);
    const Complex factor{0.0, static_cast<double>(axis == 0 ? k.x : k.y)};
    for (auto& c : out.mode(i)) c *= factor;
  }
  return out;
}

std::optional<RadiusFit> fit_analyticity_radius(const FourierField& f, double floor) {
  std::vector<double> logs;
  std::vector<double> lengths;
  std::vector<double> brackets;
  std::set<long long> distinct;
  for (std::size_t i = 0; i < f.mode_count(); ++i) {
    const Wavevector k = f.wavevector(i);
    if (k.x == 0 && k.y == 0) continue;
    const double mag = f.magnitude(i);
    if (!(mag > floor)) continue;
    logs.push_back(std::log(mag));
    lengths.push_back(k.length());
    brackets.push_back(std::log(k.bracket()));
    distinct.insert(static_cast<long long>(k.x) * k.x + static_cast<long long>(k.y) * k.y);
  }
  if (distinct.size() < 3) return std::nullopt;

  const auto n = static_cast<Eigen::Index>(logs.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = -brackets[static_cast<std::size_t>(i)];
    design(i, 2) = -lengths[static_cast<std::size_t>(i)];
    rhs(i) = logs[static_cast<std::size_t>(i)];
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 3) return std::nullopt;
  const Eigen::Vector3d coef = qr.solve(rhs);

  RadiusFit fit;
  fit.intercept = coef(0);
  fit.algebraic_exponent = coef(1);
  fit.radius = std::max(0.0, coef(2));
  fit.modes_used = logs.size();
  return fit;
}

std::optional<double> estimate_analyticity_radius(const FourierField& f, double floor) {
  const auto fit = fit_analyticity_radius(f, floor);
  if (!fit) return std::nullopt;
  return fit->radius;
}

}  // namespace cxeuler::fourier
