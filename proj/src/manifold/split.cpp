#include "cxeuler/manifold.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <string>

namespace cxeuler::manifold {

namespace {

// Swap diagonal entries p, p+1 of the upper-triangular t with a unitary
// rotation, accumulating into q.
void swap_adjacent(Mat& t, Mat& q, Eigen::Index p) {
  const Complex a = t(p, p), b = t(p, p + 1), d = t(p + 1, p + 1);
  Complex x1 = b, x2 = d - a;
  const double r = std::hypot(std::abs(x1), std::abs(x2));
  if (r == 0.0) return;
  x1 /= r;
  x2 /= r;
  Eigen::Matrix2cd z;
  z << x1, -std::conj(x2), x2, std::conj(x1);
  t.middleRows(p, 2) = z.adjoint() * t.middleRows(p, 2);
  t.middleCols(p, 2) = t.middleCols(p, 2) * z;
  q.middleCols(p, 2) = q.middleCols(p, 2) * z;
  t(p + 1, p) = Complex{};
}

double spectral_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

int nearest_group(const std::vector<Complex>& mus, Complex z, double* d1 = nullptr, double* d2 = nullptr) {
  int best = -1;
  double first = std::numeric_limits<double>::infinity(), second = first;
  for (std::size_t g = 0; g < mus.size(); ++g) {
    const double d = std::abs(z - mus[g]);
    if (d < first) {
      second = first;
      first = d;
      best = static_cast<int>(g);
    } else if (d < second) {
      second = d;
    }
  }
  if (d1) *d1 = first;
  if (d2) *d2 = second;
  return best;
}

}  // namespace

ModeOperator::ModeOperator(const LinearSymbol& sym, int k, double gamma, double axis_tol)
    : k_(k), matrix_(sym.at(k)) {
  Eigen::ComplexEigenSolver<Mat> es(matrix_, false);
  for (Complex l : es.eigenvalues())
    if (std::abs(l.real() - gamma) <= axis_tol)
      throw ThresholdOnSpectrum("mode " + std::to_string(k) + ": eigenvalue with Re = " + std::to_string(l.real()) +
                                " on the threshold gamma = " + std::to_string(gamma));
  build([gamma](Complex l) { return l.real() > gamma; });
}

ModeOperator::ModeOperator(const LinearSymbol& sym, int k, const std::function<bool(Complex)>& select)
    : k_(k), matrix_(sym.at(k)) {
  build(select);
}

void ModeOperator::build(const std::function<bool(Complex)>& select) {
  const Eigen::Index m = matrix_.rows();
  Eigen::ComplexSchur<Mat> schur(matrix_);
  t_ = schur.matrixT().triangularView<Eigen::Upper>();
  q_ = schur.matrixU();

  std::vector<bool> sel(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) sel[static_cast<std::size_t>(i)] = select(t_(i, i));
  Eigen::Index top = 0;
  for (Eigen::Index j = 0; j < m; ++j) {
    if (!sel[static_cast<std::size_t>(j)]) continue;
    for (Eigen::Index p = j - 1; p >= top; --p) swap_adjacent(t_, q_, p);
    ++top;
  }
  nu_ = static_cast<int>(top);

  eigenvalues_.clear();
  for (Eigen::Index i = 0; i < m; ++i) eigenvalues_.push_back(t_(i, i));

  const Eigen::Index p = nu_, r = m - nu_;
  y_ = Mat::Zero(p, r);
  if (p > 0 && r > 0) {
    const Mat t11 = t_.topLeftCorner(p, p), t22 = t_.bottomRightCorner(r, r), t12 = t_.topRightCorner(p, r);
    for (Eigen::Index j = 0; j < r; ++j) {
      Vec rhs = -t12.col(j);
      for (Eigen::Index i = 0; i < j; ++i) rhs += y_.col(i) * t22(i, j);
      Mat shifted = t11 - t22(j, j) * Mat::Identity(p, p);
      y_.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
    }
  }

  p_u_ = apply_u([](const Mat& b) { return Mat::Identity(b.rows(), b.cols()); });
  p_cs_ = Mat::Identity(m, m) - p_u_;

  Eigen::ComplexEigenSolver<Mat> es(matrix_, true);
  Eigen::JacobiSVD<Mat> svd(es.eigenvectors());
  const auto sv = svd.singularValues();
  eig_cond_ = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
}

Mat ModeOperator::apply_u(const std::function<Mat(const Mat&)>& f) const {
  const Eigen::Index m = matrix_.rows(), p = nu_, r = m - nu_;
  Mat block = Mat::Zero(m, m);
  if (p > 0) {
    const Mat fu = f(t_.topLeftCorner(p, p));
    block.topLeftCorner(p, p) = fu;
    if (r > 0) block.topRightCorner(p, r) = -fu * y_;
  }
  return q_ * block * q_.adjoint();
}

Mat ModeOperator::apply_cs(const std::function<Mat(const Mat&)>& f) const {
  const Eigen::Index m = matrix_.rows(), p = nu_, r = m - nu_;
  Mat block = Mat::Zero(m, m);
  if (r > 0) {
    const Mat fc = f(t_.bottomRightCorner(r, r));
    block.bottomRightCorner(r, r) = fc;
    if (p > 0) block.topRightCorner(p, r) = y_ * fc;
  }
  return q_ * block * q_.adjoint();
}

Mat ModeOperator::exp_u(double t) const {
  return apply_u([t](const Mat& b) -> Mat { return (t * b).exp(); });
}

Mat ModeOperator::exp_cs(double t) const {
  return apply_cs([t](const Mat& b) -> Mat { return (t * b).exp(); });
}

std::vector<GroupLabel> eigenvalue_groups(const LinearSymbol& sym, int k, double group_radius) {
  if (k == 0) throw BelowGroupThreshold("eigenvalue groups: k = 0 has no principal-part limit");
  const auto mus = sym.distinct_eigenvalues();
  Eigen::ComplexEigenSolver<Mat> es(sym.at(k), false);
  std::vector<GroupLabel> out;
  for (Complex l : es.eigenvalues()) {
    double d1 = 0.0, d2 = 0.0;
    const int g = nearest_group(mus, l / static_cast<double>(k), &d1, &d2);
    if (d1 > group_radius)
      throw BelowGroupThreshold("eigenvalue groups: |k| = " + std::to_string(std::abs(k)) +
                                " below k0 (eigenvalue too far from the principal spectrum)");
    if (d2 <= 2.0 * group_radius)
      throw BelowGroupThreshold("eigenvalue groups: |k| = " + std::to_string(std::abs(k)) +
                                " below k0 (ambiguous clustering)");
    out.push_back({l, mus[static_cast<std::size_t>(g)], g});
  }
  return out;
}

Mat group_projection(const LinearSymbol& sym, int k, double group_radius, int group) {
  eigenvalue_groups(sym, k, group_radius);
  const auto mus = sym.distinct_eigenvalues();
  const double kd = static_cast<double>(k);
  ModeOperator op(sym, k, [&](Complex l) { return nearest_group(mus, l / kd) == group; });
  return op.p_u();
}

ModeOperator modified_projection(const LinearSymbol& sym, int k, double gamma, double group_radius) {
  std::vector<GroupLabel> labels;
  try {
    labels = eigenvalue_groups(sym, k, group_radius);
  } catch (const BelowGroupThreshold&) {
    return ModeOperator(sym, k, gamma);
  }
  const auto mus = sym.distinct_eigenvalues();
  std::vector<int> above(mus.size(), 0), below(mus.size(), 0);
  for (const auto& g : labels) {
    if (std::abs(g.lambda.real() - gamma) <= 1e-9)
      throw ThresholdOnSpectrum("modified projection: eigenvalue on the threshold at k = " + std::to_string(k));
    (g.lambda.real() > gamma ? above : below)[static_cast<std::size_t>(g.group)] = 1;
  }
  const double kd = static_cast<double>(k);
  return ModeOperator(sym, k, [&](Complex l) {
    const auto g = static_cast<std::size_t>(nearest_group(mus, l / kd));
    return l.real() > gamma && !(above[g] && below[g]);
  });
}

SemigroupConstants semigroup_bound_check(const LinearSymbol& sym, double gamma, double nu, int kmax,
                                         double tmax, int t_samples) {
  if (kmax < 1 || !(tmax > 0.0) || t_samples < 2) throw ManifoldError("semigroup check: bad sampling parameters");
  if (!(gamma > 0.0) || gamma > 0.75 * sym.min_positive_real_part())
    throw ManifoldError("semigroup check: gamma must lie in (0, 3 m0 / 4]");
  SemigroupConstants c;
  for (int k = -kmax; k <= kmax; ++k) {
    const ModeOperator op(sym, k, gamma);
    const double ak = std::abs(k);
    double cu = 0.0, ccs = 0.0;
    for (int j = 0; j < t_samples; ++j) {
      const double t = tmax * j / (t_samples - 1);
      const double nu_norm = spectral_norm(op.exp_u(-t));
      if (nu_norm > 0.0) cu = std::max(cu, std::exp(std::log(nu_norm) + (gamma + nu * ak) * t));
      const double ncs = spectral_norm(op.exp_cs(t));
      if (ncs > 0.0) ccs = std::max(ccs, std::exp(std::log(ncs) - (gamma - nu * ak) * t));
      if (std::isnan(nu_norm) || std::isnan(ncs)) cu = std::numeric_limits<double>::infinity();
    }
    c.c_u = std::max(c.c_u, cu);
    c.c_cs = std::max(c.c_cs, ccs);
    if (2 * std::abs(k) <= kmax) {
      c.c_u_half = std::max(c.c_u_half, cu);
      c.c_cs_half = std::max(c.c_cs_half, ccs);
    }
  }
  c.diverging = !std::isfinite(c.c_u) || !std::isfinite(c.c_cs) || c.c_u > 1.5 * c.c_u_half ||
                c.c_cs > 1.5 * c.c_cs_half;
  return c;
}

std::array<Mat, 3> phi_functions(const Mat& a) {
  const Eigen::Index n = a.rows();
  Mat big = Mat::Zero(3 * n, 3 * n);
  big.topLeftCorner(n, n) = a;
  big.block(0, n, n, n) = Mat::Identity(n, n);
  big.block(n, 2 * n, n, n) = Mat::Identity(n, n);
  const Mat e = big.exp();
  return {e.topLeftCorner(n, n), e.block(0, n, n, n), e.block(0, 2 * n, n, n)};
}

StepWeights forward_weights(const ModeOperator& op, double h) {
  StepWeights w;
  w.e = op.apply_cs([h](const Mat& b) -> Mat { return phi_functions(h * b)[0]; });
  w.a = op.apply_cs([h](const Mat& b) -> Mat {
    const auto p = phi_functions(h * b);
    return h * (p[1] - p[2]);
  });
  w.b = op.apply_cs([h](const Mat& b) -> Mat { return h * phi_functions(h * b)[2]; });
  return w;
}

StepWeights backward_weights(const ModeOperator& op, double h) {
  StepWeights w;
  w.e = op.apply_u([h](const Mat& b) -> Mat { return phi_functions(-h * b)[0]; });
  w.a = op.apply_u([h](const Mat& b) -> Mat { return h * phi_functions(-h * b)[2]; });
  w.b = op.apply_u([h](const Mat& b) -> Mat {
    const auto p = phi_functions(-h * b);
    return h * (p[1] - p[2]);
  });
  return w;
}

}  // namespace cxeuler::manifold
