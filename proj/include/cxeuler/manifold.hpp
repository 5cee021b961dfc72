#pragma once

// Unstable-manifold construction for 1-D systems d_t u + F(u, d_x u) = 0
// linearised at an equilibrium u = c:
//     d_t w - L w = Ft(w, d_x w),   (L w)_k = (L0 + k Lb) w_k,
// with L0 = -d_u F(c, 0), Lb = -i d_p F(c, 0), and Ft the quadratic and
// higher Taylor remainder. Solutions decaying as t -> -infinity are found as
// fixed points of the Duhamel map built from the spectral split of each L_k.

#include "cxeuler/fourier.hpp"

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cxeuler::manifold {

using fourier::Complex;
using fourier::FourierField;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

class ManifoldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An eigenvalue lies on the line Re lambda = gamma; perturb gamma.
class ThresholdOnSpectrum : public ManifoldError {
 public:
  using ManifoldError::ManifoldError;
};

/// Eigenvalue groups are not resolved at this |k|.
class BelowGroupThreshold : public ManifoldError {
 public:
  using ManifoldError::ManifoldError;
};

/// Monomial coeff * prod_j w_j^alpha_j * prod_j p_j^beta_j of the remainder,
/// coeff holding one real entry per output component.
struct TaylorTerm {
  std::vector<int> alpha;
  std::vector<int> beta;
  std::vector<double> coeff;

  int degree() const;
};

/// L_k = l0 + k * lbold.
struct LinearSymbol {
  Mat l0;
  Mat lbold;

  int m() const { return static_cast<int>(lbold.rows()); }
  Mat at(int k) const { return l0 + static_cast<double>(k) * lbold; }
  /// Shapes agree and lbold has no eigenvalue within axis_tol of the imaginary axis.
  void validate(double axis_tol = 1e-9) const;
  /// Distinct eigenvalues of lbold (defective clusters merged).
  std::vector<Complex> distinct_eigenvalues() const;
  /// Smallest positive real part over the eigenvalues of lbold (m0).
  double min_positive_real_part() const;
};

struct LocalSystem {
  int m = 0;
  std::vector<double> c;  // equilibrium
  Eigen::MatrixXd a_u;    // d_u F(c, 0)
  Eigen::MatrixXd a_p;    // d_p F(c, 0)
  std::vector<TaylorTerm> taylor;
  double rho = std::numeric_limits<double>::infinity();  // analyticity radius of Ft

  void validate() const;
  LinearSymbol symbol() const;
};

/// d_t u + 3 u d_x u = 0 for complex u = u_1 + i u_2, linearised at u = i.
LocalSystem burgers_system();

/// {m, c, A_u, A_p, taylor:[{alpha, beta, tensor}], rho?}
LocalSystem system_from_json(const std::string& text);
std::string system_to_json(const LocalSystem& sys);

/// Spectral split of L_k. The selected eigenvalues span the "u" block of an
/// ordered complex Schur form L_k = Q T Q^H, T = [[T11, T12], [0, T22]];
/// with T11 Y - Y T22 = -T12 the projections are
///     P_u = Q [[I, -Y], [0, 0]] Q^H,   P_cs = I - P_u,
/// and f(L_k) P_u, f(L_k) P_cs follow from f(T11), f(T22).
class ModeOperator {
 public:
  /// Split at Re lambda > gamma. Throws ThresholdOnSpectrum within axis_tol.
  ModeOperator(const LinearSymbol& sym, int k, double gamma, double axis_tol = 1e-9);
  /// Split with an arbitrary eigenvalue selection.
  ModeOperator(const LinearSymbol& sym, int k, const std::function<bool(Complex)>& select);

  int k() const { return k_; }
  int m() const { return static_cast<int>(matrix_.rows()); }
  int unstable_dim() const { return nu_; }
  const Mat& matrix() const { return matrix_; }
  const std::vector<Complex>& eigenvalues() const { return eigenvalues_; }
  const Mat& p_u() const { return p_u_; }
  const Mat& p_cs() const { return p_cs_; }
  /// Condition number of the eigenvector matrix (infinite when defective).
  double eigenvector_condition() const { return eig_cond_; }

  /// f(L_k) P_u and f(L_k) P_cs for a matrix function f applied to the
  /// triangular Schur blocks.
  Mat apply_u(const std::function<Mat(const Mat&)>& f) const;
  Mat apply_cs(const std::function<Mat(const Mat&)>& f) const;
  Mat exp_u(double t) const;
  Mat exp_cs(double t) const;

 private:
  void build(const std::function<bool(Complex)>& select);

  int k_ = 0;
  Mat matrix_;
  Mat q_;
  Mat t_;
  Mat y_;
  int nu_ = 0;
  std::vector<Complex> eigenvalues_;
  Mat p_u_;
  Mat p_cs_;
  double eig_cond_ = 0.0;
};

inline ModeOperator assemble_mode_operator(const LocalSystem& sys, int k, double gamma) {
  return ModeOperator(sys.symbol(), k, gamma);
}

struct GroupLabel {
  Complex lambda;  // eigenvalue of L_k
  Complex mu;      // its limit point in the spectrum of lbold
  int group = 0;   // index into distinct_eigenvalues()
};

/// Label the eigenvalues of L_k by nearest mu in spec(lbold) through
/// lambda / k = mu + o(1). Throws BelowGroupThreshold when some |lambda/k - mu|
/// exceeds group_radius or two mu lie within 2 group_radius of lambda / k.
std::vector<GroupLabel> eigenvalue_groups(const LinearSymbol& sym, int k, double group_radius);

/// Spectral projection onto the eigenvalue group of mu (sum of its spectral subspaces).
Mat group_projection(const LinearSymbol& sym, int k, double group_radius, int group);

/// Projection that never splits an eigenvalue group: a group meeting both
/// sides of Re lambda = gamma goes entirely to the cs part. Falls back to the
/// plain split when groups are unresolved at this k.
ModeOperator modified_projection(const LinearSymbol& sym, int k, double gamma, double group_radius);

struct SemigroupConstants {
  double c_u = 0.0;        // sup ||e^{t L_k} P_u|| e^{-(gamma + nu|k|) t}, t <= 0
  double c_cs = 0.0;       // sup ||e^{t L_k} P_cs|| e^{-(gamma - nu|k|) t}, t >= 0
  double c_u_half = 0.0;   // same over |k| <= kmax / 2
  double c_cs_half = 0.0;
  bool diverging = false;  // constants not finite or growing with the k range
};

/// Requires 0 < gamma <= 3 m0 / 4.
SemigroupConstants semigroup_bound_check(const LinearSymbol& sym, double gamma, double nu, int kmax,
                                         double tmax, int t_samples = 101);

/// Ft(w, wx) summed over the Taylor terms with Galerkin-truncated products.
/// Throws when ||w|| or ||wx|| (A^0) exceeds rho / 4.
FourierField nonlinear_eval(const LocalSystem& sys, const FourierField& w, const FourierField& wx);

/// sum_terms |coeff| ||w||^{|alpha|} ||wx||^{|beta|}, the A^0 majorant of Ft.
double composition_bound(const LocalSystem& sys, const FourierField& w, const FourierField& wx);

/// Exponential-integrator weights for one step of a linear-in-time source:
///     forward:  y_n = e y_{n-1} + a g_{n-1} + b g_n   (cs part, from the past)
///     backward: y_n = e y_{n+1} + a g_n + b g_{n+1}   (u part, from t = 0)
struct StepWeights {
  Mat e;
  Mat a;
  Mat b;
};

/// phi_1(z) = (e^z - 1)/z and phi_2(z) = (e^z - 1 - z)/z^2 of a square matrix,
/// returned as {e^A, phi_1(A), phi_2(A)}.
std::array<Mat, 3> phi_functions(const Mat& a);

StepWeights forward_weights(const ModeOperator& op, double h);
StepWeights backward_weights(const ModeOperator& op, double h);

struct WeightedTrajectory {
  std::vector<double> times;  // -T = t_0 < ... < t_N = 0
  std::vector<FourierField> fields;
  double gamma = 0.0;
  double zeta = 0.0;
  double s = 1.0;

  /// sum_k sup_n <k>^s e^{-gamma t_n + zeta |t_n| |k|} |w_k(t_n)|.
  double norm() const;
};

double weighted_norm(const std::vector<double>& times, const std::vector<FourierField>& fields,
                     double rate, double zeta, double s);

struct ManifoldParams {
  double gamma = 1.5;
  double zeta = 0.5;
  double nu = 1.0;
  double delta = 0.01;
  double m0 = 3.0;
  double eps0 = 0.25;  // calibrated, see calibrate_eps0
  double eps1 = 0.5;   // calibrated, see calibrate_eps1
  int cutoff = 32;
  double horizon = 1106.0 / 120.0;  // T
  int nodes = 1106;                 // N, step T / N
  double picard_tol = 1e-10;
  int picard_max_iters = 60;
  double group_radius = 0.5;

  double step() const { return horizon / nodes; }
  /// Throws ManifoldError naming the offending field.
  void validate() const;
  /// Step (10/gamma)/800 with T the first node past ln(1e12)/(2 gamma).
  static ManifoldParams defaults_for(double gamma);
};

struct PicardOptions {
  bool start_from_linear = false;
  bool check_preconditions = true;
  bool throw_on_failure = true;
};

struct PicardResult {
  WeightedTrajectory trajectory;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  double contraction = 0.0;  // max ratio of successive differences
  std::vector<double> residual_history;
  double a0_norm = 0.0;              // ||a0||_{A^{0,1}}
  double trajectory_norm = 0.0;      // weighted norm (gamma, zeta, s = 1)
  double smoothing_constant = 0.0;   // trajectory_norm / a0_norm
  double tail_budget = 0.0;          // trajectory_norm * e^{-2 gamma T}
  double projection_defect = 0.0;    // ||P_u w(0) - a0||_{A^0}
};

/// Unstable mode of L_k with the largest real part, unit Euclidean norm,
/// first nonzero entry real positive.
struct Eigenmode {
  int k = 0;
  Complex lambda;
  Vec v;
  Complex amplitude{1.0};
};
Eigenmode leading_eigenmode(const LinearSymbol& sym, int k);

FourierField mode_field(const std::vector<Eigenmode>& modes, int m, int cutoff);

PicardResult picard_solve(const LocalSystem& sys, const FourierField& a0, const ManifoldParams& params,
                          const PicardOptions& opts = {});

/// max over interior nodes of the fourth-order finite-difference residual
/// ||d_t w - L w - Ft(w, d_x w)||_{A^0}, relative to max ||d_t w||_{A^0}.
double pde_residual(const LocalSystem& sys, const WeightedTrajectory& w);

struct ScatteringResult {
  WeightedTrajectory w;  // v + e^{tL} b0
  WeightedTrajectory v;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  double b0_norm = 0.0;      // ||b0||_{A^{0,1}}
  double v_norm = 0.0;       // weighted norm at rate 3 gamma / 2, zeta = 0
  double ratio = 0.0;        // v_norm / b0_norm^2
  double contraction = 0.0;
  FourierField a0;           // P_u w(0)
};

/// Solve for v = w - e^{tL} b0 with the modified split at (3/2 + 3 delta) gamma.
ScatteringResult scattering_solve(const LocalSystem& sys, const std::vector<Eigenmode>& b0,
                                  const ManifoldParams& params, bool check_preconditions = true);

struct IllposedRow {
  int n = 0;
  bool skipped = false;
  std::string reason;
  int cutoff = 0;
  double b0_hs = 0.0;
  double b0_a01 = 0.0;
  double a0_hs = 0.0;
  double a0_a01 = 0.0;
  double w_hs = 0.0;           // ||w(., t)||_{H^s}
  double linear_hs = 0.0;      // ||e^{tL} b0||_{H^s}
  double linear_expected = 0.0;  // e^{Re lambda_n t} 2M
};

struct IllposedParams {
  double s = 2.0;
  double t = -0.5;
  double threshold = 0.5;  // M
  std::vector<int> n_list{4, 8, 16};
};

std::vector<IllposedRow> illposedness_experiment(const LocalSystem& sys, const IllposedParams& p,
                                                 const ManifoldParams& params);

/// Roots of lambda^2 - 2 a lambda - 3 (a^2 + b^2): a +- sqrt(4 a^2 + 3 b^2).
std::array<double, 2> geometric_burgers_hyperbolicity(double a, double b);

/// Largest power of 1/2 (from 1/2 down to 2^-max_halvings) at which the
/// Picard or scattering iteration on a k = 1 eigenmode contracts with factor <= 1/2.
double calibrate_eps0(const LocalSystem& sys, ManifoldParams params, int max_halvings = 12);
double calibrate_eps1(const LocalSystem& sys, ManifoldParams params, int max_halvings = 12);

/// CSV rows t,k,component,re,im for every nonzero coefficient.
void write_trajectory_csv(std::ostream& os, const WeightedTrajectory& w);

}  // namespace cxeuler::manifold
