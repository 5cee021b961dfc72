#include "cxeuler/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cxeuler::manifold {

namespace {

using fourier::derivative;
using fourier::product;
using fourier::Wavevector;
using fourier::wiener_norm;

Eigen::Map<const Vec> as_vec(std::span<const Complex> s) {
  return {s.data(), static_cast<Eigen::Index>(s.size())};
}

Eigen::Map<Vec> as_vec(std::span<Complex> s) { return {s.data(), static_cast<Eigen::Index>(s.size())}; }

void check_field(const FourierField& f, int m, const char* what) {
  if (f.dim() != 1 || f.components() != m)
    throw ManifoldError(std::string(what) + ": expected a 1-D field with " + std::to_string(m) + " components");
}

std::vector<double> time_nodes(const ManifoldParams& p) {
  std::vector<double> t(static_cast<std::size_t>(p.nodes) + 1);
  const double h = p.step();
  for (int n = 0; n <= p.nodes; ++n) t[static_cast<std::size_t>(n)] = (n - p.nodes) * h;
  t.back() = 0.0;
  return t;
}

/// Per-mode split and step weights for k in [-K, K].
struct Split {
  int cutoff = 0;
  std::vector<ModeOperator> ops;
  std::vector<StepWeights> fwd;
  std::vector<StepWeights> bwd;

  template <class Make>
  Split(int k_max, double h, Make make) : cutoff(k_max) {
    for (int k = -k_max; k <= k_max; ++k) {
      ops.push_back(make(k));
      fwd.push_back(forward_weights(ops.back(), h));
      bwd.push_back(backward_weights(ops.back(), h));
    }
  }
  std::size_t slot(int k) const { return static_cast<std::size_t>(k + cutoff); }
};

/// -int_t^0 e^{(t-s)L} P_u g ds + int_{-T}^t e^{(t-s)L} P_cs g ds on every node.
std::vector<FourierField> duhamel(const Split& sp, const std::vector<FourierField>& g) {
  const std::size_t nn = g.size();
  std::vector<FourierField> out(nn, FourierField::zeros_like(g.front()));
  const int m = g.front().components();
  for (int k = -sp.cutoff; k <= sp.cutoff; ++k) {
    const Wavevector kv{k, 0};
    const auto& f = sp.fwd[sp.slot(k)];
    const auto& b = sp.bwd[sp.slot(k)];
    bool any = false;
    for (const auto& gn : g)
      if (as_vec(gn.coeffs(kv)).squaredNorm() > 0.0) any = true;
    if (!any) continue;
    Vec acc = Vec::Zero(m);
    for (std::size_t n = 1; n < nn; ++n) {
      acc = f.e * acc + f.a * as_vec(g[n - 1].coeffs(kv)) + f.b * as_vec(g[n].coeffs(kv));
      as_vec(out[n].coeffs(kv)) += acc;
    }
    acc.setZero();
    for (std::size_t n = nn - 1; n-- > 0;) {
      acc = b.e * acc + b.a * as_vec(g[n].coeffs(kv)) + b.b * as_vec(g[n + 1].coeffs(kv));
      as_vec(out[n].coeffs(kv)) -= acc;
    }
  }
  return out;
}

std::vector<FourierField> remainder_along(const LocalSystem& sys, const std::vector<FourierField>& w) {
  std::vector<FourierField> g;
  g.reserve(w.size());
  for (const auto& f : w) g.push_back(nonlinear_eval(sys, f, derivative(f, 0)));
  return g;
}

double contraction_of(const std::vector<double>& hist, double scale) {
  double c = 0.0;
  for (std::size_t j = 1; j < hist.size(); ++j)
    if (hist[j - 1] > 1e-12 * std::max(scale, 1e-300)) c = std::max(c, hist[j] / hist[j - 1]);
  return c;
}

/// Fixed-point loop shared by the Picard and scattering problems:
/// x <- base + duhamel(Ft(x + shift)), residual in the given weighted norm.
struct LoopResult {
  std::vector<FourierField> x;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> history;
};

LoopResult fixed_point(const LocalSystem& sys, const Split& sp, const std::vector<double>& t,
                       const std::vector<FourierField>& base, const std::vector<FourierField>* shift,
                       std::vector<FourierField> x, double rate, double zeta, double tol, int max_iters) {
  LoopResult r;
  for (int it = 1; it <= max_iters; ++it) {
    std::vector<FourierField> arg = x;
    if (shift)
      for (std::size_t n = 0; n < arg.size(); ++n) arg[n] += (*shift)[n];
    auto next = duhamel(sp, remainder_along(sys, arg));
    for (std::size_t n = 0; n < next.size(); ++n) next[n] += base[n];
    std::vector<FourierField> diff(next.size());
    for (std::size_t n = 0; n < next.size(); ++n) diff[n] = next[n] - x[n];
    const double d = weighted_norm(t, diff, rate, zeta, 1.0);
    r.history.push_back(d);
    x = std::move(next);
    r.iterations = it;
    r.residual = d;
    if (!std::isfinite(d)) break;
    if (d <= tol) {
      r.converged = true;
      break;
    }
  }
  r.x = std::move(x);
  return r;
}

double a01_norm(const FourierField& f) { return wiener_norm(f, 0.0, 1.0); }

}  // namespace

double weighted_norm(const std::vector<double>& times, const std::vector<FourierField>& fields, double rate,
                     double zeta, double s) {
  if (times.size() != fields.size() || fields.empty()) throw ManifoldError("weighted norm: times and fields differ in length");
  const auto& f0 = fields.front();
  double total = 0.0;
  for (std::size_t i = 0; i < f0.mode_count(); ++i) {
    const auto k = f0.wavevector(i);
    const double ak = std::abs(k.x);
    const double w = s * std::log(k.bracket());
    double sup = 0.0;
    for (std::size_t n = 0; n < times.size(); ++n) {
      const double mag = fields[n].magnitude(i);
      if (mag == 0.0) continue;
      sup = std::max(sup, std::exp(std::log(mag) + w - rate * times[n] + zeta * std::abs(times[n]) * ak));
    }
    total += sup;
  }
  return total;
}

double WeightedTrajectory::norm() const { return weighted_norm(times, fields, gamma, zeta, s); }

void ManifoldParams::validate() const {
  auto fail = [](const std::string& f, const std::string& why) { throw ManifoldError("params." + f + ": " + why); };
  if (!(gamma > 0.0)) fail("gamma", "must be positive");
  if (!(zeta >= 0.0)) fail("zeta", "must be non-negative");
  if (!(nu > 0.0)) fail("nu", "must be positive");
  if (zeta > nu / 2.0) fail("zeta", "must not exceed nu/2");
  if (!(delta > 0.0 && delta < 0.25)) fail("delta", "must lie in (0, 1/4)");
  if (!(m0 > 0.0)) fail("m0", "must be positive");
  if (!(eps0 > 0.0)) fail("eps0", "must be positive");
  if (!(eps1 > 0.0)) fail("eps1", "must be positive");
  if (cutoff < 1) fail("cutoff", "must be >= 1");
  if (!(horizon > 0.0)) fail("horizon", "must be positive");
  if (nodes < 4) fail("nodes", "must be >= 4");
  if (!(picard_tol > 0.0)) fail("picard_tol", "must be positive");
  if (picard_max_iters < 1) fail("picard_max_iters", "must be >= 1");
  if (!(group_radius > 0.0)) fail("group_radius", "must be positive");
}

ManifoldParams ManifoldParams::defaults_for(double gamma) {
  if (!(gamma > 0.0)) throw ManifoldError("params.gamma: must be positive");
  ManifoldParams p;
  p.gamma = gamma;
  const double h = (10.0 / gamma) / 800.0;
  p.nodes = static_cast<int>(std::ceil(std::log(1e12) / (2.0 * gamma) / h - 1e-9));
  p.horizon = p.nodes * h;
  return p;
}

FourierField nonlinear_eval(const LocalSystem& sys, const FourierField& w, const FourierField& wx) {
  check_field(w, sys.m, "nonlinear_eval w");
  check_field(wx, sys.m, "nonlinear_eval wx");
  if (!w.same_shape(wx)) throw ManifoldError("nonlinear_eval: w and wx differ in shape");
  if (std::isfinite(sys.rho) && (wiener_norm(w) > sys.rho / 4.0 || wiener_norm(wx) > sys.rho / 4.0))
    throw ManifoldError("nonlinear_eval: argument outside the analyticity ball (norm > rho/4)");
  FourierField out = FourierField::zeros_like(w);
  std::vector<FourierField> wc, pc;
  for (int j = 0; j < sys.m; ++j) {
    wc.push_back(w.component(j));
    pc.push_back(wx.component(j));
  }
  for (const auto& term : sys.taylor) {
    std::optional<FourierField> prod;
    auto mul = [&](const FourierField& f, int times) {
      for (int r = 0; r < times; ++r) prod = prod ? product(*prod, f) : f;
    };
    for (int j = 0; j < sys.m; ++j) {
      mul(wc[static_cast<std::size_t>(j)], term.alpha[static_cast<std::size_t>(j)]);
      mul(pc[static_cast<std::size_t>(j)], term.beta[static_cast<std::size_t>(j)]);
    }
    if (!prod) continue;
    for (std::size_t i = 0; i < out.mode_count(); ++i) {
      const Complex v = prod->data()[i];
      if (v == Complex{}) continue;
      auto mode = out.mode(i);
      for (int c = 0; c < sys.m; ++c) mode[static_cast<std::size_t>(c)] += term.coeff[static_cast<std::size_t>(c)] * v;
    }
  }
  return out;
}

double composition_bound(const LocalSystem& sys, const FourierField& w, const FourierField& wx) {
  const double nw = wiener_norm(w), np = wiener_norm(wx);
  double total = 0.0;
  for (const auto& term : sys.taylor) {
    double c = 0.0;
    for (double x : term.coeff) c += x * x;
    int da = 0, db = 0;
    for (int a : term.alpha) da += a;
    for (int b : term.beta) db += b;
    total += std::sqrt(c) * std::pow(nw, da) * std::pow(np, db);
  }
  return total;
}

Eigenmode leading_eigenmode(const LinearSymbol& sym, int k) {
  Eigen::ComplexEigenSolver<Mat> es(sym.at(k), true);
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i).real() > es.eigenvalues()(best).real()) best = i;
  Eigenmode e;
  e.k = k;
  e.lambda = es.eigenvalues()(best);
  e.v = es.eigenvectors().col(best).normalized();
  for (Eigen::Index i = 0; i < e.v.size(); ++i)
    if (std::abs(e.v(i)) > 1e-12) {
      e.v *= std::abs(e.v(i)) / e.v(i);
      break;
    }
  return e;
}

FourierField mode_field(const std::vector<Eigenmode>& modes, int m, int cutoff) {
  FourierField f(1, cutoff, m);
  for (const auto& e : modes) {
    if (std::abs(e.k) > cutoff) throw ManifoldError("eigenmode wavenumber beyond the cutoff");
    if (e.v.size() != m) throw ManifoldError("eigenmode vector has the wrong size");
    as_vec(f.coeffs({e.k, 0})) += e.amplitude * e.v;
  }
  return f;
}

PicardResult picard_solve(const LocalSystem& sys, const FourierField& a0_in, const ManifoldParams& params,
                          const PicardOptions& opts) {
  params.validate();
  sys.validate();
  check_field(a0_in, sys.m, "picard a0");
  const FourierField a0 = a0_in.resized(params.cutoff);
  const double a0n = a01_norm(a0);
  if (opts.check_preconditions) {
    if (params.gamma > params.m0 / 2.0 + 1e-12) throw ManifoldError("picard: gamma must not exceed m0/2");
    if (a0n > params.eps0) throw ManifoldError("picard: ||a0||_{A^{0,1}} exceeds eps0");
  }
  const auto sym = sys.symbol();
  const double h = params.step();
  const Split sp(params.cutoff, h, [&](int k) { return ModeOperator(sym, k, params.gamma); });
  for (int k = -params.cutoff; k <= params.cutoff; ++k) {
    const auto x = as_vec(a0.coeffs({k, 0}));
    if ((sp.ops[sp.slot(k)].p_u() * x - x).norm() > 1e-10 * std::max(x.norm(), 1e-300))
      throw ManifoldError("picard: a0 has a component outside the unstable subspace at k = " + std::to_string(k));
  }

  const auto t = time_nodes(params);
  std::vector<FourierField> lin(t.size(), a0);
  for (int k = -params.cutoff; k <= params.cutoff; ++k) {
    const Wavevector kv{k, 0};
    const auto& e = sp.bwd[sp.slot(k)].e;
    for (std::size_t n = t.size() - 1; n-- > 0;) as_vec(lin[n].coeffs(kv)) = e * as_vec(lin[n + 1].coeffs(kv));
  }

  std::vector<FourierField> start = opts.start_from_linear ? lin : std::vector<FourierField>(t.size(), FourierField::zeros_like(a0));
  auto loop = fixed_point(sys, sp, t, lin, nullptr, std::move(start), params.gamma, params.zeta, params.picard_tol,
                          params.picard_max_iters);

  PicardResult r;
  r.trajectory = {t, std::move(loop.x), params.gamma, params.zeta, 1.0};
  r.converged = loop.converged;
  r.iterations = loop.iterations;
  r.residual = loop.residual;
  r.residual_history = loop.history;
  r.a0_norm = a0n;
  r.trajectory_norm = r.trajectory.norm();
  r.contraction = contraction_of(loop.history, r.trajectory_norm);
  r.smoothing_constant = a0n > 0.0 ? r.trajectory_norm / a0n : 0.0;
  r.tail_budget = r.trajectory_norm * std::exp(-2.0 * params.gamma * params.horizon);
  FourierField defect = FourierField::zeros_like(a0);
  const auto& w0 = r.trajectory.fields.back();
  for (int k = -params.cutoff; k <= params.cutoff; ++k)
    as_vec(defect.coeffs({k, 0})) = sp.ops[sp.slot(k)].p_u() * as_vec(w0.coeffs({k, 0})) - as_vec(a0.coeffs({k, 0}));
  r.projection_defect = wiener_norm(defect);
  if (!r.converged && opts.throw_on_failure)
    throw ManifoldError("picard: no contraction at these params (residual " + std::to_string(r.residual) + " after " +
                        std::to_string(r.iterations) + " iterations)");
  return r;
}

double pde_residual(const LocalSystem& sys, const WeightedTrajectory& w) {
  const std::size_t nn = w.times.size();
  if (nn < 5) throw ManifoldError("pde residual: need at least five nodes");
  const double h = w.times[1] - w.times[0];
  const auto sym = sys.symbol();
  const int cutoff = w.fields.front().cutoff();
  std::vector<Mat> lk;
  for (int k = -cutoff; k <= cutoff; ++k) lk.push_back(sym.at(k));
  double worst = 0.0, scale = 0.0;
  for (std::size_t n = 2; n + 2 < nn; ++n) {
    FourierField dt = (1.0 / (12.0 * h)) * (w.fields[n - 2] - 8.0 * w.fields[n - 1] + 8.0 * w.fields[n + 1] - w.fields[n + 2]);
    scale = std::max(scale, wiener_norm(dt));
    FourierField r = dt - nonlinear_eval(sys, w.fields[n], derivative(w.fields[n], 0));
    for (int k = -cutoff; k <= cutoff; ++k)
      as_vec(r.coeffs({k, 0})) -= lk[static_cast<std::size_t>(k + cutoff)] * as_vec(w.fields[n].coeffs({k, 0}));
    worst = std::max(worst, wiener_norm(r));
  }
  return scale > 0.0 ? worst / scale : worst;
}

ScatteringResult scattering_solve(const LocalSystem& sys, const std::vector<Eigenmode>& b0, const ManifoldParams& params,
                                  bool check_preconditions) {
  params.validate();
  sys.validate();
  const auto sym = sys.symbol();
  for (const auto& e : b0) {
    if (std::abs(e.k) > params.cutoff) throw ManifoldError("scattering: eigenmode wavenumber beyond the cutoff");
    if (e.v.size() != sys.m) throw ManifoldError("scattering: eigenmode vector has the wrong size");
    if ((sym.at(e.k) * e.v - e.lambda * e.v).norm() > 1e-10 * std::max(1.0, std::abs(e.lambda)) * e.v.norm())
      throw ManifoldError("scattering: data is not an eigenmode of L_k at k = " + std::to_string(e.k));
    if (e.lambda.real() < params.gamma)
      throw ManifoldError("scattering: eigenmode with Re lambda below gamma at k = " + std::to_string(e.k));
  }
  const FourierField b0f = mode_field(b0, sys.m, params.cutoff);
  const double bn = a01_norm(b0f);
  if (check_preconditions) {
    if (params.gamma < params.m0 / 2.0 - 1e-12) throw ManifoldError("scattering: gamma must be at least m0/2");
    if (bn > params.eps1) throw ManifoldError("scattering: ||b0||_{A^{0,1}} exceeds eps1");
  }
  const double threshold = (1.5 + 3.0 * params.delta) * params.gamma;
  const double rate = 1.5 * params.gamma;
  const double h = params.step();
  const Split sp(params.cutoff, h,
                 [&](int k) { return modified_projection(sym, k, threshold, params.group_radius); });

  const auto t = time_nodes(params);
  std::vector<FourierField> lin(t.size(), FourierField::zeros_like(b0f));
  for (std::size_t n = 0; n < t.size(); ++n)
    for (const auto& e : b0) as_vec(lin[n].coeffs({e.k, 0})) += e.amplitude * std::exp(e.lambda * t[n]) * e.v;

  const std::vector<FourierField> zero(t.size(), FourierField::zeros_like(b0f));
  auto loop = fixed_point(sys, sp, t, zero, &lin, zero, rate, 0.0, params.picard_tol, params.picard_max_iters);

  ScatteringResult r;
  r.v = {t, loop.x, rate, 0.0, 1.0};
  std::vector<FourierField> w = std::move(loop.x);
  for (std::size_t n = 0; n < w.size(); ++n) w[n] += lin[n];
  r.w = {t, std::move(w), params.gamma, params.zeta, 1.0};
  r.converged = loop.converged;
  r.iterations = loop.iterations;
  r.residual = loop.residual;
  r.b0_norm = bn;
  r.v_norm = r.v.norm();
  r.ratio = bn > 0.0 ? r.v_norm / (bn * bn) : 0.0;
  r.contraction = contraction_of(loop.history, r.v_norm);
  r.a0 = FourierField::zeros_like(b0f);
  const auto& w0 = r.w.fields.back();
  for (int k = -params.cutoff; k <= params.cutoff; ++k) {
    const ModeOperator op(sym, k, params.gamma);
    as_vec(r.a0.coeffs({k, 0})) = op.p_u() * as_vec(w0.coeffs({k, 0}));
  }
  if (!r.converged && check_preconditions)
    throw ManifoldError("scattering: no contraction at these params (residual " + std::to_string(r.residual) + ")");
  return r;
}

std::vector<IllposedRow> illposedness_experiment(const LocalSystem& sys, const IllposedParams& p,
                                                 const ManifoldParams& params) {
  params.validate();
  if (!(p.threshold > 0.0)) throw ManifoldError("illposed: threshold M must be positive");
  if (!(p.t < 0.0 && p.t > -params.horizon)) throw ManifoldError("illposed: t must lie in (-T, 0)");
  const double h = params.step();
  const double idx = (p.t + params.horizon) / h;
  const auto node = static_cast<std::size_t>(std::llround(idx));
  if (std::abs(idx - static_cast<double>(node)) > 1e-6) throw ManifoldError("illposed: t is not a grid node");
  const auto sym = sys.symbol();
  std::vector<IllposedRow> rows;
  for (int n : p.n_list) {
    IllposedRow row;
    row.n = n;
    if (n < 1) {
      row.skipped = true;
      row.reason = "n must be positive";
      rows.push_back(row);
      continue;
    }
    ManifoldParams q = params;
    q.cutoff = std::max(params.cutoff, 4 * n);
    row.cutoff = q.cutoff;
    Eigenmode e = leading_eigenmode(sym, n);
    const double br = Wavevector{n, 0}.bracket();
    e.amplitude = 2.0 * p.threshold / std::pow(br, p.s);
    const FourierField b0f = mode_field({e}, sys.m, q.cutoff);
    row.b0_hs = fourier::sobolev_norm(b0f, p.s);
    row.b0_a01 = a01_norm(b0f);
    if (row.b0_a01 > params.eps1) {
      row.skipped = true;
      row.reason = "||b0||_{A^{0,1}} exceeds eps1";
      rows.push_back(row);
      continue;
    }
    ScatteringResult r;
    try {
      r = scattering_solve(sys, {e}, q);
    } catch (const ManifoldError& err) {
      row.skipped = true;
      row.reason = err.what();
      rows.push_back(row);
      continue;
    }
    row.a0_hs = fourier::sobolev_norm(r.a0, p.s);
    row.a0_a01 = a01_norm(r.a0);
    row.w_hs = fourier::sobolev_norm(r.w.fields[node], p.s);
    const FourierField lin = mode_field({Eigenmode{n, e.lambda, e.v, e.amplitude * std::exp(e.lambda * p.t)}}, sys.m, q.cutoff);
    row.linear_hs = fourier::sobolev_norm(lin, p.s);
    row.linear_expected = std::exp(e.lambda.real() * p.t) * 2.0 * p.threshold;
    rows.push_back(row);
  }
  return rows;
}

namespace {

double calibrate(const LocalSystem& sys, const ManifoldParams& params, int max_halvings, bool scattering) {
  const auto sym = sys.symbol();
  for (int j = 1; j <= max_halvings; ++j) {
    const double size = std::ldexp(1.0, -j);
    Eigenmode e = leading_eigenmode(sym, 1);
    e.amplitude = size / Wavevector{1, 0}.bracket();
    bool ok = false;
    if (scattering) {
      const auto r = scattering_solve(sys, {e}, params, false);
      ok = r.converged && r.contraction <= 0.5;
    } else {
      const auto r = picard_solve(sys, mode_field({e}, sys.m, params.cutoff), params, {false, false, false});
      ok = r.converged && r.contraction <= 0.5;
    }
    if (ok) return size;
  }
  throw ManifoldError("calibration: no contracting data size down to 2^-" + std::to_string(max_halvings));
}

}  // namespace

double calibrate_eps0(const LocalSystem& sys, ManifoldParams params, int max_halvings) {
  return calibrate(sys, params, max_halvings, false);
}

double calibrate_eps1(const LocalSystem& sys, ManifoldParams params, int max_halvings) {
  return calibrate(sys, params, max_halvings, true);
}

}  // namespace cxeuler::manifold
