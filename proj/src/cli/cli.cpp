#include "cxeuler/cli.hpp"

#include "cxeuler/manifold.hpp"
#include "cxeuler/shear.hpp"

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

namespace cxeuler::cli {

namespace {

using fourier::Complex;

// ---------------------------------------------------------------- params

class Reader {
 public:
  explicit Reader(const json& p) : in_(p.is_null() ? json::object() : p) {
    if (!in_.is_object()) throw ConfigError("params: must be a JSON object");
  }

  double number(const std::string& key, double def, const std::function<bool(double)>& ok, const std::string& rule) {
    double v = def;
    if (in_.contains(key)) {
      if (!in_[key].is_number()) throw ConfigError("params." + key + ": expected a number");
      v = in_[key].get<double>();
    }
    if (!std::isfinite(v) || !ok(v)) throw ConfigError("params." + key + ": " + rule);
    out_[key] = v;
    return v;
  }

  int integer(const std::string& key, int def, const std::function<bool(int)>& ok, const std::string& rule) {
    int v = def;
    if (in_.contains(key)) {
      if (!in_[key].is_number_integer()) throw ConfigError("params." + key + ": expected an integer");
      v = in_[key].get<int>();
    }
    if (!ok(v)) throw ConfigError("params." + key + ": " + rule);
    out_[key] = v;
    return v;
  }

  std::vector<int> integers(const std::string& key, std::vector<int> def, const std::function<bool(int)>& ok,
                            const std::string& rule) {
    if (in_.contains(key)) {
      const auto& a = in_[key];
      if (!a.is_array()) throw ConfigError("params." + key + ": expected an array of integers");
      def.clear();
      for (const auto& x : a) {
        if (!x.is_number_integer()) throw ConfigError("params." + key + ": expected an array of integers");
        def.push_back(x.get<int>());
      }
    }
    if (def.empty()) throw ConfigError("params." + key + ": must not be empty");
    for (int v : def)
      if (!ok(v)) throw ConfigError("params." + key + ": " + rule);
    out_[key] = def;
    return def;
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> def, std::size_t size) {
    if (in_.contains(key)) {
      const auto& a = in_[key];
      if (!a.is_array() || a.size() != size) throw ConfigError("params." + key + ": expected " + std::to_string(size) + " numbers");
      def.clear();
      for (const auto& x : a) {
        if (!x.is_number()) throw ConfigError("params." + key + ": expected numbers");
        def.push_back(x.get<double>());
      }
    }
    for (double v : def)
      if (!std::isfinite(v)) throw ConfigError("params." + key + ": entries must be finite");
    out_[key] = def;
    return def;
  }

  json raw(const std::string& key, json def) {
    json v = in_.contains(key) ? in_[key] : std::move(def);
    out_[key] = v;
    return v;
  }

  json finish() {
    for (auto it = in_.begin(); it != in_.end(); ++it)
      if (!out_.contains(it.key())) throw ConfigError("params." + it.key() + ": unknown parameter");
    return out_;
  }

 private:
  json in_;
  json out_ = json::object();
};

const auto positive = [](double v) { return v > 0.0; };
const auto at_least = [](int lo) { return [lo](int v) { return v >= lo; }; };

void add(RunResult& r, std::string name, bool passed, double value, double threshold, std::string detail = {}) {
  r.criteria.push_back({std::move(name), passed, value, threshold, std::move(detail)});
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

struct Experiment {
  const char* name;
  std::function<json(Reader&)> resolve;
  std::function<RunResult(const json&, std::uint64_t)> execute;
};

// ---------------------------------------------------------------- shear

json resolve_inflation(Reader& r) {
  shear::InflationParams p;
  p.eps = r.number("eps", 0.1, positive, "must be positive");
  p.sobolev_index = r.number("s", 1.0, positive, "must be positive");
  p.threshold = r.number("M", 10.0, positive, "must be positive");
  p.horizon = r.number("T", 10.0, positive, "must be positive");
  p.forced_k = r.integer("k", 0, at_least(0), "must be >= 0 (0 selects the mode)");
  r.integer("doublings", 2, [](int v) { return v >= 0 && v <= 4; }, "must lie in [0, 4]");
  auto out = r.finish();
  if (p.forced_k == 0) {
    try {
      out["k"] = shear::select_inflation_mode(p);
    } catch (const shear::ShearError& e) {
      throw ConfigError(std::string("params: ") + e.what());
    }
  }
  return out;
}

RunResult run_inflation(const json& p, std::uint64_t) {
  shear::InflationParams ip{p["eps"], p["s"], p["M"], p["T"], p["k"]};
  RunResult r;
  const auto base = shear::norm_inflation_experiment(ip);
  r.measured["k"] = base.k;
  r.measured["initial_norm"] = base.initial_norm;
  r.measured["predicted_t0"] = base.predicted_t0;
  r.measured["t0"] = base.crossed ? json(base.t0) : json(nullptr);
  r.measured["sup_norm"] = base.sup_norm;
  add(r, "norm_crosses_threshold", base.crossed, base.sup_norm, ip.threshold);
  const double ratio = base.crossed ? base.t0 / base.predicted_t0 : INFINITY;
  add(r, "t0_within_5x_prediction", ratio <= 5.0, ratio, 5.0);

  std::ostringstream traj, dbl;
  traj << "t,q,energy,hs_norm\n" << std::setprecision(17);
  for (std::size_t i = 0; i < base.times.size(); ++i)
    traj << base.times[i] << ',' << base.q[i] << ',' << base.energy[i] << ',' << base.hs_norm[i] << '\n';
  dbl << "k,t0,predicted_t0,crossed\n" << std::setprecision(17);
  dbl << base.k << ',' << base.t0 << ',' << base.predicted_t0 << ',' << base.crossed << '\n';
  double previous = base.crossed ? base.t0 : INFINITY;
  json doubled = json::array();
  for (int j = 1; j <= p["doublings"].get<int>(); ++j) {
    auto q = ip;
    q.forced_k = base.k << j;
    const auto d = shear::norm_inflation_experiment(q);
    dbl << d.k << ',' << d.t0 << ',' << d.predicted_t0 << ',' << d.crossed << '\n';
    doubled.push_back({{"k", d.k}, {"t0", d.crossed ? json(d.t0) : json(nullptr)}});
    const double t0 = d.crossed ? d.t0 : INFINITY;
    add(r, "t0_nonincreasing_k" + std::to_string(d.k), d.crossed && t0 <= previous, t0, previous);
    previous = t0;
  }
  r.measured["doublings"] = doubled;
  r.files["inflation.csv"] = traj.str();
  r.files["doublings.csv"] = dbl.str();
  return r;
}

json resolve_analyticity(Reader& r) {
  r.number("q_in", 1.0, positive, "must be positive");
  r.number("decay", 1.0, positive, "must be positive");
  r.integer("K", 256, at_least(3), "must be >= 3");
  r.number("T", 2.0, positive, "must be positive");
  r.integer("samples", 20, at_least(2), "must be >= 2");
  r.number("dt_max", 1e-3, positive, "must be positive");
  r.number("rate_cap", 0.005, positive, "must be positive");
  return r.finish();
}

RunResult run_analyticity(const json& p, std::uint64_t) {
  shear::AnalyticityParams ap;
  ap.q_in = p["q_in"];
  ap.decay_exponent = p["decay"];
  ap.cutoff = p["K"];
  ap.horizon = p["T"];
  ap.samples = p["samples"];
  ap.integrate.dt_max = p["dt_max"];
  ap.integrate.rate_cap = p["rate_cap"];
  const auto res = shear::loss_of_analyticity_experiment(ap);
  RunResult r;
  r.measured["max_relative_error"] = res.max_relative_error;
  r.measured["energy_drift"] = res.energy_drift;
  r.measured["q_max"] = res.q_max;
  r.measured["energy_bound"] = res.energy_bound;
  add(r, "radius_matches_q_integral", res.max_relative_error <= 0.02, res.max_relative_error, 0.02);
  add(r, "energy_drift", res.energy_drift <= 1e-10, res.energy_drift, 1e-10);
  add(r, "q_monotone", res.q_monotone, res.q_monotone ? 1.0 : 0.0, 1.0);
  add(r, "q_below_energy_bound", res.q_max <= res.energy_bound * (1.0 + 1e-12), res.q_max, res.energy_bound);
  std::ostringstream os;
  os << "t,q,energy,q_integral,radius,relative_error\n" << std::setprecision(17);
  for (const auto& s : res.samples)
    os << s.t << ',' << s.q << ',' << s.energy << ',' << s.q_integral << ',' << s.radius << ',' << s.relative_error << '\n';
  r.files["radius.csv"] = os.str();
  return r;
}

// ---------------------------------------------------------------- euler 2d

spectral::SolverConfig solver_config(const json& p) {
  spectral::SolverConfig c;
  c.cutoff = p["K"];
  c.dt = p["dt"];
  c.tail_threshold = p["tail_threshold"];
  return c;
}

void check_solver(const json& p) {
  try {
    solver_config(p).validate();
  } catch (const spectral::SpectralError& e) {
    throw ConfigError(std::string("params: ") + e.what());
  }
}

json resolve_conserve(Reader& r) {
  r.integer("K", 64, at_least(4), "must be >= 4");
  r.number("dt", 1e-3, positive, "must be positive");
  r.number("T", 1.0, positive, "must be positive");
  r.number("amplitude", 0.1, positive, "must be positive");
  r.integer("band", 3, at_least(1), "must be >= 1");
  r.integer("samples", 10, at_least(1), "must be >= 1");
  r.number("tail_threshold", 1e-4, positive, "must be positive");
  auto out = r.finish();
  if (out["band"].get<int>() > (2 * out["K"].get<int>()) / 3) throw ConfigError("params.band: must not exceed 2K/3");
  check_solver(out);
  return out;
}

RunResult run_conserve(const json& p, std::uint64_t seed) {
  const auto cfg = solver_config(p);
  spectral::Solver solver(cfg);
  auto s = random_analytic_state(cfg.cutoff, p["amplitude"], p["band"], seed);
  const auto d0 = spectral::diagnostics(s);
  const int samples = p["samples"];
  const double horizon = p["T"];
  double de = 0.0, dz = 0.0, dc = 0.0, dm = 0.0;
  std::ostringstream os;
  os << "t,energy,enstrophy_re,enstrophy_im,casimir3_re,casimir3_im,mean_re_x,mean_re_y\n" << std::setprecision(17);
  auto row = [&](double t, const spectral::Diagnostics& d) {
    os << t << ',' << d.energy << ',' << d.enstrophy.real() << ',' << d.enstrophy.imag() << ',' << d.casimir3.real()
       << ',' << d.casimir3.imag() << ',' << d.mean_re[0] << ',' << d.mean_re[1] << '\n';
  };
  row(0.0, d0);
  RunResult r;
  const double mean0 = std::hypot(d0.mean_re[0], d0.mean_re[1]);
  try {
    for (int j = 1; j <= samples; ++j) {
      const double t = horizon * j / samples;
      s = solver.advance(s, t);
      const auto d = spectral::diagnostics(s);
      row(t, d);
      de = std::max(de, std::abs(d.energy - d0.energy) / d0.energy);
      dz = std::max(dz, std::abs(d.enstrophy - d0.enstrophy) / std::abs(d0.enstrophy));
      dc = std::max(dc, std::abs(d.casimir3 - d0.casimir3) / std::abs(d0.casimir3));
      dm = std::max(dm, std::hypot(d.mean_re[0] - d0.mean_re[0], d.mean_re[1] - d0.mean_re[1]) / std::max(mean0, 1e-300));
    }
  } catch (const spectral::ResolutionExhausted& e) {
    add(r, "resolution", false, e.fraction(), cfg.tail_threshold, "tail check fired at t = " + fmt(e.time()));
  }
  r.measured["energy_drift"] = de;
  r.measured["enstrophy_drift"] = dz;
  r.measured["casimir3_drift"] = dc;
  r.measured["mean_re_drift"] = dm;
  add(r, "energy_drift", de <= 1e-6, de, 1e-6);
  add(r, "enstrophy_drift", dz <= 1e-6, dz, 1e-6);
  add(r, "casimir3_drift", dc <= 1e-6, dc, 1e-6);
  add(r, "mean_re_drift", dm <= 1e-6, dm, 1e-6);
  r.files["diagnostics.csv"] = os.str();
  return r;
}

json resolve_growth(Reader& r) {
  r.numbers("a", {0.0, -1.0, 0.0, 0.0}, 4);
  r.integers("k", {1, 0}, [](int) { return true; }, "");
  r.number("T", 5.0, positive, "must be positive");
  r.number("delta", 1e-6, positive, "must be positive");
  r.integer("K", 8, at_least(4), "must be >= 4");
  r.number("dt", 1e-3, positive, "must be positive");
  auto out = r.finish();
  if (out["k"].size() != 2) throw ConfigError("params.k: expected two integers");
  if (out["k"][0] == 0 && out["k"][1] == 0) throw ConfigError("params.k: must be nonzero");
  out["tail_threshold"] = 1e-4;
  check_solver(out);
  out.erase("tail_threshold");
  const int ka = (2 * out["K"].get<int>()) / 3;
  if (std::abs(out["k"][0].get<int>()) > ka || std::abs(out["k"][1].get<int>()) > ka)
    throw ConfigError("params.k: outside the dealiased range of K");
  return out;
}

RunResult run_growth(const json& p, std::uint64_t) {
  const auto a = p["a"].get<std::vector<double>>();
  const spectral::Vec2 bg{Complex{a[0], a[1]}, Complex{a[2], a[3]}};
  const fourier::Wavevector k{p["k"][0].get<int>(), p["k"][1].get<int>()};
  spectral::SolverConfig cfg;
  cfg.cutoff = p["K"];
  cfg.dt = p["dt"];
  RunResult r;
  const double predicted = spectral::predicted_growth_rate(bg, k);
  r.measured["predicted_rate"] = predicted;
  try {
    const auto g = spectral::linear_growth_check(bg, k, p["T"], p["delta"], cfg);
    const double err = std::abs(g.measured_rate - predicted) / std::max(std::abs(predicted), 1.0);
    r.measured["measured_rate"] = g.measured_rate;
    r.measured["max_amplification"] = g.max_amplification;
    add(r, "growth_rate", err <= 0.01, err, 0.01);
    std::ostringstream os;
    os << "t,log_amplitude\n" << std::setprecision(17);
    for (std::size_t i = 0; i < g.times.size(); ++i) os << g.times[i] << ',' << g.log_amplitude[i] << '\n';
    r.files["growth.csv"] = os.str();
  } catch (const spectral::SpectralError& e) {
    add(r, "growth_rate", false, INFINITY, 0.01, e.what());
  }
  return r;
}

// ---------------------------------------------------------------- manifold

manifold::LocalSystem load_system(const json& spec) {
  try {
    if (spec.is_string()) {
      const std::string s = spec.get<std::string>();
      if (s == "burgers") return manifold::burgers_system();
      std::ifstream in(s);
      if (!in) throw ConfigError("params.system: cannot open " + s);
      std::stringstream buf;
      buf << in.rdbuf();
      return manifold::system_from_json(buf.str());
    }
    if (spec.is_object()) return manifold::system_from_json(spec.dump());
  } catch (const manifold::ManifoldError& e) {
    throw ConfigError(std::string("params.system: ") + e.what());
  }
  throw ConfigError("params.system: expected \"burgers\", a file path or an inline system object");
}

/// Shared ManifoldParams fields; the step defaults follow gamma.
manifold::ManifoldParams read_manifold(Reader& r, const manifold::LocalSystem& sys, double gamma_default) {
  const double gamma = r.number("gamma", gamma_default, positive, "must be positive");
  auto m = manifold::ManifoldParams::defaults_for(gamma);
  m.zeta = r.number("zeta", m.zeta, [](double v) { return v >= 0.0; }, "must be non-negative");
  m.nu = r.number("nu", m.nu, positive, "must be positive");
  m.delta = r.number("band_delta", m.delta, [](double v) { return v > 0.0 && v < 0.25; }, "must lie in (0, 1/4)");
  m.m0 = r.number("m0", sys.symbol().min_positive_real_part(), positive, "must be positive");
  m.eps0 = r.number("eps0", m.eps0, positive, "must be positive");
  m.eps1 = r.number("eps1", m.eps1, positive, "must be positive");
  m.cutoff = r.integer("K", m.cutoff, at_least(1), "must be >= 1");
  m.horizon = r.number("T", m.horizon, positive, "must be positive");
  m.nodes = r.integer("N", m.nodes, at_least(4), "must be >= 4");
  m.picard_tol = r.number("tol", m.picard_tol, positive, "must be positive");
  m.picard_max_iters = r.integer("max_iters", m.picard_max_iters, at_least(1), "must be >= 1");
  m.group_radius = r.number("group_radius", m.group_radius, positive, "must be positive");
  try {
    m.validate();
  } catch (const manifold::ManifoldError& e) {
    throw ConfigError(e.what());
  }
  return m;
}

manifold::ManifoldParams manifold_params(const json& p) {
  manifold::ManifoldParams m;
  m.gamma = p["gamma"];
  m.zeta = p["zeta"];
  m.nu = p["nu"];
  m.delta = p["band_delta"];
  m.m0 = p["m0"];
  m.eps0 = p["eps0"];
  m.eps1 = p["eps1"];
  m.cutoff = p["K"];
  m.horizon = p["T"];
  m.nodes = p["N"];
  m.picard_tol = p["tol"];
  m.picard_max_iters = p["max_iters"];
  m.group_radius = p["group_radius"];
  return m;
}

manifold::Eigenmode datum(const manifold::LocalSystem& sys, int mode, double amplitude) {
  auto e = manifold::leading_eigenmode(sys.symbol(), mode);
  e.amplitude = amplitude;
  return e;
}

json resolve_picard(Reader& r) {
  const auto sys = load_system(r.raw("system", "burgers"));
  const auto m = read_manifold(r, sys, 1.5);
  const double amp = r.number("amplitude", 1e-3, positive, "must be positive");
  const int mode = r.integer("mode", 1, at_least(1), "must be >= 1");
  r.integer("csv_stride", 10, at_least(1), "must be >= 1");
  auto out = r.finish();
  if (mode > m.cutoff) throw ConfigError("params.mode: beyond the cutoff K");
  if (m.gamma > m.m0 / 2.0 + 1e-12)
    throw ConfigError("params.gamma: must not exceed m0/2 = " + fmt(m.m0 / 2.0) + " (hypothesis of the unstable-manifold map)");
  const auto e = datum(sys, mode, amp);
  if (e.lambda.real() <= m.gamma) throw ConfigError("params.mode: no eigenvalue with Re > gamma at this wavenumber");
  const double norm = amp * fourier::Wavevector{mode, 0}.bracket();
  if (norm > m.eps0)
    throw ConfigError("precondition: ||a0||_{A^{0,1}} = " + fmt(norm) + " exceeds eps0 = " + fmt(m.eps0));
  return out;
}

manifold::WeightedTrajectory thin(const manifold::WeightedTrajectory& w, int stride) {
  manifold::WeightedTrajectory out{{}, {}, w.gamma, w.zeta, w.s};
  for (std::size_t n = 0; n < w.times.size(); ++n)
    if (n % static_cast<std::size_t>(stride) == 0 || n + 1 == w.times.size()) {
      out.times.push_back(w.times[n]);
      out.fields.push_back(w.fields[n]);
    }
  return out;
}

RunResult run_picard(const json& p, std::uint64_t) {
  const auto sys = load_system(p["system"]);
  const auto m = manifold_params(p);
  const auto e = datum(sys, p["mode"], p["amplitude"]);
  RunResult r;
  manifold::PicardResult res;
  try {
    res = manifold::picard_solve(sys, manifold::mode_field({e}, sys.m, m.cutoff), m);
  } catch (const manifold::ManifoldError& err) {
    add(r, "converged", false, INFINITY, m.picard_tol, err.what());
    return r;
  }
  const double pde = manifold::pde_residual(sys, res.trajectory);
  r.measured["iterations"] = res.iterations;
  r.measured["residual"] = res.residual;
  r.measured["contraction"] = res.contraction;
  r.measured["a0_norm"] = res.a0_norm;
  r.measured["trajectory_norm"] = res.trajectory_norm;
  r.measured["smoothing_constant"] = res.smoothing_constant;
  r.measured["tail_budget"] = res.tail_budget;
  r.measured["projection_defect"] = res.projection_defect;
  r.measured["pde_residual"] = pde;
  add(r, "iterations", res.iterations <= 30, res.iterations, 30);
  add(r, "fixed_point_residual", res.residual <= m.picard_tol, res.residual, m.picard_tol);
  add(r, "contraction", res.contraction <= 0.5, res.contraction, 0.5);
  add(r, "pde_residual", pde <= 1e-6, pde, 1e-6);
  add(r, "smoothing_constant_finite", std::isfinite(res.smoothing_constant), res.smoothing_constant, INFINITY);
  add(r, "unstable_projection_matches_a0", res.projection_defect <= 1e-12, res.projection_defect, 1e-12);
  std::ostringstream os;
  manifold::write_trajectory_csv(os, thin(res.trajectory, p["csv_stride"]));
  r.files["trajectory.csv"] = os.str();
  return r;
}

json resolve_scatter(Reader& r) {
  const auto sys = load_system(r.raw("system", "burgers"));
  const auto m = read_manifold(r, sys, 1.5);
  const double amp = r.number("amplitude", 1e-2, positive, "must be positive");
  const int mode = r.integer("mode", 1, at_least(1), "must be >= 1");
  r.integer("halvings", 3, [](int v) { return v >= 1 && v <= 10; }, "must lie in [1, 10]");
  auto out = r.finish();
  if (mode > m.cutoff) throw ConfigError("params.mode: beyond the cutoff K");
  if (m.gamma < m.m0 / 2.0 - 1e-12) throw ConfigError("params.gamma: scattering requires gamma >= m0/2 = " + fmt(m.m0 / 2.0));
  const auto e = datum(sys, mode, amp);
  if (e.lambda.real() < m.gamma) throw ConfigError("params.mode: no eigenvalue with Re >= gamma at this wavenumber");
  const double norm = amp * fourier::Wavevector{mode, 0}.bracket();
  if (norm > m.eps1)
    throw ConfigError("precondition: ||b0||_{A^{0,1}} = " + fmt(norm) + " exceeds eps1 = " + fmt(m.eps1));
  return out;
}

RunResult run_scatter(const json& p, std::uint64_t) {
  const auto sys = load_system(p["system"]);
  const auto m = manifold_params(p);
  RunResult r;
  std::ostringstream os;
  os << "amplitude,b0_norm,v_norm,ratio,iterations\n" << std::setprecision(17);
  std::vector<double> norms;
  json rows = json::array();
  for (int j = 0; j <= p["halvings"].get<int>(); ++j) {
    const double amp = std::ldexp(p["amplitude"].get<double>(), -j);
    try {
      const auto res = manifold::scattering_solve(sys, {datum(sys, p["mode"], amp)}, m);
      norms.push_back(res.v_norm);
      os << amp << ',' << res.b0_norm << ',' << res.v_norm << ',' << res.ratio << ',' << res.iterations << '\n';
      rows.push_back({{"amplitude", amp}, {"v_norm", res.v_norm}, {"ratio", res.ratio}});
    } catch (const manifold::ManifoldError& err) {
      add(r, "converged", false, amp, 0.0, err.what());
      return r;
    }
  }
  r.measured["runs"] = rows;
  json exps = json::array();
  for (std::size_t j = 1; j < norms.size(); ++j) {
    const double x = std::log2(norms[j - 1] / norms[j]);
    exps.push_back(x);
    add(r, "scaling_exponent_" + std::to_string(j), std::abs(x - 2.0) <= 0.1, x, 2.0, "tolerance 0.1");
  }
  r.measured["exponents"] = exps;
  r.files["scatter.csv"] = os.str();
  return r;
}

json resolve_illposed(Reader& r) {
  const auto sys = load_system(r.raw("system", "burgers"));
  const auto m = read_manifold(r, sys, 1.5);
  r.number("s", 2.0, [](double v) { return v > 1.0; }, "must exceed 1");
  const double t = r.number("t", -0.5, [](double v) { return v < 0.0; }, "must be negative");
  r.number("M", 0.5, positive, "must be positive");
  r.integers("n", {4, 8, 16}, at_least(1), "entries must be >= 1");
  auto out = r.finish();
  if (m.gamma < m.m0 / 2.0 - 1e-12) throw ConfigError("params.gamma: scattering requires gamma >= m0/2 = " + fmt(m.m0 / 2.0));
  if (!(t > -m.horizon)) throw ConfigError("params.t: must lie in (-T, 0)");
  const double idx = (t + m.horizon) / m.step();
  if (std::abs(idx - std::round(idx)) > 1e-6) throw ConfigError("params.t: not a node of the time grid (step " + fmt(m.step()) + ")");
  return out;
}

RunResult run_illposed(const json& p, std::uint64_t) {
  const auto sys = load_system(p["system"]);
  const auto m = manifold_params(p);
  manifold::IllposedParams ip;
  ip.s = p["s"];
  ip.t = p["t"];
  ip.threshold = p["M"];
  ip.n_list = p["n"].get<std::vector<int>>();
  const auto rows = manifold::illposedness_experiment(sys, ip, m);
  RunResult r;
  std::ostringstream os;
  os << "n,cutoff,skipped,b0_hs,b0_a01,a0_hs,a0_a01,w_hs,linear_hs,linear_expected,reason\n" << std::setprecision(17);
  int reported = 0;
  bool decreasing = true;
  double previous = INFINITY, linear_err = 0.0;
  json table = json::array();
  for (const auto& row : rows) {
    os << row.n << ',' << row.cutoff << ',' << row.skipped << ',' << row.b0_hs << ',' << row.b0_a01 << ',' << row.a0_hs
       << ',' << row.a0_a01 << ',' << row.w_hs << ',' << row.linear_hs << ',' << row.linear_expected << ",\""
       << row.reason << "\"\n";
    table.push_back({{"n", row.n}, {"skipped", row.skipped}, {"a0_hs", row.a0_hs}, {"w_hs", row.w_hs}, {"linear_hs", row.linear_hs}});
    if (row.skipped || row.a0_hs < ip.threshold) continue;
    ++reported;
    if (!(row.w_hs < previous)) decreasing = false;
    previous = row.w_hs;
    linear_err = std::max(linear_err, std::abs(row.linear_hs - row.linear_expected));
  }
  r.measured["rows"] = table;
  add(r, "rows_reported", reported >= 2, reported, 2);
  add(r, "hs_norm_decreasing", decreasing && reported >= 2, previous, 0.0);
  add(r, "linear_column", linear_err <= 1e-8, linear_err, 1e-8);
  r.files["illposed.csv"] = os.str();
  return r;
}

// ---------------------------------------------------------------- burgers

json resolve_hyperbolic(Reader& r) {
  r.integer("samples", 10000, at_least(1), "must be >= 1");
  r.number("range", 10.0, positive, "must be positive");
  return r.finish();
}

RunResult run_hyperbolic(const json& p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double range = p["range"];
  std::uniform_real_distribution<double> u(-range, range);
  double worst = 0.0, min_gap = INFINITY, worst_imag = 0.0;
  std::ostringstream os;
  os << "a,b,lambda_plus,lambda_minus\n" << std::setprecision(17);
  for (int i = 0; i < p["samples"].get<int>(); ++i) {
    const double a = u(rng), b = u(rng);
    const auto l = manifold::geometric_burgers_hyperbolicity(a, b);
    Eigen::Matrix2d m;
    m << 3.0 * a, 3.0 * b, b, -a;
    Eigen::EigenSolver<Eigen::Matrix2d> es(m, false);
    const double scale = std::max(1.0, m.norm());
    std::array<double, 2> got{es.eigenvalues()(0).real(), es.eigenvalues()(1).real()};
    if (got[0] < got[1]) std::swap(got[0], got[1]);
    worst_imag = std::max({worst_imag, std::abs(es.eigenvalues()(0).imag()) / scale, std::abs(es.eigenvalues()(1).imag()) / scale});
    worst = std::max({worst, std::abs(got[0] - l[0]) / scale, std::abs(got[1] - l[1]) / scale});
    min_gap = std::min(min_gap, (l[0] - l[1]) / std::hypot(a, b));
    os << a << ',' << b << ',' << l[0] << ',' << l[1] << '\n';
  }
  const auto ref = manifold::geometric_burgers_hyperbolicity(0.0, 1.0);
  const double ref_err = std::max(std::abs(ref[0] - std::sqrt(3.0)), std::abs(ref[1] + std::sqrt(3.0)));
  const auto origin = manifold::geometric_burgers_hyperbolicity(0.0, 0.0);
  RunResult r;
  r.measured["max_imag_part"] = worst_imag;
  r.measured["max_root_mismatch"] = worst;
  r.measured["min_relative_gap"] = min_gap;
  r.measured["reference_error"] = ref_err;
  add(r, "eigenvalues_real", worst_imag <= 1e-12, worst_imag, 1e-12);
  add(r, "matches_matrix_eigenvalues", worst <= 1e-12, worst, 1e-12);
  add(r, "distinct_off_origin", min_gap > 0.0, min_gap, 0.0);
  add(r, "coincident_at_origin", origin[0] == origin[1], origin[0] - origin[1], 0.0);
  add(r, "reference_point", ref_err <= 1e-12, ref_err, 1e-12);
  r.files["hyperbolic.csv"] = os.str();
  return r;
}

const std::vector<Experiment>& registry() {
  static const std::vector<Experiment> r{
      {"shear-inflation", resolve_inflation, run_inflation},
      {"shear-analyticity", resolve_analyticity, run_analyticity},
      {"euler2d-conserve", resolve_conserve, run_conserve},
      {"euler2d-growth", resolve_growth, run_growth},
      {"manifold-picard", resolve_picard, run_picard},
      {"manifold-scatter", resolve_scatter, run_scatter},
      {"manifold-illposed", resolve_illposed, run_illposed},
      {"burgers-hyperbolic", resolve_hyperbolic, run_hyperbolic},
  };
  return r;
}

const Experiment& find(const std::string& name) {
  for (const auto& e : registry())
    if (name == e.name) return e;
  throw ConfigError("experiment: unknown name '" + name + "' (see --list-experiments)");
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& e : registry()) n.emplace_back(e.name);
    return n;
  }();
  return names;
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  RunConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const auto& key = it.key();
    const auto& v = it.value();
    if (key == "experiment") {
      if (!v.is_string()) throw ConfigError("experiment: expected a string");
      c.experiment = v.get<std::string>();
    } else if (key == "params") {
      if (!v.is_object()) throw ConfigError("params: expected an object");
      c.params = v;
    } else if (key == "output_dir") {
      if (!v.is_string()) throw ConfigError("output_dir: expected a string");
      c.output_dir = v.get<std::string>();
    } else if (key == "seed") {
      if (!v.is_number_unsigned()) throw ConfigError("seed: expected a non-negative integer");
      c.seed = v.get<std::uint64_t>();
    } else {
      throw ConfigError(key + ": unknown config key");
    }
  }
  if (c.experiment.empty()) throw ConfigError("experiment: missing");
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

json resolve_params(const RunConfig& config) {
  const auto& e = find(config.experiment);
  Reader r(config.params);
  return e.resolve(r);
}

std::string validate(const RunConfig& config) {
  resolve_params(config);
  return "ok";
}

bool RunResult::passed() const {
  if (criteria.empty()) return false;
  for (const auto& c : criteria)
    if (!c.passed) return false;
  return true;
}

RunResult run(const RunConfig& config) {
  const auto params = resolve_params(config);
  auto r = find(config.experiment).execute(params, config.seed);
  r.params = params;
  return r;
}

json manifest(const RunConfig& config, const RunResult& result) {
  json crit = json::array();
  for (const auto& c : result.criteria) {
    json x{{"name", c.name}, {"passed", c.passed}};
    x["value"] = std::isfinite(c.value) ? json(c.value) : json(nullptr);
    x["threshold"] = std::isfinite(c.threshold) ? json(c.threshold) : json(nullptr);
    if (!c.detail.empty()) x["detail"] = c.detail;
    crit.push_back(x);
  }
  json files = json::array();
  for (const auto& [name, _] : result.files) files.push_back(name);
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::ostringstream ts;
  ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
  return {{"experiment", config.experiment},
          {"seed", config.seed},
          {"library_version", kVersion},
          {"timestamp", ts.str()},
          {"params", result.params},
          {"measured", result.measured},
          {"criteria", crit},
          {"passed", result.passed()},
          {"artifacts", files}};
}

void write_artifacts(const RunConfig& config, const RunResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, payload] : result.files) {
    std::ofstream out(dir / name, std::ios::binary);
    out << payload;
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  }
  std::ofstream out(dir / "manifest.json");
  out << manifest(config, result).dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
}

spectral::VorticityState random_analytic_state(int cutoff, double amplitude, int band, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  spectral::VorticityState s{fourier::FourierField(2, cutoff, 1), {}, 0.0};
  s.mean_u = {amplitude * Complex{g(rng), g(rng)}, amplitude * Complex{g(rng), g(rng)}};
  for (int ky = -band; ky <= band; ++ky)
    for (int kx = -band; kx <= band; ++kx) {
      if (kx == 0 && ky == 0) continue;
      s.omega.at({kx, ky}) = amplitude * Complex{g(rng), g(rng)} * std::exp(-0.5 * std::hypot(kx, ky));
    }
  return s;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"cxeuler experiment runner"};
  std::string config_path, out_dir;
  bool validate_only = false, list = false;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out_dir, "output directory (overrides output_dir)");
  app.add_flag("--validate-only", validate_only, "check the configuration without computing");
  app.add_flag("--list-experiments", list, "print the experiment names");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }
  if (list) {
    for (const auto& n : experiment_names()) out << n << '\n';
    return 0;
  }
  if (config_path.empty()) {
    err << "usage error: --config is required\n" << app.help();
    return 2;
  }
  RunConfig config;
  try {
    config = load_config(config_path);
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (validate_only) {
      out << validate(config) << '\n';
      return 0;
    }
    validate(config);
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  }
  try {
    const auto result = run(config);
    write_artifacts(config, result, config.output_dir);
    for (const auto& c : result.criteria) {
      out << (c.passed ? "PASS " : "FAIL ") << c.name << " value=" << fmt(c.value) << " threshold=" << fmt(c.threshold);
      if (!c.detail.empty()) out << " (" << c.detail << ')';
      out << '\n';
      if (!c.passed) err << "criterion failed: " << c.name << '\n';
    }
    return result.exit_code();
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace cxeuler::cli
