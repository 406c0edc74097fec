#include "carnot/hamilton_jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "carnot/heat.hpp"

namespace carnot {

namespace {

double diffusion_rate(const DiscreteCalculus& calc, double sigma, std::size_t n) {
  const auto& g = calc.grid();
  double rate = 0.0;
  for (int k = 0; k < calc.d(); ++k) {
    rate += sigma * calc.diffusion(k, k, n) / (g.spacing(k) * g.spacing(k));
    for (int l = 0; l < calc.d(); ++l)
      if (l != k) rate += sigma * std::abs(calc.diffusion(k, l, n)) / (2.0 * g.spacing(k) * g.spacing(l));
  }
  return rate;
}

// sum_i sum_k |a_i^k| / h_k
double transport_rate(const DiscreteCalculus& calc, std::size_t n) {
  double s = 0.0;
  for (int i = 0; i < calc.m(); ++i)
    for (int k = 0; k < calc.d(); ++k) s += std::abs(calc.coeff(i, k, n)) / calc.grid().spacing(k);
  return s;
}

double hamiltonian(double p2, double gamma) { return gamma == 2.0 ? p2 : std::pow(p2, 0.5 * gamma); }

Field component(const Field& F, int c) {
  Field out(F.grid, 1, F.time);
  for (std::size_t n = 0; n < F.size(); ++n) out.values[n] = F.at(n, c);
  return out;
}

// |p|^2 of the Godunov gradient at each node.
std::vector<double> godunov_squared(const DiscreteCalculus& calc, const Field& u) {
  const Field p = godunov_gradient(calc, u);
  std::vector<double> out(u.size());
  for (std::size_t n = 0; n < u.size(); ++n) {
    double s = 0.0;
    for (int i = 0; i < p.components; ++i) s += p.at(n, i) * p.at(n, i);
    out[n] = s;
  }
  return out;
}

double trapezoid(const std::vector<double>& g, double dt) {
  if (g.size() < 2) return 0.0;
  double s = 0.5 * (g.front() + g.back());
  for (std::size_t k = 1; k + 1 < g.size(); ++k) s += g[k];
  return s * dt;
}

}  // namespace

TimeField time_reversed(const TimeField& f, double T) {
  if (f.is_constant()) return f;
  std::vector<double> times;
  std::vector<Field> fields;
  for (std::size_t k = f.times().size(); k-- > 0;) {
    times.push_back(T - f.times()[k]);
    fields.push_back(f.fields()[k]);
    fields.back().time = times.back();
  }
  return TimeField::samples(std::move(times), std::move(fields));
}

void HamiltonianSpec::validate() const {
  if (!(gamma >= 2.0)) throw std::domain_error("HamiltonianSpec: gamma must be at least 2");
  if (F.components() != 1) throw std::invalid_argument("HamiltonianSpec: source must be scalar");
  if (!u0.grid || u0.components != 1) throw std::invalid_argument("HamiltonianSpec: u0 must be a scalar field");
  if (!u0.all_finite()) throw std::invalid_argument("HamiltonianSpec: u0 is not finite");
  if (u0.min_value() < 0.0) throw std::domain_error("HamiltonianSpec: u0 must be nonnegative");
}

Field godunov_gradient(const DiscreteCalculus& calc, const Field& u) {
  if (u.components != 1) throw std::invalid_argument("godunov_gradient: scalar field expected");
  const auto& g = calc.grid();
  const int m = calc.m(), d = calc.d();
  Field out(u.grid, m, u.time);
  const double* f = u.values.data();
  std::vector<double> dk(d);
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (g.on_boundary(n)) {
      for (int k = 0; k < d; ++k) dk[k] = calc.partial(f, n, k);
      for (int i = 0; i < m; ++i) {
        double s = 0.0;
        for (int k = 0; k < d; ++k) s += calc.coeff(i, k, n) * dk[k];
        out.at(n, i) = s;
      }
      continue;
    }
    for (int i = 0; i < m; ++i) {
      double back = 0.0, fwd = 0.0;
      for (int k = 0; k < d; ++k) {
        const double a = calc.coeff(i, k, n);
        if (a == 0.0) continue;
        const std::size_t s = g.stride(k);
        const double h = g.spacing(k);
        if (a > 0.0) {
          back += a * (f[n] - f[n - s]) / h;
          fwd += a * (f[n + s] - f[n]) / h;
        } else {
          back += a * (f[n + s] - f[n]) / h;
          fwd += a * (f[n] - f[n - s]) / h;
        }
      }
      const double lo = std::max(back, 0.0), hi = std::min(fwd, 0.0);
      out.at(n, i) = lo >= -hi ? lo : hi;
    }
  }
  return out;
}

double hj_dt(const DiscreteCalculus& calc, double sigma, double gamma, double grad_bound, double safety) {
  const double lip = gamma * std::pow(grad_bound, gamma - 1.0);
  double worst = 0.0;
  for (std::size_t n = 0; n < calc.grid().size(); ++n)
    worst = std::max(worst, diffusion_rate(calc, sigma, n) + lip * transport_rate(calc, n));
  if (worst == 0.0) return kUnconstrained;
  return safety / worst;
}

Field hj_step_direct(const DiscreteCalculus& calc, const Field& u, const HamiltonianSpec& spec, double sigma,
                     double dt) {
  if (u.components != 1) throw std::invalid_argument("hj_step_direct: scalar field expected");
  if (dt < 0.0) throw std::domain_error("hj_step_direct: negative dt");
  const auto& g = calc.grid();
  const auto p2 = godunov_squared(calc, u);
  Field F;
  if (!spec.F.is_zero()) spec.F.eval(u.time, u.grid, F);
  const double gamma = spec.gamma;

  double worst = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (g.on_boundary(n)) continue;
    const double lip = p2[n] > 0.0 ? gamma * std::pow(p2[n], 0.5 * (gamma - 1.0)) : 0.0;
    worst = std::max(worst, diffusion_rate(calc, sigma, n) + lip * transport_rate(calc, n));
  }
  if (dt * worst > 1.0 + 1e-12) {
    std::ostringstream msg;
    msg << "hj_step_direct: dt=" << dt << " exceeds the stable bound " << 1.0 / worst;
    throw std::domain_error(msg.str());
  }

  Field out(u.grid, 1, u.time + dt);
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (g.on_boundary(n)) continue;
    double r = sigma * calc.laplacian_at(u, n) - hamiltonian(p2[n], gamma);
    if (!F.values.empty()) r += F.values[n];
    out.values[n] = u.values[n] + dt * r;
  }
  for (std::size_t n = 0; n < g.size(); ++n)
    if (g.on_boundary(n)) out.values[n] = out.values[nearest_interior(g, n)];
  if (!out.all_finite()) throw std::runtime_error("hj_step_direct: non-finite value");
  return out;
}

std::pair<double, int> hj_step_grid(const DiscreteCalculus& calc, const HamiltonianSpec& spec, const HJOptions& opt) {
  if (!(opt.horizon > 0.0)) throw std::invalid_argument("hj_solve: horizon must be positive");
  if (!(opt.sigma > 0.0)) throw std::invalid_argument("hj_solve: sigma must be positive");
  double dt = opt.dt;
  if (dt <= 0.0) {
    const Field p = godunov_gradient(calc, spec.u0);
    dt = hj_dt(calc, opt.sigma, spec.gamma, 2.0 * vector_sup_norm(p) + 1.0, opt.cfl_safety);
  }
  const int steps = std::max(1, static_cast<int>(std::ceil(opt.horizon / dt - 1e-9)));
  return {opt.horizon / steps, steps};
}

HJResult hj_solve(const DiscreteCalculus& calc, const HamiltonianSpec& spec, const HJOptions& opt) {
  spec.validate();
  HJResult res;
  const auto [dt, steps] = hj_step_grid(calc, spec, opt);
  res.dt = dt;
  res.steps = steps;

  std::vector<int> out_steps;
  for (double t : opt.output_times) {
    if (t < 0.0 || t > opt.horizon * (1 + 1e-12)) throw std::invalid_argument("hj_solve: output time outside [0,T]");
    out_steps.push_back(static_cast<int>(std::lround(t / dt)));
  }
  out_steps.push_back(0);
  out_steps.push_back(res.steps);
  std::sort(out_steps.begin(), out_steps.end());
  out_steps.erase(std::unique(out_steps.begin(), out_steps.end()), out_steps.end());

  Field cur = spec.u0;
  cur.time = 0.0;
  auto record = [&](int step) {
    res.max_gradient = std::max(res.max_gradient, vector_sup_norm(godunov_gradient(calc, cur)));
    if (opt.store_every_step || std::binary_search(out_steps.begin(), out_steps.end(), step)) {
      res.u.times.push_back(cur.time);
      res.u.states.push_back(cur);
    }
  };
  record(0);
  for (int s = 0; s < res.steps; ++s) {
    cur = hj_step_direct(calc, cur, spec, opt.sigma, dt);
    cur.time = (s + 1) * dt;
    record(s + 1);
  }
  return res;
}

double x_norm(const DiscreteCalculus& calc, const Field& u) {
  const Field G = calc.gradient(u);
  double second = 0.0;
  for (int j = 0; j < G.components; ++j) {
    const Field XjXu = calc.gradient(component(G, j));
    for (std::size_t k = 0; k < XjXu.values.size(); ++k) second = std::max(second, std::abs(XjXu.values[k]));
  }
  return u.sup_norm() + vector_sup_norm(G) + second;
}

double x_norm(const DiscreteCalculus& calc, const Trajectory& u) {
  double best = 0.0;
  for (const auto& f : u.states) best = std::max(best, x_norm(calc, f));
  return best;
}

double x_distance(const DiscreteCalculus& calc, const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size()) throw std::invalid_argument("x_distance: trajectories differ in length");
  double best = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) best = std::max(best, x_norm(calc, a.states[k] - b.states[k]));
  return best;
}

Trajectory duhamel_iterate(const DiscreteCalculus& calc, const Trajectory& u_prev, const HamiltonianSpec& spec,
                           double sigma) {
  if (u_prev.size() < 2) throw std::invalid_argument("duhamel_iterate: need at least two time levels");
  const double dt = (u_prev.times.back() - u_prev.times.front()) / static_cast<double>(u_prev.size() - 1);
  Trajectory out;
  out.times = u_prev.times;
  out.states.reserve(u_prev.size());
  Field w = spec.u0, F, next;
  w.time = u_prev.times.front();
  out.states.push_back(w);
  for (std::size_t n = 0; n + 1 < u_prev.size(); ++n) {
    const double t = u_prev.times[n];
    const Field G = calc.gradient(u_prev.states[n]);
    if (!spec.F.is_zero()) spec.F.eval(t, w.grid, F);
    for (std::size_t k = 0; k < w.size(); ++k) {
      double p2 = 0.0;
      for (int i = 0; i < G.components; ++i) p2 += G.at(k, i) * G.at(k, i);
      double f = -hamiltonian(p2, spec.gamma);
      if (!F.values.empty()) f += F.values[k];
      w.values[k] += dt * f;
    }
    heat_step_into(calc, w, sigma, dt, next);
    std::swap(w, next);
    w.time = u_prev.times[n + 1];
    out.states.push_back(w);
  }
  return out;
}

double FixedPointReport::max_ratio() const {
  double best = 0.0;
  for (double r : ratios) best = std::max(best, r);
  return best;
}

nlohmann::json FixedPointReport::to_json() const {
  return {{"T", T},         {"dt", dt},         {"k", k},
          {"norms", norms}, {"distances", distances}, {"ratios", ratios},
          {"iterations", iterations}, {"verdict", verdict}, {"message", message}};
}

DuhamelResult duhamel_solve(const DiscreteCalculus& calc, const HamiltonianSpec& spec, const DuhamelOptions& opt) {
  spec.validate();
  if (!(opt.horizon > 0.0)) throw std::invalid_argument("duhamel_solve: horizon must be positive");
  double dt = opt.dt > 0.0 ? opt.dt : heat_dt(calc, opt.sigma, opt.cfl_safety);
  const int steps = std::max(1, static_cast<int>(std::ceil(opt.horizon / dt - 1e-9)));
  dt = opt.horizon / steps;

  DuhamelResult res;
  auto& rep = res.report;
  rep.T = opt.horizon;
  rep.dt = dt;
  Trajectory cur;
  for (int n = 0; n <= steps; ++n) {
    cur.times.push_back(n * dt);
    cur.states.push_back(spec.u0);
    cur.states.back().time = n * dt;
  }
  const double norm0 = x_norm(calc, spec.u0);
  rep.k = opt.ball_radius > 0.0 ? opt.ball_radius : 2.0 * std::max(norm0, 1e-300);
  rep.norms.push_back(norm0);
  rep.verdict = "max_iterations";

  for (int it = 0; it < opt.max_iterations; ++it) {
    Trajectory next;
    try {
      next = duhamel_iterate(calc, cur, spec, opt.sigma);
    } catch (const std::domain_error& e) {
      rep.verdict = "diverged";
      rep.message = e.what();
      break;
    }
    rep.iterations = it + 1;
    const double norm = x_norm(calc, next);
    const double dist = x_distance(calc, next, cur);
    rep.norms.push_back(norm);
    if (!std::isfinite(norm) || !std::isfinite(dist) || norm > 10.0 * rep.k) {
      rep.verdict = "diverged";
      std::ostringstream msg;
      msg << "norm " << norm << " exceeds 10k = " << 10.0 * rep.k;
      rep.message = msg.str();
      break;
    }
    if (!rep.distances.empty()) rep.ratios.push_back(rep.distances.back() > 0.0 ? dist / rep.distances.back() : 0.0);
    rep.distances.push_back(dist);
    cur = std::move(next);
    if (dist <= opt.tolerance) {
      rep.verdict = "converged";
      break;
    }
  }
  res.u = std::move(cur);
  return res;
}

nlohmann::json DualityReport::to_json() const {
  return {{"s", s},
          {"tau", tau},
          {"final_pairing", final_pairing},
          {"initial_pairing", initial_pairing},
          {"gradient_term", gradient_term},
          {"source_term", source_term},
          {"residual", residual},
          {"scale", scale},
          {"mass_error", mass_error},
          {"comb_holds", comb_holds}};
}

namespace {

using LevelAccess = std::function<const Field&(std::size_t)>;

// Backward FP pass from level b down to level a, pairing mu with u one level
// at a time; u_at(j) is the HJ state at t0 + j dt.
DualityReport duality_core(const DiscreteCalculus& calc, const LevelAccess& u_at, const HamiltonianSpec& spec,
                           double sigma, const Field& mu_tau, double t0, double dt, std::size_t a, std::size_t b,
                           const BallMask& mask) {
  if (mu_tau.min_value() < 0.0) throw std::invalid_argument("duality_check: mu_tau must be nonnegative");
  const std::size_t len = b - a;
  const double hd = calc.grid().cell_volume();
  Field mu = mu_tau, next, F;
  for (std::size_t n = 0; n < mu.size(); ++n)
    if (!mask.inside[n]) mu.values[n] = 0.0;

  DualityReport rep;
  rep.s = t0 + a * dt;
  rep.tau = t0 + b * dt;
  const double mass0 = mu.integral();
  std::vector<double> grad(len + 1), src(len + 1);
  for (std::size_t k = 0; k <= len; ++k) {
    const std::size_t j = b - k;
    const Field& u = u_at(j);
    const auto p2 = godunov_squared(calc, u);
    if (!spec.F.is_zero()) spec.F.eval(t0 + j * dt, u.grid, F);
    double gs = 0.0, fs = 0.0, pair = 0.0;
    for (std::size_t n = 0; n < mu.size(); ++n) {
      gs += (spec.gamma - 1.0) * hamiltonian(p2[n], spec.gamma) * mu.values[n];
      if (!F.values.empty()) fs += F.values[n] * mu.values[n];
      pair += u.values[n] * mu.values[n];
    }
    grad[len - k] = gs * hd;
    src[len - k] = fs * hd;
    if (k == 0) rep.final_pairing = pair * hd;
    if (k == len) rep.initial_pairing = pair * hd;
    rep.mass_error = std::max(rep.mass_error, std::abs(mu.integral() - mass0));
    if (k == len) break;
    // reversed time: d_r mu = sigma Delta_G mu + div_G(b mu) with b from u(t_j)
    const Field drift = value_drift(calc, u, spec.gamma);
    fp_step_into(calc, mu, &drift, sigma, dt, mask, next);
    std::swap(mu, next);
  }
  rep.gradient_term = trapezoid(grad, dt);
  rep.source_term = trapezoid(src, dt);
  rep.residual = std::abs(rep.final_pairing - rep.initial_pairing - rep.gradient_term - rep.source_term);
  rep.scale = spec.u0.sup_norm() + (rep.tau - rep.s) * spec.F.sup_norm();
  rep.comb_holds = rep.gradient_term <= 2.0 * rep.scale * (1.0 + 1e-2);
  return rep;
}

std::pair<std::size_t, std::size_t> snap_interval(double s, double tau, double t0, double dt, std::size_t levels) {
  const auto a = static_cast<std::size_t>(std::max(0L, std::lround((s - t0) / dt)));
  const auto b = static_cast<std::size_t>(std::max(0L, std::lround((tau - t0) / dt)));
  if (!(a < b && b < levels)) throw std::invalid_argument("duality_check: need s < tau within the trajectory");
  return {a, b};
}

}  // namespace

DualityReport duality_check(const DiscreteCalculus& calc, const Trajectory& u, const HamiltonianSpec& spec,
                            double sigma, const Field& mu_tau, double s, double tau, const BallMask& mask) {
  spec.validate();
  if (u.size() < 2) throw std::invalid_argument("duality_check: trajectory needs every step");
  const double t0 = u.times.front();
  const double dt = u.horizon() / static_cast<double>(u.size() - 1);
  const auto [a, b] = snap_interval(s, tau, t0, dt, u.size());
  return duality_core(calc, [&](std::size_t j) -> const Field& { return u.states[j]; }, spec, sigma, mu_tau, t0,
                      dt, a, b, mask);
}

DualityReport duality_check(const DiscreteCalculus& calc, const HamiltonianSpec& spec, const HJOptions& opt,
                            const Field& mu_tau, double s, double tau, const BallMask& mask) {
  spec.validate();
  const auto [dt, steps] = hj_step_grid(calc, spec, opt);
  const auto [a, b] = snap_interval(s, tau, 0.0, dt, static_cast<std::size_t>(steps) + 1);

  // checkpoints every K levels; a segment is recomputed when first visited
  const auto K = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(b) + 1.0)));
  std::vector<Field> checkpoints;
  Field cur = spec.u0;
  cur.time = 0.0;
  for (std::size_t j = 0; j <= b; ++j) {
    if (j % K == 0) checkpoints.push_back(cur);
    if (j == b) break;
    cur = hj_step_direct(calc, cur, spec, opt.sigma, dt);
    cur.time = (j + 1) * dt;
  }
  std::vector<Field> segment;
  std::size_t seg_start = 0;
  auto u_at = [&](std::size_t j) -> const Field& {
    if (segment.empty() || j < seg_start || j >= seg_start + segment.size()) {
      seg_start = (j / K) * K;
      segment.assign(1, checkpoints[j / K]);
      for (std::size_t i = seg_start; i < std::min(seg_start + K - 1, b); ++i) {
        segment.push_back(hj_step_direct(calc, segment.back(), spec, opt.sigma, dt));
        segment.back().time = (i + 1) * dt;
      }
    }
    return segment[j - seg_start];
  };
  return duality_core(calc, u_at, spec, opt.sigma, mu_tau, 0.0, dt, a, b, mask);
}

nlohmann::json SupBoundsReport::to_json() const {
  return {{"scale", scale},         {"upper_bound", upper_bound}, {"lower_bound", lower_bound},
          {"max_u", max_u},         {"min_u", min_u},             {"tolerance", tolerance},
          {"upper_holds", upper_holds}, {"lower_holds", lower_holds}, {"nonnegative", nonnegative}};
}

SupBoundsReport sup_bounds_check(const Trajectory& u, const HamiltonianSpec& spec) {
  if (u.states.empty()) throw std::invalid_argument("sup_bounds_check: empty trajectory");
  SupBoundsReport rep;
  rep.scale = spec.u0.sup_norm() + u.horizon() * spec.F.sup_norm();
  rep.upper_bound = rep.scale;
  rep.lower_bound = -((spec.gamma + 1.0) / (spec.gamma - 1.0)) * rep.scale;
  rep.tolerance = 1e-3 * rep.scale;
  rep.max_u = -std::numeric_limits<double>::infinity();
  rep.min_u = std::numeric_limits<double>::infinity();
  for (const auto& f : u.states) {
    rep.max_u = std::max(rep.max_u, f.max_value());
    rep.min_u = std::min(rep.min_u, f.min_value());
  }
  rep.upper_holds = rep.max_u <= rep.upper_bound + rep.tolerance;
  rep.lower_holds = rep.min_u >= rep.lower_bound - rep.tolerance;
  rep.nonnegative = rep.min_u >= -rep.tolerance;
  return rep;
}

nlohmann::json BernsteinReport::to_json() const {
  return {{"fields", fields},
          {"omega_fraction", omega_fraction},
          {"times", times},
          {"sup", sup},
          {"initial_norm", initial_norm},
          {"source_norm", source_norm},
          {"bound", bound},
          {"max_ratio", max_ratio},
          {"tolerance", tolerance},
          {"holds", holds}};
}

BernsteinReport bernstein_monitor(const Trajectory& u, const HamiltonianSpec& spec, const VectorFieldSet& Y,
                                  double omega_fraction, double tolerance) {
  if (u.states.empty()) throw std::invalid_argument("bernstein_monitor: empty trajectory");
  if (!(omega_fraction > 0.0 && omega_fraction <= 1.0))
    throw std::invalid_argument("bernstein_monitor: omega_fraction must be in (0, 1]");
  const auto& grid = u.states.front().grid;
  const DiscreteCalculus calc(grid, Y);
  const auto& g = *grid;
  const int m = Y.count(), d = g.dim();

  std::vector<char> omega(g.size());
  std::vector<double> x(d);
  for (std::size_t n = 0; n < g.size(); ++n) {
    g.node_coords(n, x);
    bool in = true;
    for (int k = 0; k < d; ++k) {
      const double c = 0.5 * (g.lower()[k] + g.upper()[k]), hw = 0.5 * (g.upper()[k] - g.lower()[k]);
      in = in && std::abs(x[k] - c) <= omega_fraction * hw * (1 + 1e-12);
    }
    omega[n] = in;
  }

  BernsteinReport rep;
  rep.fields = Y.kind == FieldKind::LeftInvariant ? "left" : Y.kind == FieldKind::RightInvariant ? "right" : "custom";
  rep.omega_fraction = omega_fraction;
  rep.tolerance = tolerance;
  rep.times = u.times;
  rep.sup.assign(m, {});
  auto sup_all = [&](const Field& f) {
    std::vector<double> out(m, 0.0);
    const Field G = calc.gradient(f);
    for (std::size_t n = 0; n < g.size(); ++n)
      for (int j = 0; j < m; ++j) out[j] = std::max(out[j], std::abs(G.at(n, j)));
    return out;
  };
  rep.initial_norm = sup_all(spec.u0);
  rep.source_norm.assign(m, 0.0);
  if (!spec.F.is_constant())
    for (const auto& f : spec.F.fields()) {
      const auto s = sup_all(f);
      for (int j = 0; j < m; ++j) rep.source_norm[j] = std::max(rep.source_norm[j], s[j]);
    }
  for (int j = 0; j < m; ++j) rep.bound.push_back(rep.initial_norm[j] + rep.source_norm[j]);

  for (const auto& f : u.states) {
    const Field G = calc.gradient(f);
    std::vector<double> s(m, 0.0);
    for (std::size_t n = 0; n < g.size(); ++n)
      if (omega[n])
        for (int j = 0; j < m; ++j) s[j] = std::max(s[j], std::abs(G.at(n, j)));
    for (int j = 0; j < m; ++j) rep.sup[j].push_back(s[j]);
  }
  for (int j = 0; j < m; ++j) {
    const double top = *std::max_element(rep.sup[j].begin(), rep.sup[j].end());
    const double r = rep.bound[j] > 0.0 ? top / rep.bound[j] : (top > 0.0 ? kUnconstrained : 0.0);
    rep.max_ratio = std::max(rep.max_ratio, r);
  }
  rep.holds = rep.max_ratio <= 1.0 + tolerance;
  return rep;
}

}  // namespace carnot
