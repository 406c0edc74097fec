#include "carnot/fokker_planck.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "carnot/heat.hpp"

namespace carnot {

DriftField DriftField::zero(int m) {
  DriftField b;
  b.kind_ = Kind::Zero;
  b.m_ = m;
  b.value_.assign(m, 0.0);
  return b;
}

DriftField DriftField::constant(std::vector<double> v) {
  DriftField b;
  b.kind_ = Kind::Constant;
  b.m_ = static_cast<int>(v.size());
  double s = 0.0;
  for (double x : v) s += x * x;
  b.sup_ = std::sqrt(s);
  b.value_ = std::move(v);
  if (b.sup_ == 0.0) b.kind_ = Kind::Zero;
  return b;
}

DriftField DriftField::samples(std::vector<double> times, std::vector<Field> fields) {
  if (times.empty() || times.size() != fields.size())
    throw std::invalid_argument("DriftField::samples: need one field per time");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("DriftField::samples: times must increase");
  DriftField b;
  b.kind_ = Kind::Samples;
  b.m_ = fields.front().components;
  for (const auto& f : fields) {
    if (f.components != b.m_) throw std::invalid_argument("DriftField::samples: component mismatch");
    if (!f.all_finite()) throw std::invalid_argument("DriftField::samples: non-finite drift");
    b.sup_ = std::max(b.sup_, vector_sup_norm(f));
  }
  b.times_ = std::move(times);
  b.fields_ = std::move(fields);
  return b;
}

std::pair<std::size_t, double> DriftField::bracket(double t) const {
  if (t <= times_.front()) return {0, 0.0};
  if (t >= times_.back()) return {times_.size() - 1, 0.0};
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
  const double span = times_[i + 1] - times_[i];
  double w = (t - times_[i]) / span;
  // snap to sample times so that drifts sampled on the solver's step grid are used exactly
  if (w < 1e-9) w = 0.0;
  if (w > 1.0 - 1e-9) return {i + 1, 0.0};
  return {i, w};
}

void DriftField::eval(double t, const GridPtr& g, Field& out) const {
  out.grid = g;
  out.components = m_;
  out.time = t;
  out.values.resize(g->size() * m_);
  if (kind_ != Kind::Samples) {
    for (std::size_t n = 0; n < g->size(); ++n)
      for (int i = 0; i < m_; ++i) out.values[n * m_ + i] = value_[i];
    return;
  }
  const auto [i, w] = bracket(t);
  const auto& a = fields_[i];
  if (a.grid->size() != g->size()) throw std::invalid_argument("DriftField::eval: grid mismatch");
  if (w == 0.0) {
    out.values = a.values;
    return;
  }
  const auto& c = fields_[i + 1];
  for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = (1.0 - w) * a.values[k] + w * c.values[k];
}

void DriftField::eval_at(double t, std::span<const double> x, std::span<double> out) const {
  if (kind_ != Kind::Samples) {
    for (int i = 0; i < m_; ++i) out[i] = value_[i];
    return;
  }
  const auto [k, w] = bracket(t);
  for (int i = 0; i < m_; ++i) {
    double v = interpolate(fields_[k], x, i);
    if (w != 0.0) v = (1.0 - w) * v + w * interpolate(fields_[k + 1], x, i);
    out[i] = v;
  }
}

double DriftField::sup_norm() const { return sup_; }

Field value_drift(const DiscreteCalculus& calc, const Field& u, double gamma) {
  Field g = calc.gradient(u);
  const int m = g.components;
  for (std::size_t n = 0; n < g.size(); ++n) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += g.at(n, i) * g.at(n, i);
    const double scale = gamma == 2.0 ? 2.0 : (s > 0.0 ? gamma * std::pow(s, 0.5 * (gamma - 2.0)) : 0.0);
    for (int i = 0; i < m; ++i) g.at(n, i) *= scale;
  }
  return g;
}

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

}  // namespace

double fp_dt(const DiscreteCalculus& calc, double sigma, double drift_sup, double safety) {
  const auto& g = calc.grid();
  double worst = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    double rate = diffusion_rate(calc, sigma, n);
    for (int k = 0; k < calc.d(); ++k) {
      double ak = 0.0;
      for (int i = 0; i < calc.m(); ++i) ak += calc.coeff(i, k, n) * calc.coeff(i, k, n);
      rate += drift_sup * std::sqrt(ak) / g.spacing(k);
    }
    worst = std::max(worst, rate);
  }
  return worst == 0.0 ? kUnconstrained : safety / worst;
}

void fp_step_into(const DiscreteCalculus& calc, const Field& rho, const Field* b, double sigma, double dt,
                  const BallMask& mask, Field& out) {
  const auto& g = calc.grid();
  const int d = calc.d(), m = calc.m();
  const std::size_t N = g.size();
  if (rho.components != 1) throw std::invalid_argument("fp_step: scalar density expected");
  if (b && b->components != m) throw std::invalid_argument("fp_step: drift must have m components");
  if (mask.inside.size() != N) throw std::invalid_argument("fp_step: mask does not match grid");
  const double limit = max_stable_dt(calc, sigma, b, 1.0);
  if (dt > limit * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "fp_step: dt=" << dt << " exceeds the stable bound " << limit;
    throw std::domain_error(msg.str());
  }

  std::vector<double> D(static_cast<std::size_t>(d) * N);
  for (std::size_t n = 0; n < N; ++n)
    for (int l = 0; l < d; ++l) D[l * N + n] = calc.partial(rho.values.data(), n, l);
  std::vector<double> Bt;
  if (b) {
    Bt.assign(static_cast<std::size_t>(d) * N, 0.0);
    for (std::size_t n = 0; n < N; ++n)
      for (int k = 0; k < d; ++k) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += b->at(n, i) * calc.coeff(i, k, n);
        Bt[k * N + n] = s;
      }
  }

  std::vector<double> acc(N, 0.0);
  const double* r = rho.values.data();
  for (int k = 0; k < d; ++k) {
    const std::size_t s = g.stride(k);
    const double h = g.spacing(k);
    const int Nk = g.nodes()[k];
    for (std::size_t n = 0; n < N; ++n) {
      if (calc.axis_index(n, k) == Nk - 1) continue;
      const std::size_t p = n + s;
      if (!mask.inside[n] && !mask.inside[p]) continue;
      double flux = calc.face_diffusion(k, k, k, n) * (r[p] - r[n]) / h;
      for (int l = 0; l < d; ++l) {
        if (l == k) continue;
        const double Akl = calc.face_diffusion(k, k, l, n);
        if (Akl != 0.0) flux += Akl * 0.5 * (D[l * N + n] + D[l * N + p]);
      }
      flux *= sigma;
      if (b) {
        const double Bf = 0.5 * (Bt[k * N + n] + Bt[k * N + p]);
        flux += Bf * (Bf < 0.0 ? r[n] : r[p]);
      }
      acc[n] += flux / h;
      acc[p] -= flux / h;
    }
  }

  out.grid = rho.grid;
  out.components = 1;
  out.time = rho.time + dt;
  out.values.resize(N);
  for (std::size_t n = 0; n < N; ++n) {
    out.values[n] = mask.inside[n] ? r[n] + dt * acc[n] : 0.0;
    if (!std::isfinite(out.values[n])) throw std::runtime_error("fp_step: non-finite density");
  }
}

Field fp_step(const DiscreteCalculus& calc, const Field& rho, const Field* b, double sigma, double dt,
              const BallMask& mask) {
  Field out;
  fp_step_into(calc, rho, b, sigma, dt, mask, out);
  return out;
}

namespace {

double sum_sq_gradient(const DiscreteCalculus& calc, const Field& f) {
  const Field g = calc.gradient(f);
  double s = 0.0;
  for (double v : g.values) s += v * v;
  return s * calc.grid().cell_volume();
}

double masked_sum(const Field& f, const std::vector<char>& which) {
  double s = 0.0;
  for (std::size_t n = 0; n < f.size(); ++n)
    if (which[n]) s += f.values[n];
  return s * f.grid->cell_volume();
}

}  // namespace

FPResult fp_solve(const DiscreteCalculus& calc, const Field& rho0, const DriftField& b, const BallMask& mask,
                  const FPOptions& opt, const StepObserver& observer) {
  if (!(opt.horizon > 0.0)) throw std::invalid_argument("fp_solve: horizon must be positive");
  if (!(opt.sigma > 0.0)) throw std::invalid_argument("fp_solve: sigma must be positive");
  if (b.components() != calc.m()) throw std::invalid_argument("fp_solve: drift has the wrong component count");
  if (rho0.min_value() < 0.0) throw std::invalid_argument("fp_solve: initial density must be nonnegative");
  FPResult res;
  double dt = opt.dt > 0.0 ? opt.dt : fp_dt(calc, opt.sigma, b.sup_norm(), opt.cfl_safety);
  res.steps = std::max(1, static_cast<int>(std::ceil(opt.horizon / dt - 1e-9)));
  dt = opt.horizon / res.steps;
  res.dt = dt;

  std::vector<int> out_steps;
  for (double t : opt.output_times) {
    if (t < 0.0 || t > opt.horizon * (1 + 1e-12)) throw std::invalid_argument("fp_solve: output time outside [0,T]");
    out_steps.push_back(static_cast<int>(std::lround(t / dt)));
  }
  out_steps.push_back(res.steps);
  std::sort(out_steps.begin(), out_steps.end());
  out_steps.erase(std::unique(out_steps.begin(), out_steps.end()), out_steps.end());

  Field cur = rho0;
  cur.time = 0.0;
  for (std::size_t n = 0; n < cur.size(); ++n)
    if (!mask.inside[n]) cur.values[n] = 0.0;
  Field next, drift;
  auto& dg = res.diag;
  dg.initial_sup = cur.sup_norm();
  dg.initial_l2_squared = cur.l2_squared();
  dg.drift_sup = b.sup_norm();

  double grad_prev = 0.0;
  auto record = [&](int step, double t) {
    const double grad = sum_sq_gradient(calc, cur);
    dg.times.push_back(t);
    dg.mass.push_back(cur.integral());
    dg.sup.push_back(cur.max_value());
    dg.min.push_back(cur.min_value());
    dg.l2_squared.push_back(cur.l2_squared());
    const double bm = masked_sum(cur, mask.boundary_layer);
    dg.boundary_mass.push_back(bm);
    if (!dg.contact_time && std::abs(bm) > 1e-10) dg.contact_time = t;
    dg.dissipation.push_back(step == 0 ? 0.0 : dg.dissipation.back() + 0.5 * dt * (grad + grad_prev));
    grad_prev = grad;
    if (opt.store_every_step || std::binary_search(out_steps.begin(), out_steps.end(), step)) {
      res.times.push_back(t);
      res.states.push_back(cur);
    }
    if (observer) observer(step, t, cur);
  };

  record(0, 0.0);
  for (int s = 0; s < res.steps; ++s) {
    const double t = s * dt;
    const Field* bp = nullptr;
    if (!b.is_zero()) {
      b.eval(t, rho0.grid, drift);
      bp = &drift;
    }
    fp_step_into(calc, cur, bp, opt.sigma, dt, mask, next);
    std::swap(cur, next);
    cur.time = (s + 1) * dt;
    record(s + 1, cur.time);
  }
  return res;
}

nlohmann::json FPDiagnostics::to_json() const {
  nlohmann::json j = {{"times", times},
                      {"mass", mass},
                      {"sup", sup},
                      {"min", min},
                      {"l2_squared", l2_squared},
                      {"boundary_mass", boundary_mass},
                      {"dissipation", dissipation},
                      {"initial_sup", initial_sup},
                      {"initial_l2_squared", initial_l2_squared},
                      {"drift_sup", drift_sup}};
  j["contact_time"] = contact_time ? nlohmann::json(*contact_time) : nlohmann::json(nullptr);
  return j;
}

EnergyReport energy_check(const FPDiagnostics& diag, double sigma, double T) {
  EnergyReport r;
  const double e = std::exp(diag.drift_sup * diag.drift_sup * T / (2.0 * sigma));
  r.K = e * (1.0 + 1e-2);
  r.K_grad = (2.0 / sigma) * (1.0 + T * e) * (1.0 + 1e-2);
  const double l0 = diag.initial_l2_squared;
  for (double v : diag.l2_squared) r.max_l2_ratio = std::max(r.max_l2_ratio, v / l0);
  r.dissipation_ratio = diag.dissipation.empty() ? 0.0 : diag.dissipation.back() / l0;
  r.l2_holds = r.max_l2_ratio <= r.K;
  r.gradient_holds = std::isfinite(r.dissipation_ratio) && r.dissipation_ratio <= r.K_grad;
  return r;
}

nlohmann::json EnergyReport::to_json() const {
  return {{"K", K},
          {"K_grad", K_grad},
          {"max_l2_ratio", max_l2_ratio},
          {"dissipation_ratio", dissipation_ratio},
          {"l2_holds", l2_holds},
          {"gradient_holds", gradient_holds}};
}

InvariantReport fp_invariants(const FPDiagnostics& diag) {
  InvariantReport r;
  const double m0 = diag.mass.front();
  const double s0 = diag.initial_sup;
  r.min_ratio = 0.0;
  for (std::size_t i = 0; i < diag.times.size(); ++i) {
    if (diag.contact_time && diag.times[i] >= *diag.contact_time) {
      r.contact = true;
    } else {
      r.mass_error = std::max(r.mass_error, std::abs(diag.mass[i] - m0));
    }
    r.sup_ratio = std::max(r.sup_ratio, diag.sup[i] / s0);
    r.min_ratio = std::min(r.min_ratio, diag.min[i] / s0);
  }
  return r;
}

nlohmann::json InvariantReport::to_json() const {
  return {{"mass_error", mass_error}, {"sup_ratio", sup_ratio}, {"min_ratio", min_ratio}, {"contact", contact}};
}

double r_monotonicity(const DiscreteCalculus& calc, const GroupSpec& spec, const Field& rho0, const DriftField& b,
                      const FPOptions& opt, double R1, double R2) {
  if (!(R2 > R1)) throw std::invalid_argument("r_monotonicity: need R1 < R2");
  const auto m1 = make_ball_mask(calc.grid(), spec, R1);
  const auto m2 = make_ball_mask(calc.grid(), spec, R2);
  FPOptions o = opt;
  if (o.dt == 0.0) o.dt = fp_dt(calc, o.sigma, b.sup_norm(), o.cfl_safety);
  o.store_every_step = false;
  // the smaller ball's datum is the restriction of the larger one's
  Field r0 = rho0;
  for (std::size_t n = 0; n < r0.size(); ++n)
    if (!m1.inside[n]) r0.values[n] = 0.0;
  double worst = INFINITY;
  std::vector<Field> small;
  fp_solve(calc, r0, b, m1, o, [&](int, double, const Field& rho) { small.push_back(rho); });
  std::size_t k = 0;
  fp_solve(calc, r0, b, m2, o, [&](int, double, const Field& rho) {
    for (std::size_t n = 0; n < rho.size(); ++n) worst = std::min(worst, rho.values[n] - small[k].values[n]);
    ++k;
  });
  return worst;
}

WeakFormAccumulator::WeakFormAccumulator(const DiscreteCalculus& calc, double sigma) : calc_(calc), sigma_(sigma) {}

double WeakFormAccumulator::flux_density(const Field& rho, const Field& phi, const Field* b) const {
  const Field gp = calc_.gradient(phi);
  const Field gr = calc_.gradient(rho);
  const int m = calc_.m();
  double s = 0.0;
  for (std::size_t n = 0; n < rho.size(); ++n)
    for (int i = 0; i < m; ++i) {
      double v = sigma_ * gr.at(n, i);
      if (b) v += b->at(n, i) * rho.values[n];
      s += gp.at(n, i) * v;
    }
  return s * calc_.grid().cell_volume();
}

void WeakFormAccumulator::observe(double t, const Field& rho, const Field& phi, const Field* b) {
  const double g = flux_density(rho, phi, b);
  double pair = 0.0;
  for (std::size_t n = 0; n < rho.size(); ++n) pair += rho.values[n] * phi.values[n];
  pair *= calc_.grid().cell_volume();
  if (!started_) {
    started_ = true;
    initial_ = pair;
  } else {
    if (!(t > t_prev_)) throw std::invalid_argument("WeakFormAccumulator: times must increase");
    flux_ += 0.5 * (t - t_prev_) * (g + g_prev_);
    double s = 0.0;
    for (std::size_t n = 0; n < rho.size(); ++n)
      s += (phi.values[n] - phi_prev_.values[n]) * 0.5 * (rho.values[n] + rho_prev_.values[n]);
    dtphi_ += s * calc_.grid().cell_volume();
  }
  current_ = pair;
  t_prev_ = t;
  g_prev_ = g;
  rho_prev_ = rho;
  phi_prev_ = phi;
}

double WeakFormAccumulator::signed_residual() const { return current_ - initial_ + flux_ - dtphi_; }

double weak_form_residual(const DiscreteCalculus& calc, const std::vector<double>& times,
                          const std::vector<Field>& rho, const std::vector<Field>& phi, const DriftField& b,
                          double sigma) {
  if (times.size() != rho.size() || times.size() != phi.size())
    throw std::invalid_argument("weak_form_residual: times, rho and phi must have equal length");
  WeakFormAccumulator acc(calc, sigma);
  Field drift;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Field* bp = nullptr;
    if (!b.is_zero()) {
      b.eval(times[i], rho[i].grid, drift);
      bp = &drift;
    }
    acc.observe(times[i], rho[i], phi[i], bp);
  }
  return acc.residual();
}

}  // namespace carnot
