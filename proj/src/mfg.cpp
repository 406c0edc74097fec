#include "carnot/mfg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "carnot/heat.hpp"

namespace carnot {

Coupling::Coupling(GridPtr grid, const CouplingSpec& c, const GroupSpec& spec)
    : c_(c), mollifier_(std::move(grid), c.mollifier, spec) {
  if (!std::isfinite(c.gain) || c.gain < 0.0) throw std::invalid_argument("Coupling: gain must be finite and >= 0");
}

Field Coupling::operator()(const Field& rho) const {
  Field out = mollifier_.apply(rho);
  for (double& v : out.values) v *= c_.gain;
  out.time = rho.time;
  return out;
}

Field coupling_eval(const Field& rho, const Coupling& c) { return c(rho); }

double c1_norm(const DiscreteCalculus& calc, const Field& f) {
  return f.sup_norm() + vector_sup_norm(calc.gradient(f));
}

void MFGParams::validate() const {
  if (!(sigma > 0.0)) throw std::invalid_argument("MFGParams: sigma must be positive");
  if (!(gamma >= 2.0)) throw std::domain_error("MFGParams: gamma must be at least 2");
  if (!(horizon > 0.0)) throw std::invalid_argument("MFGParams: horizon must be positive");
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("MFGParams: theta must lie in (0, 1]");
  if (!(tol_u > 0.0) || !(tol_rho > 0.0)) throw std::invalid_argument("MFGParams: tolerances must be positive");
  if (max_iterations < 1) throw std::invalid_argument("MFGParams: max_iterations must be at least 1");
  if (!(radius > 0.0)) throw std::invalid_argument("MFGParams: radius must be positive");
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) throw std::invalid_argument("MFGParams: cfl_safety must lie in (0, 1]");
  if (max_levels < 2) throw std::invalid_argument("MFGParams: max_levels must be at least 2");
}

namespace {

constexpr const char* kNoFixedPoint = "no fixed point found at this T";

struct FPSweep {
  FPResult fp;
  std::vector<Field> rho;       // at the check times
  std::vector<Field> coupling;  // at the stored levels
};

// Step grid, stored levels and the two half-sweeps of the map T.
class Engine {
 public:
  Engine(const DiscreteCalculus& calc, const GroupSpec& spec, const Field& u_T, const Field& rho0,
         const Coupling& coupling, const MFGParams& p)
      : calc_(calc), u_T_(u_T), rho0_(rho0), coupling_(coupling), p_(p),
        mask_(make_ball_mask(calc.grid(), spec, p.radius)) {
    p.validate();
    if (!u_T.grid || !rho0.grid || u_T.grid->size() != calc.grid().size() || rho0.grid->size() != calc.grid().size())
      throw std::invalid_argument("mfg: data must live on the calculus grid");
    double dt = p.dt;
    if (dt <= 0.0) {
      const double G = 2.0 * vector_sup_norm(godunov_gradient(calc, u_T)) + 1.0;
      dt = std::min(hj_dt(calc, p.sigma, p.gamma, G, p.cfl_safety),
                    fp_dt(calc, p.sigma, p.gamma * std::pow(G, p.gamma - 1.0), p.cfl_safety));
    }
    steps_ = std::max(1, static_cast<int>(std::ceil(p.horizon / dt - 1e-9)));
    dt_ = p.horizon / steps_;
    const int stride = (steps_ + p.max_levels - 2) / (p.max_levels - 1);
    for (int s = 0; s < steps_; s += stride) level_steps_.push_back(s);
    level_steps_.push_back(steps_);
    for (int s : level_steps_) times_.push_back(s * dt_);
    times_.back() = p.horizon;
    for (int q = 1; q <= 4; ++q) check_times_.push_back(p.horizon * q / 4.0);
  }

  double dt() const { return dt_; }
  int steps() const { return steps_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& check_times() const { return check_times_; }
  const BallMask& mask() const { return mask_; }

  // FP forward with the drift of u (given at the stored levels).
  FPSweep forward(const std::vector<Field>& u) const {
    std::vector<Field> drifts;
    drifts.reserve(u.size());
    for (const auto& f : u) drifts.push_back(value_drift(calc_, f, p_.gamma));
    const auto b = DriftField::samples(times_, std::move(drifts));
    FPOptions opt;
    opt.sigma = p_.sigma;
    opt.horizon = p_.horizon;
    opt.dt = dt_;
    opt.output_times = check_times_;
    FPSweep out;
    out.coupling.resize(times_.size());
    std::size_t next = 0;
    out.fp = fp_solve(calc_, rho0_, b, mask_, opt, [&](int step, double t, const Field& rho) {
      if (next < level_steps_.size() && step == level_steps_[next]) {
        out.coupling[next] = coupling_(rho);
        out.coupling[next].time = times_[next];
        (void)t;
        ++next;
      }
    });
    if (next != level_steps_.size()) throw std::logic_error("mfg: FP sweep missed a stored level");
    for (double t : check_times_) {
      const auto it = std::min_element(out.fp.times.begin(), out.fp.times.end(),
                                       [&](double a, double c) { return std::abs(a - t) < std::abs(c - t); });
      out.rho.push_back(out.fp.states[static_cast<std::size_t>(it - out.fp.times.begin())]);
    }
    return out;
  }

  HamiltonianSpec reversed(const std::vector<Field>& coupling) const {
    HamiltonianSpec s;
    s.gamma = p_.gamma;
    s.u0 = u_T_;
    s.u0.time = 0.0;
    s.F = time_reversed(TimeField::samples(times_, coupling), p_.horizon);
    return s;
  }

  HJOptions hj_options() const {
    HJOptions opt;
    opt.sigma = p_.sigma;
    opt.horizon = p_.horizon;
    opt.dt = dt_;
    opt.cfl_safety = p_.cfl_safety;
    for (double t : times_) opt.output_times.push_back(p_.horizon - t);
    return opt;
  }

  // HJ backward with the given coupling, returned on the stored levels in t.
  std::vector<Field> backward(const std::vector<Field>& coupling) const {
    const auto r = hj_solve(calc_, reversed(coupling), hj_options());
    if (r.u.size() != times_.size()) throw std::logic_error("mfg: HJ sweep level mismatch");
    std::vector<Field> psi(r.u.states.rbegin(), r.u.states.rend());
    for (std::size_t j = 0; j < psi.size(); ++j) psi[j].time = times_[j];
    return psi;
  }

 private:
  const DiscreteCalculus& calc_;
  const Field& u_T_;
  const Field& rho0_;
  const Coupling& coupling_;
  MFGParams p_;
  BallMask mask_;
  double dt_ = 0.0;
  int steps_ = 0;
  std::vector<int> level_steps_;
  std::vector<double> times_;
  std::vector<double> check_times_;
};

double sup_difference(const std::vector<Field>& a, const std::vector<Field>& b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, max_abs_difference(a[j], b[j]));
  return d;
}

}  // namespace

MFGState mfg_picard(const DiscreteCalculus& calc, const GroupSpec& spec, const Field& u_T, const Field& rho0,
                    const Coupling& coupling, const MFGParams& params, const MFGObserver& observer) {
  const Engine eng(calc, spec, u_T, rho0, coupling, params);
  MFGState st;
  st.times = eng.times();
  st.check_times = eng.check_times();
  st.theta = params.theta;
  st.dt = eng.dt();
  st.steps = eng.steps();
  for (double t : st.times) {
    st.u.push_back(u_T);
    st.u.back().time = t;
  }
  st.verdict = kNoFixedPoint;
  st.message = "iteration limit reached";

  try {
    for (int it = 1; it <= params.max_iterations; ++it) {
      auto sweep = eng.forward(st.u);
      const auto psi = eng.backward(sweep.coupling);

      MFGIteration rec;
      rec.index = it;
      rec.residual_u = sup_difference(psi, st.u);
      rec.change_u = params.theta * rec.residual_u;
      rec.change_rho = std::numeric_limits<double>::infinity();
      if (!st.rho.empty()) {
        rec.change_rho = 0.0;
        for (std::size_t q = 0; q < sweep.rho.size(); ++q) {
          const auto d = flat_distance_fields(sweep.rho[q], st.rho[q], spec);
          if (!d.ok()) throw std::runtime_error("flat distance LP ended with status " + d.status);
          rec.change_rho = std::max(rec.change_rho, d.value);
        }
      }
      const auto& mass = sweep.fp.diag.mass;
      rec.min_mass = *std::min_element(mass.begin(), mass.end());
      rec.max_mass = *std::max_element(mass.begin(), mass.end());

      for (std::size_t j = 0; j < st.u.size(); ++j)
        for (std::size_t n = 0; n < st.u[j].values.size(); ++n)
          st.u[j].values[n] = (1.0 - params.theta) * st.u[j].values[n] + params.theta * psi[j].values[n];

      st.rho = std::move(sweep.rho);
      st.coupling = std::move(sweep.coupling);
      st.fp = std::move(sweep.fp.diag);
      st.history.push_back(rec);
      st.iteration = it;
      const bool done = rec.residual_u <= params.tol_u && rec.change_rho <= params.tol_rho;
      if (done) {
        st.verdict = "converged";
        st.message.clear();
      }
      if (observer) observer(st);
      if (done) break;
    }
  } catch (const std::domain_error& e) {
    st.verdict = kNoFixedPoint;
    st.message = e.what();
  } catch (const std::runtime_error& e) {
    st.verdict = kNoFixedPoint;
    st.message = e.what();
  }
  return st;
}

Trajectory reversed_value(const MFGState& state) {
  Trajectory tr;
  const double T = state.times.back();
  for (std::size_t j = state.times.size(); j-- > 0;) {
    tr.times.push_back(T - state.times[j]);
    tr.states.push_back(state.u[j]);
    tr.states.back().time = tr.times.back();
  }
  return tr;
}

HamiltonianSpec reversed_spec(const MFGState& state, const Field& u_T, double gamma) {
  if (state.coupling.size() != state.times.size()) throw std::invalid_argument("reversed_spec: no coupling stored");
  HamiltonianSpec s;
  s.gamma = gamma;
  s.u0 = u_T;
  s.u0.time = 0.0;
  s.F = time_reversed(TimeField::samples(state.times, state.coupling), state.times.back());
  return s;
}

namespace {

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json history_json(const std::vector<MFGIteration>& h) {
  auto arr = nlohmann::json::array();
  for (const auto& r : h)
    arr.push_back({{"index", r.index},
                   {"residual_u", r.residual_u},
                   {"change_u", r.change_u},
                   {"change_rho", finite_or_null(r.change_rho)},
                   {"min_mass", r.min_mass},
                   {"max_mass", r.max_mass}});
  return arr;
}

}  // namespace

nlohmann::json MFGState::to_json() const {
  return {{"verdict", verdict},     {"message", message}, {"iterations", iteration},
          {"theta", theta},         {"dt", dt},           {"steps", steps},
          {"stored_levels", times.size()}, {"check_times", check_times}, {"history", history_json(history)}};
}

bool MFGReport::all_hold() const {
  return duality_holds && mass_holds && energy.l2_holds && energy.gradient_holds && nonnegative &&
         sup_bounds.holds() && fixed_point_holds;
}

nlohmann::json MFGReport::to_json() const {
  return {{"iterations", iterations},
          {"duality", duality.to_json()},
          {"duality_tolerance", duality_tolerance},
          {"duality_holds", duality_holds},
          {"mass_error", mass_error},
          {"mass_holds", mass_holds},
          {"fp_invariants", fp_invariants.to_json()},
          {"energy", energy.to_json()},
          {"nonnegative", nonnegative},
          {"sup_bounds", sup_bounds.to_json()},
          {"coupling_sup", coupling_sup},
          {"fixed_point_residual", fixed_point_residual},
          {"fixed_point_holds", fixed_point_holds},
          {"all_hold", all_hold()}};
}

MFGReport mfg_residual_report(const DiscreteCalculus& calc, const GroupSpec& spec, const MFGState& state,
                              const Field& u_T, const Field& rho0, const Coupling& coupling,
                              const MFGParams& params) {
  MFGParams p = params;
  p.dt = state.dt;
  const Engine eng(calc, spec, u_T, rho0, coupling, p);
  if (eng.times() != state.times) throw std::invalid_argument("mfg_residual_report: state does not match params");
  MFGReport rep;
  rep.iterations = history_json(state.history);

  // one more application of T, then every audit on (psi = T(u), its density)
  const auto sweep = eng.forward(state.u);
  const auto rspec = eng.reversed(sweep.coupling);
  auto hopt = eng.hj_options();
  const auto hj = hj_solve(calc, rspec, hopt);
  std::vector<Field> psi(hj.u.states.rbegin(), hj.u.states.rend());
  rep.fixed_point_residual = sup_difference(psi, state.u);
  rep.fixed_point_holds = rep.fixed_point_residual <= 2.0 * params.tol_u;
  rep.sup_bounds = sup_bounds_check(hj.u, rspec);

  // the reversed backward FP of the duality check is the forward density
  hopt.output_times.clear();
  rep.duality = duality_check(calc, rspec, hopt, rho0, 0.0, params.horizon, eng.mask());
  rep.duality_tolerance = 5.0 * (calc.grid().spacing(0) + state.dt) * rep.duality.scale;
  rep.duality_holds = rep.duality.residual <= rep.duality_tolerance;

  const auto& dg = sweep.fp.diag;
  for (double m : dg.mass) rep.mass_error = std::max(rep.mass_error, std::abs(m - dg.mass.front()));
  rep.mass_holds = rep.mass_error <= 1e-6;
  rep.fp_invariants = fp_invariants(dg);
  rep.energy = energy_check(dg, params.sigma, params.horizon);
  rep.nonnegative = *std::min_element(dg.min.begin(), dg.min.end()) >= -1e-3 * dg.initial_sup;
  for (const auto& f : sweep.coupling) rep.coupling_sup = std::max(rep.coupling_sup, f.sup_norm());
  return rep;
}

}  // namespace carnot
