#include "scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "carnot/flat_metric.hpp"
#include "carnot/hamilton_jacobi.hpp"
#include "carnot/heat.hpp"
#include "carnot/mfg.hpp"
#include "carnot/particles.hpp"
#include "carnot/presets.hpp"

namespace carnot::cli {

int combine_exit(int a, int b) {
  auto rank = [](int c) {
    switch (c) {
      case kConfigError: return 3;
      case kInvariantFailure: return 2;
      case kNotConverged: return 1;
      default: return c == kPass ? 0 : 2;
    }
  };
  return rank(a) >= rank(b) ? a : b;
}

namespace {

// Named pass/fail checks collected into the report.
struct Checks {
  nlohmann::json json = nlohmann::json::object();
  std::vector<std::string> failed;

  void add(const std::string& name, bool ok, nlohmann::json value, nlohmann::json bound) {
    json[name] = {{"pass", ok}, {"value", std::move(value)}, {"bound", std::move(bound)}};
    if (!ok) failed.push_back(name);
  }
};

struct Context {
  const Config& cfg;
  GroupSpec group;
  GridPtr grid;
  DiscreteCalculus calc;

  explicit Context(const Config& c)
      : cfg(c),
        group(group_preset(c.str("group.preset"))),
        grid(make_grid(GridSpec::cube(group.dim(), c.real("grid.lower"), c.real("grid.upper"), c.integer("grid.nodes")))),
        calc(grid, left_invariant_fields(group)) {}

  double sigma() const { return cfg.real("solver.sigma"); }
  double horizon() const { return cfg.real("solver.horizon"); }
  double h() const { return grid->spacing(0); }
};

void validate_common(const Config& c) {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
  };
  need(c.integer("grid.nodes") >= 5, "grid.nodes must be at least 5");
  need(c.real("grid.upper") > c.real("grid.lower"), "grid.upper must exceed grid.lower");
  need(c.real("solver.sigma") > 0.0, "solver.sigma must be positive");
  need(c.real("solver.gamma") >= 2.0, "solver.gamma must be at least 2");
  need(c.real("solver.horizon") > 0.0, "solver.horizon must be positive");
  need(c.real("solver.dt") >= 0.0, "solver.dt must be >= 0");
  need(c.real("solver.cfl_safety") > 0.0 && c.real("solver.cfl_safety") <= 1.0, "solver.cfl_safety must lie in (0, 1]");
  need(c.real("solver.radius") > 0.0, "solver.radius must be positive");
  need(c.integer("run.seed") >= 0, "run.seed must be >= 0");
}

DriftField fp_drift(const Config& c) {
  const double b1 = c.real("fp.drift1"), b2 = c.real("fp.drift2");
  if (b1 == 0.0 && b2 == 0.0) return DriftField::zero(2);
  return DriftField::constant({b1, b2});
}

HamiltonianSpec hj_spec(const Context& ctx) {
  HamiltonianSpec s;
  s.gamma = ctx.cfg.real("solver.gamma");
  s.u0 = bump_field(ctx.grid, ctx.group, ctx.cfg.real("hj.u_radius"), ctx.cfg.real("hj.u_height"));
  const double height = ctx.cfg.real("hj.source_height");
  if (height != 0.0)
    s.F = TimeField::samples({0.0}, {bump_field(ctx.grid, ctx.group, ctx.cfg.real("hj.source_radius"), height)});
  s.validate();
  return s;
}

HJOptions hj_options(const Context& ctx) {
  HJOptions o;
  o.sigma = ctx.sigma();
  o.horizon = ctx.horizon();
  o.dt = ctx.cfg.real("solver.dt");
  o.cfl_safety = ctx.cfg.real("solver.cfl_safety");
  return o;
}

void run_heat(const Context& ctx, ScenarioResult& r, Checks& checks) {
  const auto& c = ctx.cfg;
  const double hw = c.real("heat.half_width");
  const bool box = c.str("heat.data") == "box";
  const Field phi = box ? Field::from_function(ctx.grid,
                                               [&](auto x) {
                                                 for (double v : x)
                                                   if (std::abs(v) > hw) return 0.0;
                                                 return 1.0;
                                               })
                        : bump_field(ctx.grid, ctx.group, hw);
  const double dt = c.real("solver.dt") > 0 ? c.real("solver.dt") : heat_dt(ctx.calc, ctx.sigma(), c.real("solver.cfl_safety"));
  const auto times = log_spaced_times(4 * dt, ctx.horizon(), c.integer("heat.samples"));
  const auto decay = measure_gradient_decay(ctx.calc, phi, ctx.sigma(), times, dt);

  // sup norm along the same sampling times
  Field f = phi;
  double prev = 0.0, worst = 0.0;
  std::vector<double> sups;
  for (double t : times) {
    f = evolve(ctx.calc, f, ctx.sigma(), t - prev, dt);
    f.time = t;
    prev = t;
    sups.push_back(f.sup_norm());
    worst = std::max(worst, sups.back() / phi.sup_norm());
  }
  checks.add("sup_nonexpansion", worst <= 1.0 + 1e-3, worst, 1.0 + 1e-3);
  if (box) checks.add("gradient_decay_slope", decay.slope >= -0.65 && decay.slope <= -0.35, decay.slope, {-0.65, -0.35});
  r.report["decay"] = decay.to_json();
  r.report["sup_norms"] = sups;
  r.fields.emplace_back("initial", phi);
  r.fields.emplace_back("final", f);
}

void run_fp(const Context& ctx, ScenarioResult& r, Checks& checks) {
  const auto& c = ctx.cfg;
  const double R = c.real("solver.radius");
  const auto mask = make_ball_mask(*ctx.grid, ctx.group, R);
  const auto rho0 = probability_bump(ctx.grid, ctx.group, c.real("fp.rho_radius"));
  const auto b = fp_drift(c);
  FPOptions o;
  o.sigma = ctx.sigma();
  o.horizon = ctx.horizon();
  o.dt = c.real("solver.dt");
  o.cfl_safety = c.real("solver.cfl_safety");
  o.output_times = {o.horizon / 4, o.horizon / 2, 3 * o.horizon / 4};
  const auto res = fp_solve(ctx.calc, rho0, b, mask, o);
  const auto inv = fp_invariants(res.diag);
  const auto en = energy_check(res.diag, o.sigma, o.horizon);
  checks.add("mass_before_contact", inv.mass_error <= 1e-8, inv.mass_error, 1e-8);
  checks.add("sup_bound", inv.sup_ratio <= 1.0 + 1e-3, inv.sup_ratio, 1.0 + 1e-3);
  checks.add("nonnegativity", inv.min_ratio >= -1e-3, inv.min_ratio, -1e-3);
  checks.add("energy_l2", en.l2_holds, en.max_l2_ratio, en.K);
  checks.add("energy_gradient", en.gradient_holds, en.dissipation_ratio, en.K_grad);
  r.report["dt"] = res.dt;
  r.report["steps"] = res.steps;
  r.report["invariants"] = inv.to_json();
  r.report["energy"] = en.to_json();
  r.report["diagnostics"] = res.diag.to_json();

  const double R2 = c.real("fp.larger_radius");
  if (R2 > R) {
    const double m = r_monotonicity(ctx.calc, ctx.group, rho0, b, o, R, R2);
    checks.add("r_monotonicity", m >= -1e-8, m, -1e-8);
  }
  for (const auto& s : res.states)
    r.fields.emplace_back(fmt::format("rho_t{:.6g}", s.time), s);

  if (c.integer("fp.particles") > 0) {
    ParticleOptions po;
    po.count = static_cast<std::size_t>(c.integer("fp.particles"));
    po.seed = static_cast<std::uint64_t>(c.integer("run.seed"));
    po.sigma = o.sigma;
    po.horizon = o.horizon;
    po.dt = c.real("fp.particle_dt");
    po.radius = R;
    po.jobs = std::max(1, c.integer("fp.particle_jobs"));
    const auto part = particle_oracle(ctx.group, rho0, b, po);
    const auto d = flat_distance_fields(res.states.back(), part.density, ctx.group);
    checks.add("particle_d0", d.ok() && d.value <= 0.05, d.value, 0.05);
    r.report["particles"] = part.to_json();
    r.report["particle_d0"] = d.to_json();
    r.fields.emplace_back("particle_density", part.density);
  }
}

void run_hj(const Context& ctx, ScenarioResult& r, Checks& checks) {
  const auto spec = hj_spec(ctx);
  auto o = hj_options(ctx);
  for (int k = 1; k < 20; ++k) o.output_times.push_back(o.horizon * k / 20.0);
  const auto res = hj_solve(ctx.calc, spec, o);
  const auto sb = sup_bounds_check(res.u, spec);
  const auto bern = bernstein_monitor(res.u, spec, right_invariant_fields(ctx.group));
  checks.add("upper_bound", sb.upper_holds, sb.max_u, sb.upper_bound + sb.tolerance);
  checks.add("lower_bound", sb.lower_holds, sb.min_u, sb.lower_bound - sb.tolerance);
  checks.add("bernstein", bern.holds, bern.max_ratio, 1.0 + bern.tolerance);
  r.report["dt"] = res.dt;
  r.report["steps"] = res.steps;
  r.report["max_gradient"] = res.max_gradient;
  r.report["sup_bounds"] = sb.to_json();
  r.report["bernstein"] = bern.to_json();
  r.report["x_norm"] = x_norm(ctx.calc, res.u);
  r.fields.emplace_back("u_final", res.u.states.back());
}

void run_duality(const Context& ctx, ScenarioResult& r, Checks& checks) {
  const auto& c = ctx.cfg;
  const auto spec = hj_spec(ctx);
  const auto o = hj_options(ctx);
  const auto mask = make_ball_mask(*ctx.grid, ctx.group, c.real("solver.radius"));
  const auto mu = probability_bump(ctx.grid, ctx.group, c.real("duality.mu_radius"));
  const double tau = c.real("duality.tau") > 0 ? c.real("duality.tau") : o.horizon;
  const double s = c.real("duality.s");
  if (!(s >= 0.0 && s < tau && tau <= o.horizon)) throw std::invalid_argument("duality window must satisfy 0 <= s < tau <= horizon");
  const auto rep = duality_check(ctx.calc, spec, o, mu, s, tau, mask);
  const double dt = hj_step_grid(ctx.calc, spec, o).first;
  const double tol = 5.0 * (ctx.h() + dt) * rep.scale;
  checks.add("duality_residual", rep.residual <= tol, rep.residual, tol);
  checks.add("accumulated_gradient", rep.comb_holds, rep.gradient_term, 2.0 * rep.scale * (1 + 1e-2));
  r.report["dt"] = dt;
  r.report["duality"] = rep.to_json();
  r.fields.emplace_back("mu_tau", mu);
}

void run_mfg(const Context& ctx, ScenarioResult& r, Checks& checks) {
  const auto& c = ctx.cfg;
  MFGParams p;
  p.sigma = ctx.sigma();
  p.gamma = c.real("solver.gamma");
  p.horizon = ctx.horizon();
  p.dt = c.real("solver.dt");
  p.cfl_safety = c.real("solver.cfl_safety");
  p.radius = c.real("solver.radius");
  p.theta = c.real("mfg.theta");
  p.tol_u = c.real("mfg.tol_u");
  p.tol_rho = c.real("mfg.tol_rho");
  p.max_iterations = c.integer("mfg.max_iterations");
  p.max_levels = c.integer("mfg.max_levels");
  p.validate();
  const auto u_T = bump_field(ctx.grid, ctx.group, c.real("mfg.u_radius"), c.real("mfg.u_height"));
  const auto rho0 = probability_bump(ctx.grid, ctx.group, c.real("mfg.rho_radius"));
  const double eps = c.real("mfg.eps");
  if (eps < 3.0 * ctx.h()) throw std::invalid_argument(fmt::format("mfg.eps must be at least 3h = {}", 3.0 * ctx.h()));
  const Coupling coupling(ctx.grid, CouplingSpec{make_mollifier(ctx.group, eps), c.real("mfg.gain")}, ctx.group);

  const auto st = mfg_picard(ctx.calc, ctx.group, u_T, rho0, coupling, p);
  r.report["state"] = st.to_json();
  if (!st.converged()) {
    r.exit_code = kNotConverged;
    return;
  }
  const auto rep = mfg_residual_report(ctx.calc, ctx.group, st, u_T, rho0, coupling, p);
  checks.add("duality", rep.duality_holds, rep.duality.residual, rep.duality_tolerance);
  checks.add("mass", rep.mass_holds, rep.mass_error, 1e-6);
  checks.add("energy_l2", rep.energy.l2_holds, rep.energy.max_l2_ratio, rep.energy.K);
  checks.add("energy_gradient", rep.energy.gradient_holds, rep.energy.dissipation_ratio, rep.energy.K_grad);
  checks.add("nonnegativity", rep.nonnegative, rep.fp_invariants.min_ratio, -1e-3);
  checks.add("sup_bounds", rep.sup_bounds.holds(), nlohmann::json{rep.sup_bounds.min_u, rep.sup_bounds.max_u},
             nlohmann::json{rep.sup_bounds.lower_bound, rep.sup_bounds.upper_bound});
  checks.add("fixed_point", rep.fixed_point_holds, rep.fixed_point_residual, 2.0 * p.tol_u);
  r.report["audit"] = rep.to_json();
  r.fields.emplace_back("u_t0", st.u.front());
  r.fields.emplace_back("rho_T", st.rho.back());
  r.fields.emplace_back("coupling_T", st.coupling.back());
}

void run_metric(const Context& ctx, ScenarioResult& r, Checks& checks) {
  const auto& c = ctx.cfg;
  const double radius = c.real("metric.radius");
  const GroupElement shift{c.real("metric.shift1"), c.real("metric.shift2"), c.real("metric.shift3")};
  const auto a = probability_bump(ctx.grid, ctx.group, radius);
  // the same bump left-translated by shift
  const auto inv = inverse(ctx.group, shift);
  auto b = Field::from_function(ctx.grid, [&](auto x) {
    return gauge_bump(ctx.group, multiply(ctx.group, inv, GroupElement({x.begin(), x.end()})).coords, radius);
  });
  if (!(b.integral() > 0.0)) throw std::invalid_argument("metric.shift moves the bump off the grid");
  b = (1.0 / b.integral()) * b;
  const auto ab = flat_distance_fields(a, b, ctx.group), ba = flat_distance_fields(b, a, ctx.group);
  checks.add("lp_optimal", ab.ok() && ba.ok(), ab.status, "optimal");
  checks.add("symmetry", std::abs(ab.value - ba.value) <= 1e-10, std::abs(ab.value - ba.value), 1e-10);
  checks.add("mass_bound", ab.value <= 2.0 + 1e-12, ab.value, 2.0);
  r.report["distance"] = ab.value;
  r.report["lp"] = ab.to_json();
  r.report["shift_norm"] = hom_norm(ctx.group, shift);
  r.fields.emplace_back("mu", a);
  r.fields.emplace_back("nu", b);
}

}  // namespace

ScenarioResult run_scenario(const Config& config) {
  ScenarioResult r;
  r.name = config.str("scenario.name");
  r.kind = config.str("scenario.kind");
  r.report = {{"name", r.name}, {"kind", r.kind}, {"config", config.to_json()}};
  Checks checks;
  try {
    validate_common(config);
    const Context ctx(config);
    r.report["grid"] = to_json(*ctx.grid);
    if (r.kind == "heat") run_heat(ctx, r, checks);
    else if (r.kind == "fp") run_fp(ctx, r, checks);
    else if (r.kind == "hj") run_hj(ctx, r, checks);
    else if (r.kind == "duality") run_duality(ctx, r, checks);
    else if (r.kind == "mfg") run_mfg(ctx, r, checks);
    else if (r.kind == "metric") run_metric(ctx, r, checks);
    else throw std::invalid_argument("unknown scenario kind " + r.kind);
  } catch (const std::invalid_argument& e) {
    r.exit_code = kConfigError;
    r.report["error"] = e.what();
  } catch (const std::exception& e) {
    // CFL violations, NaN and similar solver breakdowns
    r.exit_code = kNotConverged;
    r.report["error"] = e.what();
  }
  r.failed = checks.failed;
  r.report["checks"] = checks.json;
  if (r.exit_code == kPass && !r.failed.empty()) r.exit_code = kInvariantFailure;
  r.verdict = r.exit_code == kPass                ? "pass"
              : r.exit_code == kInvariantFailure ? "invariant failure"
              : r.exit_code == kNotConverged     ? "not converged"
                                                 : "config error";
  r.report["verdict"] = r.verdict;
  r.report["exit_code"] = r.exit_code;
  return r;
}

std::string summary_text(const ScenarioResult& r) {
  std::ostringstream os;
  os << fmt::format("scenario {} ({})\nverdict: {} (exit {})\n", r.name, r.kind, r.verdict, r.exit_code);
  if (r.report.contains("error")) os << "error: " << r.report["error"].get<std::string>() << "\n";
  if (r.report.contains("state")) {
    const auto& s = r.report["state"];
    os << fmt::format("picard: {} after {} iterations, dt {}, {} steps\n", s["verdict"].get<std::string>(),
                      s["iterations"].get<int>(), s["dt"].get<double>(), s["steps"].get<int>());
    if (!s["message"].get<std::string>().empty()) os << "message: " << s["message"].get<std::string>() << "\n";
  }
  for (const auto& [name, c] : r.report["checks"].items())
    os << fmt::format("  {:<22} {}  value {}  bound {}\n", name, c["pass"].get<bool>() ? "PASS" : "FAIL",
                      c["value"].dump(), c["bound"].dump());
  return os.str();
}

std::vector<std::filesystem::path> write_scenario(const ScenarioResult& r, const std::filesystem::path& dir,
                                                  bool dump_fields) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::vector<fs::path> files;
  {
    std::ofstream out(dir / "report.json");
    out << r.report.dump(2) << "\n";
    files.push_back(dir / "report.json");
  }
  {
    std::ofstream out(dir / "summary.txt");
    out << summary_text(r);
    files.push_back(dir / "summary.txt");
  }
  if (dump_fields && !r.fields.empty()) {
    fs::create_directories(dir / "fields");
    for (const auto& [name, f] : r.fields) {
      write_field(f, dir / "fields" / name);
      files.push_back(dir / "fields" / (name + ".csv"));
      files.push_back(dir / "fields" / (name + ".json"));
    }
  }
  return files;
}

std::string file_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::uint64_t h = 1469598103934665603ull;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
  }
  return fmt::format("{:016x}", h);
}

nlohmann::json file_entries(const std::filesystem::path& root, const std::vector<std::filesystem::path>& files) {
  std::vector<std::filesystem::path> sorted = files;
  std::sort(sorted.begin(), sorted.end());
  nlohmann::json list = nlohmann::json::array();
  for (const auto& f : sorted)
    list.push_back({{"path", std::filesystem::relative(f, root).generic_string()},
                    {"bytes", std::filesystem::file_size(f)},
                    {"fnv1a", file_hash(f)}});
  return list;
}

}  // namespace carnot::cli
