#include <cmath>

#include "doctest.h"

#include "carnot/hamilton_jacobi.hpp"
#include "carnot/heat.hpp"

using namespace carnot;

namespace {

const GroupSpec H = heisenberg1();

struct Setup {
  GridPtr grid;
  DiscreteCalculus calc;
  explicit Setup(int n) : grid(make_grid(GridSpec::cube(3, -2, 2, n))), calc(grid, left_invariant_fields(H)) {}
  double h() const { return grid->spacing(0); }
};

// Gauge bump of height 1 and radius r.
double bump(std::span<const double> x, double r) {
  const double r2 = x[0] * x[0] + x[1] * x[1];
  const double P = (r2 * r2 + x[2] * x[2]) / std::pow(r, 4);
  return P < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - P)) : 0.0;
}

double bump1(double s) { return std::abs(s) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s * s)) : 0.0; }

HamiltonianSpec bump_spec(const GridPtr& g, double source = 0.5) {
  HamiltonianSpec s;
  s.u0 = Field::from_function(g, [](auto x) { return bump(x, 1.0); });
  if (source != 0.0)
    s.F = TimeField::samples({0.0}, {Field::from_function(g, [&](auto x) { return source * bump(x, 0.9); })});
  return s;
}

Field probability_bump(const GridPtr& g, double r) {
  auto mu = Field::from_function(g, [&](auto x) { return bump(x, r); });
  return (1.0 / mu.integral()) * mu;
}

}  // namespace

TEST_CASE("Godunov gradient is exact on affine data and vanishes at a kink minimum") {
  Setup s(21);
  const auto u = Field::from_function(s.grid, [](auto x) { return 2 * x[0] - x[1] + 0.5 * x[2]; });
  const auto p = godunov_gradient(s.calc, u);
  std::vector<double> x(3);
  for (std::size_t n = 0; n < u.size(); ++n) {
    if (s.grid->on_boundary(n)) continue;
    s.grid->node_coords(n, x);
    CHECK(p.at(n, 0) == doctest::Approx(2 - 0.25 * x[1]).epsilon(1e-12));
    CHECK(p.at(n, 1) == doctest::Approx(-1 + 0.25 * x[0]).epsilon(1e-12));
  }
  const auto v = Field::from_function(s.grid, [](auto x) { return std::abs(x[0]); });
  const auto q = godunov_gradient(s.calc, v);
  const std::vector<int> centre{10, 10, 10};
  CHECK(q.at(s.grid->multi_to_index(centre), 0) == 0.0);
}

TEST_CASE("spatially constant data evolve exactly") {
  Setup s(21);
  HamiltonianSpec spec;
  spec.u0 = Field::from_function(s.grid, [](auto) { return 0.375; });
  HJOptions opt;
  opt.horizon = 0.2;
  const auto r = hj_solve(s.calc, spec, opt);
  for (const auto& f : r.u.states) CHECK(max_abs_difference(f, spec.u0) == 0.0);

  spec.u0 = Field::from_function(s.grid, [](auto) { return 0.0; });
  spec.F = TimeField::constant({0.8});
  opt.store_every_step = true;
  const auto q = hj_solve(s.calc, spec, opt);
  for (std::size_t k = 0; k < q.u.size(); ++k) {
    CHECK(q.u.states[k].max_value() == doctest::Approx(0.8 * q.u.times[k]).epsilon(1e-13));
    CHECK(q.u.states[k].max_value() - q.u.states[k].min_value() == 0.0);
  }
}

TEST_CASE("hj_step_direct rejects steps beyond the CFL bound") {
  Setup s(21);
  const auto spec = bump_spec(s.grid);
  const double dt = hj_dt(s.calc, 0.25, 2.0, vector_sup_norm(godunov_gradient(s.calc, spec.u0)), 1.0);
  CHECK_NOTHROW(hj_step_direct(s.calc, spec.u0, spec, 0.25, 0.9 * dt));
  CHECK_THROWS_AS(hj_step_direct(s.calc, spec.u0, spec, 0.25, 1.5 * heat_dt(s.calc, 0.25, 1.0)), std::domain_error);
  HamiltonianSpec bad = spec;
  bad.gamma = 1.5;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
}

TEST_CASE("sup bounds: upper, lower and comparison with the heat flow") {
  Setup s(21);
  HJOptions opt;
  opt.horizon = 0.3;
  opt.store_every_step = true;
  const auto spec = bump_spec(s.grid);
  const auto rep = sup_bounds_check(hj_solve(s.calc, spec, opt).u, spec);
  CHECK(rep.scale == doctest::Approx(1.15));
  CHECK(rep.upper_holds);
  CHECK(rep.lower_holds);
  CHECK(rep.lower_bound == doctest::Approx(-3.0 * rep.scale));

  const auto free = bump_spec(s.grid, 0.0);
  const auto rf = sup_bounds_check(hj_solve(s.calc, free, opt).u, free);
  CHECK(rf.holds());
  CHECK(rf.nonnegative);
}

TEST_CASE("Duhamel map with f = 0 is the heat flow") {
  Setup s(21);
  const auto spec = bump_spec(s.grid, 0.0);
  const double dt = heat_dt(s.calc, 0.25);
  Trajectory zero;
  for (int n = 0; n <= 20; ++n) {
    zero.times.push_back(n * dt);
    zero.states.push_back(Field(s.grid, 1, n * dt));
  }
  const auto w = duhamel_iterate(s.calc, zero, spec, 0.25);
  for (int n : {1, 7, 20}) CHECK(max_abs_difference(w.states[n], evolve(s.calc, spec.u0, 0.25, n * dt, dt)) <= 1e-12);
}

TEST_CASE("Duhamel iteration contracts at T = 0.05 and agrees with the direct scheme") {
  Setup s(21);
  const auto spec = bump_spec(s.grid);
  HJOptions ho;
  ho.horizon = 0.05;
  ho.store_every_step = true;
  DuhamelOptions opt;
  opt.horizon = 0.05;
  opt.dt = hj_step_grid(s.calc, spec, ho).first;
  ho.dt = opt.dt;
  const auto r = duhamel_solve(s.calc, spec, opt);
  CHECK(r.report.converged());
  CHECK(r.report.distances.back() <= 1e-6);
  REQUIRE(!r.report.ratios.empty());
  for (double q : r.report.ratios) CHECK(q < 1.0);
  CHECK(r.report.to_json()["verdict"] == "converged");

  const auto direct = hj_solve(s.calc, spec, ho);
  REQUIRE(direct.u.size() == r.u.size());
  double diff = 0.0;
  for (std::size_t k = 0; k < r.u.size(); ++k)
    diff = std::max(diff, max_abs_difference(direct.u.states[k], r.u.states[k]));
  const double scale = spec.u0.sup_norm() + opt.horizon * spec.F.sup_norm();
  CHECK(diff <= 5.0 * (s.h() + opt.dt) * scale);
}

TEST_CASE("Duhamel iteration reports divergence instead of producing NaN") {
  Setup s(21);
  auto spec = bump_spec(s.grid);
  spec.u0 = 40.0 * spec.u0;
  DuhamelOptions opt;
  opt.horizon = 0.05;
  opt.ball_radius = 1.0;
  const auto r = duhamel_solve(s.calc, spec, opt);
  CHECK(r.report.verdict == "diverged");
  CHECK_FALSE(r.report.message.empty());
}

TEST_CASE("duality identity is exact for spatially constant u") {
  Setup s(41);
  HamiltonianSpec spec;
  spec.u0 = Field::from_function(s.grid, [](auto) { return 0.3; });
  spec.F = TimeField::constant({0.7});
  HJOptions opt;
  opt.horizon = 0.1;
  opt.store_every_step = true;
  const auto u = hj_solve(s.calc, spec, opt).u;
  const auto mask = make_ball_mask(*s.grid, H, 1.8);
  const auto rep = duality_check(s.calc, u, spec, 0.25, probability_bump(s.grid, 0.4), 0.05, 0.1, mask);
  CHECK(rep.gradient_term == 0.0);
  CHECK(rep.residual <= 1e-10);
  CHECK(rep.mass_error <= 1e-12);
}

TEST_CASE("duality residual converges at first order; accumulated gradient bound holds") {
  std::vector<double> residual;
  for (int n : {21, 41}) {
    Setup s(n);
    const auto spec = bump_spec(s.grid);
    HJOptions opt;
    opt.horizon = 0.3;
    opt.dt = 0.004 * std::pow(s.h() / 0.2, 2);
    const auto mask = make_ball_mask(*s.grid, H, 1.8);
    const auto rep = duality_check(s.calc, spec, opt, probability_bump(s.grid, 0.7), 0.0, 0.3, mask);
    CHECK(rep.comb_holds);
    CHECK(rep.gradient_term > 0.0);
    residual.push_back(rep.residual);
    if (n == 21) {
      opt.store_every_step = true;
      const auto u = hj_solve(s.calc, spec, opt).u;
      const auto stored = duality_check(s.calc, u, spec, 0.25, probability_bump(s.grid, 0.7), 0.0, 0.3, mask);
      CHECK(stored.residual == rep.residual);
    }
  }
  CHECK(residual[0] / residual[1] >= 1.7);
}

TEST_CASE("Bernstein monitor: right-invariant derivatives obey the bound") {
  Setup s(21);
  HJOptions opt;
  opt.horizon = 0.3;
  opt.output_times = {0.05, 0.1, 0.15, 0.2, 0.25};
  const auto Y = right_invariant_fields(H);

  HamiltonianSpec flat;
  flat.u0 = Field::from_function(s.grid, [](auto) { return 0.5; });
  const auto c = bernstein_monitor(hj_solve(s.calc, flat, opt).u, flat, Y);
  CHECK(c.holds);
  CHECK(c.max_ratio == 0.0);

  const auto spec = bump_spec(s.grid, 0.0);
  const auto r = bernstein_monitor(hj_solve(s.calc, spec, opt).u, spec, Y);
  CHECK(r.holds);
  CHECK(r.max_ratio <= 1.0 + 5e-2);
  CHECK(r.fields == "right");

  const auto forced = bump_spec(s.grid, 0.5);
  CHECK(bernstein_monitor(hj_solve(s.calc, forced, opt).u, forced, Y).holds);
}

TEST_CASE("Bernstein monitor: a non-invariant derivative grows on the same trajectory") {
  Setup s(21);
  HamiltonianSpec spec;
  // independent of x1, so d1 u0 = 0 while d1 u(t) = O(t) through [d1, X2] = d3 / 2
  spec.u0 = Field::from_function(s.grid, [](auto x) { return bump1(x[1] / 0.8) * bump1(x[2] / 0.6); });
  HJOptions opt;
  opt.horizon = 0.3;
  opt.output_times = {0.1, 0.2};
  const auto u = hj_solve(s.calc, spec, opt).u;
  const VectorFieldSet d1{FieldKind::Custom, {FirstOrderOperator::partial(3, 0)}};
  const VectorFieldSet d3{FieldKind::Custom, {FirstOrderOperator::partial(3, 2)}};
  const auto right = bernstein_monitor(u, spec, right_invariant_fields(H));
  const auto euclid = bernstein_monitor(u, spec, d1);
  CHECK(right.holds);
  CHECK_FALSE(euclid.holds);
  CHECK(euclid.sup[0].back() > 1e-2);
  CHECK(euclid.initial_norm[0] < 1e-12);
  // d3 is central, hence right-invariant as well
  CHECK(bernstein_monitor(u, spec, d3).holds);
}

TEST_CASE("time reversal of a sampled source") {
  Setup s(5);
  const auto a = Field::from_function(s.grid, [](auto) { return 1.0; });
  const auto b = Field::from_function(s.grid, [](auto) { return 3.0; });
  const auto F = TimeField::samples({0.0, 1.0}, {a, b});
  const auto R = time_reversed(F, 1.0);
  Field out;
  R.eval(0.25, s.grid, out);
  CHECK(out.values[0] == doctest::Approx(2.5));
  CHECK(time_reversed(TimeField::constant({2.0}), 1.0).constant_value()[0] == 2.0);
}
