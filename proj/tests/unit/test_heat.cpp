#include <cmath>

#include "doctest.h"

#include "carnot/heat.hpp"

using namespace carnot;

namespace {

struct Setup {
  GroupSpec H = heisenberg1();
  VectorFieldSet X = left_invariant_fields(H);
  GridPtr grid;
  DiscreteCalculus calc;
  explicit Setup(int n = 41, double half = 2.0)
      : grid(make_grid(GridSpec::cube(3, -half, half, n))), calc(grid, X) {}
};

// exp(1/(||x/eps||^4 - 1)) inside the ball of radius eps
double bump(std::span<const double> x, double eps) {
  const double r2 = (x[0] * x[0] + x[1] * x[1]) / (eps * eps);
  const double P = r2 * r2 + x[2] * x[2] / std::pow(eps, 4);
  return P < 1.0 ? std::exp(1.0 / (P - 1.0)) : 0.0;
}

}  // namespace

TEST_CASE("heat_step trivial cases") {
  Setup s(21);
  const auto f = Field::from_function(s.grid, [](auto x) { return bump(x, 0.8); });
  CHECK(max_abs_difference(heat_step(s.calc, f, 0.25, 0.0), f) == 0.0);
  const auto c = Field::from_function(s.grid, [](auto) { return 0.375; });
  const auto c1 = heat_step(s.calc, c, 0.25, heat_dt(s.calc, 0.25));
  CHECK(max_abs_difference(c1, c) == 0.0);
  CHECK_THROWS_AS(heat_step(s.calc, f, 0.25, 2.0 * heat_dt(s.calc, 0.25, 1.0)), std::domain_error);
}

TEST_CASE("heat flow conserves mass while the support is interior") {
  Setup s;
  const auto f = Field::from_function(s.grid, [](auto x) { return bump(x, 0.6); });
  const double dt = heat_dt(s.calc, 0.25);
  const auto g = evolve(s.calc, f, 0.25, 10 * dt, dt);
  double boundary = 0.0;
  for (std::size_t n = 0; n < s.grid->size(); ++n)
    if (s.grid->on_boundary(n)) boundary = std::max(boundary, std::abs(g.values[n]));
  CHECK(boundary == 0.0);
  CHECK(std::abs(g.integral() - f.integral()) <= 1e-8 * f.integral());
}

TEST_CASE("sup norm does not grow along the flow") {
  Setup s;
  auto f = Field::from_function(s.grid, [](auto x) { return bump(x, 0.6) - 0.5 * bump(std::vector<double>{x[0] - 0.8, x[1], x[2]}, 0.5); });
  const double dt = heat_dt(s.calc, 0.25);
  const double s0 = f.sup_norm();
  double prev = s0;
  bool ok = true;
  for (int k = 0; k < 30; ++k) {
    f = evolve(s.calc, f, 0.25, 5 * dt, dt);
    const double cur = f.sup_norm();
    if (cur > prev * (1.0 + 1e-3)) ok = false;
    prev = cur;
  }
  CHECK(ok);
  CHECK(prev <= s0 * (1.0 + 1e-3));
}

TEST_CASE("semigroup property in step arithmetic") {
  Setup s(21);
  const auto f = Field::from_function(s.grid, [](auto x) { return bump(x, 1.2); });
  const double dt = heat_dt(s.calc, 0.25);
  const auto a = evolve(s.calc, evolve(s.calc, f, 0.25, 7 * dt, dt), 0.25, 5 * dt, dt);
  const auto b = evolve(s.calc, f, 0.25, 12 * dt, dt);
  CHECK(max_abs_difference(a, b) <= 1e-10);
  CHECK(b.time == doctest::Approx(12 * dt));
}

TEST_CASE("no diffusion across x3 on the vertical axis") {
  Setup s(21);
  std::vector<double> x(3);
  const auto f = Field::from_function(s.grid, [](auto y) { return std::sin(3.0 * y[2]); });
  const auto g = heat_step(s.calc, f, 0.25, heat_dt(s.calc, 0.25));
  for (std::size_t n = 0; n < s.grid->size(); ++n) {
    s.grid->node_coords(n, x);
    if (x[0] != 0.0 || x[1] != 0.0 || s.grid->on_boundary(n)) continue;
    CHECK(s.calc.diffusion(2, 2, n) == 0.0);
    CHECK(g.values[n] == f.values[n]);
  }
}

TEST_CASE("comparison principle within tolerance") {
  Setup s;
  const auto lo = Field::from_function(s.grid, [](auto x) { return bump(x, 0.5); });
  const auto hi = Field::from_function(s.grid, [](auto x) { return bump(x, 0.9); });
  for (std::size_t n = 0; n < s.grid->size(); ++n) REQUIRE(lo.values[n] <= hi.values[n]);
  const double dt = heat_dt(s.calc, 0.25);
  const auto a = evolve(s.calc, lo, 0.25, 30 * dt, dt), b = evolve(s.calc, hi, 0.25, 30 * dt, dt);
  double worst = 0.0;
  for (std::size_t n = 0; n < s.grid->size(); ++n) worst = std::max(worst, a.values[n] - b.values[n]);
  CHECK(worst <= 1e-3 * hi.sup_norm());
}

TEST_CASE("gradient decay of rough data has exponent near -1/2") {
  Setup s;
  const auto phi = Field::from_function(s.grid, [](auto x) {
    return std::abs(x[0]) <= 0.5 && std::abs(x[1]) <= 0.5 && std::abs(x[2]) <= 0.5 ? 1.0 : 0.0;
  });
  const double dt = heat_dt(s.calc, 0.25);
  const auto rep = measure_gradient_decay(s.calc, phi, 0.25, log_spaced_times(4 * dt, 0.5, 12), dt);
  CHECK(rep.slope >= -0.65);
  CHECK(rep.slope <= -0.35);
  CHECK(rep.constant > 0.0);
  const auto j = rep.to_json();
  CHECK(j.at("times").size() == 12);
  CHECK(j.at("slope").get<double>() == rep.slope);
}

TEST_CASE("smooth data: gradient stays bounded by its initial value") {
  Setup s;
  const auto phi = Field::from_function(s.grid, [](auto x) { return bump(x, 1.0); });
  const double dt = heat_dt(s.calc, 0.25);
  const auto rep = measure_gradient_decay(s.calc, phi, 0.25, log_spaced_times(4 * dt, 0.5, 8), dt);
  for (double nrm : rep.norms) CHECK(nrm <= rep.initial_norm * (1.0 + 1e-2));
}

TEST_CASE("constant data has zero gradient at all times") {
  Setup s(21);
  const auto phi = Field::from_function(s.grid, [](auto) { return -2.0; });
  const double dt = heat_dt(s.calc, 0.25);
  const auto rep = measure_gradient_decay(s.calc, phi, 0.25, {dt, 5 * dt, 20 * dt}, dt);
  for (double nrm : rep.norms) CHECK(nrm == 0.0);
}
