#include <cmath>

#include "doctest.h"

#include "carnot/flat_metric.hpp"
#include "carnot/particles.hpp"

using namespace carnot;

namespace {

const GroupSpec H = heisenberg1();

Field bump(const GridPtr& grid) {
  auto f = Field::from_function(grid, [](auto x) {
    const double r2 = x[0] * x[0] + x[1] * x[1];
    const double P = (r2 * r2 + x[2] * x[2]) / std::pow(0.6, 4);
    return P < 1 ? std::exp(1 / (P - 1)) : 0.0;
  });
  return (1.0 / f.integral()) * f;
}

}  // namespace

TEST_CASE("without noise a constant drift follows the exact flow x * (-t b)") {
  const auto box = GridSpec::cube(3, -2, 2, 41);
  const std::vector<double> b{0.7, -0.4};
  std::vector<double> starts{0.1, 0.2, -0.3, -0.4, 0.0, 0.25, 0.0, 0.0, 0.0};
  ParticleOptions opt;
  opt.sigma = 0.0;
  opt.horizon = 0.5;
  opt.dt = 0.01;
  const auto st = simulate_particles(H, box, starts, DriftField::constant(b), opt);
  const GroupElement shift{-opt.horizon * b[0], -opt.horizon * b[1], 0.0};
  for (int p = 0; p < 3; ++p) {
    REQUIRE(st.alive[p]);
    const auto expect = multiply(H, GroupElement{starts[3 * p], starts[3 * p + 1], starts[3 * p + 2]}, shift);
    for (int k = 0; k < 3; ++k) CHECK(st.positions[3 * p + k] == doctest::Approx(expect[k]).epsilon(1e-12));
  }
}

TEST_CASE("particles leaving the ball are removed") {
  const auto box = GridSpec::cube(3, -2, 2, 41);
  ParticleOptions opt;
  opt.sigma = 0.0;
  opt.horizon = 1.0;
  opt.dt = 0.01;
  opt.radius = 1.0;
  // outside at the start; pushed out by the drift; stays inside
  std::vector<double> starts{1.5, 0.0, 0.0, 0.5, 0.0, 0.0, -0.5, 0.0, 0.2};
  const auto st = simulate_particles(H, box, starts, DriftField::constant({-1.0, 0.0}), opt);
  CHECK_FALSE(st.alive[0]);
  CHECK_FALSE(st.alive[1]);
  CHECK(st.alive[2]);
}

TEST_CASE("histograms do not depend on the number of workers") {
  const auto grid = make_grid(GridSpec::cube(3, -2, 2, 21));
  const auto rho0 = bump(grid);
  ParticleOptions opt;
  opt.count = 4000;
  opt.seed = 42;
  opt.horizon = 0.1;
  const auto b = DriftField::constant({0.5, 0.3});
  const auto one = particle_oracle(H, rho0, b, opt);
  opt.jobs = 4;
  const auto four = particle_oracle(H, rho0, b, opt);
  CHECK(one.density.values == four.density.values);
  CHECK(one.alive == four.alive);
  opt.seed = 43;
  CHECK(particle_oracle(H, rho0, b, opt).density.values != one.density.values);
}

TEST_CASE("sampled starting law reproduces the initial density") {
  const auto grid = make_grid(GridSpec::cube(3, -2, 2, 41));
  const auto rho0 = bump(grid);
  ParticleOptions opt;
  opt.count = 20000;
  opt.dt = 1e-3;
  opt.horizon = 1e-3;
  opt.sigma = 0.0;
  const auto r = particle_oracle(H, rho0, DriftField::zero(2), opt);
  CHECK(r.removed == 0);
  CHECK(r.density.integral() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(flat_distance_fields(rho0, r.density, H).value <= 0.02);
}

TEST_CASE("particle law matches the Fokker-Planck solution with drift") {
  const auto grid = make_grid(GridSpec::cube(3, -2, 2, 41));
  const DiscreteCalculus calc(grid, left_invariant_fields(H));
  const auto mask = make_ball_mask(*grid, H, 1.8);
  const auto rho0 = bump(grid);
  const auto b = DriftField::constant({0.5, 0.3});
  const auto pde = fp_solve(calc, rho0, b, mask, FPOptions{});
  ParticleOptions opt;
  opt.count = 20000;
  const auto part = particle_oracle(H, rho0, b, opt);
  const auto d = flat_distance_fields(pde.states.back(), part.density, H);
  CHECK(d.ok());
  CHECK(d.value <= 0.05);
}
