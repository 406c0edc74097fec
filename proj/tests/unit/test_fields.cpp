#include <cmath>
#include <random>

#include "doctest.h"

#include "carnot/fields.hpp"

using namespace carnot;

namespace {

Polynomial var(int i) { return Polynomial::variable(3, i); }
Polynomial cst(Rational c) { return Polynomial::constant(3, c); }

double max_interior_error(const Field& f, const std::function<double(std::span<const double>)>& exact, int margin = 1) {
  const auto& g = *f.grid;
  std::vector<int> mi(g.dim());
  std::vector<double> x(g.dim());
  double err = 0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    g.index_to_multi(n, mi);
    bool interior = true;
    for (int a = 0; a < g.dim(); ++a)
      if (mi[a] < margin || mi[a] >= g.nodes()[a] - margin) interior = false;
    if (!interior) continue;
    g.node_coords(n, x);
    err = std::max(err, std::abs(f.values[n] - exact(x)));
  }
  return err;
}

// All monomials of total degree <= deg in 3 variables.
std::vector<Polynomial> monomials(int deg) {
  std::vector<Polynomial> out;
  for (int a = 0; a <= deg; ++a)
    for (int b = 0; a + b <= deg; ++b)
      for (int c = 0; a + b + c <= deg; ++c) out.push_back(Polynomial::monomial(3, {a, b, c}));
  return out;
}

}  // namespace

TEST_CASE("H1 left and right fields have the fixed convention") {
  const auto H = heisenberg1();
  const auto X = left_invariant_fields(H);
  const auto Y = right_invariant_fields(H);
  REQUIRE(X.count() == 2);
  CHECK(X[0].coeffs[2] == Rational(-1, 2) * var(1));
  CHECK(X[1].coeffs[2] == Rational(1, 2) * var(0));
  CHECK(Y[0].coeffs[2] == Rational(1, 2) * var(1));
  CHECK(Y[1].coeffs[2] == Rational(-1, 2) * var(0));
  for (const auto& f : X.fields) {
    CHECK(f.divergence().is_zero());
    for (int k = 0; k < 3; ++k) CHECK(f.coeffs[k].is_homogeneous(H.weights()));
  }
}

TEST_CASE("symbolic field action and brackets") {
  const auto H = heisenberg1();
  const auto X = left_invariant_fields(H);
  const auto Y = right_invariant_fields(H);
  CHECK(apply_field_analytic(X, 0, var(2)) == Rational(-1, 2) * var(1));
  const auto bracket = commutator(X[0], X[1]);
  CHECK(bracket.apply(var(2)) == cst(1));
  for (int k = 0; k < 3; ++k) CHECK(bracket.coeffs[k] == FirstOrderOperator::partial(3, 2).coeffs[k]);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (const auto& mono : monomials(4)) CHECK(commutator(X[i], Y[j]).apply(mono).is_zero());
  // Stratonovich correction (D a_i) a_i vanishes for both horizontal fields
  for (const auto& f : X.fields)
    for (int k = 0; k < 3; ++k) CHECK(f.apply(f.coeffs[k]).is_zero());
  // x3 has no pure d33 term
  CHECK(horizontal_laplacian_analytic(X, var(2)).is_zero());
}

TEST_CASE("discrete gradient is exact on linear data") {
  const auto H = heisenberg1();
  const auto X = left_invariant_fields(H);
  auto grid = make_grid(GridSpec::cube(3, -1, 1, 11));
  const auto c = Field::from_function(grid, [](auto) { return 3.5; });
  CHECK(horizontal_gradient(X, c).sup_norm() == 0.0);

  const auto g1 = horizontal_gradient(X, Field::from_function(grid, [](auto x) { return x[0]; }));
  for (std::size_t n = 0; n < grid->size(); ++n) {
    CHECK(g1.at(n, 0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(g1.at(n, 1)) < 1e-14);
  }
  const auto g3 = horizontal_gradient(X, Field::from_function(grid, [](auto x) { return x[2]; }));
  std::vector<double> x(3);
  double err = 0;
  for (std::size_t n = 0; n < grid->size(); ++n) {
    grid->node_coords(n, x);
    err = std::max({err, std::abs(g3.at(n, 0) + x[1] / 2), std::abs(g3.at(n, 1) - x[0] / 2)});
  }
  CHECK(err < 1e-13);
}

TEST_CASE("discrete sub-Laplacian") {
  const auto X = left_invariant_fields(heisenberg1());
  auto grid = make_grid(GridSpec::cube(3, -1, 1, 11));
  const auto q = horizontal_laplacian(X, Field::from_function(grid, [](auto x) { return x[0] * x[0]; }));
  for (double v : q.values) CHECK(v == doctest::Approx(2.0).epsilon(1e-11));
  CHECK(horizontal_laplacian(X, Field::from_function(grid, [](auto x) { return x[2]; })).sup_norm() < 1e-12);
  CHECK(horizontal_laplacian(X, Field::from_function(grid, [](auto) { return -1.25; })).sup_norm() < 1e-12);
}

TEST_CASE("sub-Laplacian stencil is second order on degree-4 polynomials") {
  const auto X = left_invariant_fields(heisenberg1());
  const Polynomial p = Polynomial::monomial(3, {2, 1, 1}) + Polynomial::monomial(3, {0, 0, 3}) +
                       Polynomial::monomial(3, {1, 1, 2}) + Polynomial::monomial(3, {4, 0, 0}) +
                       Polynomial::monomial(3, {0, 2, 2});
  const Polynomial lap = horizontal_laplacian_analytic(X, p);
  double errs[2];
  for (int r = 0; r < 2; ++r) {
    auto grid = make_grid(GridSpec::cube(3, -1, 1, r == 0 ? 21 : 41));
    const auto f = Field::from_function(grid, [&](auto x) { return p.evaluate(x); });
    const auto L = horizontal_laplacian(X, f);
    errs[r] = 0;
    std::vector<double> x(3);
    for (std::size_t n = 0; n < grid->size(); ++n) {
      grid->node_coords(n, x);
      errs[r] = std::max(errs[r], std::abs(L.values[n] - lap.evaluate(x)));
    }
  }
  const double order = std::log2(errs[0] / errs[1]);
  CHECK(order >= 1.9);
}

TEST_CASE("grid commutator of X1, X2 approximates d3") {
  const auto X = left_invariant_fields(heisenberg1());
  const Polynomial p = Polynomial::monomial(3, {1, 1, 1}) + Polynomial::monomial(3, {0, 0, 3}) +
                       Polynomial::monomial(3, {2, 0, 1});
  const Polynomial d3 = p.derivative(2);
  double errs[2];
  for (int r = 0; r < 2; ++r) {
    auto grid = make_grid(GridSpec::cube(3, -1, 1, r == 0 ? 21 : 41));
    DiscreteCalculus calc(grid, X);
    const auto f = Field::from_function(grid, [&](auto x) { return p.evaluate(x); });
    const auto g = calc.gradient(f);
    Field g1(grid), g2(grid);
    for (std::size_t n = 0; n < grid->size(); ++n) {
      g1.values[n] = g.at(n, 0);
      g2.values[n] = g.at(n, 1);
    }
    const auto x1x2 = calc.gradient(g2), x2x1 = calc.gradient(g1);
    Field comm(grid);
    for (std::size_t n = 0; n < grid->size(); ++n) comm.values[n] = x1x2.at(n, 0) - x2x1.at(n, 1);
    errs[r] = max_interior_error(comm, [&](auto x) { return d3.evaluate(x); }, 2);
  }
  CHECK(errs[1] < 1e-2);
  CHECK(std::log2(errs[0] / errs[1]) >= 1.9);
}

TEST_CASE("discrete divergence") {
  const auto X = left_invariant_fields(heisenberg1());
  auto grid = make_grid(GridSpec::cube(3, -1, 1, 11));
  Field cst(grid, 2);
  for (std::size_t n = 0; n < grid->size(); ++n) {
    cst.at(n, 0) = 0.7;
    cst.at(n, 1) = -0.2;
  }
  CHECK(horizontal_divergence(X, cst).sup_norm() < 1e-13);
  Field rot(grid, 2);
  std::vector<double> x(3);
  for (std::size_t n = 0; n < grid->size(); ++n) {
    grid->node_coords(n, x);
    rot.at(n, 0) = x[1];
    rot.at(n, 1) = -x[0];
  }
  CHECK(horizontal_divergence(X, rot).sup_norm() < 1e-13);

  // div_G grad_G = Delta_G up to O(h^2)
  double errs[2];
  for (int r = 0; r < 2; ++r) {
    auto g = make_grid(GridSpec::cube(3, -1, 1, r == 0 ? 21 : 41));
    DiscreteCalculus calc(g, X);
    const auto f =
        Field::from_function(g, [](auto y) { return std::sin(2 * y[0]) * std::cos(y[1]) * std::exp(0.5 * y[2]); });
    const auto diff = calc.divergence(calc.gradient(f)) - calc.laplacian(f);
    errs[r] = max_interior_error(diff, [](auto) { return 0.0; }, 2);
  }
  CHECK(errs[1] < errs[0] / 3.0);
}

TEST_CASE("holder seminorm diagnostics") {
  const auto H = heisenberg1();
  auto grid = make_grid(GridSpec::cube(3, -1, 1, 11));
  CHECK(holder_seminorm(Field::from_function(grid, [](auto) { return 2.0; }), 0.5, H) == 0.0);
  const auto norm = Field::from_function(grid, [&](auto x) { return H.hom_norm(x); });
  const double lip = holder_seminorm(norm, 1.0, H);
  CHECK(std::isfinite(lip));
  CHECK(lip >= 1.0 - grid->spacing(0));
  auto ramp = [&](double width) {
    return Field::from_function(grid, [=](auto x) { return std::clamp(x[0] / width, -1.0, 1.0); });
  };
  CHECK(holder_seminorm(ramp(0.2), 0.5, H) > holder_seminorm(ramp(0.8), 0.5, H));
}

TEST_CASE("max_stable_dt") {
  const auto X = left_invariant_fields(heisenberg1());
  auto coarse = make_grid(GridSpec::cube(3, -2, 2, 21));
  auto fine = make_grid(GridSpec::cube(3, -2, 2, 41));
  DiscreteCalculus cc(coarse, X), cf(fine, X);
  CHECK(max_stable_dt(cf, 0.0, nullptr, 0.5) == kUnconstrained);
  const double dc = max_stable_dt(cc, 0.25, nullptr, 1.0);
  const double df = max_stable_dt(cf, 0.25, nullptr, 1.0);
  CHECK(dc / df == doctest::Approx(4.0).epsilon(1e-12));
  // [-2,2]^3, h = 0.1, sigma = 0.25: worst node is a corner with A33 = 2, |A13| = |A23| = 1:
  // rate = 0.25 * (100 + 100 + 200) + 0.25 * 4 / (2 * 0.01) = 150
  CHECK(df == doctest::Approx(1.0 / 150.0).epsilon(1e-12));
}
