#include <array>
#include <cmath>
#include <random>

#include "doctest.h"

#include "carnot/group.hpp"

using namespace carnot;

namespace {

// H^1 as 3x3 upper unipotent matrices: exp of the algebra element with
// exponential coordinates (x1,x2,x3) is [[1,x1,x3+x1x2/2],[0,1,x2],[0,0,1]].
using Mat3 = std::array<std::array<double, 3>, 3>;

Mat3 to_matrix(const GroupElement& x) {
  return Mat3{{{1, x[0], x[2] + 0.5 * x[0] * x[1]}, {0, 1, x[1]}, {0, 0, 1}}};
}

GroupElement from_matrix(const Mat3& M) { return {M[0][1], M[1][2], M[0][2] - 0.5 * M[0][1] * M[1][2]}; }

Mat3 matmul(const Mat3& A, const Mat3& B) {
  Mat3 C{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) C[i][j] += A[i][k] * B[k][j];
  return C;
}

GroupElement random_element(std::mt19937_64& rng, int d, double scale = 2.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  GroupElement x{std::vector<double>(d)};
  for (int i = 0; i < d; ++i) x[i] = u(rng);
  return x;
}

double max_diff(const GroupElement& a, const GroupElement& b) {
  double m = 0;
  for (int i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("heisenberg multiply matches the matrix representation") {
  const auto H = heisenberg1();
  const auto z = multiply(H, {1, 0, 0}, {0, 1, 0});
  const auto oracle = from_matrix(matmul(to_matrix({1, 0, 0}), to_matrix({0, 1, 0})));
  CHECK(z == GroupElement{1, 1, 0.5});
  CHECK(max_diff(z, oracle) == 0.0);

  std::mt19937_64 rng(11);
  for (int s = 0; s < 200; ++s) {
    const auto x = random_element(rng, 3), y = random_element(rng, 3);
    CHECK(max_diff(multiply(H, x, y), from_matrix(matmul(to_matrix(x), to_matrix(y)))) < 1e-13);
  }
}

TEST_CASE("identity and inverse") {
  const auto H = heisenberg1();
  const GroupElement x{1.5, -0.25, 3.0};
  CHECK(multiply(H, identity(H), x) == x);
  CHECK(multiply(H, {0.3, 0.7, -2}, {-0.3, -0.7, 2}) == identity(H));
  CHECK(inverse(H, {1, 2, 3}) == GroupElement{-1, -2, -3});
  CHECK(inverse(H, identity(H)) == identity(H));
  std::mt19937_64 rng(3);
  for (int s = 0; s < 100; ++s) {
    const auto y = random_element(rng, 3);
    CHECK(max_diff(multiply(H, y, inverse(H, y)), identity(H)) <= 1e-14);
  }
}

TEST_CASE("dimension mismatch is a contract violation") {
  const auto H = heisenberg1();
  CHECK_THROWS_AS(multiply(H, {1, 2}, {1, 2, 3}), std::invalid_argument);
  CHECK_THROWS_AS(dilate(H, 0.0, {1, 2, 3}), std::domain_error);
  CHECK_THROWS_AS(dilate(H, -1.0, {1, 2, 3}), std::domain_error);
}

TEST_CASE("dilations") {
  const auto H = heisenberg1();
  CHECK(dilate(H, 2.0, {1, 1, 1}) == GroupElement{2, 2, 4});
  const GroupElement x{0.3, -1.1, 0.7};
  CHECK(dilate(H, 1.0, x) == x);
  CHECK(max_diff(dilate(H, 3.0, dilate(H, 1.0 / 3.0, x)), x) < 1e-15);
}

TEST_CASE("homogeneous norm and quasi-distance") {
  const auto H = heisenberg1();
  CHECK(H.homogeneous_dimension() == 4);
  CHECK(H.norm_exponent() == 4);
  CHECK(hom_norm(H, {0, 0, 1}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(hom_norm(H, {1, 0, 0}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(hom_norm(H, identity(H)) == 0.0);
  const GroupElement x{0.4, 0.2, -0.9}, y{-1.0, 0.5, 0.3};
  CHECK(hom_norm(H, dilate(H, 3.0, x)) == doctest::Approx(3.0 * hom_norm(H, x)).epsilon(1e-13));
  CHECK(quasi_distance(H, x, x) == 0.0);
  CHECK(quasi_distance(H, {0, 0, 0}, {0, 0, 0.36}) == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(quasi_distance(H, dilate(H, 1.7, x), dilate(H, 1.7, y)) ==
        doctest::Approx(1.7 * quasi_distance(H, x, y)).epsilon(1e-13));
  // ||x||^4 as a polynomial: (x1^2+x2^2)^2 + x3^2
  const auto P = H.norm_power_polynomial();
  const double pt[3] = {0.4, 0.2, -0.9};
  CHECK(P.evaluate(pt) == doctest::Approx(std::pow(hom_norm(H, x), 4)).epsilon(1e-13));
}

TEST_CASE("quasi-distance satisfies the triangle inequality on H^1 samples") {
  const auto H = heisenberg1();
  std::mt19937_64 rng(5);
  double worst = 0;
  for (int s = 0; s < 20000; ++s) {
    const auto x = random_element(rng, 3), y = random_element(rng, 3), z = random_element(rng, 3);
    const double lhs = quasi_distance(H, x, z);
    const double rhs = quasi_distance(H, x, y) + quasi_distance(H, y, z);
    worst = std::max(worst, lhs / rhs);
  }
  CHECK(worst <= 1.0 + 1e-12);
}

TEST_CASE("check_homogeneous_bound") {
  const auto H = heisenberg1();
  auto norm = [&](const GroupElement& x) { return hom_norm(H, x); };
  const auto eq = check_homogeneous_bound(H, norm, 1.0);
  CHECK(eq.holds);
  CHECK(eq.worst_ratio == doctest::Approx(1.0).epsilon(1e-12));

  const auto first = check_homogeneous_bound(H, [](const GroupElement& x) { return x[0]; }, 1.0);
  CHECK(first.holds);
  CHECK(first.worst_ratio <= 1.0);

  const auto doubled = check_homogeneous_bound(H, [&](const GroupElement& x) { return 2.0 * norm(x); }, 1.0);
  CHECK_FALSE(doubled.holds);
}

TEST_CASE("group spec round-trips through its document form") {
  for (const auto& spec : {heisenberg1(), engel()}) {
    const auto back = group_from_json(to_json(spec));
    CHECK(back.name() == spec.name());
    CHECK(back.weights() == spec.weights());
    CHECK(to_json(back) == to_json(spec));
  }
  auto bad = to_json(heisenberg1());
  bad["law"][0]["x_pow"] = std::vector<int>{0, 0, 1};  // x3*y2 has weight 3, target weight 2
  CHECK_THROWS_AS(group_from_json(bad), std::invalid_argument);
}

TEST_CASE("engel law is associative and dilation-equivariant") {
  const auto E = engel();
  CHECK(E.homogeneous_dimension() == 7);
  CHECK(E.norm_exponent() == 12);
  std::mt19937_64 rng(9);
  for (int s = 0; s < 200; ++s) {
    const auto x = random_element(rng, 4, 1.0), y = random_element(rng, 4, 1.0), z = random_element(rng, 4, 1.0);
    CHECK(max_diff(multiply(E, multiply(E, x, y), z), multiply(E, x, multiply(E, y, z))) < 1e-12);
    CHECK(max_diff(multiply(E, x, inverse(E, x)), identity(E)) < 1e-12);
    CHECK(max_diff(dilate(E, 1.3, multiply(E, x, y)), multiply(E, dilate(E, 1.3, x), dilate(E, 1.3, y))) < 1e-12);
  }
}
