#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"

#include "carnot/flat_metric.hpp"
#include "carnot/fokker_planck.hpp"

using namespace carnot;

namespace {

const GroupSpec H = heisenberg1();

double qd(std::span<const double> x, std::span<const double> y) {
  return quasi_distance(H, GroupElement(std::vector<double>(x.begin(), x.end())),
                        GroupElement(std::vector<double>(y.begin(), y.end())));
}

std::vector<double> random_point(std::mt19937_64& rng, double s = 1.0) {
  std::uniform_real_distribution<double> u(-s, s);
  return {u(rng), u(rng), u(rng)};
}

// Maximizes sum f_i w_i over {alpha + beta <= 1, |f_i| <= alpha,
// |f_i - f_j| <= beta d_ij, alpha, beta >= 0} by enumerating every vertex.
double brute_force(const std::vector<std::vector<double>>& pts, const std::vector<double>& w) {
  const int n = static_cast<int>(pts.size()), nv = n + 2;  // f..., alpha, beta
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  auto add = [&](Eigen::VectorXd r, double b) {
    rows.push_back(std::move(r));
    rhs.push_back(b);
  };
  Eigen::VectorXd r = Eigen::VectorXd::Zero(nv);
  r[n] = r[n + 1] = 1.0;
  add(r, 1.0);
  for (int k = n; k < n + 2; ++k) {
    r.setZero();
    r[k] = -1.0;
    add(r, 0.0);
  }
  for (int i = 0; i < n; ++i)
    for (double s : {1.0, -1.0}) {
      r.setZero();
      r[i] = s;
      r[n] = -1.0;
      add(r, 0.0);
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      r.setZero();
      r[i] = 1.0;
      r[j] = -1.0;
      r[n + 1] = -qd(pts[i], pts[j]);
      add(r, 0.0);
    }
  const int m = static_cast<int>(rows.size());
  std::vector<int> pick(nv);
  for (int k = 0; k < nv; ++k) pick[k] = k;
  double best = -1.0;
  Eigen::MatrixXd A(nv, nv);
  Eigen::VectorXd b(nv);
  while (true) {
    for (int k = 0; k < nv; ++k) {
      A.row(k) = rows[pick[k]].transpose();
      b[k] = rhs[pick[k]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (lu.rank() == nv) {
      const Eigen::VectorXd x = lu.solve(b);
      bool feasible = true;
      for (int c = 0; c < m && feasible; ++c) feasible = rows[c].dot(x) <= rhs[c] + 1e-10;
      if (feasible) {
        double v = 0.0;
        for (int i = 0; i < n; ++i) v += x[i] * w[i];
        best = std::max(best, v);
      }
    }
    int k = nv - 1;
    while (k >= 0 && pick[k] == m - nv + k) --k;
    if (k < 0) break;
    ++pick[k];
    for (int j = k + 1; j < nv; ++j) pick[j] = pick[j - 1] + 1;
  }
  return best;
}

struct Signed {
  DiscreteMeasure mu{3}, nu{3};
  std::vector<std::vector<double>> pts;
  std::vector<double> w;
};

Signed random_pair(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  Signed s;
  for (int i = 0; i < n; ++i) {
    s.pts.push_back(random_point(rng));
    const double a = u(rng), b = u(rng) * (i % 2 ? 1.0 : 0.2);
    s.mu.add(s.pts.back(), a);
    s.nu.add(s.pts.back(), b);
    s.w.push_back(a - b);
  }
  return s;
}

DiscreteMeasure random_measure(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  DiscreteMeasure m(3);
  for (int i = 0; i < n; ++i) m.add(random_point(rng), u(rng));
  return m;
}

void check_optimizer(const FlatMetricResult& r, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const std::size_t n = r.f.size();
  double objective = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const std::span<const double> x(r.support.data() + 3 * s, 3);
    CHECK(std::abs(r.f[s]) <= r.alpha + 1e-12);
    for (std::size_t t = 0; t < n; ++t) {
      const std::span<const double> y(r.support.data() + 3 * t, 3);
      CHECK(r.f[s] - r.f[t] <= r.beta * qd(x, y) + 1e-12);
    }
    for (std::size_t i = 0; i < mu.size(); ++i)
      if (std::equal(x.begin(), x.end(), mu.point(i).begin())) objective += r.f[s] * mu.weights[i];
    for (std::size_t i = 0; i < nu.size(); ++i)
      if (std::equal(x.begin(), x.end(), nu.point(i).begin())) objective -= r.f[s] * nu.weights[i];
  }
  CHECK(r.alpha + r.beta <= 1.0 + 1e-15);
  CHECK(objective == doctest::Approx(r.value).epsilon(1e-10));
}

}  // namespace

TEST_CASE("identical measures are at distance zero") {
  std::mt19937_64 rng(3);
  const auto m = random_measure(rng, 6);
  const auto r = flat_distance(m, m, H);
  CHECK(r.ok());
  CHECK(r.value == 0.0);
}

TEST_CASE("two unit diracs: 2r/(r+2)") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    const auto x = random_point(rng, 1.5), y = random_point(rng, 1.5);
    DiscreteMeasure a(3), b(3);
    a.add(x, 1.0);
    b.add(y, 1.0);
    const double rr = qd(x, y);
    const auto r = flat_distance(a, b, H);
    CHECK(r.ok());
    CHECK(r.value == doctest::Approx(2 * rr / (rr + 2)).epsilon(1e-12));
    CHECK(r.gap <= 1e-8);
    // d0 <= quasi-distance for transported diracs
    CHECK(r.value <= rr + 1e-12);
  }
}

TEST_CASE("LP value matches exhaustive vertex enumeration") {
  std::mt19937_64 rng(11);
  for (int n : {2, 3, 4, 4, 4, 4}) {
    const auto s = random_pair(rng, n);
    const auto r = flat_distance(s.mu, s.nu, H);
    CHECK(r.ok());
    CHECK(r.gap <= 1e-8);
    CHECK(r.value == doctest::Approx(brute_force(s.pts, s.w)).epsilon(1e-6));
    check_optimizer(r, s.mu, s.nu);
  }
}

TEST_CASE("metric properties on random measures") {
  std::mt19937_64 rng(17);
  int violations = 0;
  for (int k = 0; k < 100; ++k) {
    const auto a = random_measure(rng, 3), b = random_measure(rng, 4), c = random_measure(rng, 3);
    const auto ab = flat_distance(a, b, H), bc = flat_distance(b, c, H), ac = flat_distance(a, c, H);
    REQUIRE((ab.ok() && bc.ok() && ac.ok()));
    if (ac.value > ab.value + bc.value + 1e-6) ++violations;
    const double ma = a.total(), mb = b.total();
    CHECK(ab.value <= 2 * std::min(ma, mb) + std::abs(ma - mb) + 1e-12);
    if (k < 10) CHECK(flat_distance(b, a, H).value == doctest::Approx(ab.value).epsilon(1e-12));
  }
  CHECK(violations == 0);
}

TEST_CASE("optimizer is feasible for every pair on a larger instance") {
  std::mt19937_64 rng(23);
  const auto a = random_measure(rng, 40), b = random_measure(rng, 35);
  const auto r = flat_distance(a, b, H);
  CHECK(r.ok());
  CHECK(r.gap <= 1e-8);
  check_optimizer(r, a, b);
}

TEST_CASE("coarsening keeps mass and the measure CSV round-trips") {
  const auto grid = make_grid(GridSpec::cube(3, -2, 2, 41));
  auto rho = Field::from_function(grid, [](auto x) { return std::exp(-4 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2])); });
  const auto coarse = measurement_grid(*grid);
  CHECK(coarse.nodes() == std::vector<int>{21, 21, 21});
  const auto m = DiscreteMeasure::coarsened(rho, coarse, 0.0);
  CHECK(m.total() == doctest::Approx(rho.integral()).epsilon(1e-12));

  const auto path = std::filesystem::temp_directory_path() / "carnot_measure_roundtrip.csv";
  m.write_csv(path);
  const auto back = DiscreteMeasure::read_csv(path);
  CHECK(back.points == m.points);
  CHECK(back.weights == m.weights);
  std::filesystem::remove(path);
}

TEST_CASE("oversized problems report a status instead of a value") {
  std::mt19937_64 rng(29);
  const auto a = random_measure(rng, 30), b = random_measure(rng, 30);
  FlatMetricOptions opt;
  opt.max_pairs = 100;
  const auto r = flat_distance(a, b, H, opt);
  CHECK(r.status == "too_large");
  CHECK_FALSE(r.ok());
  CHECK(r.to_json()["status"] == "too_large");
}

namespace {

std::vector<Field> fp_trajectory(const std::vector<double>& drift, double sigma, const std::vector<double>& times) {
  static const auto grid = make_grid(GridSpec::cube(3, -2, 2, 41));
  static const DiscreteCalculus calc(grid, left_invariant_fields(H));
  const auto mask = make_ball_mask(*grid, H, 1.8);
  auto rho0 = Field::from_function(grid, [](auto x) {
    const double r2 = x[0] * x[0] + x[1] * x[1];
    const double P = (r2 * r2 + x[2] * x[2]) / std::pow(0.6, 4);
    return P < 1 ? std::exp(1 / (P - 1)) : 0.0;
  });
  rho0 = (1.0 / rho0.integral()) * rho0;
  FPOptions opt;
  opt.sigma = sigma;
  opt.horizon = times.back();
  opt.output_times = times;
  auto res = fp_solve(calc, rho0, DriftField::constant(drift), mask, opt);
  std::vector<Field> traj{rho0};
  for (auto& s : res.states)
    if (s.time > 0) traj.push_back(s);
  return traj;
}

}  // namespace

TEST_CASE("Holder fit: stationary trajectory is degenerate") {
  const auto grid = make_grid(GridSpec::cube(3, -2, 2, 21));
  auto f = Field::from_function(grid, [](auto x) { return std::exp(-4 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2])); });
  std::vector<Field> traj;
  for (double t : {0.0, 0.1, 0.2, 0.4}) {
    traj.push_back(f);
    traj.back().time = t;
  }
  const auto fit = holder_in_time(traj, H);
  CHECK(fit.degenerate);
  CHECK_FALSE(fit.to_json().contains("exponent"));
}

TEST_CASE("Holder fit: heat flow is at least half-Holder") {
  const auto traj = fp_trajectory({0.0, 0.0}, 0.25, {0.01, 0.02, 0.04, 0.08, 0.16});
  REQUIRE(traj.size() == 6);
  const auto fit = holder_in_time(traj, H);
  CHECK_FALSE(fit.degenerate);
  CHECK(fit.exponent >= 0.4);
  for (std::size_t k = 1; k < fit.distances.size(); ++k) CHECK(fit.distances[k] > fit.distances[k - 1]);
}

TEST_CASE("Holder fit: constant drift transports at Lipschitz rate") {
  const auto traj = fp_trajectory({0.8, -0.6}, 0.01, {0.01, 0.02, 0.04, 0.08});
  const auto fit = holder_in_time(traj, H);
  CHECK_FALSE(fit.degenerate);
  CHECK(fit.exponent >= 0.9);
}
