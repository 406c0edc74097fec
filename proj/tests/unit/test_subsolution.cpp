#include <cmath>
#include <random>

#include "doctest.h"

#include "carnot/subsolution.hpp"

using namespace carnot;

namespace {

const GroupSpec H = heisenberg1();

double phi(const SubsolutionParams& p, double t, const std::vector<double>& x) {
  const double n2 = std::sqrt(std::pow(x[0] * x[0] + x[1] * x[1], 2) + x[2] * x[2]);
  return std::exp(-(p.beta1 + p.beta_bar * (t - p.tau0)) * (n2 + 1.0));
}

// x * exp(s e_i): moving along the left-invariant field X_i
std::vector<double> along(const std::vector<double>& x, int i, double s) {
  GroupElement e({0.0, 0.0, 0.0});
  e[i] = s;
  return multiply(H, GroupElement(x), e).coords;
}

}  // namespace

TEST_CASE("subsolution LHS agrees with finite differences along the flows of X_i") {
  SubsolutionParams p;
  p.beta_bar = 3.0;
  const std::vector<double> b{0.4, -0.7};
  SubsolutionDrift drift;
  drift.B = [&](double, std::span<const double>, std::span<double> out) { out[0] = b[0], out[1] = b[1]; };
  const NormSquareDerivatives nd(H);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  const double h = 1e-4, sigma = 0.25;
  for (int k = 0; k < 20; ++k) {
    const std::vector<double> x{u(rng), u(rng), u(rng)};
    const double t = 0.02;
    const double f = phi(p, t, x);
    double fd = (phi(p, t + h, x) - phi(p, t - h, x)) / (2 * h);
    for (int i = 0; i < 2; ++i) {
      const double fp = phi(p, t, along(x, i, h)), fm = phi(p, t, along(x, i, -h));
      fd += sigma * (fp - 2 * f + fm) / (h * h) + b[i] * (fp - fm) / (2 * h);
    }
    const auto s = subsolution_lhs(nd, p, drift, sigma, t, x);
    CHECK(s.lhs == doctest::Approx(fd).epsilon(1e-5).scale(f));
    CHECK(s.phi == doctest::Approx(f).epsilon(1e-14));
  }
}

TEST_CASE("at the origin only the time derivative survives") {
  SubsolutionParams p;
  p.beta_bar = 2.5;
  const NormSquareDerivatives nd(H);
  const std::vector<double> o{0.0, 0.0, 0.0};
  const auto v = nd(o);
  CHECK(v.grad[0] == 0.0);
  CHECK(v.grad[1] == 0.0);
  const auto s = subsolution_lhs(nd, p, {}, 0.25, p.tau0, o);
  CHECK(s.ratio == doctest::Approx(-p.beta_bar).epsilon(1e-15));
  CHECK(s.lhs == doctest::Approx(-p.beta_bar * std::exp(-p.beta1)).epsilon(1e-15));
}

TEST_CASE("bisected threshold: twice it holds everywhere, zero fails at large radius") {
  SubsolutionParams p;
  const auto pts = subsolution_samples(H, 64, 24, 1e-2, 4.0, 5);
  const auto times = subsolution_times(p, 11);
  const auto rep = subsolution_threshold(H, p, {}, 0.25, pts, times);
  CHECK(rep.threshold > 0.0);
  CHECK(rep.at_double.holds);
  CHECK(rep.at_double.max_lhs <= 1e-10);
  CHECK_FALSE(rep.at_zero.holds);
  GroupElement worst(rep.at_zero.worst_point);
  CHECK(hom_norm(H, worst) > 1.0);
  CHECK(rep.to_json()["at_double"]["holds"] == true);

  // a drift raises the threshold but one still exists
  SubsolutionDrift drift;
  drift.B = [](double, std::span<const double>, std::span<double> out) { out[0] = 0.5, out[1] = 0.3; };
  const auto with_drift = subsolution_threshold(H, p, drift, 0.25, pts, times);
  CHECK(with_drift.at_double.holds);
  CHECK(with_drift.threshold >= rep.threshold);
}
