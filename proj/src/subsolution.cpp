#include "carnot/subsolution.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace carnot {

void SubsolutionParams::validate() const {
  if (!(beta > 0.0 && beta1 > beta)) throw std::invalid_argument("subsolution: need 0 < beta < beta1");
  if (!(beta_bar >= 0.0)) throw std::invalid_argument("subsolution: beta_bar must be nonnegative");
  if (!(tau > tau0)) throw std::invalid_argument("subsolution: need tau > tau0");
}

NormSquareDerivatives::NormSquareDerivatives(const GroupSpec& spec)
    : m_(spec.horizontal_dim()), q_(2.0 / spec.norm_exponent()), P_(spec.norm_power_polynomial()) {
  const auto X = left_invariant_fields(spec);
  const Polynomial P = spec.norm_power_polynomial();
  for (int i = 0; i < m_; ++i) {
    const Polynomial xp = X[i].apply(P);
    XP_.emplace_back(xp);
    XXP_.emplace_back(X[i].apply(xp));
  }
}

NormSquareDerivatives::Values NormSquareDerivatives::operator()(std::span<const double> x) const {
  Values v;
  v.grad.assign(m_, 0.0);
  const double P = P_(x);
  if (P <= 0.0) return v;
  v.n2 = std::pow(P, q_);
  const double d1 = q_ * std::pow(P, q_ - 1.0);
  const double d2 = q_ * (q_ - 1.0) * std::pow(P, q_ - 2.0);
  for (int i = 0; i < m_; ++i) {
    const double xp = XP_[i](x);
    v.grad[i] = d1 * xp;
    v.lap += d2 * xp * xp + d1 * XXP_[i](x);
  }
  return v;
}

SubsolutionPoint subsolution_lhs(const NormSquareDerivatives& nd, const SubsolutionParams& p,
                                 const SubsolutionDrift& drift, double sigma, double t, std::span<const double> x) {
  const auto v = nd(x);
  const int m = static_cast<int>(v.grad.size());
  const double c = p.beta1 + p.beta_bar * (t - p.tau0);
  double g2 = 0.0;
  for (double g : v.grad) g2 += g * g;
  double ratio = -p.beta_bar * (v.n2 + 1.0) + sigma * c * c * g2 - sigma * c * v.lap;
  if (drift.B) {
    std::vector<double> B(m);
    drift.B(t, x, B);
    for (int i = 0; i < m; ++i) ratio -= c * B[i] * v.grad[i];
  }
  if (drift.divB) ratio += drift.divB(t, x);
  SubsolutionPoint out;
  out.phi = std::exp(-c * (v.n2 + 1.0));
  out.ratio = ratio;
  out.lhs = ratio * out.phi;
  return out;
}

SubsolutionReport subsolution_check(const GroupSpec& spec, const SubsolutionParams& p, const SubsolutionDrift& drift,
                                    double sigma, const std::vector<std::vector<double>>& points,
                                    const std::vector<double>& times) {
  p.validate();
  const NormSquareDerivatives nd(spec);
  SubsolutionReport rep;
  for (double t : times)
    for (const auto& x : points) {
      const auto s = subsolution_lhs(nd, p, drift, sigma, t, x);
      ++rep.samples;
      rep.max_lhs = std::max(rep.max_lhs, s.lhs);
      if (s.ratio > rep.max_ratio) {
        rep.max_ratio = s.ratio;
        rep.worst_point = x;
        rep.worst_time = t;
      }
    }
  rep.holds = rep.max_ratio <= 1e-10 && rep.max_lhs <= 1e-10;
  return rep;
}

std::vector<std::vector<double>> subsolution_samples(const GroupSpec& spec, int directions, int radii, double r_min,
                                                     double r_max, unsigned seed) {
  const int d = spec.dim();
  std::vector<std::vector<double>> units;
  for (int a = 0; a < d; ++a) {
    std::vector<double> e(d, 0.0);
    e[a] = 1.0;
    units.push_back(e);
    e[a] = -1.0;
    units.push_back(e);
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int k = 0; k < directions; ++k) {
    std::vector<double> x(d);
    for (double& v : x) v = normal(rng);
    const double n = spec.hom_norm(x);
    if (n == 0.0) continue;
    units.push_back(dilate(spec, 1.0 / n, GroupElement(x)).coords);
  }
  std::vector<std::vector<double>> out{std::vector<double>(d, 0.0)};
  for (int j = 0; j < radii; ++j) {
    const double r = radii == 1 ? r_min : r_min * std::pow(r_max / r_min, static_cast<double>(j) / (radii - 1));
    for (const auto& u : units) out.push_back(dilate(spec, r, GroupElement(u)).coords);
  }
  return out;
}

std::vector<double> subsolution_times(const SubsolutionParams& p, int count) {
  std::vector<double> t(count);
  for (int i = 0; i < count; ++i) t[i] = p.tau0 + (p.tau - p.tau0) * (count == 1 ? 0.0 : double(i) / (count - 1));
  return t;
}

ThresholdReport subsolution_threshold(const GroupSpec& spec, SubsolutionParams p, const SubsolutionDrift& drift,
                                      double sigma, const std::vector<std::vector<double>>& points,
                                      const std::vector<double>& times, double rel_tol) {
  auto feasible = [&](double bb) {
    p.beta_bar = bb;
    return subsolution_check(spec, p, drift, sigma, points, times).holds;
  };
  ThresholdReport rep;
  double lo = 0.0, hi = -1.0;
  for (int k = -6; k <= 40; ++k) {
    const double bb = std::ldexp(1.0, k);
    if (feasible(bb)) {
      hi = bb;
      break;
    }
    lo = bb;
  }
  if (hi < 0.0) throw std::runtime_error("subsolution_threshold: no feasible beta_bar found");
  rep.upper_feasible = hi;
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
    ++rep.bisections;
  }
  rep.threshold = hi;
  p.beta_bar = 2.0 * hi;
  rep.at_double = subsolution_check(spec, p, drift, sigma, points, times);
  p.beta_bar = 0.0;
  rep.at_zero = subsolution_check(spec, p, drift, sigma, points, times);
  return rep;
}

nlohmann::json SubsolutionReport::to_json() const {
  return {{"max_lhs", max_lhs},   {"max_ratio", max_ratio}, {"worst_point", worst_point},
          {"worst_time", worst_time}, {"samples", samples}, {"holds", holds}};
}

nlohmann::json ThresholdReport::to_json() const {
  return {{"threshold", threshold},
          {"upper_feasible", upper_feasible},
          {"bisections", bisections},
          {"at_double", at_double.to_json()},
          {"at_zero", at_zero.to_json()}};
}

}  // namespace carnot
