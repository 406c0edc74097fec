#pragma once

// The exponential weight used in the uniqueness argument,
//   Phi(t,x) = exp(-(beta1 + beta_bar (t - tau0)) (||x||^2 + 1)),
// and a pointwise check of
//   d_t Phi + sigma Delta_G Phi + B . grad_G Phi + (div_G B) Phi <= 0.
// Derivatives of ||x||^2 come from the exact polynomial ||x||^{2k!}.

#include <functional>
#include <vector>

#include "carnot/fields.hpp"
#include "json.hpp"

namespace carnot {

struct SubsolutionParams {
  double beta = 0.5;
  double beta1 = 1.0;
  double beta_bar = 1.0;
  double tau0 = 0.0;
  double tau = 0.05;

  void validate() const;
};

// B(t, x) -> m-vector and its horizontal divergence. Empty functions mean 0.
struct SubsolutionDrift {
  std::function<void(double, std::span<const double>, std::span<double>)> B;
  std::function<double(double, std::span<const double>)> divB;
};

// ||x||^2, its horizontal gradient and sub-Laplacian, from symbolic
// derivatives of ||x||^{2k!}. At the origin the gradient is 0 and the
// sub-Laplacian is taken as 0 (its limit along the vertical axis).
class NormSquareDerivatives {
 public:
  explicit NormSquareDerivatives(const GroupSpec& spec);
  struct Values {
    double n2 = 0.0;
    std::vector<double> grad;
    double lap = 0.0;
  };
  Values operator()(std::span<const double> x) const;

 private:
  int m_;
  double q_;  // 2 / (2k!)
  CompiledPolynomial P_;
  std::vector<CompiledPolynomial> XP_, XXP_;
};

struct SubsolutionPoint {
  double lhs = 0.0;    // the left-hand side
  double ratio = 0.0;  // lhs / Phi (same sign, not damped by Phi)
  double phi = 0.0;
};

SubsolutionPoint subsolution_lhs(const NormSquareDerivatives& nd, const SubsolutionParams& p,
                                 const SubsolutionDrift& drift, double sigma, double t, std::span<const double> x);

struct SubsolutionReport {
  double max_lhs = -INFINITY;
  double max_ratio = -INFINITY;
  std::vector<double> worst_point;
  double worst_time = 0.0;
  std::size_t samples = 0;
  bool holds = false;  // max_ratio <= 1e-10 (hence also max_lhs <= 1e-10)

  nlohmann::json to_json() const;
};

SubsolutionReport subsolution_check(const GroupSpec& spec, const SubsolutionParams& p, const SubsolutionDrift& drift,
                                    double sigma, const std::vector<std::vector<double>>& points,
                                    const std::vector<double>& times);

// Sample points: the origin, the coordinate axes and random directions, each
// dilated to radii log-spaced in [r_min, r_max].
std::vector<std::vector<double>> subsolution_samples(const GroupSpec& spec, int directions, int radii, double r_min,
                                                     double r_max, unsigned seed);
std::vector<double> subsolution_times(const SubsolutionParams& p, int count);

struct ThresholdReport {
  double threshold = 0.0;       // smallest beta_bar found to satisfy the inequality (bisection)
  double upper_feasible = 0.0;  // feasible value that bracketed the search
  int bisections = 0;
  SubsolutionReport at_double;  // check at beta_bar = 2 * threshold
  SubsolutionReport at_zero;    // negative control at beta_bar = 0

  nlohmann::json to_json() const;
};

ThresholdReport subsolution_threshold(const GroupSpec& spec, SubsolutionParams p, const SubsolutionDrift& drift,
                                      double sigma, const std::vector<std::vector<double>>& points,
                                      const std::vector<double>& times, double rel_tol = 1e-6);

}  // namespace carnot
