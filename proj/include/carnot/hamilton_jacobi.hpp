#pragma once

// Solvers and verifiers for
//   d_t u - sigma Delta_G u + |grad_G u|^gamma = F,   u(0) = u0,
// forward in time. A backward problem with terminal datum u_T is solved in
// the reversed time s = T - t (see time_reversed).

#include <string>
#include <vector>

#include "carnot/fields.hpp"
#include "carnot/fokker_planck.hpp"
#include "json.hpp"

namespace carnot {

// Scalar time-indexed source: a DriftField with one component.
using TimeField = DriftField;

// F(T - t) for a sampled field; zero and constant fields are returned unchanged.
TimeField time_reversed(const TimeField& f, double T);

struct HamiltonianSpec {
  double gamma = 2.0;
  TimeField F = TimeField::zero(1);
  Field u0;

  // gamma >= 2, scalar source, finite u0 >= 0.
  void validate() const;
};

// A solution sampled at increasing times (uniform steps when every step is stored).
struct Trajectory {
  std::vector<double> times;
  std::vector<Field> states;

  std::size_t size() const { return states.size(); }
  double horizon() const { return times.empty() ? 0.0 : times.back() - times.front(); }
};

// Monotone one-sided horizontal gradient. Along X_i with direction a_i(x),
//   D-_i u = sum_k |a_i^k| (u(x) - u(x - s_k h_k e_k)) / h_k,
//   D+_i u = sum_k |a_i^k| (u(x + s_k h_k e_k) - u(x)) / h_k,  s_k = sign a_i^k,
// and p_i is max(D-_i, 0) or min(D+_i, 0), whichever is larger in magnitude.
// Box-boundary nodes fall back to the centred gradient.
Field godunov_gradient(const DiscreteCalculus& calc, const Field& u);

// Stable step for diffusion sigma and a gradient bounded by grad_bound:
// the heat rate plus gamma grad_bound^{gamma-1} max_x sum_i sum_k |a_i^k| / h_k.
double hj_dt(const DiscreteCalculus& calc, double sigma, double gamma, double grad_bound, double safety = 0.5);

// u + dt (sigma Delta_G u - |p|^gamma + F(u.time)) with p the Godunov gradient;
// box-boundary nodes copy their nearest interior neighbour. Throws
// std::domain_error on a CFL violation and std::runtime_error on NaN.
Field hj_step_direct(const DiscreteCalculus& calc, const Field& u, const HamiltonianSpec& spec, double sigma,
                     double dt);

struct HJOptions {
  double sigma = 0.25;
  double horizon = 0.5;
  double dt = 0.0;  // 0: hj_dt with gradient bound 2 sup|p(u0)| + 1
  double cfl_safety = 0.5;
  std::vector<double> output_times;
  bool store_every_step = false;
};

struct HJResult {
  double dt = 0.0;
  int steps = 0;
  Trajectory u;
  double max_gradient = 0.0;  // sup over steps of |p|
};

// Uniform step and step count used by hj_solve for opt.horizon.
std::pair<double, int> hj_step_grid(const DiscreteCalculus& calc, const HamiltonianSpec& spec, const HJOptions& opt);

HJResult hj_solve(const DiscreteCalculus& calc, const HamiltonianSpec& spec, const HJOptions& opt);

// Norm proxy of C([0,T]; W^{2,inf}_G): sup_t (|u| + |grad_G u| + max_ij |X_i X_j u|)
// with the second derivatives composed from centred stencils.
double x_norm(const DiscreteCalculus& calc, const Field& u);
double x_norm(const DiscreteCalculus& calc, const Trajectory& u);
double x_distance(const DiscreteCalculus& calc, const Trajectory& a, const Trajectory& b);

// One application of the Duhamel map on the step grid of u_prev (every step stored):
//   w_0 = u0,  w_{n+1} = S(w_n + dt f_n),  f_n = F(t_n) - |grad_G u_prev(t_n)|^gamma,
// with S one heat step, i.e. the left-endpoint rule for
//   e^{t Delta} u0 + int_0^t e^{(t-s) Delta} f(s) ds.
Trajectory duhamel_iterate(const DiscreteCalculus& calc, const Trajectory& u_prev, const HamiltonianSpec& spec,
                           double sigma);

struct DuhamelOptions {
  double sigma = 0.25;
  double horizon = 0.05;
  double dt = 0.0;  // 0: heat_dt with cfl_safety
  double cfl_safety = 0.5;
  int max_iterations = 40;
  double tolerance = 1e-6;  // on the norm-proxy distance of successive iterates
  double ball_radius = 0.0;  // k; 0: twice the norm proxy of u0
};

struct FixedPointReport {
  double T = 0.0;
  double dt = 0.0;
  double k = 0.0;
  std::vector<double> norms;      // norm proxy of each iterate
  std::vector<double> distances;  // between consecutive iterates
  std::vector<double> ratios;     // distances[n+1] / distances[n]
  int iterations = 0;
  std::string verdict;  // converged | max_iterations | diverged
  std::string message;

  bool converged() const { return verdict == "converged"; }
  double max_ratio() const;
  nlohmann::json to_json() const;
};

struct DuhamelResult {
  Trajectory u;
  FixedPointReport report;
};

// Iterates the Duhamel map from u(t) = u0. Divergence (norm above 10 k or a
// non-finite value) stops the iteration with verdict "diverged".
DuhamelResult duhamel_solve(const DiscreteCalculus& calc, const HamiltonianSpec& spec, const DuhamelOptions& opt);

struct DualityReport {
  double s = 0.0, tau = 0.0;
  double final_pairing = 0.0;    // int u(tau) mu(tau)
  double initial_pairing = 0.0;  // int u(s) mu(s)
  double gradient_term = 0.0;    // int int (gamma - 1) |grad u|^gamma mu
  double source_term = 0.0;      // int int F mu
  double residual = 0.0;         // |final - initial - gradient - source|
  double scale = 0.0;            // ||u0|| + T ||F||
  double mass_error = 0.0;       // max_t |int mu - int mu_tau|
  bool comb_holds = false;       // gradient_term <= 2 scale (1 + 1e-2)

  nlohmann::json to_json() const;
};

// mu solves -d_t mu - sigma Delta_G mu - div_G(gamma |grad u|^{gamma-2} grad u mu) = 0
// on (s, tau) with mu(tau) = mu_tau, stepped with fp_step_into in reversed time
// on the ball mask. u must store every step; s and tau are snapped to it. Time
// integrals use the trapezoid rule on the step grid.
DualityReport duality_check(const DiscreteCalculus& calc, const Trajectory& u, const HamiltonianSpec& spec,
                            double sigma, const Field& mu_tau, double s, double tau, const BallMask& mask);
// Same check on the hj_solve run for (spec, opt), keeping O(sqrt(steps))
// states in memory: checkpoints on the forward pass, segments recomputed on
// the backward one.
DualityReport duality_check(const DiscreteCalculus& calc, const HamiltonianSpec& spec, const HJOptions& opt,
                            const Field& mu_tau, double s, double tau, const BallMask& mask);

struct SupBoundsReport {
  double scale = 0.0;  // ||u0|| + T ||F||
  double upper_bound = 0.0;
  double lower_bound = 0.0;  // -((gamma + 1)/(gamma - 1)) scale
  double max_u = 0.0, min_u = 0.0;
  double tolerance = 0.0;  // 1e-3 scale
  bool upper_holds = false;
  bool lower_holds = false;
  bool nonnegative = false;  // min u >= -tolerance (meaningful for F = 0, u0 >= 0)

  bool holds() const { return upper_holds && lower_holds; }
  nlohmann::json to_json() const;
};

SupBoundsReport sup_bounds_check(const Trajectory& u, const HamiltonianSpec& spec);

struct BernsteinReport {
  std::string fields;  // left | right | custom
  double omega_fraction = 0.0;
  std::vector<double> times;
  std::vector<std::vector<double>> sup;  // [j][time]: sup over Omega of |Y_j u|
  std::vector<double> initial_norm;      // ||Y_j u0|| on the whole grid
  std::vector<double> source_norm;       // sup_t ||Y_j F|| on the whole grid
  std::vector<double> bound;             // ||Y_j F|| + ||Y_j u0||
  double max_ratio = 0.0;                // max_j sup_t sup_Omega |Y_j u| / bound_j
  double tolerance = 0.0;
  bool holds = false;

  nlohmann::json to_json() const;
};

// Y_j u on the centred sub-box Omega (each half-width scaled by omega_fraction)
// at every stored time, against ||Y_j F|| + ||Y_j u0|| (1 + tolerance).
BernsteinReport bernstein_monitor(const Trajectory& u, const HamiltonianSpec& spec, const VectorFieldSet& Y,
                                  double omega_fraction = 0.5, double tolerance = 5e-2);

}  // namespace carnot
