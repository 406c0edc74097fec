#pragma once

// The coupled system
//   -d_t u - sigma Delta_G u + |grad_G u|^gamma = F[rho(t)],   u(T) = u_T,
//    d_t rho - sigma Delta_G rho - div_G(gamma |grad_G u|^{gamma-2} grad_G u rho) = 0,   rho(0) = rho0,
// with F[rho] = gain * (xi^eps * rho), solved by damped Picard iteration of
// u -> T(u): FP forward with the drift of u, then HJ backward with the
// coupling of the resulting density.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "carnot/flat_metric.hpp"
#include "carnot/hamilton_jacobi.hpp"
#include "carnot/mollifier.hpp"
#include "json.hpp"

namespace carnot {

struct CouplingSpec {
  MollifierSpec mollifier;
  double gain = 1.0;
};

class Coupling {
 public:
  Coupling(GridPtr grid, const CouplingSpec& c, const GroupSpec& spec);
  // gain * (xi^eps * rho)
  Field operator()(const Field& rho) const;
  const CouplingSpec& spec() const { return c_; }

 private:
  CouplingSpec c_;
  Mollifier mollifier_;
};

Field coupling_eval(const Field& rho, const Coupling& c);

// sup |f| + sup |grad_G f| (centred stencils).
double c1_norm(const DiscreteCalculus& calc, const Field& f);

struct MFGParams {
  double sigma = 0.25;
  double gamma = 2.0;
  double horizon = 0.1;
  double theta = 0.5;
  double tol_u = 1e-5;
  double tol_rho = 1e-4;
  int max_iterations = 50;
  double radius = 1.8;  // FP truncation ball
  double dt = 0.0;      // 0: from the CFL bounds of u_T
  double cfl_safety = 0.5;
  // u and the coupling are kept at most at this many time levels; longer runs
  // store every k-th step and interpolate linearly in between
  int max_levels = 256;

  void validate() const;
};

struct MFGIteration {
  int index = 0;
  double residual_u = 0.0;    // sup_t |T(u) - u|
  double change_u = 0.0;      // sup_t |u_new - u| = theta residual_u
  double change_rho = 0.0;    // max over check times of d0(rho_new, rho_old); inf on the first sweep
  double min_mass = 0.0, max_mass = 0.0;
};

struct MFGState {
  std::vector<double> times;  // stored levels (every step when they fit in max_levels)
  std::vector<Field> u;       // u at the stored levels
  std::vector<double> check_times;  // T/4, T/2, 3T/4, T
  std::vector<Field> rho;           // density at check_times (last sweep)
  std::vector<Field> coupling;      // F[rho(t)] at the stored levels (last sweep)
  FPDiagnostics fp;                 // diagnostics of the last FP sweep
  std::vector<MFGIteration> history;
  int iteration = 0;
  double theta = 0.5;
  double dt = 0.0;
  int steps = 0;
  std::string verdict;  // converged | no fixed point found at this T
  std::string message;

  bool converged() const { return verdict == "converged"; }
  nlohmann::json to_json() const;
};

using MFGObserver = std::function<void(const MFGState&)>;

// Damped Picard iteration from u(t) = u_T. Stops when residual_u <= tol_u and
// change_rho <= tol_rho, or after max_iterations; a CFL violation or a
// non-finite value also ends the run without a fixed point. The observer runs
// after every iteration.
MFGState mfg_picard(const DiscreteCalculus& calc, const GroupSpec& spec, const Field& u_T, const Field& rho0,
                    const Coupling& coupling, const MFGParams& params, const MFGObserver& observer = {});

// u on the reversed clock s = T - t, as a forward HJ trajectory with source
// F[rho(T - s)] and datum u_T.
Trajectory reversed_value(const MFGState& state);
HamiltonianSpec reversed_spec(const MFGState& state, const Field& u_T, double gamma);

struct MFGReport {
  nlohmann::json iterations;
  DualityReport duality;
  double duality_tolerance = 0.0;  // 5 (h + dt) scale
  bool duality_holds = false;
  double mass_error = 0.0;  // max_t |mass - 1|
  bool mass_holds = false;  // <= 1e-6
  InvariantReport fp_invariants;
  EnergyReport energy;
  bool nonnegative = false;  // min rho >= -1e-3 sup rho0
  SupBoundsReport sup_bounds;
  double coupling_sup = 0.0;
  double fixed_point_residual = 0.0;  // sup_t |T(u) - u| at the final state
  bool fixed_point_holds = false;     // <= 2 tol_u

  bool all_hold() const;
  nlohmann::json to_json() const;
};

// Audits of a finished state: duality on the final pair (u, rho) in reversed
// time, mass, FP invariants, sup bounds on u, and one more application of T.
MFGReport mfg_residual_report(const DiscreteCalculus& calc, const GroupSpec& spec, const MFGState& state,
                              const Field& u_T, const Field& rho0, const Coupling& coupling,
                              const MFGParams& params);

}  // namespace carnot
