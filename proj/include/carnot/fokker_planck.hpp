#pragma once

// Conservative finite-volume solver for
//   d_t rho = sigma Delta_G rho + div_G(b rho)   on B_R,  rho = 0 outside,
// with energy, mass and R-monotonicity diagnostics and the weak-form residual.

#include <functional>
#include <optional>
#include <vector>

#include "carnot/fields.hpp"
#include "json.hpp"

namespace carnot {

// Horizontal drift b(t, x) as an m-vector field. Either identically zero, a
// spatially constant vector, or a sequence of node samples interpolated
// linearly in time (held constant beyond the end samples).
class DriftField {
 public:
  static DriftField zero(int m);
  static DriftField constant(std::vector<double> b);
  static DriftField samples(std::vector<double> times, std::vector<Field> fields);

  int components() const { return m_; }
  bool is_zero() const { return kind_ == Kind::Zero; }
  bool is_constant() const { return kind_ != Kind::Samples; }
  const std::vector<double>& constant_value() const { return value_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<Field>& fields() const { return fields_; }

  // Fills out (m components on grid g) with b(t, .).
  void eval(double t, const GridPtr& g, Field& out) const;
  // b(t, x) at an arbitrary point (multilinear in space for sampled drifts).
  void eval_at(double t, std::span<const double> x, std::span<double> out) const;
  // sup over t and x of |b|.
  double sup_norm() const;

 private:
  enum class Kind { Zero, Constant, Samples };
  Kind kind_ = Kind::Zero;
  int m_ = 0;
  std::vector<double> value_;
  std::vector<double> times_;
  std::vector<Field> fields_;
  double sup_ = 0.0;
  // index of the left sample and interpolation weight of the right one
  std::pair<std::size_t, double> bracket(double t) const;
};

// gamma |grad_G u|^{gamma-2} grad_G u with the centred gradient.
Field value_drift(const DiscreteCalculus& calc, const Field& u, double gamma);

// Stable step for sigma and a drift bounded by drift_sup (|B~_k| <= |b| |a^k|).
double fp_dt(const DiscreteCalculus& calc, double sigma, double drift_sup, double safety);

// One explicit step. b is an m-vector field at the current time (null: b = 0).
// Throws std::domain_error on a CFL violation and std::runtime_error on NaN.
void fp_step_into(const DiscreteCalculus& calc, const Field& rho, const Field* b, double sigma, double dt,
                  const BallMask& mask, Field& out);
Field fp_step(const DiscreteCalculus& calc, const Field& rho, const Field* b, double sigma, double dt,
              const BallMask& mask);

struct FPOptions {
  double sigma = 0.25;
  double horizon = 0.5;
  double dt = 0.0;  // 0: fp_dt with cfl_safety and the drift bound
  double cfl_safety = 0.5;
  std::vector<double> output_times;  // snapped to the step grid; horizon is always stored
  bool store_every_step = false;
};

struct FPDiagnostics {
  std::vector<double> times;  // every step, starting at 0
  std::vector<double> mass, sup, min, l2_squared, boundary_mass;
  std::vector<double> dissipation;  // cumulative int_0^t int |grad_G rho|^2 (trapezoid)
  double initial_sup = 0.0;
  double initial_l2_squared = 0.0;
  double drift_sup = 0.0;
  std::optional<double> contact_time;  // first time boundary-layer mass exceeds 1e-10

  nlohmann::json to_json() const;
};

struct FPResult {
  double dt = 0.0;
  int steps = 0;
  std::vector<double> times;
  std::vector<Field> states;
  FPDiagnostics diag;
};

using StepObserver = std::function<void(int step, double t, const Field& rho)>;

FPResult fp_solve(const DiscreteCalculus& calc, const Field& rho0, const DriftField& b, const BallMask& mask,
                  const FPOptions& opt, const StepObserver& observer = {});

struct EnergyReport {
  double K = 0.0;       // exp(|b|^2 T / (2 sigma)) (1 + 1e-2)
  double K_grad = 0.0;  // (2/sigma)(1 + T exp(|b|^2 T / (2 sigma))) (1 + 1e-2)
  double max_l2_ratio = 0.0;        // sup_t int rho^2 / int rho0^2
  double dissipation_ratio = 0.0;   // int int |grad rho|^2 / int rho0^2
  bool l2_holds = false;
  bool gradient_holds = false;

  nlohmann::json to_json() const;
};

EnergyReport energy_check(const FPDiagnostics& diag, double sigma, double T);

struct InvariantReport {
  double mass_error = 0.0;  // max |mass - mass0| over steps before contact
  double sup_ratio = 0.0;   // max_t sup rho / sup rho0
  double min_ratio = 0.0;   // min_t min rho / sup rho0
  bool contact = false;

  nlohmann::json to_json() const;
};

InvariantReport fp_invariants(const FPDiagnostics& diag);

// Runs the same problem on B_{R1} and B_{R2} (R1 < R2) and returns the minimum
// over nodes and stored times of rho_{R2} - rho_{R1}.
double r_monotonicity(const DiscreteCalculus& calc, const GroupSpec& spec, const Field& rho0, const DriftField& b,
                      const FPOptions& opt, double R1, double R2);

// Discrete form of
//   int rho(t) phi(t) - int rho0 phi(0) + int_0^t int grad phi . (sigma grad rho + b rho)
//     - int_0^t int d_t phi rho = 0,
// accumulated one time level at a time (trapezoid in time, centred gradients).
class WeakFormAccumulator {
 public:
  WeakFormAccumulator(const DiscreteCalculus& calc, double sigma);
  // b may be null (b = 0).
  void observe(double t, const Field& rho, const Field& phi, const Field* b);
  double signed_residual() const;
  double residual() const { return std::abs(signed_residual()); }
  double flux_integral() const { return flux_; }
  double time_derivative_integral() const { return dtphi_; }

 private:
  const DiscreteCalculus& calc_;
  double sigma_;
  bool started_ = false;
  double t_prev_ = 0.0;
  double initial_ = 0.0;
  double current_ = 0.0;
  double flux_ = 0.0;
  double dtphi_ = 0.0;
  double g_prev_ = 0.0;
  Field rho_prev_, phi_prev_;
  double flux_density(const Field& rho, const Field& phi, const Field* b) const;
};

// Residual of a stored trajectory against test fields phi(t) at the same times.
double weak_form_residual(const DiscreteCalculus& calc, const std::vector<double>& times,
                          const std::vector<Field>& rho, const std::vector<Field>& phi, const DriftField& b,
                          double sigma);

}  // namespace carnot
