#pragma once

// Explicit Euler realisation of the horizontal heat flow e^{t sigma Delta_G}.

#include <vector>

#include "carnot/fields.hpp"
#include "json.hpp"

namespace carnot {

// f + dt sigma Delta_G f at interior nodes; box-boundary nodes copy their
// nearest interior neighbour. Throws std::domain_error when dt exceeds the
// stable step for (calc, sigma).
Field heat_step(const DiscreteCalculus& calc, const Field& f, double sigma, double dt);
void heat_step_into(const DiscreteCalculus& calc, const Field& f, double sigma, double dt, Field& out);

// Node index obtained by clamping every axis index into [1, n - 2].
std::size_t nearest_interior(const GridSpec& g, std::size_t n);

// Largest stable step times `safety`.
double heat_dt(const DiscreteCalculus& calc, double sigma, double safety = 0.5);

// Number of steps of size dt that reach t (the last step is shortened when t
// is not a multiple of dt).
int step_count(double t, double dt);

// Evolves f by `t` with steps of size dt (dt = 0 selects heat_dt).
Field evolve(const DiscreteCalculus& calc, const Field& f, double sigma, double t, double dt = 0.0);

struct DecayReport {
  std::vector<double> times;
  std::vector<double> norms;  // sup_x |grad_G e^{t Delta} phi|
  double initial_norm = 0.0;
  double slope = 0.0;         // least-squares slope of log norm vs log t
  double constant = 0.0;      // exp(intercept): empirical c(T) for ||phi||_inf = 1
  double dt = 0.0;

  nlohmann::json to_json() const;
};

// `count` times logarithmically spaced in [t0, t1].
std::vector<double> log_spaced_times(double t0, double t1, int count);

// Gradient norms along the flow at increasing `times` (one pass, sampling as
// each time is reached) and their power-law fit. The constant is reported
// relative to ||phi||_inf.
DecayReport measure_gradient_decay(const DiscreteCalculus& calc, const Field& phi, double sigma,
                                   const std::vector<double>& times, double dt = 0.0);

// sup over nodes of the Euclidean norm of an m-vector field.
double vector_sup_norm(const Field& F);

}  // namespace carnot
