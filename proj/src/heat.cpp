#include "carnot/heat.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace carnot {

std::size_t nearest_interior(const GridSpec& g, std::size_t n) {
  std::size_t out = 0, rest = n;
  for (int a = 0; a < g.dim(); ++a) {
    const int N = g.nodes()[a];
    const int i = std::clamp(static_cast<int>(rest % N), 1, N - 2);
    rest /= N;
    out += g.stride(a) * static_cast<std::size_t>(i);
  }
  return out;
}

double heat_dt(const DiscreteCalculus& calc, double sigma, double safety) {
  return max_stable_dt(calc, sigma, nullptr, safety);
}

void heat_step_into(const DiscreteCalculus& calc, const Field& f, double sigma, double dt, Field& out) {
  if (f.components != 1) throw std::invalid_argument("heat_step: scalar field expected");
  if (dt < 0.0) throw std::domain_error("heat_step: negative dt");
  const double limit = max_stable_dt(calc, sigma, nullptr, 1.0);
  if (dt > limit * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "heat_step: dt=" << dt << " exceeds the stable bound " << limit << " (sigma=" << sigma << ")";
    throw std::domain_error(msg.str());
  }
  const auto& g = calc.grid();
  out.grid = f.grid;
  out.components = 1;
  out.values.resize(g.size());
  out.time = f.time + dt;
  for (std::size_t n = 0; n < g.size(); ++n)
    if (!g.on_boundary(n)) out.values[n] = f.values[n] + dt * sigma * calc.laplacian_at(f, n);
  for (std::size_t n = 0; n < g.size(); ++n)
    if (g.on_boundary(n)) out.values[n] = out.values[nearest_interior(g, n)];
}

Field heat_step(const DiscreteCalculus& calc, const Field& f, double sigma, double dt) {
  Field out(f.grid, 1, f.time);
  heat_step_into(calc, f, sigma, dt, out);
  return out;
}

int step_count(double t, double dt) {
  if (t <= 0.0) return 0;
  const double q = t / dt;
  const double r = std::round(q);
  if (std::abs(q - r) <= 1e-9 * std::max(1.0, q)) return static_cast<int>(r);
  return static_cast<int>(std::ceil(q));
}

Field evolve(const DiscreteCalculus& calc, const Field& f, double sigma, double t, double dt) {
  if (t < 0.0) throw std::domain_error("evolve: negative time");
  if (dt == 0.0) dt = heat_dt(calc, sigma);
  const int steps = step_count(t, dt);
  Field cur = f, next(f.grid, 1, f.time);
  const double t_end = f.time + t;
  for (int s = 0; s < steps; ++s) {
    const double h = s + 1 == steps ? std::min(dt, t - s * dt) : dt;
    heat_step_into(calc, cur, sigma, h, next);
    std::swap(cur, next);
  }
  cur.time = t_end;
  return cur;
}

std::vector<double> log_spaced_times(double t0, double t1, int count) {
  if (!(t0 > 0.0 && t1 > t0) || count < 2) throw std::invalid_argument("log_spaced_times: need 0 < t0 < t1, count >= 2");
  std::vector<double> out(count);
  const double a = std::log(t0), b = std::log(t1);
  for (int i = 0; i < count; ++i) out[i] = std::exp(a + (b - a) * i / (count - 1));
  out.back() = t1;
  return out;
}

double vector_sup_norm(const Field& F) {
  double best = 0.0;
  for (std::size_t n = 0; n < F.grid->size(); ++n) {
    double s = 0.0;
    for (int c = 0; c < F.components; ++c) s += F.at(n, c) * F.at(n, c);
    best = std::max(best, s);
  }
  return std::sqrt(best);
}

DecayReport measure_gradient_decay(const DiscreteCalculus& calc, const Field& phi, double sigma,
                                   const std::vector<double>& times, double dt) {
  if (times.empty()) throw std::invalid_argument("measure_gradient_decay: no times");
  if (dt == 0.0) dt = heat_dt(calc, sigma);
  DecayReport rep;
  rep.dt = dt;
  rep.initial_norm = vector_sup_norm(calc.gradient(phi));
  Field cur = phi;
  double t = 0.0;
  for (double target : times) {
    if (!(target > t)) throw std::invalid_argument("measure_gradient_decay: times must increase from 0");
    cur = evolve(calc, cur, sigma, target - t, dt);
    t = target;
    rep.times.push_back(t);
    rep.norms.push_back(vector_sup_norm(calc.gradient(cur)));
  }
  const double scale = phi.sup_norm();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(rep.times.size());
  for (std::size_t i = 0; i < rep.times.size(); ++i) {
    const double x = std::log(rep.times[i]);
    const double y = std::log(std::max(rep.norms[i], 1e-300) / (scale > 0 ? scale : 1.0));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (denom > 0) {
    rep.slope = (n * sxy - sx * sy) / denom;
    rep.constant = std::exp((sy - rep.slope * sx) / n);
  }
  return rep;
}

nlohmann::json DecayReport::to_json() const {
  return {{"times", times}, {"norms", norms}, {"initial_norm", initial_norm},
          {"slope", slope}, {"constant", constant}, {"dt", dt}};
}

}  // namespace carnot
