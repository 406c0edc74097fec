#include "carnot/mollifier.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "carnot/fields.hpp"

namespace carnot {

namespace {

struct Profile {
  CompiledPolynomial P;
  std::vector<CompiledPolynomial> XP;

  explicit Profile(const GroupSpec& spec) : P(spec.norm_power_polynomial()) {
    const auto X = left_invariant_fields(spec);
    const Polynomial p = spec.norm_power_polynomial();
    for (int i = 0; i < spec.horizontal_dim(); ++i) XP.emplace_back(X[i].apply(p));
  }
};

const Profile& profile(const GroupSpec& spec) {
  thread_local std::string name;
  thread_local std::unique_ptr<Profile> cached;
  if (!cached || name != spec.name()) {
    cached = std::make_unique<Profile>(spec);
    name = spec.name();
  }
  return *cached;
}

double xi(double P) { return P < 1.0 ? std::exp(1.0 / (P - 1.0)) : 0.0; }

// Uniform cell-centred nodes of [-1,1]^d, visited as points u.
template <class Fn>
void for_each_cube_node(int d, int n, Fn&& fn) {
  std::vector<int> idx(d, 0);
  std::vector<double> u(d);
  while (true) {
    for (int k = 0; k < d; ++k) u[k] = -1.0 + (idx[k] + 0.5) * 2.0 / n;
    fn(std::span<const double>(u));
    int k = 0;
    while (k < d && ++idx[k] == n) idx[k++] = 0;
    if (k == d) break;
  }
}

std::vector<double> scaled(const GroupSpec& spec, double lambda, std::span<const double> x) {
  std::vector<double> u(x.begin(), x.end());
  for (int k = 0; k < spec.dim(); ++k) u[k] *= std::pow(lambda, spec.weights()[k]);
  return u;
}

}  // namespace

void MollifierSpec::validate() const {
  if (!(eps > 0.0)) throw std::domain_error("mollifier: eps must be positive");
  if (!(C > 0.0)) throw std::domain_error("mollifier: normalization not set (use make_mollifier)");
}

MollifierSpec make_mollifier(const GroupSpec& spec, double eps) {
  MollifierSpec m;
  m.eps = eps;
  m.step = spec.step();
  const auto& pr = profile(spec);
  const int d = spec.dim();
  const int n = d <= 3 ? 161 : 41;
  double s = 0.0;
  for_each_cube_node(d, n, [&](std::span<const double> u) { s += xi(pr.P(u)); });
  s *= std::pow(2.0 / n, d);
  m.C = 1.0 / s;
  m.validate();
  return m;
}

double mollifier_profile(const GroupSpec& spec, std::span<const double> x) { return xi(profile(spec).P(x)); }

double mollifier_value(const GroupSpec& spec, const MollifierSpec& m, std::span<const double> x) {
  const auto u = scaled(spec, 1.0 / m.eps, x);
  return m.C / std::pow(m.eps, spec.homogeneous_dimension()) * xi(profile(spec).P(u));
}

void mollifier_gradient(const GroupSpec& spec, const MollifierSpec& m, std::span<const double> x,
                        std::span<double> out) {
  const auto& pr = profile(spec);
  const auto u = scaled(spec, 1.0 / m.eps, x);
  const double P = pr.P(u);
  const double scale = m.C / std::pow(m.eps, spec.homogeneous_dimension() + 1);
  for (int j = 0; j < spec.horizontal_dim(); ++j) {
    // X_j is homogeneous of degree 1, and X_j xi = -xi X_j P / (P - 1)^2
    out[j] = P < 1.0 ? -scale * xi(P) * pr.XP[j](u) / ((P - 1.0) * (P - 1.0)) : 0.0;
  }
}

Mollifier::Mollifier(GridPtr grid, const MollifierSpec& m, const GroupSpec& spec) : grid_(std::move(grid)), m_(m) {
  m_.validate();
  const auto& g = *grid_;
  const int d = g.dim();
  if (d != spec.dim()) throw std::invalid_argument("Mollifier: grid/group dimension mismatch");
  if (g.size() > std::numeric_limits<std::uint32_t>::max()) throw std::invalid_argument("Mollifier: grid too large");
  double hmax = 0.0;
  for (int k = 0; k < d; ++k) hmax = std::max(hmax, g.spacing(k));
  if (m_.eps < 3.0 * hmax) throw std::domain_error("Mollifier: eps must be at least 3h");

  const auto& pr = profile(spec);
  // Coordinates in order of increasing weight. The law correction of a
  // coordinate only involves lower weights, so once those of y are fixed,
  // (x^{-1} y)_k = y_k - x_k + c_k with c_k known, and |(x^{-1} y)_k| < eps^{w_k}
  // confines y_k to a window of width 2 eps^{w_k}.
  std::vector<int> order(d);
  for (int k = 0; k < d; ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return spec.weights()[i] < spec.weights()[j]; });
  std::vector<double> inv_scale(d), reach(d);
  for (int k = 0; k < d; ++k) {
    inv_scale[k] = std::pow(1.0 / m_.eps, spec.weights()[k]);
    reach[k] = std::pow(m_.eps, spec.weights()[k]);
  }

  const double hd = g.cell_volume();
  std::vector<double> x(d), y(d), xinv(d), w(d), u(d);
  std::vector<int> iy(d), hi(d);
  start_.assign(1, 0);
  for (std::size_t n = 0; n < g.size(); ++n) {
    g.node_coords(n, x);
    xinv = inverse(spec, GroupElement(x)).coords;
    // Sets the window of order[p] given the coordinates before it; false if empty.
    auto open = [&](int p) {
      const int k = order[p];
      for (int q = p; q < d; ++q) y[order[q]] = x[order[q]];
      spec.multiply_into(xinv, y, w);
      const double c = w[k];  // (x^{-1} y)_k with y_k = x_k
      const double h = g.spacing(k), base = g.coord(k, 0);
      const int lo = std::max(0, static_cast<int>(std::ceil((x[k] - c - reach[k] - base) / h)));
      hi[k] = std::min(g.nodes()[k] - 1, static_cast<int>(std::floor((x[k] - c + reach[k] - base) / h)));
      iy[k] = lo;
      if (lo > hi[k]) return false;
      y[k] = g.coord(k, lo);
      return true;
    };
    int p = 0;
    bool ok = open(0);
    while (true) {
      if (ok && p < d - 1) {
        ++p;
        ok = open(p);
        continue;
      }
      if (ok) {
        spec.multiply_into(xinv, y, w);
        for (int k = 0; k < d; ++k) u[k] = w[k] * inv_scale[k];
        const double v = xi(pr.P(u));
        if (v > 0.0) {
          col_.push_back(static_cast<std::uint32_t>(g.multi_to_index(iy)));
          val_.push_back(v * hd);
        }
      }
      // advance the deepest open coordinate, backing up when exhausted
      while (p >= 0) {
        const int k = order[p];
        if (ok && iy[k] < hi[k]) {
          ++iy[k];
          y[k] = g.coord(k, iy[k]);
          break;
        }
        --p;
        ok = true;
      }
      if (p < 0) break;
    }
    start_.push_back(col_.size());
  }

  // Symmetric balancing: d <- sqrt(d / (K d)) until d (K d) = 1.
  const std::size_t N = g.size();
  d_.assign(N, 1.0);
  std::vector<double> Kd(N);
  for (iterations_ = 0; iterations_ < 1000; ++iterations_) {
    balance_error_ = 0.0;
    for (std::size_t r = 0; r < N; ++r) {
      double s = 0.0;
      for (std::size_t j = start_[r]; j < start_[r + 1]; ++j) s += val_[j] * d_[col_[j]];
      Kd[r] = s;
      balance_error_ = std::max(balance_error_, std::abs(d_[r] * s - 1.0));
    }
    if (balance_error_ <= 1e-14) break;
    for (std::size_t r = 0; r < N; ++r) d_[r] = std::sqrt(d_[r] / Kd[r]);
  }
}

Field Mollifier::apply(const Field& rho) const {
  if (!(*rho.grid == *grid_)) throw std::invalid_argument("Mollifier::apply: grid mismatch");
  if (rho.components != 1) throw std::invalid_argument("Mollifier::apply: scalar field expected");
  const std::size_t N = grid_->size();
  std::vector<double> dr(N);
  for (std::size_t r = 0; r < N; ++r) dr[r] = d_[r] * rho.values[r];
  Field out(rho.grid, 1, rho.time);
  for (std::size_t r = 0; r < N; ++r) {
    double s = 0.0;
    for (std::size_t j = start_[r]; j < start_[r + 1]; ++j) s += val_[j] * dr[col_[j]];
    out.values[r] = d_[r] * s;
  }
  return out;
}

Field mollify(const Field& rho, const MollifierSpec& m, const GroupSpec& spec) {
  return Mollifier(rho.grid, m, spec).apply(rho);
}

}  // namespace carnot
