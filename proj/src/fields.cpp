#include "carnot/fields.hpp"

#include <cmath>
#include <stdexcept>

namespace carnot {

Polynomial FirstOrderOperator::apply(const Polynomial& f) const {
  Polynomial out(f.nvars());
  for (int k = 0; k < dim(); ++k)
    if (!coeffs[k].is_zero()) out += coeffs[k] * f.derivative(k);
  return out;
}

Polynomial FirstOrderOperator::divergence() const {
  Polynomial out(dim());
  for (int k = 0; k < dim(); ++k) out += coeffs[k].derivative(k);
  return out;
}

FirstOrderOperator FirstOrderOperator::partial(int dim, int k) {
  FirstOrderOperator op;
  for (int j = 0; j < dim; ++j) op.coeffs.push_back(j == k ? Polynomial::constant(dim, 1) : Polynomial(dim));
  return op;
}

FirstOrderOperator commutator(const FirstOrderOperator& a, const FirstOrderOperator& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("commutator: dimension mismatch");
  FirstOrderOperator out;
  for (int k = 0; k < a.dim(); ++k) out.coeffs.push_back(a.apply(b.coeffs[k]) - b.apply(a.coeffs[k]));
  return out;
}

namespace {

// Substitute zeros for one half of the (x, y) variables of a law polynomial and
// return a polynomial in the remaining d variables.
Polynomial restrict_half(const Polynomial& p, int d, bool keep_x) {
  Polynomial out(d);
  for (const auto& [e, c] : p.terms()) {
    bool vanishes = false;
    Exponents kept(d);
    for (int i = 0; i < d; ++i) {
      const int dropped = keep_x ? e[d + i] : e[i];
      if (dropped > 0) vanishes = true;
      kept[i] = keep_x ? e[i] : e[d + i];
    }
    if (!vanishes) out += Polynomial::monomial(d, kept, c);
  }
  return out;
}

VectorFieldSet invariant_fields(const GroupSpec& spec, bool left) {
  const int d = spec.dim();
  VectorFieldSet vf;
  vf.kind = left ? FieldKind::LeftInvariant : FieldKind::RightInvariant;
  for (int i = 0; i < spec.horizontal_dim(); ++i) {
    FirstOrderOperator op;
    for (int k = 0; k < d; ++k) {
      Polynomial a = k == i ? Polynomial::constant(d, 1) : Polynomial(d);
      // left: d/dy_i (x*y)_k at y=0;  right: d/dx_i (x*y)_k at x=0, as a function of y
      const Polynomial law = spec.law_polynomial(k);
      const Polynomial dlaw = law.derivative(left ? d + i : i);
      a += restrict_half(dlaw, d, left);
      op.coeffs.push_back(a);
    }
    vf.fields.push_back(std::move(op));
  }
  return vf;
}

}  // namespace

VectorFieldSet left_invariant_fields(const GroupSpec& spec) { return invariant_fields(spec, true); }
VectorFieldSet right_invariant_fields(const GroupSpec& spec) { return invariant_fields(spec, false); }

Polynomial apply_field_analytic(const VectorFieldSet& vf, int i, const Polynomial& f) {
  if (i < 0 || i >= vf.count()) throw std::out_of_range("apply_field_analytic: field index");
  return vf[i].apply(f);
}

Polynomial horizontal_laplacian_analytic(const VectorFieldSet& vf, const Polynomial& f) {
  Polynomial out(f.nvars());
  for (const auto& X : vf.fields) out += X.apply(X.apply(f));
  return out;
}

DiscreteCalculus::DiscreteCalculus(GridPtr grid, const VectorFieldSet& vf)
    : grid_(std::move(grid)), vf_(vf), m_(vf.count()), d_(vf.dim()) {
  if (grid_->dim() != d_) throw std::invalid_argument("DiscreteCalculus: grid/field dimension mismatch");
  const std::size_t N = grid_->size();
  std::vector<CompiledPolynomial> a_poly, A_poly, c_poly;
  for (int i = 0; i < m_; ++i)
    for (int k = 0; k < d_; ++k) a_poly.emplace_back(vf[i].coeffs[k]);
  for (int k = 0; k < d_; ++k)
    for (int l = 0; l < d_; ++l) {
      Polynomial A(d_);
      for (int i = 0; i < m_; ++i) A += vf[i].coeffs[k] * vf[i].coeffs[l];
      A_poly.emplace_back(A);
    }
  for (int k = 0; k < d_; ++k) {
    Polynomial c(d_);
    for (int i = 0; i < m_; ++i) c += vf[i].apply(vf[i].coeffs[k]);
    c_poly.emplace_back(c);
  }
  a_.resize(N * m_ * d_);
  A_.resize(N * d_ * d_);
  c_.resize(N * d_);
  Aface_.resize(static_cast<std::size_t>(d_) * N * d_ * d_);
  std::vector<double> x(d_), xf(d_);
  for (std::size_t n = 0; n < N; ++n) {
    grid_->node_coords(n, x);
    for (int j = 0; j < m_ * d_; ++j) a_[n * m_ * d_ + j] = a_poly[j](x.data());
    for (int j = 0; j < d_ * d_; ++j) A_[n * d_ * d_ + j] = A_poly[j](x.data());
    for (int k = 0; k < d_; ++k) c_[n * d_ + k] = c_poly[k](x.data());
    for (int axis = 0; axis < d_; ++axis) {
      xf = x;
      xf[axis] += 0.5 * grid_->spacing(axis);
      for (int j = 0; j < d_ * d_; ++j) Aface_[(axis * N + n) * d_ * d_ + j] = A_poly[j](xf.data());
    }
  }
}

double DiscreteCalculus::partial(const double* f, std::size_t n, int k, int step) const {
  const int i = axis_index(n, k);
  const int N = grid_->nodes()[k];
  const std::size_t s = grid_->stride(k);
  const double h = grid_->spacing(k);
  auto F = [&](std::size_t node) { return f[node * step]; };
  if (i > 0 && i < N - 1) return (F(n + s) - F(n - s)) / (2.0 * h);
  if (i == 0) return (-3.0 * F(n) + 4.0 * F(n + s) - F(n + 2 * s)) / (2.0 * h);
  return (3.0 * F(n) - 4.0 * F(n - s) + F(n - 2 * s)) / (2.0 * h);
}

double DiscreteCalculus::second_partial(const double* f, std::size_t n, int k) const {
  const int i = axis_index(n, k);
  const int N = grid_->nodes()[k];
  const std::size_t s = grid_->stride(k);
  const double h2 = grid_->spacing(k) * grid_->spacing(k);
  if (i > 0 && i < N - 1) return (f[n + s] - 2.0 * f[n] + f[n - s]) / h2;
  const std::ptrdiff_t dir = i == 0 ? static_cast<std::ptrdiff_t>(s) : -static_cast<std::ptrdiff_t>(s);
  auto F = [&](int j) { return f[static_cast<std::ptrdiff_t>(n) + j * dir]; };
  if (N >= 4) return (2.0 * F(0) - 5.0 * F(1) + 4.0 * F(2) - F(3)) / h2;
  return (F(0) - 2.0 * F(1) + F(2)) / h2;
}

double DiscreteCalculus::mixed_partial(const double* f, std::size_t n, int k, int l) const {
  const int i = axis_index(n, l);
  const int N = grid_->nodes()[l];
  const std::size_t s = grid_->stride(l);
  const double h = grid_->spacing(l);
  if (i > 0 && i < N - 1) return (partial(f, n + s, k) - partial(f, n - s, k)) / (2.0 * h);
  if (i == 0) return (-3.0 * partial(f, n, k) + 4.0 * partial(f, n + s, k) - partial(f, n + 2 * s, k)) / (2.0 * h);
  return (3.0 * partial(f, n, k) - 4.0 * partial(f, n - s, k) + partial(f, n - 2 * s, k)) / (2.0 * h);
}

double DiscreteCalculus::laplacian_at(const Field& f, std::size_t n) const {
  const double* v = f.values.data();
  double s = 0.0;
  for (int k = 0; k < d_; ++k) {
    const double Akk = diffusion(k, k, n);
    if (Akk != 0.0) s += Akk * second_partial(v, n, k);
    const double ck = first_order(k, n);
    if (ck != 0.0) s += ck * partial(v, n, k);
    for (int l = k + 1; l < d_; ++l) {
      const double Akl = diffusion(k, l, n);
      if (Akl != 0.0) s += 2.0 * Akl * mixed_partial(v, n, k, l);
    }
  }
  return s;
}

Field DiscreteCalculus::gradient(const Field& f) const {
  if (f.components != 1) throw std::invalid_argument("gradient: scalar field expected");
  Field out(grid_, m_, f.time);
  std::vector<double> dk(d_);
  for (std::size_t n = 0; n < grid_->size(); ++n) {
    for (int k = 0; k < d_; ++k) dk[k] = partial(f.values.data(), n, k);
    for (int i = 0; i < m_; ++i) {
      double s = 0.0;
      for (int k = 0; k < d_; ++k) s += coeff(i, k, n) * dk[k];
      out.at(n, i) = s;
    }
  }
  return out;
}

Field DiscreteCalculus::laplacian(const Field& f) const {
  if (f.components != 1) throw std::invalid_argument("laplacian: scalar field expected");
  Field out(grid_, 1, f.time);
  for (std::size_t n = 0; n < grid_->size(); ++n) out.values[n] = laplacian_at(f, n);
  return out;
}

Field DiscreteCalculus::divergence(const Field& F) const {
  if (F.components != m_) throw std::invalid_argument("divergence: m-vector field expected");
  Field out(grid_, 1, F.time);
  for (std::size_t n = 0; n < grid_->size(); ++n) {
    double s = 0.0;
    for (int i = 0; i < m_; ++i)
      for (int k = 0; k < d_; ++k) {
        const double a = coeff(i, k, n);
        if (a != 0.0) s += a * partial(F.values.data() + i, n, k, m_);
      }
    out.values[n] = s;
  }
  return out;
}

Field horizontal_gradient(const VectorFieldSet& vf, const Field& f) { return DiscreteCalculus(f.grid, vf).gradient(f); }
Field horizontal_laplacian(const VectorFieldSet& vf, const Field& f) {
  return DiscreteCalculus(f.grid, vf).laplacian(f);
}
Field horizontal_divergence(const VectorFieldSet& vf, const Field& F) {
  return DiscreteCalculus(F.grid, vf).divergence(F);
}

double holder_seminorm(const Field& f, double alpha, const GroupSpec& spec, int window) {
  const auto& g = *f.grid;
  const int d = g.dim();
  std::vector<int> mi(d), mj(d), off(d, -window);
  std::vector<double> x(d), y(d), yinv(d), prod(d);
  // enumerate offsets in the positive half-space (each unordered pair once)
  std::vector<std::vector<int>> offsets;
  while (true) {
    bool positive = false;
    for (int a = d - 1; a >= 0; --a)
      if (off[a] != 0) {
        positive = off[a] > 0;
        break;
      }
    if (positive) offsets.push_back(off);
    int a = 0;
    while (a < d && ++off[a] > window) off[a++] = -window;
    if (a == d) break;
  }
  double best = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    g.index_to_multi(n, mi);
    g.node_coords(n, x);
    for (const auto& o : offsets) {
      bool ok = true;
      for (int a = 0; a < d; ++a) {
        mj[a] = mi[a] + o[a];
        if (mj[a] < 0 || mj[a] >= g.nodes()[a]) ok = false;
      }
      if (!ok) continue;
      const std::size_t m = g.multi_to_index(mj);
      const double diff = std::abs(f.values[n] - f.values[m]);
      if (diff == 0.0) continue;
      for (int a = 0; a < d; ++a) y[a] = g.coord(a, mj[a]);
      const GroupElement inv = inverse(spec, GroupElement(y));
      spec.multiply_into(inv.coords, x, prod);
      const double dist = spec.hom_norm(prod);
      best = std::max(best, diff / std::pow(dist, alpha));
    }
  }
  return best;
}

double max_stable_dt(const DiscreteCalculus& calc, double sigma, const Field* drift, double safety) {
  const auto& g = calc.grid();
  const int d = calc.d();
  const int m = calc.m();
  if (drift && drift->components != m) throw std::invalid_argument("max_stable_dt: drift must have m components");
  double worst = 0.0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    double rate = 0.0;
    for (int k = 0; k < d; ++k) {
      const double hk = g.spacing(k);
      rate += sigma * calc.diffusion(k, k, n) / (hk * hk);
      if (drift) {
        double Bk = 0.0;
        for (int i = 0; i < m; ++i) Bk += drift->at(n, i) * calc.coeff(i, k, n);
        rate += std::abs(Bk) / hk;
      }
      for (int l = 0; l < d; ++l)
        if (l != k) rate += sigma * std::abs(calc.diffusion(k, l, n)) / (2.0 * hk * g.spacing(l));
    }
    worst = std::max(worst, rate);
  }
  if (worst == 0.0) return kUnconstrained;
  return safety / worst;
}

}  // namespace carnot
