#pragma once

// Horizontal vector fields: exact symbolic action on polynomials, and their
// centred finite-difference realisation on grids (gradient, divergence,
// sub-Laplacian).

#include <limits>
#include <vector>

#include "carnot/grid.hpp"
#include "carnot/group.hpp"
#include "carnot/polynomial.hpp"

namespace carnot {

enum class FieldKind { LeftInvariant, RightInvariant, Custom };

// A first-order operator sum_k a^k(x) d/dx_k with polynomial coefficients.
struct FirstOrderOperator {
  std::vector<Polynomial> coeffs;

  int dim() const { return static_cast<int>(coeffs.size()); }
  Polynomial apply(const Polynomial& f) const;
  Polynomial divergence() const;
  static FirstOrderOperator partial(int dim, int k);
};

// [A, B] as a first-order operator: [A,B]^k = A(b^k) - B(a^k).
FirstOrderOperator commutator(const FirstOrderOperator& a, const FirstOrderOperator& b);

struct VectorFieldSet {
  FieldKind kind = FieldKind::Custom;
  std::vector<FirstOrderOperator> fields;  // m fields, each with d coefficients

  int count() const { return static_cast<int>(fields.size()); }
  int dim() const { return fields.empty() ? 0 : fields.front().dim(); }
  const FirstOrderOperator& operator[](int i) const { return fields[i]; }
};

VectorFieldSet left_invariant_fields(const GroupSpec& spec);
VectorFieldSet right_invariant_fields(const GroupSpec& spec);

Polynomial apply_field_analytic(const VectorFieldSet& vf, int i, const Polynomial& f);
// Exact sum_i X_i X_i f.
Polynomial horizontal_laplacian_analytic(const VectorFieldSet& vf, const Polynomial& f);

// Coefficient tables of a field set evaluated on a grid, with the centred
// stencils built on top of them. A = sum_i a_i a_i^T and
// Delta_G = sum_kl A_kl d_k d_l + sum_k c_k d_k with c_k = sum_i X_i(a_i^k).
class DiscreteCalculus {
 public:
  DiscreteCalculus(GridPtr grid, const VectorFieldSet& vf);

  const GridSpec& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  int m() const { return m_; }
  int d() const { return d_; }

  // a_i^k at node n
  double coeff(int i, int k, std::size_t n) const { return a_[(n * m_ + i) * d_ + k]; }
  double diffusion(int k, int l, std::size_t n) const { return A_[(n * d_ + k) * d_ + l]; }
  double first_order(int k, std::size_t n) const { return c_[n * d_ + k]; }
  // A_kl evaluated at the face midpoint between node n and n + e_axis.
  double face_diffusion(int axis, int k, int l, std::size_t n) const {
    return Aface_[((axis * grid_->size() + n) * d_ + k) * d_ + l];
  }
  const VectorFieldSet& fields() const { return vf_; }

  // Euclidean partials: centred in the interior, second-order one-sided at the box boundary.
  double partial(const double* f, std::size_t n, int k, int stride = 1) const;
  double second_partial(const double* f, std::size_t n, int k) const;
  double mixed_partial(const double* f, std::size_t n, int k, int l) const;
  int axis_index(std::size_t n, int k) const {
    return static_cast<int>((n / grid_->stride(k)) % static_cast<std::size_t>(grid_->nodes()[k]));
  }

  Field gradient(const Field& f) const;
  Field laplacian(const Field& f) const;
  Field divergence(const Field& F) const;
  double laplacian_at(const Field& f, std::size_t n) const;

 private:
  GridPtr grid_;
  VectorFieldSet vf_;
  int m_, d_;
  std::vector<double> a_, A_, c_, Aface_;
};

Field horizontal_gradient(const VectorFieldSet& vf, const Field& f);
Field horizontal_laplacian(const VectorFieldSet& vf, const Field& f);
Field horizontal_divergence(const VectorFieldSet& vf, const Field& F);

// sup over node pairs within `window` index offsets of |f(x)-f(y)| / d(x,y)^alpha.
double holder_seminorm(const Field& f, double alpha, const GroupSpec& spec, int window = 2);

constexpr double kUnconstrained = std::numeric_limits<double>::infinity();

// Explicit-scheme step bound
//   dt <= safety / max_x (sum_k sigma A_kk/h_k^2 + sum_k |Bt_k|/h_k + sigma sum_{k!=l} |A_kl|/(2 h_k h_l)),
// with Bt = sum_i b_i a_i. `drift` may be null (b = 0). Returns kUnconstrained when the rate vanishes.
double max_stable_dt(const DiscreteCalculus& calc, double sigma, const Field* drift, double safety);

}  // namespace carnot
