#pragma once

// Group mollifier xi(x) = exp(1 / (||x||^{2k!} - 1)) on the unit ball and its
// rescaling xi^eps(x) = (C / eps^Q) xi(delta_{1/eps} x).
//
// On a grid the convolution uses the kernel K(x, y) = xi(delta_{1/eps}(x^{-1} y)),
// which vanishes unless ||x^{-1} y|| < eps and is symmetric in (x, y). The
// kernel is balanced symmetrically, D K D with every row and column summing to
// one, so that mollification preserves mass exactly, never exceeds the input
// sup norm, and moves a 1-Lipschitz function by at most eps.

#include <cstdint>
#include <vector>

#include "carnot/grid.hpp"

namespace carnot {

struct MollifierSpec {
  double eps = 0.4;
  double C = 0.0;  // 1 / int xi, filled by make_mollifier
  int step = 1;

  void validate() const;
};

MollifierSpec make_mollifier(const GroupSpec& spec, double eps);

// Unscaled profile xi.
double mollifier_profile(const GroupSpec& spec, std::span<const double> x);
// xi^eps and X_j xi^eps, analytic.
double mollifier_value(const GroupSpec& spec, const MollifierSpec& m, std::span<const double> x);
void mollifier_gradient(const GroupSpec& spec, const MollifierSpec& m, std::span<const double> x,
                        std::span<double> out);

// Balanced kernel on one grid; build once, apply many times.
class Mollifier {
 public:
  // Requires eps >= 3 max h.
  Mollifier(GridPtr grid, const MollifierSpec& m, const GroupSpec& spec);

  Field apply(const Field& rho) const;
  const MollifierSpec& spec() const { return m_; }
  const GridPtr& grid() const { return grid_; }
  // Balancing factors D (diagnostic) and the worst row-sum defect after balancing.
  const std::vector<double>& scaling() const { return d_; }
  double balance_error() const { return balance_error_; }
  int balance_iterations() const { return iterations_; }

 private:
  GridPtr grid_;
  MollifierSpec m_;
  std::vector<std::size_t> start_;  // CSR rows
  std::vector<std::uint32_t> col_;
  std::vector<double> val_;  // K(x, y) h^d
  std::vector<double> d_;
  double balance_error_ = 0.0;
  int iterations_ = 0;
};

Field mollify(const Field& rho, const MollifierSpec& m, const GroupSpec& spec);

}  // namespace carnot
