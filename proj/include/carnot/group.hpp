#pragma once

// Homogeneous (Carnot) groups in exponential coordinates: group law from a
// polynomial coefficient table, dilations, the layer-wise homogeneous norm and
// the quasi-distance ||y^{-1} * x||.

#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "carnot/polynomial.hpp"

namespace carnot {

struct GroupElement {
  std::vector<double> coords;

  GroupElement() = default;
  explicit GroupElement(std::vector<double> c) : coords(std::move(c)) {}
  GroupElement(std::initializer_list<double> c) : coords(c) {}

  int dim() const { return static_cast<int>(coords.size()); }
  double operator[](int i) const { return coords[i]; }
  double& operator[](int i) { return coords[i]; }
  friend bool operator==(const GroupElement&, const GroupElement&) = default;
};

// One monomial of the law correction: (x*y)_target += coeff * x^x_pow * y^y_pow.
struct LawTerm {
  int target = 0;
  Rational coeff;
  Exponents x_pow;
  Exponents y_pow;
};

class GroupSpec {
 public:
  GroupSpec(std::string name, int horizontal_dim, std::vector<int> weights, std::vector<LawTerm> law);

  const std::string& name() const { return name_; }
  int dim() const { return static_cast<int>(weights_.size()); }
  int horizontal_dim() const { return m_; }
  int step() const { return step_; }
  const std::vector<int>& weights() const { return weights_; }
  const std::vector<LawTerm>& law() const { return law_; }
  // Q = sum_j j * dim V_j
  int homogeneous_dimension() const;
  // dim V_j for j = 1..step (index j-1)
  std::vector<int> layer_dims() const;

  // Law correction (x*y)_k - x_k - y_k as a polynomial in (x_1..x_d, y_1..y_d).
  Polynomial law_polynomial(int k) const;
  // ||x||^{2 k!} as an exact polynomial in x.
  Polynomial norm_power_polynomial() const;
  // 2 k!
  int norm_exponent() const { return norm_exponent_; }

  // Hot-path evaluation of the law correction (no allocation).
  void multiply_into(std::span<const double> x, std::span<const double> y, std::span<double> out) const;
  double hom_norm(std::span<const double> x) const;

 private:
  struct CompiledTerm {
    int target;
    double coeff;
    std::vector<std::pair<int, int>> x_factors;  // (index, power)
    std::vector<std::pair<int, int>> y_factors;
  };

  std::string name_;
  int m_;
  int step_;
  int norm_exponent_;
  std::vector<int> weights_;
  std::vector<LawTerm> law_;
  std::vector<CompiledTerm> compiled_;
};

GroupSpec heisenberg1();
// Engel group, step 3, weights (1,1,2,3). Shipped for the table format; H^1 is the tested reference.
GroupSpec engel();
GroupSpec group_preset(const std::string& name);

GroupElement identity(const GroupSpec& spec);
GroupElement multiply(const GroupSpec& spec, const GroupElement& x, const GroupElement& y);
GroupElement inverse(const GroupSpec& spec, const GroupElement& x);
GroupElement dilate(const GroupSpec& spec, double lambda, const GroupElement& x);
double hom_norm(const GroupSpec& spec, const GroupElement& x);
double quasi_distance(const GroupSpec& spec, const GroupElement& x, const GroupElement& y);

struct HomogeneousBoundReport {
  bool holds = true;
  double worst_ratio = 0.0;     // max |g(x)| / ||x||_G over the box sample
  double sphere_sup = 0.0;      // max |g| over the unit-sphere sample
  GroupElement worst_point;
  int samples = 0;
};

// Checks |g(x)| <= c ||x||_G for a degree-1 homogeneous g, first on a sample of
// the unit sphere, then on a random sample of [-box, box]^d.
HomogeneousBoundReport check_homogeneous_bound(const GroupSpec& spec,
                                               const std::function<double(const GroupElement&)>& g, double c,
                                               int samples = 4000, double box = 2.0, unsigned seed = 7);

nlohmann::json to_json(const GroupSpec& spec);
GroupSpec group_from_json(const nlohmann::json& j);

}  // namespace carnot
