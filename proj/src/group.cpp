#include "carnot/group.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace carnot {

namespace {

int factorial(int n) { return n <= 1 ? 1 : n * factorial(n - 1); }

void require_dim(const GroupSpec& spec, const GroupElement& x) {
  if (x.dim() != spec.dim())
    throw std::invalid_argument("group element of dimension " + std::to_string(x.dim()) + " used with " +
                                spec.name() + " (dimension " + std::to_string(spec.dim()) + ")");
}

LawTerm term(int target, Rational c, Exponents xp, Exponents yp) {
  return LawTerm{target, c, std::move(xp), std::move(yp)};
}

}  // namespace

GroupSpec::GroupSpec(std::string name, int horizontal_dim, std::vector<int> weights, std::vector<LawTerm> law)
    : name_(std::move(name)), m_(horizontal_dim), weights_(std::move(weights)), law_(std::move(law)) {
  const int d = dim();
  if (d == 0 || m_ <= 0 || m_ > d) throw std::invalid_argument("GroupSpec: bad dimensions");
  if (!std::is_sorted(weights_.begin(), weights_.end()) || weights_.front() != 1)
    throw std::invalid_argument("GroupSpec: weights must be non-decreasing and start at 1");
  if (std::count(weights_.begin(), weights_.end(), 1) != m_)
    throw std::invalid_argument("GroupSpec: horizontal_dim must equal the number of weight-1 coordinates");
  step_ = weights_.back();
  for (int j = 1; j <= step_; ++j)
    if (std::find(weights_.begin(), weights_.end(), j) == weights_.end())
      throw std::invalid_argument("GroupSpec: layer " + std::to_string(j) + " is empty");
  norm_exponent_ = 2 * factorial(step_);

  for (const auto& t : law_) {
    if (t.target < 0 || t.target >= d || static_cast<int>(t.x_pow.size()) != d ||
        static_cast<int>(t.y_pow.size()) != d)
      throw std::invalid_argument("GroupSpec: malformed law term");
    int deg = 0;
    CompiledTerm c{t.target, t.coeff.to_double(), {}, {}};
    for (int i = 0; i < d; ++i) {
      if (t.x_pow[i] > 0 || t.y_pow[i] > 0) {
        if (weights_[i] >= weights_[t.target])
          throw std::invalid_argument("GroupSpec: law term for coordinate " + std::to_string(t.target + 1) +
                                      " depends on a coordinate of equal or higher weight");
      }
      deg += (t.x_pow[i] + t.y_pow[i]) * weights_[i];
      if (t.x_pow[i] > 0) c.x_factors.emplace_back(i, t.x_pow[i]);
      if (t.y_pow[i] > 0) c.y_factors.emplace_back(i, t.y_pow[i]);
    }
    if (deg != weights_[t.target])
      throw std::invalid_argument("GroupSpec: law term is not homogeneous of the target weight");
    compiled_.push_back(std::move(c));
  }
}

int GroupSpec::homogeneous_dimension() const { return std::accumulate(weights_.begin(), weights_.end(), 0); }

std::vector<int> GroupSpec::layer_dims() const {
  std::vector<int> dims(step_, 0);
  for (int w : weights_) dims[w - 1] += 1;
  return dims;
}

Polynomial GroupSpec::law_polynomial(int k) const {
  const int d = dim();
  Polynomial p(2 * d);
  for (const auto& t : law_) {
    if (t.target != k) continue;
    Exponents e(2 * d, 0);
    for (int i = 0; i < d; ++i) {
      e[i] = t.x_pow[i];
      e[d + i] = t.y_pow[i];
    }
    p += Polynomial::monomial(2 * d, e, t.coeff);
  }
  return p;
}

Polynomial GroupSpec::norm_power_polynomial() const {
  const int d = dim();
  const int kfact = norm_exponent_ / 2;
  Polynomial total(d);
  for (int j = 1; j <= step_; ++j) {
    Polynomial sq(d);
    for (int i = 0; i < d; ++i)
      if (weights_[i] == j) sq += Polynomial::variable(d, i) * Polynomial::variable(d, i);
    total += pow(sq, kfact / j);
  }
  return total;
}

void GroupSpec::multiply_into(std::span<const double> x, std::span<const double> y, std::span<double> out) const {
  const int d = dim();
  for (int i = 0; i < d; ++i) out[i] = x[i] + y[i];
  for (const auto& t : compiled_) {
    double v = t.coeff;
    for (auto [i, p] : t.x_factors)
      for (int k = 0; k < p; ++k) v *= x[i];
    for (auto [i, p] : t.y_factors)
      for (int k = 0; k < p; ++k) v *= y[i];
    out[t.target] += v;
  }
}

double GroupSpec::hom_norm(std::span<const double> x) const {
  const int kfact = norm_exponent_ / 2;
  double layer_sq[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  for (int i = 0; i < dim(); ++i) layer_sq[weights_[i] - 1] += x[i] * x[i];
  double total = 0.0;
  for (int j = 1; j <= step_; ++j) {
    const int p = kfact / j;
    double v = 1.0;
    for (int k = 0; k < p; ++k) v *= layer_sq[j - 1];
    total += v;
  }
  return std::pow(total, 1.0 / norm_exponent_);
}

GroupSpec heisenberg1() {
  // (x*y)_3 = x_3 + y_3 + (x_1 y_2 - x_2 y_1) / 2
  return GroupSpec("heisenberg1", 2, {1, 1, 2},
                   {term(2, Rational(1, 2), {1, 0, 0}, {0, 1, 0}), term(2, Rational(-1, 2), {0, 1, 0}, {1, 0, 0})});
}

GroupSpec engel() {
  // BCH truncated at order 3 with [X1,X2]=X3, [X1,X3]=X4.
  return GroupSpec("engel", 2, {1, 1, 2, 3},
                   {
                       term(2, Rational(1, 2), {1, 0, 0, 0}, {0, 1, 0, 0}),
                       term(2, Rational(-1, 2), {0, 1, 0, 0}, {1, 0, 0, 0}),
                       term(3, Rational(1, 2), {1, 0, 0, 0}, {0, 0, 1, 0}),
                       term(3, Rational(-1, 2), {0, 0, 1, 0}, {1, 0, 0, 0}),
                       term(3, Rational(1, 12), {2, 0, 0, 0}, {0, 1, 0, 0}),
                       term(3, Rational(-1, 12), {1, 1, 0, 0}, {1, 0, 0, 0}),
                       term(3, Rational(-1, 12), {1, 0, 0, 0}, {1, 1, 0, 0}),
                       term(3, Rational(1, 12), {0, 1, 0, 0}, {2, 0, 0, 0}),
                   });
}

GroupSpec group_preset(const std::string& name) {
  if (name == "heisenberg1") return heisenberg1();
  if (name == "engel") return engel();
  throw std::invalid_argument("unknown group preset '" + name + "'");
}

GroupElement identity(const GroupSpec& spec) { return GroupElement(std::vector<double>(spec.dim(), 0.0)); }

GroupElement multiply(const GroupSpec& spec, const GroupElement& x, const GroupElement& y) {
  require_dim(spec, x);
  require_dim(spec, y);
  GroupElement out(std::vector<double>(spec.dim()));
  spec.multiply_into(x.coords, y.coords, out.coords);
  return out;
}

GroupElement inverse(const GroupSpec& spec, const GroupElement& x) {
  require_dim(spec, x);
  const int d = spec.dim();
  // Solve x * z = 0 layer by layer: z_k = -x_k - correction_k(x, z), where the
  // correction only involves lower-weight coordinates of z.
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return spec.weights()[a] < spec.weights()[b]; });
  GroupElement z(std::vector<double>(d, 0.0));
  std::vector<double> prod(d);
  for (int k : order) {
    z[k] = 0.0;
    spec.multiply_into(x.coords, z.coords, prod);
    z[k] = -prod[k];
  }
  return z;
}

GroupElement dilate(const GroupSpec& spec, double lambda, const GroupElement& x) {
  require_dim(spec, x);
  if (!(lambda > 0.0)) throw std::domain_error("dilate: lambda must be positive");
  GroupElement out = x;
  for (int i = 0; i < spec.dim(); ++i) out[i] *= std::pow(lambda, spec.weights()[i]);
  return out;
}

double hom_norm(const GroupSpec& spec, const GroupElement& x) {
  require_dim(spec, x);
  return spec.hom_norm(x.coords);
}

double quasi_distance(const GroupSpec& spec, const GroupElement& x, const GroupElement& y) {
  return hom_norm(spec, multiply(spec, inverse(spec, y), x));
}

HomogeneousBoundReport check_homogeneous_bound(const GroupSpec& spec,
                                               const std::function<double(const GroupElement&)>& g, double c,
                                               int samples, double box, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(-box, box);
  HomogeneousBoundReport rep;
  rep.samples = samples;
  const int d = spec.dim();
  for (int s = 0; s < samples; ++s) {
    GroupElement x{std::vector<double>(d)};
    for (int i = 0; i < d; ++i) x[i] = normal(rng);
    const double n = hom_norm(spec, x);
    if (n == 0.0) continue;
    rep.sphere_sup = std::max(rep.sphere_sup, std::abs(g(dilate(spec, 1.0 / n, x))));
  }
  for (int s = 0; s < samples; ++s) {
    GroupElement x{std::vector<double>(d)};
    for (int i = 0; i < d; ++i) x[i] = uniform(rng);
    const double n = hom_norm(spec, x);
    if (n == 0.0) continue;
    const double ratio = std::abs(g(x)) / n;
    if (ratio > rep.worst_ratio) {
      rep.worst_ratio = ratio;
      rep.worst_point = x;
    }
  }
  const double slack = 1e-12 * std::max(1.0, c);
  rep.holds = rep.sphere_sup <= c + slack && rep.worst_ratio <= c + slack;
  return rep;
}

nlohmann::json to_json(const GroupSpec& spec) {
  nlohmann::json law = nlohmann::json::array();
  for (const auto& t : spec.law())
    law.push_back({{"target", t.target + 1}, {"coeff", t.coeff.str()}, {"x_pow", t.x_pow}, {"y_pow", t.y_pow}});
  return {{"name", spec.name()},
          {"dim", spec.dim()},
          {"horizontal_dim", spec.horizontal_dim()},
          {"step", spec.step()},
          {"weights", spec.weights()},
          {"law", law}};
}

GroupSpec group_from_json(const nlohmann::json& j) {
  std::vector<LawTerm> law;
  for (const auto& t : j.at("law"))
    law.push_back(LawTerm{t.at("target").get<int>() - 1, Rational::parse(t.at("coeff").get<std::string>()),
                          t.at("x_pow").get<Exponents>(), t.at("y_pow").get<Exponents>()});
  GroupSpec spec(j.at("name").get<std::string>(), j.at("horizontal_dim").get<int>(),
                 j.at("weights").get<std::vector<int>>(), std::move(law));
  if (j.contains("dim") && j.at("dim").get<int>() != spec.dim())
    throw std::invalid_argument("group document: dim does not match weights");
  if (j.contains("step") && j.at("step").get<int>() != spec.step())
    throw std::invalid_argument("group document: step does not match weights");
  return spec;
}

}  // namespace carnot
