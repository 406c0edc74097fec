#pragma once

// Exact multivariate polynomials with rational coefficients. Used for the
// group law table, the vector-field coefficients and the powers of the
// homogeneous norm, so that commutators and divergences can be checked
// symbolically.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace carnot {

class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t num) : num_(num), den_(1) {}  // NOLINT: implicit by design of arithmetic
  Rational(std::int64_t num, std::int64_t den);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  bool is_zero() const { return num_ == 0; }

  Rational operator-() const { return Rational(-num_, den_); }
  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  friend bool operator==(const Rational& a, const Rational& b) = default;

  // "p/q" or "p"
  std::string str() const;
  static Rational parse(const std::string& text);

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

using Exponents = std::vector<int>;

class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(int nvars) : nvars_(nvars) {}

  static Polynomial constant(int nvars, Rational c);
  static Polynomial variable(int nvars, int index);
  static Polynomial monomial(int nvars, const Exponents& exps, Rational c = 1);

  int nvars() const { return nvars_; }
  bool is_zero() const { return terms_.empty(); }
  const std::map<Exponents, Rational>& terms() const { return terms_; }

  // Weighted degree of the highest term; -1 for the zero polynomial.
  int weighted_degree(std::span<const int> weights) const;
  // True if every term has the same weighted degree (zero counts as homogeneous).
  bool is_homogeneous(std::span<const int> weights) const;

  Polynomial derivative(int var) const;
  double evaluate(std::span<const double> x) const;

  Polynomial& operator+=(const Polynomial& other);
  Polynomial& operator-=(const Polynomial& other);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(Rational c, const Polynomial& p);
  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
  }

  std::string str() const;

 private:
  void add_term(const Exponents& e, const Rational& c);

  int nvars_ = 0;
  std::map<Exponents, Rational> terms_;
};

Polynomial pow(const Polynomial& p, int n);

// Flat double-precision copy of a polynomial for repeated evaluation.
class CompiledPolynomial {
 public:
  CompiledPolynomial() = default;
  explicit CompiledPolynomial(const Polynomial& p);
  double operator()(const double* x) const;
  double operator()(std::span<const double> x) const { return (*this)(x.data()); }

 private:
  std::vector<double> coef_;
  std::vector<int> exps_;  // d per term
  int d_ = 0;
};

}  // namespace carnot
