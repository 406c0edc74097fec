#include "carnot/polynomial.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace carnot {

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::domain_error("Rational: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  num_ = g ? num / g : 0;
  den_ = g ? den / g : 1;
}

Rational operator+(const Rational& a, const Rational& b) {
  return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

Rational operator*(const Rational& a, const Rational& b) {
  return Rational(a.num_ * b.num_, a.den_ * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.num_ == 0) throw std::domain_error("Rational: division by zero");
  return Rational(a.num_ * b.den_, a.den_ * b.num_);
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::parse(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return Rational(std::stoll(text));
    return Rational(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
  } catch (const std::logic_error&) {
    throw std::invalid_argument("Rational: cannot parse '" + text + "'");
  }
}

Polynomial Polynomial::constant(int nvars, Rational c) {
  Polynomial p(nvars);
  p.add_term(Exponents(nvars, 0), c);
  return p;
}

Polynomial Polynomial::variable(int nvars, int index) {
  Exponents e(nvars, 0);
  e.at(index) = 1;
  return monomial(nvars, e);
}

Polynomial Polynomial::monomial(int nvars, const Exponents& exps, Rational c) {
  if (static_cast<int>(exps.size()) != nvars) throw std::invalid_argument("monomial: arity mismatch");
  Polynomial p(nvars);
  p.add_term(exps, c);
  return p;
}

void Polynomial::add_term(const Exponents& e, const Rational& c) {
  if (c.is_zero()) return;
  auto [it, inserted] = terms_.emplace(e, c);
  if (!inserted) {
    it->second = it->second + c;
    if (it->second.is_zero()) terms_.erase(it);
  }
}

int Polynomial::weighted_degree(std::span<const int> weights) const {
  int best = -1;
  for (const auto& [e, c] : terms_) {
    int deg = 0;
    for (int i = 0; i < nvars_; ++i) deg += e[i] * weights[i];
    best = std::max(best, deg);
  }
  return best;
}

bool Polynomial::is_homogeneous(std::span<const int> weights) const {
  int first = -1;
  for (const auto& [e, c] : terms_) {
    int deg = 0;
    for (int i = 0; i < nvars_; ++i) deg += e[i] * weights[i];
    if (first < 0) first = deg;
    if (deg != first) return false;
  }
  return true;
}

Polynomial Polynomial::derivative(int var) const {
  Polynomial out(nvars_);
  for (const auto& [e, c] : terms_) {
    if (e[var] == 0) continue;
    Exponents d = e;
    d[var] -= 1;
    out.add_term(d, c * Rational(e[var]));
  }
  return out;
}

double Polynomial::evaluate(std::span<const double> x) const {
  double sum = 0.0;
  for (const auto& [e, c] : terms_) {
    double v = c.to_double();
    for (int i = 0; i < nvars_; ++i)
      for (int k = 0; k < e[i]; ++k) v *= x[i];
    sum += v;
  }
  return sum;
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  if (nvars_ == 0) nvars_ = other.nvars_;
  for (const auto& [e, c] : other.terms_) add_term(e, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  if (nvars_ == 0) nvars_ = other.nvars_;
  for (const auto& [e, c] : other.terms_) add_term(e, -c);
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  Polynomial out(std::max(a.nvars_, b.nvars_));
  for (const auto& [ea, ca] : a.terms_)
    for (const auto& [eb, cb] : b.terms_) {
      Exponents e(out.nvars_, 0);
      for (int i = 0; i < out.nvars_; ++i) e[i] = ea[i] + eb[i];
      out.add_term(e, ca * cb);
    }
  return out;
}

Polynomial operator*(Rational c, const Polynomial& p) {
  Polynomial out(p.nvars_);
  for (const auto& [e, v] : p.terms_) out.add_term(e, c * v);
  return out;
}

Polynomial pow(const Polynomial& p, int n) {
  Polynomial out = Polynomial::constant(p.nvars(), 1);
  for (int i = 0; i < n; ++i) out = out * p;
  return out;
}

std::string Polynomial::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [e, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << "(" << c.str() << ")";
    for (int i = 0; i < nvars_; ++i)
      if (e[i] > 0) os << "*x" << (i + 1) << (e[i] > 1 ? "^" + std::to_string(e[i]) : "");
  }
  return os.str();
}

CompiledPolynomial::CompiledPolynomial(const Polynomial& p) : d_(p.nvars()) {
  for (const auto& [e, c] : p.terms()) {
    coef_.push_back(c.to_double());
    exps_.insert(exps_.end(), e.begin(), e.end());
  }
}

double CompiledPolynomial::operator()(const double* x) const {
  double s = 0.0;
  for (std::size_t t = 0; t < coef_.size(); ++t) {
    double v = coef_[t];
    const int* e = &exps_[t * d_];
    for (int i = 0; i < d_; ++i)
      for (int k = 0; k < e[i]; ++k) v *= x[i];
    s += v;
  }
  return s;
}

}  // namespace carnot
