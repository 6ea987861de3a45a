#pragma once

// Polynomials in one variable with nonnegative rational coefficients, used as
// certified majorants that are monotone in their argument.

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "akc/errors.hpp"
#include "akc/rational.hpp"

namespace akc {

class PolynomialBound {
public:
  PolynomialBound() = default;
  explicit PolynomialBound(std::vector<Rational> coeffs) : c_(std::move(coeffs)) {
    for (const auto& x : c_)
      if (x < 0) throw InvalidArgument("PolynomialBound coefficients must be nonnegative");
    trim();
  }

  static PolynomialBound constant(const Rational& c) { return PolynomialBound({c}); }
  /// c * q^e
  static PolynomialBound monomial(const Rational& c, std::size_t e) {
    std::vector<Rational> v(e + 1, Rational(0));
    v[e] = c;
    return PolynomialBound(std::move(v));
  }

  const std::vector<Rational>& coefficients() const noexcept { return c_; }
  std::size_t degree() const noexcept { return c_.empty() ? 0 : c_.size() - 1; }
  bool is_zero() const noexcept { return c_.empty(); }

  Rational operator()(const Rational& q) const {
    Rational acc(0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * q + *it;
    return acc;
  }
  double operator()(double q) const {
    double acc = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * q + it->get_d();
    return acc;
  }

  friend PolynomialBound operator+(const PolynomialBound& a, const PolynomialBound& b) {
    std::vector<Rational> v(std::max(a.c_.size(), b.c_.size()), Rational(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i) v[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) v[i] += b.c_[i];
    return PolynomialBound(std::move(v));
  }
  friend PolynomialBound operator*(const PolynomialBound& a, const PolynomialBound& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Rational> v(a.c_.size() + b.c_.size() - 1, Rational(0));
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) v[i + j] += a.c_[i] * b.c_[j];
    return PolynomialBound(std::move(v));
  }
  friend PolynomialBound operator*(const Rational& s, const PolynomialBound& a) {
    return PolynomialBound::constant(s) * a;
  }
  PolynomialBound& operator+=(const PolynomialBound& o) { return *this = *this + o; }
  PolynomialBound& operator*=(const PolynomialBound& o) { return *this = *this * o; }

  PolynomialBound pow(unsigned e) const {
    PolynomialBound out = constant(Rational(1)), base = *this;
    while (e) {
      if (e & 1) out *= base;
      base *= base;
      e >>= 1;
    }
    return out;
  }

  /// Coefficientwise maximum; dominates both arguments for q >= 0.
  static PolynomialBound coef_max(const PolynomialBound& a, const PolynomialBound& b) {
    std::vector<Rational> v(std::max(a.c_.size(), b.c_.size()), Rational(0));
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i < a.c_.size()) v[i] = a.c_[i];
      if (i < b.c_.size() && b.c_[i] > v[i]) v[i] = b.c_[i];
    }
    return PolynomialBound(std::move(v));
  }

  /// Substitution p(r(q)).
  PolynomialBound compose(const PolynomialBound& r) const {
    PolynomialBound acc;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * r + constant(*it);
    return acc;
  }

  friend bool operator==(const PolynomialBound&, const PolynomialBound&) = default;

private:
  void trim() {
    while (!c_.empty() && c_.back() == 0) c_.pop_back();
  }
  std::vector<Rational> c_;
};

inline std::string to_string(const PolynomialBound& p) {
  if (p.is_zero()) return "0";
  std::string out;
  for (std::size_t i = 0; i < p.coefficients().size(); ++i) {
    const auto& c = p.coefficients()[i];
    if (c == 0) continue;
    if (!out.empty()) out += " + ";
    out += to_string(c);
    if (i == 1) out += "*q";
    if (i > 1) out += "*q^" + std::to_string(i);
  }
  return out;
}

}  // namespace akc
