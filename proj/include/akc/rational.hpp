#pragma once

// Exact arithmetic helpers on top of GMP's C++ bindings.

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

#include "akc/errors.hpp"

namespace akc {

using Integer = mpz_class;
using Rational = mpq_class;

inline Rational make_rational(long p, long q = 1) {
  Rational r(p, q);
  r.canonicalize();
  return r;
}

inline Rational make_rational(const Integer& p, const Integer& q) {
  Rational r(p, q);
  r.canonicalize();
  return r;
}

inline Integer floor_of(const Rational& x) {
  Integer out;
  mpz_fdiv_q(out.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return out;
}

inline Integer ceil_of(const Rational& x) {
  Integer out;
  mpz_cdiv_q(out.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return out;
}

/// x mod 1, in [0, 1).
inline Rational frac(const Rational& x) { return x - Rational(floor_of(x)); }

inline Rational abs_of(const Rational& x) { return x < 0 ? Rational(-x) : x; }

inline Integer pow_of(const Integer& base, unsigned long e) {
  Integer out;
  mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), e);
  return out;
}

inline Rational pow_of(const Rational& base, unsigned long e) {
  Rational out(pow_of(base.get_num(), e), pow_of(base.get_den(), e));
  out.canonicalize();
  return out;
}

inline std::size_t bit_length(const Integer& x) {
  return x == 0 ? 0 : mpz_sizeinbase(x.get_mpz_t(), 2);
}

/// Serialized form used in every JSON document: "p/q" with q > 0.
inline std::string to_string(const Rational& x) {
  return x.get_num().get_str() + "/" + x.get_den().get_str();
}

inline std::string to_string(const Integer& x) { return x.get_str(); }

/// Accepts "p/q", an integer, or a finite decimal such as "-0.125" or "1e-3".
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw InvalidArgument("empty rational literal");
  const auto slash = s.find('/');
  try {
    if (slash != std::string::npos) {
      Integer p(s.substr(0, slash)), q(s.substr(slash + 1));
      if (q == 0) throw InvalidArgument("zero denominator in '" + s + "'");
      return make_rational(p, q);
    }
    std::string mant = s;
    long exp10 = 0;
    if (auto e = s.find_first_of("eE"); e != std::string::npos) {
      mant = s.substr(0, e);
      exp10 = std::stol(s.substr(e + 1));
    }
    bool neg = false;
    if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) {
      neg = mant[0] == '-';
      mant = mant.substr(1);
    }
    std::string digits;
    if (auto dot = mant.find('.'); dot != std::string::npos) {
      digits = mant.substr(0, dot) + mant.substr(dot + 1);
      exp10 -= static_cast<long>(mant.size() - dot - 1);
    } else {
      digits = mant;
    }
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
      throw InvalidArgument("malformed rational literal '" + s + "'");
    Integer num(digits);
    if (neg) num = -num;
    Rational out = exp10 >= 0 ? Rational(num * pow_of(Integer(10), exp10))
                              : make_rational(num, pow_of(Integer(10), -exp10));
    return out;
  } catch (const std::invalid_argument&) {
    throw InvalidArgument("malformed rational literal '" + s + "'");
  }
}

inline double to_double(const Rational& x) { return x.get_d(); }
inline double to_double(double x) { return x; }

// Overloads that let numeric templates run on double or Rational.
inline double num_floor(double x) { return std::floor(x); }
inline Rational num_floor(const Rational& x) { return Rational(floor_of(x)); }
inline double num_ceil(double x) { return std::ceil(x); }
inline Rational num_ceil(const Rational& x) { return Rational(ceil_of(x)); }

/// Exact rational value of a finite double.
inline Rational exact(double x) {
  if (!std::isfinite(x)) throw InvalidArgument("non-finite value has no rational form");
  return Rational(x);
}

/// A rational upper bound for sqrt(x), x >= 0, with relative slack below 2^-60.
inline Rational sqrt_upper(const Rational& x) {
  if (x < 0) throw InvalidArgument("sqrt of negative rational");
  const Integer scale = pow_of(Integer(2), 128);
  Integer scaled = floor_of(x * scale * scale);
  Integer root;
  mpz_sqrt(root.get_mpz_t(), scaled.get_mpz_t());
  return make_rational(root + 1, scale);
}

/// 355/113, a classical rational upper bound for pi.
inline Rational pi_upper() { return make_rational(355, 113); }

}  // namespace akc
