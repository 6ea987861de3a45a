#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "akc/errors.hpp"
#include "akc/quotient_stream.hpp"
#include "akc/rational.hpp"

namespace akc {

struct Convergent {
  Integer p;
  Integer q;
  std::size_t index = 0;

  Rational value() const { return make_rational(p, q); }
};

struct Enclosure {
  Rational lo;
  Rational hi;

  Rational width() const { return hi - lo; }
  bool contains(const Rational& x) const { return lo < x && x < hi; }
  bool inside(const Enclosure& outer) const { return outer.lo <= lo && hi <= outer.hi; }
};

inline Convergent convergent(PartialQuotientStream& s, std::size_t k) {
  if (k == 0) throw InvalidArgument("convergents are indexed from 1");
  const Integer& q = s.q(k);
  return {s.p(k), q, k};
}

inline std::vector<Convergent> cf_convergents(PartialQuotientStream& s, std::size_t count) {
  if (count < 1) throw InvalidArgument("count must be >= 1");
  std::vector<Convergent> out;
  out.reserve(count);
  for (std::size_t k = 1; k <= count; ++k) out.push_back(convergent(s, k));
  return out;
}

/// The open interval between convergents depth-1 and depth.
inline Enclosure enclose_alpha(PartialQuotientStream& s, std::size_t depth) {
  if (depth < 2) throw InvalidArgument("enclosure depth must be >= 2");
  const Rational a = convergent(s, depth - 1).value();
  const Rational b = convergent(s, depth).value();
  return a < b ? Enclosure{a, b} : Enclosure{b, a};
}

/// Strict upper bound on |alpha - p_k/q_k|: 1/(q_k q_{k+1}).
inline Rational convergent_error_upper(PartialQuotientStream& s, std::size_t k) {
  return make_rational(Integer(1), s.q(k) * s.q(k + 1));
}

struct LiouvilleWitness {
  unsigned k = 0;
  Integer q;
  Rational value;  // certified upper bound on q^k ||q alpha||
};

/// First convergent denominator q_m <= q_cap with q_m^k / q_{m+1} < delta.
inline LiouvilleWitness liouville_witness(PartialQuotientStream& s, unsigned k,
                                          const Rational& delta, const Integer& q_cap) {
  if (delta <= 0) throw InvalidArgument("delta must be positive");
  for (std::size_t m = 1; s.has(m + 1) && s.q(m) <= q_cap; ++m) {
    Rational v = make_rational(pow_of(s.q(m), k), s.q(m + 1));
    if (v < delta) return {k, s.q(m), v};
  }
  throw CertificateNotFound("k=" + std::to_string(k) + ": no convergent denominator up to " +
                            (bit_length(q_cap) > 64 ? std::to_string(bit_length(q_cap)) + "-bit cap"
                                                    : q_cap.get_str()) +
                            " reaches q^k ||q alpha|| < " + to_string(delta));
}

inline std::vector<LiouvilleWitness> liouville_certificate(PartialQuotientStream& s,
                                                           unsigned k_max, const Rational& delta,
                                                           const Integer& q_cap) {
  if (k_max < 1) throw InvalidArgument("k_max must be >= 1");
  std::vector<LiouvilleWitness> out;
  for (unsigned k = 1; k <= k_max; ++k) out.push_back(liouville_witness(s, k, delta, q_cap));
  return out;
}

}  // namespace akc
