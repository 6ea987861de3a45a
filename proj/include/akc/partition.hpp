#pragma once

// Exact rational set machinery: atoms of eta_q, the agreement sets E_{n,q},
// per-atom image diameters under the heuristic step, the orbit-good atom
// sets J_{n,q}^{(x)}, and point coding through a conjugacy stack.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "akc/conjugacy.hpp"
#include "akc/errors.hpp"
#include "akc/point.hpp"
#include "akc/rational.hpp"

namespace akc {

/// floor(x_d q^d): index of the atom [i q^{-d}, (i+1) q^{-d}).
inline Integer atom_of(const Integer& q, int d, const Rational& x_d) {
  const Integer qd = pow_of(q, static_cast<unsigned long>(d));
  Integer i = floor_of(frac(x_d) * Rational(qd));
  return i;
}

inline std::int64_t atom_of(std::int64_t q, int d, double x_d) {
  double qd = 1.0;
  for (int i = 0; i < d; ++i) qd *= double(q);
  if (qd > 0x1.0p53) throw NotEvaluable("q^d too large for double atom indexing");
  const auto i = static_cast<std::int64_t>(std::floor(wrap01(x_d) * qd));
  return std::min<std::int64_t>(i, static_cast<std::int64_t>(qd) - 1);
}

/// Open interval (lo, hi) of the circle [0, 1); a piece split off at 0 by a
/// wrapping interval also contains its left endpoint 0.
struct ArcPiece {
  Rational lo, hi;
  bool lo_closed = false;
};

/// Finite union of open arcs of R/Z, resolved exactly.
class CircleUnion {
public:
  /// Adds the open interval (lo, hi) taken mod 1.
  void add(const Rational& lo, const Rational& hi) {
    if (!(lo < hi)) return;
    ++raw_;
    if (hi - lo >= 1) {
      pieces_.push_back({Rational(0), Rational(1), true});
      dirty_ = true;
      return;
    }
    const Rational a = frac(lo);
    const Rational b = a + (hi - lo);
    if (b <= 1) {
      pieces_.push_back({a, b, false});
    } else {
      pieces_.push_back({a, Rational(1), false});
      pieces_.push_back({Rational(0), b - 1, true});
    }
    dirty_ = true;
  }

  /// Number of add() calls with nonempty intervals.
  std::size_t raw_count() const noexcept { return raw_; }

  const std::vector<ArcPiece>& pieces() const {
    normalize();
    return pieces_;
  }

  /// Number of maximal arcs on the circle (pieces joined across 0 count once).
  std::size_t arc_count() const {
    normalize();
    std::size_t c = pieces_.size();
    if (c >= 2 && pieces_.front().lo == 0 && pieces_.front().lo_closed && pieces_.back().hi == 1)
      --c;
    return c;
  }

  Rational measure() const {
    normalize();
    Rational m(0);
    for (const auto& p : pieces_) m += p.hi - p.lo;
    return m;
  }

  bool contains(const Rational& x) const {
    normalize();
    const Rational y = frac(x);
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), y,
                               [](const Rational& v, const ArcPiece& p) { return v < p.lo; });
    // Candidates: the piece starting at or before y.
    if (it != pieces_.begin()) {
      const auto& p = *std::prev(it);
      if ((p.lo < y || (p.lo_closed && p.lo == y)) && y < p.hi) return true;
    }
    return false;
  }

private:
  void normalize() const {
    if (!dirty_) return;
    std::sort(pieces_.begin(), pieces_.end(), [](const ArcPiece& a, const ArcPiece& b) {
      if (a.lo != b.lo) return a.lo < b.lo;
      return a.lo_closed && !b.lo_closed;
    });
    std::vector<ArcPiece> out;
    for (const auto& p : pieces_) {
      if (!out.empty()) {
        auto& c = out.back();
        if (p.lo < c.hi || (p.lo == c.hi && p.lo_closed)) {
          if (p.hi > c.hi) c.hi = p.hi;
          continue;
        }
      }
      out.push_back(p);
    }
    pieces_ = std::move(out);
    dirty_ = false;
  }

  mutable std::vector<ArcPiece> pieces_;
  mutable bool dirty_ = false;
  std::size_t raw_ = 0;
};

/// The excluded set of the last coordinate: strips of half-width
/// 1/(n^2 q^j) about k/q^j, j = 1..d-1.
inline void add_last_coordinate_strips(CircleUnion& u, int n, const Integer& q, int d) {
  const Integer n2 = Integer(n) * n;
  for (int j = 1; j <= d - 1; ++j) {
    const Integer qj = pow_of(q, static_cast<unsigned long>(j));
    const Rational w = make_rational(Integer(1), n2 * qj);
    for (Integer k = 1; k <= qj; ++k) {
      const Rational c = make_rational(k, qj);
      u.add(c - w, c + w);
    }
  }
}

inline CircleUnion last_coordinate_strips(int n, const Integer& q, int d) {
  CircleUnion u;
  add_last_coordinate_strips(u, n, q, d);
  return u;
}

/// The strip condition on the first d-1 coordinates: x in [1/n^2, 1 - 1/n^2].
inline bool in_core(int n, const Rational& x) {
  const Rational e = make_rational(1, long(n) * n);
  return e <= x && x <= 1 - e;
}

inline void check_E_args(int n, const Integer& q, int d) {
  check_dimension(d);
  if (n < 2) throw InvalidArgument("n must be >= 2");
  if (q < 2) throw InvalidArgument("q must be >= 2");
}

/// Agreement set E_{n,q}. Cylinder: the first d-1 coordinates avoid the edge
/// strips and x_d avoids the strips k/q^j +- 1/(n^2 q^j). Torus: psi_q^{-1}
/// of the same set read on the circle.
class AgreementSet {
public:
  AgreementSet(int n, Integer q, int d, Mode mode)
      : n_(n), q_(std::move(q)), d_(d), mode_(mode) {
    check_E_args(n_, q_, d_);
    strips_ = last_coordinate_strips(n_, q_, d_);
  }

  int n() const noexcept { return n_; }
  const Integer& q() const noexcept { return q_; }
  int d() const noexcept { return d_; }
  Mode mode() const noexcept { return mode_; }
  const CircleUnion& strips() const noexcept { return strips_; }

  bool contains(const RationalPoint& x) const {
    if (x.dim() != d_) throw InvalidArgument("point dimension mismatch");
    RationalPoint y = x;
    if (mode_ == Mode::torus) {
      const Rational shift = Rational(q_) * x.last();
      for (int i = 0; i + 1 < d_; ++i) y[i] = frac(Rational(x[i] + shift));
    }
    for (int i = 0; i + 1 < d_; ++i)
      if (!in_core(n_, y[i])) return false;
    return !strips_.contains(y.last());
  }

  bool contains(const Point& x) const { return contains(to_rational(x)); }

  /// Exact measure. Each fiber over an admissible x_d is a translate of the
  /// core cube (the shear only translates fibers), so the measure is
  /// |core|^{d-1} times the admissible measure of x_d.
  Rational measure() const {
    const Rational core = 1 - make_rational(2, long(n_) * n_);
    return pow_of(core, static_cast<unsigned long>(d_ - 1)) * (1 - strips_.measure());
  }

  /// lambda(Delta_i cap E) / lambda(Delta_i).
  Rational atom_fraction(const Integer& i) const {
    const auto pieces = atom_admissible(i);
    const Integer qd = pow_of(q_, static_cast<unsigned long>(d_));
    Rational len(0);
    for (const auto& [a, b] : pieces) len += b - a;
    const Rational core = 1 - make_rational(2, long(n_) * n_);
    return pow_of(core, static_cast<unsigned long>(d_ - 1)) * len * Rational(qd);
  }

  /// Admissible subintervals of x_d inside atom i (closures).
  std::vector<std::pair<Rational, Rational>> atom_admissible(const Integer& i) const {
    const Integer qd = pow_of(q_, static_cast<unsigned long>(d_));
    const Rational lo = make_rational(i, qd), hi = make_rational(i + 1, qd);
    std::vector<std::pair<Rational, Rational>> out;
    Rational cur = lo;
    for (const auto& p : strips_.pieces()) {
      if (p.hi <= cur) continue;
      if (p.lo >= hi) break;
      if (p.lo > cur) out.emplace_back(cur, p.lo);
      cur = std::max(cur, p.hi);
      if (cur >= hi) break;
    }
    if (cur < hi) out.emplace_back(cur, hi);
    return out;
  }

private:
  int n_;
  Integer q_;
  int d_;
  Mode mode_;
  CircleUnion strips_;
};

inline bool E_membership(int n, const Integer& q, int d, Mode mode, const RationalPoint& x) {
  return AgreementSet(n, q, d, mode).contains(x);
}

inline Rational E_measure(int n, const Integer& q, int d, Mode mode) {
  return AgreementSet(n, q, d, mode).measure();
}

/// Closed coordinate box with exact rational sides.
struct Box {
  std::vector<Rational> lo, hi;
};

namespace detail {

/// Image of a box under the planar heuristic map on coordinates (i, i+1),
/// split at the cell boundaries of the second coordinate. The second
/// coordinate is treated as half-open [lo, hi).
inline std::vector<Box> heuristic_box_image(const Box& b, int i, const Integer& q) {
  std::vector<Box> out;
  const Rational qr(q);
  const Rational ylo = b.lo[i + 1], yhi = b.hi[i + 1];
  const Integer j0 = floor_of(qr * ylo);
  Integer j1 = ceil_of(qr * yhi) - 1;
  if (j1 < j0) j1 = j0;
  for (Integer j = j0; j <= j1; ++j) {
    const Rational cl = std::max(ylo, make_rational(j, q));
    const Rational ch = std::min(yhi, make_rational(j + 1, q));
    if (cl > ch) continue;
    Box nb = b;
    const Rational jr(j);
    nb.lo[i] = qr * cl - jr;
    nb.hi[i] = qr * ch - jr;
    nb.lo[i + 1] = (1 - b.hi[i] + jr) / qr;
    nb.hi[i + 1] = (1 - b.lo[i] + jr) / qr;
    out.push_back(std::move(nb));
  }
  return out;
}

}  // namespace detail

/// Squared diameter of the bounding box of h~_q(Delta_i cap E_{n,q}), or
/// nullopt when the atom misses E. On the torus psi_q maps Delta_i cap E onto
/// Delta_i cap E' and h~ is applied after psi_q, so both modes reduce to the
/// same boxes.
inline std::optional<Rational> image_diameter_bound(const AgreementSet& E, const Integer& i) {
  const int d = E.d();
  const Rational e = make_rational(1, long(E.n()) * E.n());
  std::vector<Box> boxes;
  for (const auto& [a, b] : E.atom_admissible(i)) {
    Box bx{std::vector<Rational>(d, e), std::vector<Rational>(d, 1 - e)};
    bx.lo[d - 1] = a;
    bx.hi[d - 1] = b;
    boxes.push_back(std::move(bx));
  }
  if (boxes.empty()) return std::nullopt;
  for (int c = d - 2; c >= 0; --c) {
    std::vector<Box> next;
    for (const auto& bx : boxes)
      for (auto& nb : detail::heuristic_box_image(bx, c, E.q())) next.push_back(std::move(nb));
    boxes = std::move(next);
  }
  Rational sq(0);
  for (int c = 0; c < d; ++c) {
    Rational lo = boxes.front().lo[c], hi = boxes.front().hi[c];
    for (const auto& bx : boxes) {
      lo = std::min(lo, bx.lo[c]);
      hi = std::max(hi, bx.hi[c]);
    }
    sq += (hi - lo) * (hi - lo);
  }
  return sq;
}

/// Atoms [a, b) of eta_q as index ranges, with Q = q^d atoms in total.
struct AtomRanges {
  Integer total;
  std::vector<std::pair<Integer, Integer>> ranges;

  Integer count() const {
    Integer c = 0;
    for (const auto& [a, b] : ranges) c += b - a;
    return c;
  }
  Rational measure() const { return make_rational(count(), total); }
  bool contains(const Integer& i) const {
    auto it = std::upper_bound(ranges.begin(), ranges.end(), i,
                               [](const Integer& v, const auto& r) { return v < r.first; });
    if (it == ranges.begin()) return false;
    return i < std::prev(it)->second;
  }
};

struct GoodAtomSet {
  RationalPoint x;
  int n = 0;
  Integer q;
  int d = 0;
  CircleUnion excluded;   // excluded orbit parameters t = x_d + theta
  AtomRanges hull;        // measurable hull of the excluded parameters
  AtomRanges included;    // J, as atoms
  Rational measure;       // lambda(J)
};

/// J_{n,q}^{(x)} on the torus. In the orbit coordinate t = x_d + theta the
/// point S_theta x lies in atom floor(t q^d) and fails E exactly on
/// (l - x_i +- 1/n^2)/q (shear strips) and k/q^j +- 1/(n^2 q^j).
inline GoodAtomSet J_construct(int n, const Integer& q, int d, const RationalPoint& x) {
  check_E_args(n, q, d);
  if (x.dim() != d) throw InvalidArgument("point dimension mismatch");
  if (!(q > Integer(d) * n * n))
    throw PreconditionViolated("J construction needs q > d n^2 (q = " + q.get_str() +
                               ", d n^2 = " + std::to_string(d * n * n) + ")");
  GoodAtomSet g;
  g.x = x;
  g.n = n;
  g.q = q;
  g.d = d;
  const Rational w = make_rational(1, long(n) * n);
  const Rational qr(q);
  for (int i = 0; i + 1 < d; ++i)
    for (Integer l = 1; l <= q; ++l) {
      const Rational c = (Rational(l) - x[i]) / qr;
      g.excluded.add(c - w / qr, c + w / qr);
    }
  add_last_coordinate_strips(g.excluded, n, q, d);
  const Integer Q = pow_of(q, static_cast<unsigned long>(d));
  g.hull.total = Q;
  g.included.total = Q;
  std::vector<std::pair<Integer, Integer>> touched;
  for (const auto& p : g.excluded.pieces()) {
    Integer a = floor_of(p.lo * Rational(Q));
    Integer b = ceil_of(p.hi * Rational(Q));
    if (b > Q) b = Q;
    touched.emplace_back(a, b);
  }
  std::sort(touched.begin(), touched.end());
  for (auto& r : touched) {
    if (!g.hull.ranges.empty() && r.first <= g.hull.ranges.back().second) {
      if (r.second > g.hull.ranges.back().second) g.hull.ranges.back().second = r.second;
    } else {
      g.hull.ranges.push_back(r);
    }
  }
  Integer cur = 0;
  for (const auto& [a, b] : g.hull.ranges) {
    if (a > cur) g.included.ranges.emplace_back(cur, a);
    cur = std::max(cur, b);
  }
  if (cur < Q) g.included.ranges.emplace_back(cur, Q);
  g.measure = g.included.measure();
  return g;
}

/// Code of a point through a stack: per stage, the eta atom of
/// pi_d(H_{n+1}^{-1} x) and whether H_{n+1}^{-1} x lies in E_{n,q_n}.
struct CodeEntry {
  int n = 0;
  Integer atom;
  bool in_F = false;
};

inline std::vector<CodeEntry> code_point(const ConjugacyStack& stack, const Point& x) {
  std::vector<CodeEntry> out;
  for (std::size_t s = 0; s < stack.size(); ++s) {
    const auto& step = stack.steps()[s];
    const Point y = stack.prefix(s + 1).inverse(x);
    const RationalPoint yr = to_rational(y);
    CodeEntry e;
    e.n = step.n();
    e.atom = atom_of(step.q(), step.d(), yr.last());
    e.in_F = AgreementSet(step.n(), step.q(), step.d(), step.mode()).contains(yr);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace akc
