#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <type_traits>

#include "akc/errors.hpp"
#include "akc/rational.hpp"

namespace akc {

inline constexpr int kMaxDim = 8;

/// torus: every coordinate is cyclic; cylinder: the first d-1 coordinates
/// live in [0, 1] and only the last one is cyclic.
enum class Mode { torus, cylinder };

inline std::string to_string(Mode m) { return m == Mode::torus ? "torus" : "cylinder"; }

inline Mode parse_mode(const std::string& s) {
  if (s == "torus") return Mode::torus;
  if (s == "cylinder") return Mode::cylinder;
  throw InvalidArgument("unknown mode '" + s + "' (expected torus or cylinder)");
}

inline void check_dimension(int d) {
  if (d < 2) throw InvalidArgument("dimension must be >= 2, got " + std::to_string(d));
  if (d > kMaxDim)
    throw UnsupportedDimension("dimension " + std::to_string(d) + " exceeds " +
                               std::to_string(kMaxDim));
}

/// A point of T^d or I^{d-1} x T with coordinates of type T (double or Rational).
template <class T>
class PointT {
public:
  PointT() = default;
  explicit PointT(int d) : d_(d) {
    check_dimension(d);
    c_.fill(T(0));
  }
  PointT(std::initializer_list<T> xs) : d_(static_cast<int>(xs.size())) {
    check_dimension(d_);
    std::copy(xs.begin(), xs.end(), c_.begin());
  }

  int dim() const noexcept { return d_; }
  T& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }
  const T& operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  /// The cyclic coordinate x_d.
  T& last() { return c_[static_cast<std::size_t>(d_ - 1)]; }
  const T& last() const { return c_[static_cast<std::size_t>(d_ - 1)]; }

  friend bool operator==(const PointT& a, const PointT& b) {
    if (a.d_ != b.d_) return false;
    for (int i = 0; i < a.d_; ++i)
      if (!(a[i] == b[i])) return false;
    return true;
  }

private:
  std::array<T, kMaxDim> c_{};
  int d_ = 0;
};

using Point = PointT<double>;
using RationalPoint = PointT<Rational>;

inline double wrap01(double x) {
  const double w = x - std::floor(x);
  return w >= 1.0 ? 0.0 : w;
}
inline Rational wrap01(const Rational& x) { return frac(x); }

inline bool is_cyclic(Mode mode, int i, int d) { return mode == Mode::torus || i == d - 1; }

template <class T>
PointT<T> normalize(PointT<T> p, Mode mode) {
  for (int i = 0; i < p.dim(); ++i) {
    if (is_cyclic(mode, i, p.dim()))
      p[i] = wrap01(p[i]);
    else if (p[i] < T(0))
      p[i] = T(0);
    else if (p[i] > T(1))
      p[i] = T(1);
  }
  return p;
}

/// S_theta: advance the last coordinate by theta mod 1.
template <class T>
PointT<T> base_rotation(const T& theta, PointT<T> p) {
  p.last() = wrap01(T(p.last() + theta));
  return p;
}

/// Distance between two circle coordinates in [0, 1).
inline double circle_dist(double a, double b) {
  const double t = std::abs(a - b);
  const double w = t - std::floor(t);
  return std::min(w, 1.0 - w);
}
inline Rational circle_dist(const Rational& a, const Rational& b) {
  const Rational w = frac(a - b);
  return std::min(w, Rational(1 - w));
}

inline double coord_dist(Mode mode, int i, int d, double a, double b) {
  return is_cyclic(mode, i, d) ? circle_dist(a, b) : std::abs(a - b);
}

/// Max-coordinate distance on M.
inline double max_dist(const Point& a, const Point& b, Mode mode) {
  double m = 0.0;
  for (int i = 0; i < a.dim(); ++i) m = std::max(m, coord_dist(mode, i, a.dim(), a[i], b[i]));
  return m;
}

/// Euclidean distance on M (flat metric of the torus / cylinder).
inline double euclid_dist(const Point& a, const Point& b, Mode mode) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) {
    const double t = coord_dist(mode, i, a.dim(), a[i], b[i]);
    s += t * t;
  }
  return std::sqrt(s);
}

inline Point to_double(const RationalPoint& p) {
  Point out(p.dim());
  for (int i = 0; i < p.dim(); ++i) out[i] = p[i].get_d();
  return out;
}

inline RationalPoint to_rational(const Point& p) {
  RationalPoint out(p.dim());
  for (int i = 0; i < p.dim(); ++i) out[i] = exact(p[i]);
  return out;
}

template <class T>
std::string to_string(const PointT<T>& p) {
  std::string s = "(";
  for (int i = 0; i < p.dim(); ++i) {
    if (i) s += ", ";
    if constexpr (std::is_same_v<T, Rational>)
      s += to_string(p[i]);
    else
      s += std::to_string(p[i]);
  }
  return s + ")";
}

}  // namespace akc
