#pragma once

// Jacobian determinants: central finite differences for any map of M, exact
// differences for piecewise-affine rational maps, and the tangent map of
// the integrated kernel carried through the integrator by dual numbers.

#include <array>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "akc/dual.hpp"
#include "akc/errors.hpp"
#include "akc/kernel.hpp"
#include "akc/norms.hpp"
#include "akc/point.hpp"
#include "akc/rational.hpp"

namespace akc {

/// Determinant by Gaussian elimination with partial pivoting; a is row-major n x n.
inline double determinant(std::vector<double> a, int n) {
  double det = 1.0;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(a[static_cast<std::size_t>(r * n + c)]) >
          std::abs(a[static_cast<std::size_t>(piv * n + c)]))
        piv = r;
    if (a[static_cast<std::size_t>(piv * n + c)] == 0.0) return 0.0;
    if (piv != c) {
      for (int k = 0; k < n; ++k)
        std::swap(a[static_cast<std::size_t>(c * n + k)], a[static_cast<std::size_t>(piv * n + k)]);
      det = -det;
    }
    const double p = a[static_cast<std::size_t>(c * n + c)];
    det *= p;
    for (int r = c + 1; r < n; ++r) {
      const double f = a[static_cast<std::size_t>(r * n + c)] / p;
      for (int k = c; k < n; ++k)
        a[static_cast<std::size_t>(r * n + k)] -= f * a[static_cast<std::size_t>(c * n + k)];
    }
  }
  return det;
}

inline Rational determinant(std::vector<Rational> a, int n) {
  Rational det(1);
  for (int c = 0; c < n; ++c) {
    int piv = -1;
    for (int r = c; r < n && piv < 0; ++r)
      if (a[static_cast<std::size_t>(r * n + c)] != 0) piv = r;
    if (piv < 0) return Rational(0);
    if (piv != c) {
      for (int k = 0; k < n; ++k)
        std::swap(a[static_cast<std::size_t>(c * n + k)], a[static_cast<std::size_t>(piv * n + k)]);
      det = -det;
    }
    const Rational p = a[static_cast<std::size_t>(c * n + c)];
    det *= p;
    for (int r = c + 1; r < n; ++r) {
      const Rational f = a[static_cast<std::size_t>(r * n + c)] / p;
      for (int k = c; k < n; ++k)
        a[static_cast<std::size_t>(r * n + k)] -= f * a[static_cast<std::size_t>(c * n + k)];
    }
  }
  return det;
}

/// Central-difference Jacobian matrix of the lift of f (row i = component i).
/// With richardson, combines steps h and h/2 to fourth order.
inline std::vector<double> jacobian_fd(const MapFn& f, const Point& x, double fd_step, Mode mode,
                                       bool richardson = false) {
  if (!(fd_step > 0.0)) throw InvalidArgument("fd_step must be positive");
  const int d = x.dim();
  const Point fx = f(x);
  std::vector<double> J(static_cast<std::size_t>(d * d));
  for (int l = 0; l < d; ++l) {
    MultiIndex a;
    a.d = d;
    a.a[static_cast<std::size_t>(l)] = 1;
    const auto c1 = detail::central_partial(f, x, fx, a, fd_step, mode);
    std::array<double, kMaxDim> col = c1;
    if (richardson) {
      const auto c2 = detail::central_partial(f, x, fx, a, 0.5 * fd_step, mode);
      for (int i = 0; i < d; ++i)
        col[static_cast<std::size_t>(i)] =
            (4.0 * c2[static_cast<std::size_t>(i)] - c1[static_cast<std::size_t>(i)]) / 3.0;
    }
    for (int i = 0; i < d; ++i) J[static_cast<std::size_t>(i * d + l)] = col[static_cast<std::size_t>(i)];
  }
  return J;
}

/// det of the central-difference Jacobian. Throws OutOfDomain when a
/// cylinder stencil would leave [0,1] in a non-cyclic coordinate.
inline double jacobian_det(const MapFn& f, const Point& x, double fd_step,
                           Mode mode = Mode::torus, bool richardson = false) {
  for (int i = 0; i < x.dim(); ++i)
    if (!is_cyclic(mode, i, x.dim()) && (x[i] - fd_step < 0.0 || x[i] + fd_step > 1.0))
      throw OutOfDomain("finite-difference stencil leaves the cylinder");
  return determinant(jacobian_fd(f, x, fd_step, mode, richardson), x.dim());
}

/// Exact forward-difference Jacobian determinant of a rational map; exact
/// for maps that are affine on [x, x + h e_i] for every i.
template <class F>
Rational jacobian_det_exact(F&& f, const RationalPoint& x, const Rational& h) {
  const int d = x.dim();
  const RationalPoint fx = f(x);
  std::vector<Rational> J(static_cast<std::size_t>(d * d));
  for (int l = 0; l < d; ++l) {
    RationalPoint y = x;
    y[l] += h;
    const RationalPoint fy = f(y);
    for (int i = 0; i < d; ++i) J[static_cast<std::size_t>(i * d + l)] = (fy[i] - fx[i]) / h;
  }
  return determinant(std::move(J), d);
}

using Mat2 = std::array<std::array<double, 2>, 2>;

inline double det2(const Mat2& m) { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

/// Exact tangent map of the kernel as evaluated (flow route): rigid and
/// identity regions analytically, the band by forward-mode differentiation
/// through every implicit-midpoint step.
inline Mat2 kernel_jacobian(const SmoothKernel& kernel, Vec2 p, int dir = +1) {
  if (kernel.method() != KernelMethod::flow)
    throw InvalidArgument("exact kernel Jacobian needs the flow route");
  switch (kernel.region(p)) {
    case Region::inner: return dir > 0 ? Mat2{{{0.0, 1.0}, {-1.0, 0.0}}} : Mat2{{{0.0, -1.0}, {1.0, 0.0}}};
    case Region::collar: return Mat2{{{1.0, 0.0}, {0.0, 1.0}}};
    case Region::band: break;
  }
  using D = Dual<2>;
  const std::array<D, 2> z{D::variable(p[0] - 0.5, 0), D::variable(p[1] - 0.5, 1)};
  const auto w = kernel.flow_centered(z, double(dir));
  return Mat2{{{w[0].d[0], w[0].d[1]}, {w[1].d[0], w[1].d[1]}}};
}

}  // namespace akc
