#pragma once

// The smooth square map phi_n: rigid quarter turn on an inner superellipse,
// identity on a collar near the boundary of the unit square, and in between
// the time-1 map of a Hamiltonian field whose Hamiltonian is a function of
// the gauge m(u, v) = u^{2k} + v^{2k}, (u, v) = (x - 1/2, y - 1/2).
//
// Two evaluation routes share one definition of the map:
//   flow          implicit midpoint integration of the field (default step
//                 = band width / 256), with a tabulated quarter period;
//   action_angle  closed-form phase shift along the level curve.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "akc/dual.hpp"
#include "akc/errors.hpp"
#include "akc/ode.hpp"
#include "akc/rational.hpp"

namespace akc {

using Vec2 = std::array<double, 2>;

/// C-infinity step: 0 for t <= 0, 1 for t >= 1, flat to all orders at both ends.
template <class S>
S flat_sigmoid(const S& t) {
  const double tv = value_of(t);
  if (tv <= 0.0) return S(0.0);
  if (tv >= 1.0) return S(1.0);
  const S e = S(1.0) / t - S(1.0) / (S(1.0) - t);
  if (value_of(e) > 700.0) return S(0.0);
  if (value_of(e) < -700.0) return S(1.0);
  using std::exp;
  return S(1.0) / (S(1.0) + exp(e));
}

struct SmoothingProfile {
  int n = 0;
  unsigned long k = 0;  // gauge exponent is 2k
  double r_in = 0.0;    // superellipse radius of {m = c_in}
  double r_out = 0.0;   // superellipse radius of {m = c_out}
  double s_in = 0.0;    // c_in / c_out

  /// k = n^2, the smallest exponent family that fits [1/n^2, 1-1/n^2]^2
  /// inside the rigid region.
  static SmoothingProfile for_stage(int n) {
    if (n < 2) throw InvalidArgument("smoothing index n must be >= 2");
    return custom(n, static_cast<unsigned long>(n) * static_cast<unsigned long>(n));
  }

  static SmoothingProfile custom(int n, unsigned long k) {
    if (n < 2) throw InvalidArgument("smoothing index n must be >= 2");
    if (k < 1) throw InvalidArgument("gauge exponent parameter k must be >= 1");
    SmoothingProfile p;
    p.n = n;
    p.k = k;
    const double n2 = double(n) * n;
    const double a = 1.0 / (2.0 * double(k));
    p.r_out = 0.5 - 1.0 / (4.0 * n2);
    p.r_in = std::pow(2.0, a) * (0.5 - 1.0 / n2);
    p.s_in = 2.0 * ipow((0.5 - 1.0 / n2) / p.r_out, 2 * k);
    if (!(p.c_in() < p.c_out()))
      throw InvalidArgument("k = " + std::to_string(k) + " too small for n = " +
                            std::to_string(n) + ": c_in >= c_out");
    return p;
  }

  /// Exact gauge level 2 (1/2 - 1/n^2)^{2k} of the inner square's corner.
  Rational c_in() const {
    return 2 * pow_of(make_rational(1, 2) - make_rational(1, long(n) * n), 2 * k);
  }
  /// Exact gauge level of (1/2 - 1/(4n^2), 0) in centered coordinates.
  Rational c_out() const {
    return pow_of(make_rational(1, 2) - make_rational(1, 4L * n * n), 2 * k);
  }

  /// Ramp in the normalized gauge s = m / c_out: 1/4 for s <= s_in, 0 for s >= 1.
  template <class S>
  S tau(const S& s) const {
    return S(0.25) * flat_sigmoid((S(1.0) - s) / S(1.0 - s_in));
  }

  /// s = m / c_out, computed without forming m.
  template <class S>
  S normalized_gauge(const S& u, const S& v) const {
    return ipow(u / S(r_out), 2 * k) + ipow(v / S(r_out), 2 * k);
  }
};

/// Closed-form timing on the unit level curve |u|^{2k} + |v|^{2k} = 1 of the
/// field (dm/dv, -dm/du). On the sector u >= |v| the time from (1, 0) to
/// height v is T(v) = a v sum_j (b)_j / j! w^j / (1 + 2kj), a = 1/(2k),
/// b = 1 - a, w = v^{2k}.
class LevelCurve {
public:
  explicit LevelCurve(unsigned long k)
      : k_(k), a_(1.0 / (2.0 * double(k))), v_diag_(std::pow(2.0, -a_)) {
    q1_ = 2.0 * time_to(v_diag_);
  }

  unsigned long k() const noexcept { return k_; }
  /// Quarter period on the unit level.
  double quarter_period() const noexcept { return q1_; }
  double v_diag() const noexcept { return v_diag_; }

  /// Signed time from (1, 0) back to height v (odd in v), |v| <= v_diag.
  double time_to(double v) const {
    const double av = std::abs(v);
    const double w = ipow(av, 2 * k_);
    const double b = 1.0 - a_;
    double term = 1.0, sum = 0.0;
    for (unsigned j = 0; j < 4000; ++j) {
      const double t = term / (1.0 + 2.0 * double(k_) * j);
      sum += t;
      if (t <= 1e-17 * sum) break;
      term *= (b + j) / (j + 1.0) * w;
    }
    return std::copysign(a_ * av * sum, v);
  }

  /// dT/dv = a (1 - v^{2k})^{-b}.
  double speed_inverse(double v) const {
    return a_ * std::exp(-(1.0 - a_) * std::log1p(-ipow(std::abs(v), 2 * k_)));
  }

  /// Inverse of time_to for |phi| <= quarter_period / 2. T is convex on
  /// v > 0, so Newton from the right converges monotonically.
  double height_at(double phi) const {
    const double ap = std::min(std::abs(phi), 0.5 * q1_);
    double v = std::min(ap / a_, v_diag_);
    for (int it = 0; it < 200; ++it) {
      const double step = (time_to(v) - ap) / speed_inverse(v);
      v -= step;
      if (std::abs(step) <= 1e-17 * v) break;
    }
    return std::copysign(std::clamp(v, 0.0, v_diag_), phi);
  }

  /// u >= 0 with u^{2k} + v^{2k} = 1.
  double partner(double v) const {
    return std::exp(a_ * std::log1p(-ipow(std::abs(v), 2 * k_)));
  }

  /// Phase of a unit-level point: j Q1 - T(v0), where R^{-j} p lies in the
  /// sector u >= |v| and R(u, v) = (v, -u) is the clockwise quarter turn.
  double phase(Vec2 p) const {
    const double u = p[0], v = p[1];
    if (u >= std::abs(v)) return -time_to(v);
    if (-v >= std::abs(u)) return q1_ - time_to(u);
    if (-u >= std::abs(v)) return 2.0 * q1_ - time_to(-v);
    return 3.0 * q1_ - time_to(-u);
  }

  Vec2 point_at(double phi) const {
    const double period = 4.0 * q1_;
    phi -= period * std::floor(phi / period);
    int j = static_cast<int>(std::floor(phi / q1_ + 0.5));
    double phi0 = phi - j * q1_;
    j &= 3;
    const double v0 = height_at(-phi0);
    const double u0 = partner(v0);
    switch (j) {
      case 0: return {u0, v0};
      case 1: return {v0, -u0};
      case 2: return {-u0, -v0};
      default: return {-v0, u0};
    }
  }

private:
  unsigned long k_;
  double a_;
  double v_diag_;
  double q1_ = 0.0;
};

/// Normalized quarter periods Qhat(s) = Q(c) c^{1 - 1/k}, s = c / c_out, at
/// Chebyshev levels across the band, each from return-time integration of
/// the gauge flow, with monotone cubic interpolation.
class PeriodTable {
public:
  static PeriodTable build(const SmoothingProfile& prof, std::size_t levels = 256) {
    if (levels < 4) throw InvalidArgument("period table needs at least 4 levels");
    PeriodTable t;
    t.s_.resize(levels);
    t.q_.resize(levels);
    const double lo = prof.s_in, hi = 1.0;
    for (std::size_t j = 0; j < levels; ++j) {
      const double c = std::cos(std::numbers::pi * (levels - j - 0.5) / double(levels));
      t.s_[j] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * c;
    }
    for (std::size_t j = 0; j < levels; ++j) t.q_[j] = integrate(prof, t.s_[j]);
    t.slopes();
    double err = 0.0;
    for (std::size_t j = 0; j + 1 < levels; ++j) {
      const double mid = 0.5 * (t.s_[j] + t.s_[j + 1]);
      err = std::max(err, std::abs(t(mid) - integrate(prof, mid)));
    }
    t.error_bound_ = err;
    return t;
  }

  /// Quarter period at level s * c_out of the gauge flow, rescaled by
  /// c^{1 - 1/k}. The flow is integrated in the original variables when the
  /// level is representable, and in unit-level variables otherwise.
  static double integrate(const SmoothingProfile& prof, double s) {
    const unsigned long k = prof.k;
    const double two_k = 2.0 * double(k);
    const double log_c = std::log(s) + two_k * std::log(prof.r_out);
    const double r = prof.r_out * std::pow(s, 1.0 / two_k);
    const bool direct = log_c > -600.0;
    const double scale = direct ? r : 1.0;
    auto field = [&](const State2& p) -> State2 {
      return {two_k * ipow(p[1], 2 * k - 1), -two_k * ipow(p[0], 2 * k - 1)};
    };
    const double speed = two_k * std::pow(scale, two_k - 1.0);
    const double h0 = 1e-3 * scale / speed;
    const auto ev = integrate_to_crossing(field, State2{scale, 0.0}, 0, +1, h0, 1e-15 * scale,
                                          1e-15 * scale);
    if (!direct) return ev.time;
    return ev.time * std::exp((1.0 - 1.0 / double(k)) * log_c);
  }

  double operator()(double s) const { return eval(s).first; }

  /// Value and derivative of the interpolant.
  std::pair<double, double> eval(double s) const {
    s = std::clamp(s, s_.front(), s_.back());
    auto it = std::upper_bound(s_.begin(), s_.end(), s);
    std::size_t i = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - s_.begin(), 1) - 1,
                                          s_.size() - 2);
    const double h = s_[i + 1] - s_[i];
    const double t = (s - s_[i]) / h;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t),
                 h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    const double val = h00 * q_[i] + h10 * h * m_[i] + h01 * q_[i + 1] + h11 * h * m_[i + 1];
    const double d00 = 6 * t * t - 6 * t, d10 = 3 * t * t - 4 * t + 1, d01 = -d00,
                 d11 = 3 * t * t - 2 * t;
    const double der = (d00 * q_[i] + d01 * q_[i + 1]) / h + d10 * m_[i] + d11 * m_[i + 1];
    return {val, der};
  }

  const std::vector<double>& levels() const noexcept { return s_; }
  const std::vector<double>& values() const noexcept { return q_; }
  /// max |interpolant - integration| at the midpoints between levels.
  double error_bound() const noexcept { return error_bound_; }

private:
  // Fritsch-Carlson monotone slopes.
  void slopes() {
    const std::size_t n = s_.size();
    std::vector<double> delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (q_[i + 1] - q_[i]) / (s_[i + 1] - s_[i]);
    m_.assign(n, 0.0);
    m_[0] = delta[0];
    m_[n - 1] = delta[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i)
      m_[i] = delta[i - 1] * delta[i] <= 0 ? 0.0 : 0.5 * (delta[i - 1] + delta[i]);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (delta[i] == 0.0) {
        m_[i] = m_[i + 1] = 0.0;
        continue;
      }
      const double al = m_[i] / delta[i], be = m_[i + 1] / delta[i];
      const double rr = al * al + be * be;
      if (rr > 9.0) {
        const double tt = 3.0 / std::sqrt(rr);
        m_[i] = tt * al * delta[i];
        m_[i + 1] = tt * be * delta[i];
      }
    }
  }

  std::vector<double> s_, q_, m_;
  double error_bound_ = 0.0;
};

enum class KernelMethod { flow, action_angle };

inline std::string to_string(KernelMethod m) {
  return m == KernelMethod::flow ? "flow" : "action_angle";
}

struct IntegratorParams {
  unsigned step_divisor = 256;  // implicit midpoint step = band width / step_divisor
  double newton_tol = 1e-12;    // per-step fixed-point residual required for acceptance
  unsigned max_iter = 50;
};

enum class Region { inner, band, collar };

class SmoothKernel {
public:
  explicit SmoothKernel(SmoothingProfile profile, KernelMethod method = KernelMethod::action_angle,
                        IntegratorParams params = {})
      : prof_(profile), method_(method), params_(params), curve_(profile.k) {
    if (params_.step_divisor < 1) throw InvalidArgument("step_divisor must be >= 1");
    if (method_ == KernelMethod::flow)
      table_ = std::make_shared<const PeriodTable>(PeriodTable::build(prof_));
  }

  const SmoothingProfile& profile() const noexcept { return prof_; }
  KernelMethod method() const noexcept { return method_; }
  const IntegratorParams& integrator() const noexcept { return params_; }
  const LevelCurve& level_curve() const noexcept { return curve_; }
  const PeriodTable* period_table() const noexcept { return table_.get(); }
  double step() const { return (prof_.r_out - prof_.r_in) / params_.step_divisor; }

  /// m(x - 1/2, y - 1/2). Underflows to 0 for large k; prefer normalized_gauge.
  double gauge(Vec2 p) const {
    return ipow(p[0] - 0.5, 2 * prof_.k) + ipow(p[1] - 0.5, 2 * prof_.k);
  }
  double normalized_gauge(Vec2 p) const { return prof_.normalized_gauge(p[0] - 0.5, p[1] - 0.5); }

  Region region(Vec2 p) const {
    const double s = normalized_gauge(p);
    if (s <= prof_.s_in) return Region::inner;
    if (s >= 1.0) return Region::collar;
    return Region::band;
  }

  /// Qhat at normalized level s: tabulated on the flow route, closed form otherwise.
  double quarter_period_hat(double s) const {
    return table_ ? (*table_)(s) : curve_.quarter_period();
  }

  /// Q(c) = T_m(c) / 4 for c in [c_in, c_out].
  double quarter_period(double c) const {
    const double c_out = std::exp(2.0 * double(prof_.k) * std::log(prof_.r_out));
    const double s = c / c_out;
    if (!(s >= prof_.s_in * (1 - 1e-12) && s <= 1.0 + 1e-12))
      throw OutOfDomain("level outside [c_in, c_out]");
    return quarter_period_hat(s) * std::pow(c, -(1.0 - 1.0 / double(prof_.k)));
  }

  Vec2 apply(Vec2 p) const { return eval(p, +1); }
  Vec2 inverse(Vec2 p) const { return eval(p, -1); }

  /// phi_{n,q} = C_q phi_n C_q^{-1} on the cell of height 1/q containing y
  /// (half-open: y = j/q belongs to cell j), extended 1/q-periodically.
  Vec2 scaled_apply(std::int64_t q, Vec2 p) const { return scaled(q, p, +1); }
  Vec2 scaled_inverse(std::int64_t q, Vec2 p) const { return scaled(q, p, -1); }

  /// Flow route on centered coordinates, generic in the scalar type so that
  /// dual numbers can carry the tangent map through the integrator.
  template <class S>
  std::array<S, 2> flow_centered(std::array<S, 2> p, double time) const {
    const double h = step();
    const long steps = std::max(1L, static_cast<long>(std::ceil(std::abs(time) / h)));
    const double dt = time / double(steps);
    std::array<S, 2> f = field(p), comp{S(0.0), S(0.0)};
    for (long i = 0; i < steps; ++i) {
      std::array<S, 2> inc{S(dt) * f[0], S(dt) * f[1]};
      double resid = 0.0;
      unsigned it = 0;
      for (; it < params_.max_iter; ++it) {
        const std::array<S, 2> mid{p[0] + (S(0.5) * inc[0] - comp[0]),
                                   p[1] + (S(0.5) * inc[1] - comp[1])};
        f = field(mid);
        const std::array<S, 2> next{S(dt) * f[0], S(dt) * f[1]};
        resid = std::max(std::abs(value_of(next[0]) - value_of(inc[0])),
                         std::abs(value_of(next[1]) - value_of(inc[1])));
        inc = next;
        const double size = std::max(std::abs(value_of(inc[0])), std::abs(value_of(inc[1])));
        if (resid <= 4.0 * 2.220446049250313e-16 * size) break;
      }
      if (it == params_.max_iter && resid > params_.newton_tol)
        throw IntegrationFailure("implicit midpoint solve stalled at residual " +
                                 std::to_string(resid));
      for (int c = 0; c < 2; ++c) {  // compensated accumulation
        const S y = inc[c] - comp[c];
        const S t = p[c] + y;
        comp[c] = (t - p[c]) - y;
        p[c] = t;
      }
    }
    return p;
  }

  /// The Hamiltonian field 4 tau Qhat (dm/dv, -dm/du) / c^{1-1/k}, written
  /// in the normalized gauge so that nothing underflows.
  template <class S>
  std::array<S, 2> field(const std::array<S, 2>& p) const {
    const unsigned long k = prof_.k;
    const S x = p[0] / S(prof_.r_out), y = p[1] / S(prof_.r_out);
    const S x1 = ipow(x, 2 * k - 1), y1 = ipow(y, 2 * k - 1);
    const S s = x1 * x + y1 * y;
    const S tau = prof_.tau(s);
    if (value_of(tau) == 0.0 || value_of(s) <= 0.0) return {S(0.0), S(0.0)};
    S qhat(curve_.quarter_period());
    if (table_) {
      const auto [qv, qd] = table_->eval(value_of(s));
      qhat = S(qv) + S(qd) * (s - S(value_of(s)));
    }
    using std::exp;
    using std::log;
    const S scale = S(4.0 * 2.0 * double(k) * prof_.r_out) * tau * qhat *
                    exp(S(1.0 / double(k) - 1.0) * log(s));
    return {scale * y1, -(scale * x1)};
  }

private:
  Vec2 eval(Vec2 p, int dir) const {
    if (!(p[0] >= 0.0 && p[0] <= 1.0 && p[1] >= 0.0 && p[1] <= 1.0))
      throw OutOfDomain("kernel argument outside the unit square");
    const double u = p[0] - 0.5, v = p[1] - 0.5;
    const double s = prof_.normalized_gauge(u, v);
    if (s <= prof_.s_in)
      return dir > 0 ? Vec2{p[1], 1.0 - p[0]} : Vec2{1.0 - p[1], p[0]};
    if (s >= 1.0) return p;
    Vec2 w;
    if (method_ == KernelMethod::flow) {
      w = flow_centered(Vec2{u, v}, double(dir));
    } else {
      const double r = prof_.r_out * std::exp(std::log(s) / (2.0 * double(prof_.k)));
      const double shift = 4.0 * prof_.tau(s) * curve_.quarter_period();
      const double phi = curve_.phase({u / r, v / r}) + dir * shift;
      const Vec2 z = curve_.point_at(phi);
      w = {r * z[0], r * z[1]};
    }
    return {std::clamp(w[0] + 0.5, 0.0, 1.0), std::clamp(w[1] + 0.5, 0.0, 1.0)};
  }

  Vec2 scaled(std::int64_t q, Vec2 p, int dir) const {
    if (q < 1) throw InvalidArgument("scale q must be >= 1");
    const double qd = double(q);
    const double t = p[1] * qd;
    std::int64_t j = static_cast<std::int64_t>(std::floor(t));
    j = std::clamp<std::int64_t>(j, 0, q - 1);
    const double r = std::clamp(t - double(j), 0.0, 1.0);
    if (prof_.normalized_gauge(p[0] - 0.5, r - 0.5) >= 1.0) return p;
    const Vec2 w = eval({p[0], r}, dir);
    return {w[0], (double(j) + w[1]) / qd};
  }

  SmoothingProfile prof_;
  KernelMethod method_;
  IntegratorParams params_;
  LevelCurve curve_;
  std::shared_ptr<const PeriodTable> table_;
};

/// Exact cellwise quarter turn (x, y) -> (q y - j, (1 - x + j) / q) on the
/// cell [j/q, (j+1)/q) of the second coordinate.
template <class T>
std::array<T, 2> heuristic_phi(std::int64_t q, const std::array<T, 2>& p) {
  const T qt(static_cast<long>(q));
  const T t = qt * p[1];
  T j = num_floor(t);
  if (j >= qt) j = qt - T(1);
  if (j < T(0)) j = T(0);
  const T x = t - j;
  const T y = (T(1) - p[0] + j) / qt;
  return {x, y};
}

template <class T>
std::array<T, 2> heuristic_phi_inverse(std::int64_t q, const std::array<T, 2>& p) {
  const T qt(static_cast<long>(q));
  T t = qt * p[1];
  if (t <= T(0)) t = qt;
  const T j = num_ceil(t) - T(1);
  const T x = T(1) - (t - j);
  const T y = (j + p[0]) / qt;
  return {x, y};
}

}  // namespace akc
