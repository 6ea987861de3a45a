#pragma once

// Step maps h_{n,q} = phi^{(1)} ... phi^{(d-1)} psi_q, their products H_n and
// the periodic stage maps T_n = H_n S_{alpha_n} H_n^{-1}. Products apply the
// rightmost factor first.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "akc/errors.hpp"
#include "akc/kernel.hpp"
#include "akc/point.hpp"
#include "akc/rational.hpp"

namespace akc {

/// Applies a planar map to coordinates (x_i, x_{i+1}), i 1-based.
template <class T, class Map2>
PointT<T> embed_pair(Map2&& map2d, int i, PointT<T> p) {
  if (i < 1 || i > p.dim() - 1)
    throw InvalidArgument("pair index " + std::to_string(i) + " outside 1.." +
                          std::to_string(p.dim() - 1));
  const std::array<T, 2> w = map2d(std::array<T, 2>{p[i - 1], p[i]});
  p[i - 1] = w[0];
  p[i] = w[1];
  return p;
}

/// psi_q: x_i += q x_d mod 1 for i < d. Defined on the torus only.
template <class T>
PointT<T> shear_apply(std::int64_t q, PointT<T> p, Mode mode = Mode::torus, int sign = +1) {
  if (mode != Mode::torus) throw ModeError("the shear psi_q is defined on the torus only");
  const T shift = T(static_cast<long>(q * sign)) * p.last();
  for (int i = 0; i + 1 < p.dim(); ++i) p[i] = wrap01(T(p[i] + shift));
  return p;
}

template <class T>
PointT<T> shear_inverse(std::int64_t q, PointT<T> p, Mode mode = Mode::torus) {
  return shear_apply(q, std::move(p), mode, -1);
}

/// Exact h~_q (composed with psi_q on the torus).
template <class T>
PointT<T> heuristic_h_apply(std::int64_t q, Mode mode, PointT<T> p) {
  if (mode == Mode::torus) p = shear_apply(q, p);
  for (int i = p.dim() - 1; i >= 1; --i)
    p = embed_pair([q](const std::array<T, 2>& w) { return heuristic_phi(q, w); }, i, p);
  return p;
}

template <class T>
PointT<T> heuristic_h_inverse(std::int64_t q, Mode mode, PointT<T> p) {
  for (int i = 1; i <= p.dim() - 1; ++i)
    p = embed_pair([q](const std::array<T, 2>& w) { return heuristic_phi_inverse(q, w); }, i, p);
  if (mode == Mode::torus) p = shear_inverse(q, p);
  return p;
}

/// Largest scale for which double evaluation of the cells is meaningful.
inline constexpr std::int64_t kMaxEvaluableScale = std::int64_t{1} << 40;

class ConjugacyStep {
public:
  ConjugacyStep(int n, Integer q, int d, Mode mode, std::shared_ptr<const SmoothKernel> kernel)
      : n_(n), q_(std::move(q)), d_(d), mode_(mode), kernel_(std::move(kernel)) {
    check_dimension(d);
    if (q_ < 1) throw InvalidArgument("step scale q must be >= 1");
    if (!kernel_) throw InvalidArgument("step needs a kernel");
    if (q_ <= Integer(kMaxEvaluableScale)) q_eval_ = q_.get_si();
  }

  int n() const noexcept { return n_; }
  const Integer& q() const noexcept { return q_; }
  int d() const noexcept { return d_; }
  Mode mode() const noexcept { return mode_; }
  bool with_shear() const noexcept { return mode_ == Mode::torus; }
  bool evaluable() const noexcept { return q_eval_ > 0; }
  const SmoothKernel& kernel() const noexcept { return *kernel_; }
  std::int64_t q_small() const {
    if (!evaluable())
      throw NotEvaluable("h_{" + std::to_string(n_) + ",q} with q of " +
                         std::to_string(bit_length(q_)) + " bits");
    return q_eval_;
  }

  Point apply(Point p) const {
    const std::int64_t q = q_small();
    if (with_shear()) p = shear_apply(q, p);
    for (int i = d_ - 1; i >= 1; --i)
      p = embed_pair([&](const Vec2& w) { return kernel_->scaled_apply(q, w); }, i, p);
    return p;
  }

  Point inverse(Point p) const {
    const std::int64_t q = q_small();
    for (int i = 1; i <= d_ - 1; ++i)
      p = embed_pair([&](const Vec2& w) { return kernel_->scaled_inverse(q, w); }, i, p);
    if (with_shear()) p = shear_inverse(q, p);
    return p;
  }

  RationalPoint heuristic_apply(RationalPoint p) const {
    return heuristic_h_apply(q_small(), mode_, std::move(p));
  }
  RationalPoint heuristic_inverse(RationalPoint p) const {
    return heuristic_h_inverse(q_small(), mode_, std::move(p));
  }

private:
  int n_;
  Integer q_;
  int d_;
  Mode mode_;
  std::shared_ptr<const SmoothKernel> kernel_;
  std::int64_t q_eval_ = 0;
};

/// H = h_{n0} h_{n0+1} ... h_{last}; an empty stack is the identity.
class ConjugacyStack {
public:
  ConjugacyStack() = default;
  explicit ConjugacyStack(std::vector<ConjugacyStep> steps) : steps_(std::move(steps)) {}

  const std::vector<ConjugacyStep>& steps() const noexcept { return steps_; }
  std::size_t size() const noexcept { return steps_.size(); }
  bool empty() const noexcept { return steps_.empty(); }

  void push(ConjugacyStep s) { steps_.push_back(std::move(s)); }

  /// The stack of the first `count` steps.
  ConjugacyStack prefix(std::size_t count) const {
    if (count > steps_.size()) throw MissingStage("prefix longer than the stack");
    return ConjugacyStack({steps_.begin(), steps_.begin() + static_cast<std::ptrdiff_t>(count)});
  }

  bool evaluable() const {
    for (const auto& s : steps_)
      if (!s.evaluable()) return false;
    return true;
  }

  Point apply(Point p) const {
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) p = it->apply(p);
    return p;
  }
  Point inverse(Point p) const {
    for (const auto& s : steps_) p = s.inverse(p);
    return p;
  }
  RationalPoint heuristic_apply(RationalPoint p) const {
    for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) p = it->heuristic_apply(p);
    return p;
  }
  RationalPoint heuristic_inverse(RationalPoint p) const {
    for (const auto& s : steps_) p = s.heuristic_inverse(p);
    return p;
  }

private:
  std::vector<ConjugacyStep> steps_;
};

/// T_n = H S_{alpha} H^{-1} with H = H_n.
class StageMap {
public:
  StageMap(ConjugacyStack h, Rational alpha) : h_(std::move(h)), alpha_(std::move(alpha)) {}

  const ConjugacyStack& conjugacy() const noexcept { return h_; }
  const Rational& alpha() const noexcept { return alpha_; }
  /// Period q' of the rotation number alpha = p'/q'.
  Integer period() const { return alpha_.get_den(); }

  /// T^power via one round trip through H: H S_{power alpha} H^{-1}.
  Point apply(const Point& p, long power = 1) const {
    const Rational shift = frac(Rational(alpha_ * power));
    return h_.apply(base_rotation(shift.get_d(), h_.inverse(p)));
  }

  /// T^power by repeated single applications (reference route).
  Point apply_iterated(Point p, long power) const {
    const bool back = power < 0;
    const double step = frac(Rational(back ? -alpha_ : alpha_)).get_d();
    for (long i = 0; i < (back ? -power : power); ++i)
      p = h_.apply(base_rotation(step, h_.inverse(p)));
    return p;
  }

  RationalPoint heuristic_apply(const RationalPoint& p, long power = 1) const {
    const Rational shift = frac(Rational(alpha_ * power));
    return h_.heuristic_apply(base_rotation(shift, h_.heuristic_inverse(p)));
  }

private:
  ConjugacyStack h_;
  Rational alpha_;
};

/// K(x) = pi_d(H^{-1} x) with H = H_{n+1}.
inline double K_project(const ConjugacyStack& h_next, const Point& p) {
  return h_next.inverse(p).last();
}
inline Rational K_project(const ConjugacyStack& h_next, const RationalPoint& p) {
  return h_next.heuristic_inverse(p).last();
}

}  // namespace akc
