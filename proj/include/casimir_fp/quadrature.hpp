// quadrature.hpp
//
// Globally adaptive Gauss-Kronrod (7/15) integration. The integrand may
// return a double or a fixed-size Eigen array; every component is refined
// until its error estimate is below rel_tol times the integral of its
// absolute value, which stays meaningful when a component integrates to
// (nearly) zero.
#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <vector>

namespace casimir_fp {

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd Kronrod nodes 1, 3, 5, 7.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename T>
struct ValueTraits {
  static T zero() { return T(0); }
  static T abs(const T& v) { return std::abs(v); }
  static bool within(const T& err, const T& scale, double rel_tol, double abs_tol) {
    return err <= std::max(rel_tol * scale, abs_tol);
  }
  static double norm(const T& err, const T& scale) {
    return scale > 0 ? err / scale : err;
  }
};

template <typename Scalar, int N>
struct ValueTraits<Eigen::Array<Scalar, N, 1>> {
  using T = Eigen::Array<Scalar, N, 1>;
  static T zero() { return T::Zero(); }
  static T abs(const T& v) { return v.abs(); }
  static bool within(const T& err, const T& scale, double rel_tol, double abs_tol) {
    return (err <= (rel_tol * scale).max(abs_tol)).all();
  }
  static double norm(const T& err, const T& scale) {
    return (err / scale.max(std::numeric_limits<double>::min())).maxCoeff();
  }
};

}  // namespace detail

template <typename T>
struct QuadratureResult {
  T value;
  T abs_error;
  T abs_integral;  // integral of |f|
  int evaluations = 0;
  bool converged = false;
};

struct AdaptiveOptions {
  double rel_tol = 1e-8;
  double abs_tol = 0.0;
  int max_intervals = 2000;
};

// Integrate f over the consecutive intervals given by `breaks` (size >= 2,
// increasing). The initial partition is refined by bisecting the interval
// with the largest error.
template <typename T, typename F>
QuadratureResult<T> integrate_adaptive(F&& f, std::span<const double> breaks,
                                       const AdaptiveOptions& opt = {}) {
  using Traits = detail::ValueTraits<T>;
  struct Piece {
    double a, b;
    T value, error, abs_value;
    double priority;
    bool operator<(const Piece& o) const { return priority < o.priority; }
  };

  int evaluations = 0;
  auto rule = [&](double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    T kronrod = Traits::zero();
    T gauss = Traits::zero();
    T absolute = Traits::zero();
    for (std::size_t i = 0; i < 7; ++i) {
      const double dx = half * detail::kKronrodNodes[i];
      const T f1 = f(center - dx);
      const T f2 = f(center + dx);
      kronrod += detail::kKronrodWeights[i] * (f1 + f2);
      absolute += detail::kKronrodWeights[i] * (Traits::abs(f1) + Traits::abs(f2));
      if (i % 2 == 1) gauss += detail::kGaussWeights[i / 2] * (f1 + f2);
    }
    const T fc = f(center);
    kronrod += detail::kKronrodWeights[7] * fc;
    absolute += detail::kKronrodWeights[7] * Traits::abs(fc);
    gauss += detail::kGaussWeights[3] * fc;
    evaluations += 15;
    Piece p{a, b, T(kronrod * half), T(Traits::abs(T((kronrod - gauss) * half))),
            T(absolute * half), 0.0};
    return p;
  };

  std::priority_queue<Piece> heap;
  T total = Traits::zero();
  T total_err = Traits::zero();
  T total_abs = Traits::zero();
  auto push = [&](Piece p) {
    total += p.value;
    total_err += p.error;
    total_abs += p.abs_value;
    heap.push(std::move(p));
  };
  auto reprioritize = [&]() {
    // Priorities are relative to the current global scale.
    std::vector<Piece> all;
    all.reserve(heap.size());
    while (!heap.empty()) {
      all.push_back(heap.top());
      heap.pop();
    }
    for (auto& p : all) {
      p.priority = Traits::norm(p.error, total_abs);
      heap.push(std::move(p));
    }
  };

  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) push(rule(breaks[i], breaks[i + 1]));
  reprioritize();

  QuadratureResult<T> out{total, total_err, total_abs, 0, false};
  int intervals = static_cast<int>(heap.size());
  while (!Traits::within(total_err, total_abs, opt.rel_tol, opt.abs_tol)) {
    if (intervals >= opt.max_intervals) break;
    Piece worst = heap.top();
    heap.pop();
    total -= worst.value;
    total_err -= worst.error;
    total_abs -= worst.abs_value;
    const double mid = 0.5 * (worst.a + worst.b);
    Piece left = rule(worst.a, mid);
    Piece right = rule(mid, worst.b);
    left.priority = Traits::norm(left.error, total_abs + left.abs_value + right.abs_value);
    right.priority = Traits::norm(right.error, total_abs + left.abs_value + right.abs_value);
    push(std::move(left));
    push(std::move(right));
    ++intervals;
    if (intervals % 64 == 0) reprioritize();
  }
  // Recompute sums from the pieces to shed accumulated cancellation error.
  total = Traits::zero();
  total_err = Traits::zero();
  total_abs = Traits::zero();
  std::vector<Piece> pieces;
  while (!heap.empty()) {
    pieces.push_back(heap.top());
    heap.pop();
  }
  std::sort(pieces.begin(), pieces.end(), [](const Piece& x, const Piece& y) { return x.a < y.a; });
  for (const auto& p : pieces) {
    total += p.value;
    total_err += p.error;
    total_abs += p.abs_value;
  }
  out.value = total;
  out.abs_error = total_err;
  out.abs_integral = total_abs;
  out.evaluations = evaluations;
  out.converged = Traits::within(total_err, total_abs, opt.rel_tol, opt.abs_tol);
  return out;
}

template <typename T, typename F>
QuadratureResult<T> integrate_adaptive(F&& f, double a, double b, const AdaptiveOptions& opt = {}) {
  const std::array<double, 2> breaks{a, b};
  return integrate_adaptive<T>(std::forward<F>(f), std::span<const double>(breaks), opt);
}

}  // namespace casimir_fp
