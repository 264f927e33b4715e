#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <queue>
#include <vector>

#include "nlslab/errors.hpp"

namespace nlslab {

struct QuadratureConfig {
  double abs_tol = 1e-10;
  long max_evals = 1000000;  // per integrate() call
};

namespace quad_detail {

// Gauss-Kronrod 7-15 nodes/weights (positive half; QUADPACK dqk15 data).
inline constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <typename T>
inline double magnitude(const T& v) {
  return std::abs(v);
}

template <typename T, typename F>
void gk15(const F& f, double a, double b, T& kronrod, double& err) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  T fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(c - h * kXgk[i]);
    fv[14 - i] = f(c + h * kXgk[i]);
  }
  fv[7] = f(c);
  T resk = kWgk[7] * fv[7];
  T resg = kWg[3] * fv[7];
  for (int i = 0; i < 7; ++i) resk += kWgk[i] * (fv[i] + fv[14 - i]);
  for (int i = 0; i < 3; ++i) resg += kWg[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
  kronrod = h * resk;
  err = magnitude(h * (resk - resg));
}

}  // namespace quad_detail

// Globally adaptive Gauss-Kronrod on [a, b]: keeps a worst-cell heap and
// bisects until the summed error estimate meets abs_tol or the evaluation
// budget is exhausted (QuadratureBudgetExceeded).
template <typename T, typename F>
T integrate(const F& f, double a, double b, const QuadratureConfig& cfg = {}) {
  struct Cell {
    double a, b, err;
    T val;
    bool operator<(const Cell& o) const { return err < o.err; }
  };
  require(std::isfinite(a) && std::isfinite(b), ErrorCode::InvalidArgument,
          "integration limits must be finite");
  if (a == b) return T{};

  std::priority_queue<Cell> heap;
  long evals = 0;
  auto make_cell = [&](double lo, double hi) {
    Cell c{lo, hi, 0.0, T{}};
    quad_detail::gk15<T>(f, lo, hi, c.val, c.err);
    evals += 15;
    return c;
  };
  Cell first = make_cell(a, b);
  double total_err = first.err;
  T total = first.val;
  heap.push(first);
  while (total_err > cfg.abs_tol) {
    require(evals + 30 <= cfg.max_evals, ErrorCode::QuadratureBudgetExceeded,
            "quadrature budget exhausted at error " + std::to_string(total_err));
    Cell worst = heap.top();
    if (worst.err <= 0.0) break;  // only unsplittable cells remain
    heap.pop();
    if (worst.b - worst.a < 4e-16 * std::max(1.0, std::max(std::abs(worst.a), std::abs(worst.b)))) {
      total_err -= worst.err;  // accept the cell's estimate as-is
      worst.err = 0.0;
      heap.push(worst);
      continue;
    }
    const double mid = 0.5 * (worst.a + worst.b);
    Cell l = make_cell(worst.a, mid);
    Cell r = make_cell(mid, worst.b);
    total += l.val + r.val - worst.val;
    total_err += l.err + r.err - worst.err;
    heap.push(l);
    heap.push(r);
  }
  return total;
}

// integral over [a, inf) via t = a + tan(theta), theta in [0, pi/2)
template <typename T, typename F>
T integrate_to_infinity(const F& f, double a, const QuadratureConfig& cfg = {}) {
  auto g = [&](double theta) -> T {
    double c = std::cos(theta);
    if (c <= 0.0) return T{};
    double s = std::sin(theta);
    double t = a + s / c;
    double jac = 1.0 / (c * c);
    if (!std::isfinite(t) || !std::isfinite(jac)) return T{};
    return f(t) * jac;
  };
  constexpr double kHalfPi = 1.570796326794896619;
  return integrate<T>(g, 0.0, kHalfPi, cfg);
}

}  // namespace nlslab
