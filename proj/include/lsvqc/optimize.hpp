#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "error.hpp"

namespace lsvqc {

using Objective = std::function<double(const std::vector<double>&)>;
using Gradient = std::function<std::vector<double>(const std::vector<double>&)>;

struct BfgsOptions {
  double fd_step = 1e-5;
  int max_iter = 1000;
  double gtol = 1e-8;  // on the max-norm of the gradient
  // Random-perturbation restarts, used only when a run ends above the threshold.
  int restarts = 0;
  double restart_threshold = 0.0;
  double restart_scale = 1e-2;
  std::uint64_t seed = 0;
};

enum class OptStatus { gtol, line_search, max_iter };

inline std::string to_string(OptStatus s) {
  switch (s) {
    case OptStatus::gtol: return "gtol";
    case OptStatus::line_search: return "line_search";
    case OptStatus::max_iter: return "max_iter";
  }
  return "?";
}

struct OptimizeResult {
  std::vector<double> x;
  double f = 0.0;
  std::vector<double> trace;  // f after each accepted step, trace[0] = f(x0)
  int iterations = 0;
  long evaluations = 0;
  double grad_norm = 0.0;
  OptStatus status = OptStatus::max_iter;
  int restarts_used = 0;
};

/// Central differences with step h.
inline std::vector<double> fd_gradient(const Objective& f, std::vector<double> x, double h, long* evals = nullptr) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double x0 = x[i];
    x[i] = x0 + h;
    const double fp = f(x);
    x[i] = x0 - h;
    const double fm = f(x);
    x[i] = x0;
    g[i] = (fp - fm) / (2 * h);
  }
  if (evals) *evals += 2 * static_cast<long>(x.size());
  return g;
}

namespace detail {

using Vec = Eigen::VectorXd;

inline Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }
inline std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

struct LinePoint {
  double a = 0, f = 0, d = 0;
  Vec g;
};

// Minimizer of the quadratic through (a,fa) with slope da at a and value fb at b.
inline double quad_min(double a, double fa, double da, double b, double fb) {
  const double db = b - a;
  const double c = (fb - fa - da * db) / (db * db);
  if (!(c > 0)) return std::numeric_limits<double>::quiet_NaN();
  return a - da / (2 * c);
}

// Strong-Wolfe line search. The gradient is evaluated only at points that pass
// the sufficient-decrease test, which saves gradient calls when the gradient is
// expensive.
inline bool wolfe_search(const std::function<double(double)>& phi, const std::function<Vec(double)>& grad_at,
                         const Vec& p, const LinePoint& p0, double a1, LinePoint& out) {
  constexpr double c1 = 1e-4, c2 = 0.9;
  constexpr int max_steps = 30;
  auto eval_grad = [&](LinePoint& pt) {
    pt.g = grad_at(pt.a);
    pt.d = pt.g.dot(p);
  };
  auto zoom = [&](LinePoint lo, LinePoint hi) {
    for (int it = 0; it < max_steps; ++it) {
      double a = quad_min(lo.a, lo.f, lo.d, hi.a, hi.f);
      const double lo_b = std::min(lo.a, hi.a), hi_b = std::max(lo.a, hi.a), w = hi_b - lo_b;
      if (!std::isfinite(a) || a < lo_b + 0.1 * w || a > hi_b - 0.1 * w) a = 0.5 * (lo.a + hi.a);
      if (w < 1e-16 * std::max(1.0, hi_b)) return false;
      LinePoint pt;
      pt.a = a;
      pt.f = phi(a);
      if (pt.f > p0.f + c1 * a * p0.d || pt.f >= lo.f) {
        hi = pt;
        continue;
      }
      eval_grad(pt);
      if (std::abs(pt.d) <= -c2 * p0.d) {
        out = pt;
        return true;
      }
      if (pt.d * (hi.a - lo.a) >= 0) hi = lo;
      lo = pt;
    }
    // Accept the best sufficient-decrease point found, if any.
    if (lo.a > 0 && lo.f < p0.f) {
      out = lo;
      return true;
    }
    return false;
  };

  LinePoint prev = p0;
  double a = a1;
  for (int i = 0; i < max_steps; ++i) {
    LinePoint cur;
    cur.a = a;
    cur.f = phi(a);
    if (!std::isfinite(cur.f)) {
      a = 0.5 * (prev.a + a);
      continue;
    }
    if (cur.f > p0.f + c1 * a * p0.d || (i > 0 && cur.f >= prev.f)) return zoom(prev, cur);
    eval_grad(cur);
    if (std::abs(cur.d) <= -c2 * p0.d) {
      out = cur;
      return true;
    }
    if (cur.d >= 0) return zoom(cur, prev);
    prev = cur;
    a *= 2;
  }
  return false;
}

inline OptimizeResult bfgs_once(const Objective& f, const Gradient& grad, std::vector<double> x0,
                                const BfgsOptions& o, long& evals) {
  const auto n = static_cast<Eigen::Index>(x0.size());
  OptimizeResult r;
  Vec x = to_vec(x0);
  auto feval = [&](const Vec& v) {
    ++evals;
    const double y = f(to_std(v));
    if (!std::isfinite(y)) fail("objective returned a non-finite value");
    return y;
  };
  double fx = feval(x);
  Vec g = to_vec(grad(to_std(x)));
  r.trace.push_back(fx);
  Eigen::MatrixXd Hinv = Eigen::MatrixXd::Identity(n, n);
  double f_old = fx + g.norm() / 2;
  r.status = OptStatus::max_iter;
  int it = 0;
  for (; it < o.max_iter; ++it) {
    if (n == 0 || g.lpNorm<Eigen::Infinity>() < o.gtol) {
      r.status = OptStatus::gtol;
      break;
    }
    Vec p = -Hinv * g;
    double d0 = g.dot(p);
    if (!(d0 < 0)) {  // not a descent direction: reset the curvature model
      Hinv.setIdentity();
      p = -g;
      d0 = g.dot(p);
    }
    LinePoint p0;
    p0.f = fx;
    p0.d = d0;
    double a1 = 1.0;
    if (d0 != 0) a1 = std::min(1.0, 1.01 * 2 * (fx - f_old) / d0);
    if (!(a1 > 0)) a1 = 1.0;
    LinePoint acc;
    const bool ok = wolfe_search([&](double a) { return feval(x + a * p); },
                                 [&](double a) { return to_vec(grad(to_std(x + a * p))); }, p, p0, a1, acc);
    if (!ok) {
      r.status = OptStatus::line_search;
      break;
    }
    const Vec s = acc.a * p;
    const Vec y = acc.g - g;
    x += s;
    f_old = fx;
    fx = acc.f;
    g = acc.g;
    r.trace.push_back(fx);
    const double sy = s.dot(y);
    if (sy > 1e-300) {
      if (it == 0) Hinv *= sy / y.dot(y);
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      Hinv = (I - rho * s * y.transpose()) * Hinv * (I - rho * y * s.transpose()) + rho * s * s.transpose();
    }
  }
  r.iterations = it;
  r.x = to_std(x);
  r.f = fx;
  r.grad_norm = g.size() ? g.lpNorm<Eigen::Infinity>() : 0.0;
  return r;
}

}  // namespace detail

/// BFGS with a strong-Wolfe line search. Without an analytic gradient the
/// central-difference gradient with step o.fd_step is used.
inline OptimizeResult bfgs(const Objective& f, std::vector<double> x0, const BfgsOptions& o = {},
                           Gradient grad = nullptr) {
  long evals = 0;
  if (!grad) grad = [&](const std::vector<double>& x) { return fd_gradient(f, x, o.fd_step, &evals); };
  OptimizeResult best = detail::bfgs_once(f, grad, x0, o, evals);
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> noise(0.0, o.restart_scale);
  int used = 0;
  while (used < o.restarts && best.f > o.restart_threshold) {
    ++used;
    std::vector<double> x = best.x;
    for (auto& v : x) v += noise(rng);
    OptimizeResult r = detail::bfgs_once(f, grad, x, o, evals);
    if (r.f < best.f) {
      r.trace.insert(r.trace.begin(), best.trace.begin(), best.trace.end());
      r.iterations += best.iterations;
      best = std::move(r);
    }
  }
  best.evaluations = evals;
  best.restarts_used = used;
  return best;
}

}  // namespace lsvqc
