// Reference implementations used to check the library. Nothing here calls into
// the code under test except for plain data types.
#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "curveflow/vec2.hpp"

namespace oracle {

using curveflow::Vec2;

/// Knot xi_k = a + (k - p) h of the uniform periodic knot vector, 0-based.
inline double knot(double a, double b, int p, int n, int k) { return a + (k - p) * (b - a) / n; }

/// Textbook Cox-de Boor recursion, derivatives by the difference formula.
inline double bspline(double a, double b, int p_top, int n, int i, int p, double x, int order) {
  auto xi = [&](int k) { return knot(a, b, p_top, n, k); };
  if (order > 0) {
    if (p == 0) return 0.0;
    const double l = p / (xi(i + p) - xi(i));
    const double r = p / (xi(i + p + 1) - xi(i + 1));
    return l * bspline(a, b, p_top, n, i, p - 1, x, order - 1) - r * bspline(a, b, p_top, n, i + 1, p - 1, x, order - 1);
  }
  if (p == 0) {
    const double lo = xi(i);
    const double hi = xi(i + 1);
    // The last interior span is closed on the right so that x = b is covered.
    if (x >= lo && x < hi) return 1.0;
    if (x == b && hi == b) return 1.0;
    return 0.0;
  }
  const double w1 = (x - xi(i)) / (xi(i + p) - xi(i));
  const double w2 = (xi(i + p + 1) - x) / (xi(i + p + 1) - xi(i + 1));
  return w1 * bspline(a, b, p_top, n, i, p - 1, x, 0) + w2 * bspline(a, b, p_top, n, i + 1, p - 1, x, 0);
}

/// Periodic basis B_i = N_i + N_{i+N} for i < p.
inline double periodic(double a, double b, int p, int n, int i, double x, int order) {
  double v = bspline(a, b, p, n, i, p, x, order);
  if (i < p) v += bspline(a, b, p, n, i + n, p, x, order);
  return v;
}

inline Vec2 curve(const std::vector<Vec2>& pts, int p, double x, int order) {
  const int n = static_cast<int>(pts.size());
  Vec2 s{};
  for (int i = 0; i < n; ++i) s += periodic(0.0, 1.0, p, n, i, x, order) * pts[static_cast<std::size_t>(i)];
  return s;
}

/// Classical gradient of the elastic density with respect to u_zeta and u_zetazeta.
struct ElasticGradient {
  Vec2 d1;
  Vec2 d2;
};

inline double elastic_density(Vec2 d1, Vec2 d2, double eps) {
  const double s = std::hypot(d1.x, d1.y);
  const double det = d1.x * d2.y - d1.y * d2.x;
  return eps * eps * det * det / std::pow(s, 5) + s;
}

inline ElasticGradient elastic_gradient(Vec2 d1, Vec2 d2, double eps) {
  const double s = std::hypot(d1.x, d1.y);
  const double det = d1.x * d2.y - d1.y * d2.x;
  const double e2 = eps * eps;
  const double s5 = std::pow(s, 5);
  const double s7 = std::pow(s, 7);
  // d det / d d1 = (d2.y, -d2.x); d det / d d2 = (-d1.y, d1.x)
  ElasticGradient g;
  g.d1 = e2 * (2.0 * det / s5) * Vec2{d2.y, -d2.x} - e2 * (5.0 * det * det / s7) * d1 + d1 / s;
  g.d2 = e2 * (2.0 * det / s5) * Vec2{-d1.y, d1.x};
  return g;
}

/// Mean radius of a circle under elastic flow: r' = -(1/r)(1 - eps^2 / r^2), classical RK4.
inline double circle_radius(double r0, double eps, double t, int steps) {
  auto f = [eps](double r) { return -(1.0 / r) * (1.0 - eps * eps / (r * r)); };
  const double h = t / steps;
  double r = r0;
  for (int k = 0; k < steps; ++k) {
    const double k1 = f(r);
    const double k2 = f(r + 0.5 * h * k1);
    const double k3 = f(r + 0.5 * h * k2);
    const double k4 = f(r + h * k3);
    r += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
  }
  return r;
}

/// Mean distance from the centroid of points sampled densely along a closed curve.
struct RadiusStats {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
};

inline RadiusStats radius_stats(const std::vector<Vec2>& pts) {
  Vec2 c{};
  for (const auto& p : pts) c += p;
  c = c / static_cast<double>(pts.size());
  RadiusStats st{0.0, INFINITY, 0.0};
  for (const auto& p : pts) {
    const double r = std::hypot(p.x - c.x, p.y - c.y);
    st.mean += r;
    st.min = std::min(st.min, r);
    st.max = std::max(st.max, r);
  }
  st.mean /= static_cast<double>(pts.size());
  return st;
}

inline std::vector<Vec2> circle_points(int count, double radius, Vec2 center = {}) {
  std::vector<Vec2> out;
  for (int k = 0; k < count; ++k) {
    const double t = 2.0 * std::numbers::pi * k / count;
    out.push_back(center + radius * Vec2{std::cos(t), std::sin(t)});
  }
  return out;
}

}  // namespace oracle
