#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "curveflow/bspline.hpp"
#include "curveflow/vec2.hpp"

namespace curveflow {

/// Closed parametric curve theta in [0, 2 pi) -> R^2.
using ParametricCurve = std::function<Vec2(double)>;

/// One named initial geometry. Turning number is that of the parametric curve.
struct ShapeInfo {
  std::string name;
  std::string description;
  int turning_number;
  ParametricCurve curve;
};

/// Term c e^{i (k theta + phase)} of a trigonometric curve.
struct TrigTerm {
  int k;
  double c;
  double phase;
};

namespace shapes {

inline Vec2 circle(double theta) { return {std::cos(theta), std::sin(theta)}; }

/// Lemniscate of Gerono with the right loop shrunk and the left loop enlarged.
inline Vec2 lopsided_eight(double theta) {
  const double x = std::cos(theta);
  const double y = std::sin(theta) * std::cos(theta);
  const double s = 1.0 - 0.3 * x;
  return {x * s, y * s};
}

/// Limacon r = 1/2 + cos(theta): a large loop with a small inner loop.
inline Vec2 limacon(double theta) {
  const double r = 0.5 + std::cos(theta);
  return {r * std::cos(theta), r * std::sin(theta)};
}

inline ParametricCurve trig_curve(std::vector<TrigTerm> terms, double scale = 1.0) {
  return [terms = std::move(terms), scale](double theta) {
    Vec2 z{};
    for (const auto& t : terms) {
      const double a = t.k * theta + t.phase;
      z += t.c * Vec2{std::cos(a), std::sin(a)};
    }
    return scale * z;
  };
}

/// Turning number 1 with two self-crossings; both crossings pinch off under elastic flow.
inline ParametricCurve crossed_loop() {
  return trig_curve({{1, 1.0, 0.0}, {-2, 0.73, 1.54}, {3, 0.58, 4.83}}, 0.7);
}

/// Lemniscate of Gerono with two extra modes that add three crossings; turning number 0.
inline ParametricCurve looped_eight() {
  return trig_curve({{1, 1.975, 0.0},
                     {-1, 1.975, 0.0},
                     {2, 0.9875, 0.0},
                     {-2, 0.9875, std::numbers::pi},
                     {-3, 0.8848, 2.83},
                     {3, 0.9796, 2.08}});
}

/// Unit circle with three extra modes that add self-crossings; turning number 1.
inline ParametricCurve looped_circle() {
  return trig_curve({{1, 2.19, 0.0}, {-2, 0.7096, 3.5}, {4, 1.0972, 2.6}, {-2, 1.1476, 3.94}});
}

}  // namespace shapes

inline const std::vector<ShapeInfo>& shape_library() {
  static const std::vector<ShapeInfo> lib = {
      {"circle", "unit circle", 1, shapes::circle},
      {"figure_eight", "lemniscate of Gerono scaled by 1 - 0.3 x", 0, shapes::lopsided_eight},
      {"double_loop", "limacon r = 1/2 + cos(theta)", 2, shapes::limacon},
      {"looped_eight", "figure eight carrying extra loops", 0, shapes::looped_eight()},
      {"looped_circle", "circle carrying extra loops", 1, shapes::looped_circle()},
      {"crossed_loop", "0.7 (e^{it} + 0.73 e^{i(-2t+1.54)} + 0.58 e^{i(3t+4.83)})", 1, shapes::crossed_loop()},
  };
  return lib;
}

inline std::optional<ShapeInfo> find_shape(std::string_view name) {
  for (const auto& s : shape_library()) {
    if (s.name == name) return s;
  }
  return std::nullopt;
}

/// Samples `count` points of a parametric curve at uniform theta.
inline std::vector<Vec2> sample_curve(const ParametricCurve& f, int count, double scale = 1.0,
                                      Vec2 center = {}) {
  if (count < 1) throw std::invalid_argument("sample_curve: count must be positive");
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / count;
    out.push_back(center + scale * f(theta));
  }
  return out;
}

/// Least-squares closed B-spline of a parametric curve on [0, 1].
inline ClosedBSplineCurve fit_parametric(const ParametricCurve& f, int degree, int spans, double scale = 1.0,
                                         Vec2 center = {}) {
  const int samples = std::max(400, 20 * spans);
  const auto pts = sample_curve(f, samples, scale, center);
  return fit_closed_curve(pts, degree, spans).curve;
}

}  // namespace curveflow
