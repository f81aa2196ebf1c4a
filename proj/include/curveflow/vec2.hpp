#pragma once

#include <cmath>

namespace curveflow {

/// Planar vector used for points, tangents and control points.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) noexcept {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(const Vec2& o) noexcept {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2& operator*=(double s) noexcept {
    x *= s;
    y *= s;
    return *this;
  }

  constexpr double& operator[](int c) noexcept { return c == 0 ? x : y; }
  constexpr double operator[](int c) const noexcept { return c == 0 ? x : y; }

  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr Vec2 operator+(Vec2 a, const Vec2& b) noexcept { return a += b; }
constexpr Vec2 operator-(Vec2 a, const Vec2& b) noexcept { return a -= b; }
constexpr Vec2 operator-(const Vec2& a) noexcept { return {-a.x, -a.y}; }
constexpr Vec2 operator*(Vec2 a, double s) noexcept { return a *= s; }
constexpr Vec2 operator*(double s, Vec2 a) noexcept { return a *= s; }
constexpr Vec2 operator/(const Vec2& a, double s) noexcept { return {a.x / s, a.y / s}; }

constexpr double dot(const Vec2& a, const Vec2& b) noexcept { return a.x * b.x + a.y * b.y; }

/// det(a, b) with a and b as matrix columns.
constexpr double cross(const Vec2& a, const Vec2& b) noexcept { return a.x * b.y - a.y * b.x; }

constexpr double norm2(const Vec2& a) noexcept { return dot(a, a); }
inline double norm(const Vec2& a) noexcept { return std::hypot(a.x, a.y); }

/// Counterclockwise quarter turn.
constexpr Vec2 perp(const Vec2& a) noexcept { return {-a.y, a.x}; }

inline Vec2 rotate(const Vec2& a, double angle) noexcept {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * a.x - s * a.y, s * a.x + c * a.y};
}

}  // namespace curveflow
