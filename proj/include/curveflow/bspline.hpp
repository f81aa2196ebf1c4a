/**
 * @file bspline.hpp
 * @brief Periodic B-spline bases and closed planar B-spline curves.
 *
 * The knot vector is uniform with p extra knots on each side of [a, b]:
 *
 *   xi_k = a + (k - p) h,  k = 0 .. N + 2p,  h = (b - a) / N.
 *
 * The N + p ordinary B-splines N_{p,j} over this knot vector are glued into N
 * periodic functions: B_i = N_i + N_{i+N} for i < p and B_i = N_i otherwise,
 * all restricted to [a, b]. Indices are zero-based throughout.
 *
 * Basis values at zeta = b are left limits, so every parameter in [a, b]
 * belongs to exactly one span and partition of unity holds at both ends.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "curveflow/errors.hpp"
#include "curveflow/vec2.hpp"

namespace curveflow {

/// Uniform periodic knot vector over [a, b] with N spans for degree p.
class KnotVector {
 public:
  KnotVector() = default;

  [[nodiscard]] double a() const noexcept { return a_; }
  [[nodiscard]] double b() const noexcept { return b_; }
  [[nodiscard]] double h() const noexcept { return h_; }
  [[nodiscard]] int degree() const noexcept { return p_; }
  [[nodiscard]] int spans() const noexcept { return n_; }

  /// Number of ordinary (non-periodic) basis functions, N + p.
  [[nodiscard]] int basis_count() const noexcept { return n_ + p_; }

  [[nodiscard]] std::span<const double> knots() const noexcept { return knots_; }
  [[nodiscard]] double knot(int k) const { return knots_.at(static_cast<std::size_t>(k)); }

  /// Interior span index in [0, N) containing zeta; zeta = b maps to the last span.
  [[nodiscard]] int span_of(double zeta) const noexcept {
    const double t = (zeta - a_) / h_;
    int k = static_cast<int>(std::floor(t));
    if (k < 0) k = 0;
    if (k >= n_) k = n_ - 1;
    // floor() can land one span off when zeta sits on a knot up to rounding.
    if (k + 1 < n_ && zeta >= span_start(k + 1)) ++k;
    if (k > 0 && zeta < span_start(k)) --k;
    return k;
  }

  [[nodiscard]] double span_start(int k) const noexcept { return knots_[static_cast<std::size_t>(k + p_)]; }
  [[nodiscard]] double span_end(int k) const noexcept { return knots_[static_cast<std::size_t>(k + p_ + 1)]; }

  friend bool operator==(const KnotVector&, const KnotVector&) = default;

 private:
  friend KnotVector make_uniform_periodic_knots(double a, double b, int degree, int spans);

  double a_ = 0.0;
  double b_ = 1.0;
  double h_ = 1.0;
  int p_ = 0;
  int n_ = 0;
  std::vector<double> knots_;
};

/// Builds {a - p h, ..., b + p h}. Requires spans > degree >= 1 and b > a.
inline KnotVector make_uniform_periodic_knots(double a, double b, int degree, int spans) {
  if (degree < 1) throw std::invalid_argument("knot vector: degree must be >= 1");
  if (spans <= degree) {
    throw std::invalid_argument("knot vector: periodic basis needs N > p (N=" + std::to_string(spans) +
                                ", p=" + std::to_string(degree) + ")");
  }
  if (!(b > a)) throw std::invalid_argument("knot vector: domain requires b > a");

  KnotVector kv;
  kv.a_ = a;
  kv.b_ = b;
  kv.p_ = degree;
  kv.n_ = spans;
  kv.h_ = (b - a) / spans;
  const int count = spans + 2 * degree + 1;
  kv.knots_.resize(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    kv.knots_[static_cast<std::size_t>(k)] = a + (k - degree) * kv.h_;
  }
  // Pin the domain ends so that span boundaries at a and b are exact.
  kv.knots_[static_cast<std::size_t>(degree)] = a;
  kv.knots_[static_cast<std::size_t>(degree + spans)] = b;
  return kv;
}

namespace detail {

inline double knot_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

// Degree-0 characteristic function; right-open except at the domain end b.
inline double indicator(const KnotVector& kv, int j, double zeta) {
  const double lo = kv.knot(j);
  const double hi = kv.knot(j + 1);
  if (zeta == kv.b()) return (lo < zeta && zeta <= hi) ? 1.0 : 0.0;
  return (lo <= zeta && zeta < hi) ? 1.0 : 0.0;
}

inline double cox_de_boor(const KnotVector& kv, int degree, int j, double zeta, int order) {
  if (order == 0) {
    if (degree == 0) return indicator(kv, j, zeta);
    const double left = knot_ratio(zeta - kv.knot(j), kv.knot(j + degree) - kv.knot(j));
    const double right =
        knot_ratio(kv.knot(j + degree + 1) - zeta, kv.knot(j + degree + 1) - kv.knot(j + 1));
    double v = 0.0;
    if (left != 0.0) v += left * cox_de_boor(kv, degree - 1, j, zeta, 0);
    if (right != 0.0) v += right * cox_de_boor(kv, degree - 1, j + 1, zeta, 0);
    return v;
  }
  const double lw = knot_ratio(degree, kv.knot(j + degree) - kv.knot(j));
  const double rw = knot_ratio(degree, kv.knot(j + degree + 1) - kv.knot(j + 1));
  double v = 0.0;
  if (lw != 0.0) v += lw * cox_de_boor(kv, degree - 1, j, zeta, order - 1);
  if (rw != 0.0) v -= rw * cox_de_boor(kv, degree - 1, j + 1, zeta, order - 1);
  return v;
}

}  // namespace detail

/// (d/dzeta)^order of the ordinary basis N_{p,j}, j in [0, N + p), at any real zeta.
inline double basis_eval(const KnotVector& kv, int j, double zeta, int order) {
  if (order < 0 || order > kv.degree()) {
    throw std::invalid_argument("basis_eval: derivative order must lie in [0, p]");
  }
  if (j < 0 || j >= kv.basis_count()) throw std::out_of_range("basis_eval: basis index out of range");
  return detail::cox_de_boor(kv, kv.degree(), j, zeta, order);
}

/// (d/dzeta)^order of the periodic basis B_{p,i}, i in [0, N), at zeta in [a, b].
inline double periodic_basis_eval(const KnotVector& kv, int i, double zeta, int order) {
  if (i < 0 || i >= kv.spans()) throw std::out_of_range("periodic_basis_eval: index out of range");
  if (zeta < kv.a() || zeta > kv.b()) {
    throw std::invalid_argument("periodic_basis_eval: zeta outside [a, b]");
  }
  double v = basis_eval(kv, i, zeta, order);
  if (i < kv.degree()) v += basis_eval(kv, i + kv.spans(), zeta, order);
  return v;
}

/// Derivatives 0..max_order of the p+1 basis functions that are nonzero on one span.
///
/// value(k, r) belongs to periodic basis index (span + r) mod N.
class SpanBasis {
 public:
  SpanBasis() = default;

  SpanBasis(const KnotVector& kv, double zeta, int max_order) { evaluate(kv, zeta, max_order); }

  [[nodiscard]] int span() const noexcept { return span_; }
  [[nodiscard]] int max_order() const noexcept { return orders_ - 1; }
  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] double value(int order, int r) const noexcept {
    return ders_[static_cast<std::size_t>(order * width_ + r)];
  }
  [[nodiscard]] int periodic_index(int r, int spans) const noexcept { return (span_ + r) % spans; }

 private:
  // Derivatives of the nonzero basis functions (Piegl & Tiller, A2.3).
  void evaluate(const KnotVector& kv, double zeta, int max_order) {
    const int p = kv.degree();
    if (max_order < 0) throw std::invalid_argument("SpanBasis: negative derivative order");
    span_ = kv.span_of(zeta);
    width_ = p + 1;
    orders_ = max_order + 1;
    ders_.assign(static_cast<std::size_t>(orders_ * width_), 0.0);

    const auto U = kv.knots();
    const int s = span_ + p;
    std::vector<double> ndu(static_cast<std::size_t>(width_ * width_), 0.0);
    auto NDU = [&](int r, int c) -> double& { return ndu[static_cast<std::size_t>(r * width_ + c)]; };
    std::vector<double> left(static_cast<std::size_t>(width_), 0.0);
    std::vector<double> right(static_cast<std::size_t>(width_), 0.0);

    NDU(0, 0) = 1.0;
    for (int j = 1; j <= p; ++j) {
      left[j] = zeta - U[s + 1 - j];
      right[j] = U[s + j] - zeta;
      double saved = 0.0;
      for (int r = 0; r < j; ++r) {
        NDU(j, r) = right[r + 1] + left[j - r];
        const double temp = NDU(r, j - 1) / NDU(j, r);
        NDU(r, j) = saved + right[r + 1] * temp;
        saved = left[j - r] * temp;
      }
      NDU(j, j) = saved;
    }
    for (int j = 0; j <= p; ++j) at(0, j) = NDU(j, p);

    const int top = std::min(max_order, p);
    std::vector<double> a(static_cast<std::size_t>(2 * width_), 0.0);
    auto A = [&](int row, int c) -> double& { return a[static_cast<std::size_t>(row * width_ + c)]; };
    for (int r = 0; r <= p; ++r) {
      int s1 = 0;
      int s2 = 1;
      A(0, 0) = 1.0;
      for (int k = 1; k <= top; ++k) {
        double d = 0.0;
        const int rk = r - k;
        const int pk = p - k;
        if (r >= k) {
          A(s2, 0) = A(s1, 0) / NDU(pk + 1, rk);
          d = A(s2, 0) * NDU(rk, pk);
        }
        const int j1 = rk >= -1 ? 1 : -rk;
        const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
        for (int j = j1; j <= j2; ++j) {
          A(s2, j) = (A(s1, j) - A(s1, j - 1)) / NDU(pk + 1, rk + j);
          d += A(s2, j) * NDU(rk + j, pk);
        }
        if (r <= pk) {
          A(s2, k) = -A(s1, k - 1) / NDU(pk + 1, r);
          d += A(s2, k) * NDU(r, pk);
        }
        at(k, r) = d;
        std::swap(s1, s2);
      }
    }
    double factor = p;
    for (int k = 1; k <= top; ++k) {
      for (int j = 0; j <= p; ++j) at(k, j) *= factor;
      factor *= (p - k);
    }
  }

  double& at(int order, int r) { return ders_[static_cast<std::size_t>(order * width_ + r)]; }

  int span_ = 0;
  int width_ = 0;
  int orders_ = 0;
  std::vector<double> ders_;
};

/// Closed curve u(zeta) = sum_i B_{p,i}(zeta) P_i with N control points.
class ClosedBSplineCurve {
 public:
  ClosedBSplineCurve() = default;

  ClosedBSplineCurve(KnotVector knots, std::vector<Vec2> control_points)
      : knots_(std::move(knots)), points_(std::move(control_points)) {
    if (static_cast<int>(points_.size()) != knots_.spans()) {
      throw std::invalid_argument("closed curve: need exactly N control points (N=" +
                                  std::to_string(knots_.spans()) + ", got " +
                                  std::to_string(points_.size()) + ")");
    }
  }

  /// Uniform periodic knots over [0, 1].
  static ClosedBSplineCurve on_unit_interval(int degree, std::vector<Vec2> control_points) {
    const int n = static_cast<int>(control_points.size());
    return {make_uniform_periodic_knots(0.0, 1.0, degree, n), std::move(control_points)};
  }

  [[nodiscard]] const KnotVector& knots() const noexcept { return knots_; }
  [[nodiscard]] int degree() const noexcept { return knots_.degree(); }
  [[nodiscard]] int size() const noexcept { return static_cast<int>(points_.size()); }
  [[nodiscard]] std::span<const Vec2> control_points() const noexcept { return points_; }
  [[nodiscard]] const Vec2& control_point(int i) const { return points_.at(static_cast<std::size_t>(i)); }

  /// Same knots, new control points.
  [[nodiscard]] ClosedBSplineCurve with_points(std::vector<Vec2> pts) const {
    return {knots_, std::move(pts)};
  }

 private:
  KnotVector knots_;
  std::vector<Vec2> points_;
};

/// Combines precomputed span basis values with control points.
inline Vec2 combine(const ClosedBSplineCurve& curve, const SpanBasis& basis, int order) {
  Vec2 out;
  if (order > basis.max_order()) return out;
  const auto pts = curve.control_points();
  const int n = curve.size();
  for (int r = 0; r < basis.width(); ++r) {
    out += basis.value(order, r) * pts[static_cast<std::size_t>(basis.periodic_index(r, n))];
  }
  return out;
}

/// (d/dzeta)^order u(zeta). Orders above p return the zero vector.
inline Vec2 curve_eval(const ClosedBSplineCurve& curve, double zeta, int order) {
  const auto& kv = curve.knots();
  if (order < 0) throw std::invalid_argument("curve_eval: negative derivative order");
  if (order > kv.degree()) return {};
  const SpanBasis basis(kv, zeta, order);
  return combine(curve, basis, order);
}

/// Point value, first and second parameter derivatives of a curve at one parameter.
struct CurveJet {
  Vec2 position;
  Vec2 d1;
  Vec2 d2;
};

/// Relative size of |u_zeta| below which a parametrization counts as degenerate.
inline constexpr double kRegularityFloor = 1e-10;

/// Bounding-box diagonal of the control polygon.
inline double length_scale(std::span<const Vec2> pts) {
  if (pts.empty()) return 0.0;
  Vec2 lo = pts.front();
  Vec2 hi = pts.front();
  for (const auto& q : pts) {
    lo = {std::min(lo.x, q.x), std::min(lo.y, q.y)};
    hi = {std::max(hi.x, q.x), std::max(hi.y, q.y)};
  }
  return norm(hi - lo);
}

inline double length_scale(const ClosedBSplineCurve& curve) { return length_scale(curve.control_points()); }

inline void require_regular(const CurveJet& jet, double scale, double zeta) {
  if (!(scale > 0.0) || !(norm(jet.d1) > kRegularityFloor * scale)) {
    throw DegenerateCurveError("degenerate parametrization: |u_zeta| = " + std::to_string(norm(jet.d1)) +
                               " at zeta = " + std::to_string(zeta));
  }
}

inline CurveJet jet_from_basis(const ClosedBSplineCurve& curve, const SpanBasis& basis) {
  return {combine(curve, basis, 0), combine(curve, basis, 1), combine(curve, basis, 2)};
}

/// Jet (u, u_zeta, u_zetazeta) at zeta. Throws DegenerateCurveError when |u_zeta| is below the floor.
inline CurveJet jet_at(const ClosedBSplineCurve& curve, double zeta) {
  if (curve.degree() < 3) throw std::invalid_argument("jet_at: need p >= 3 for a continuous u_zetazeta");
  const SpanBasis basis(curve.knots(), zeta, 2);
  const CurveJet jet = jet_from_basis(curve, basis);
  require_regular(jet, length_scale(curve), zeta);
  return jet;
}

struct FitResult {
  ClosedBSplineCurve curve;
  double rms_residual = 0.0;
  double max_residual = 0.0;
};

/// Least-squares closed curve through samples taken at zeta_k = a + (k / M)(b - a).
inline FitResult fit_closed_curve(std::span<const Vec2> samples, int degree, int spans, double a = 0.0,
                                  double b = 1.0) {
  const int m = static_cast<int>(samples.size());
  if (m < spans) {
    throw std::invalid_argument("fit_closed_curve: need at least N samples (M=" + std::to_string(m) +
                                ", N=" + std::to_string(spans) + ")");
  }
  const KnotVector kv = make_uniform_periodic_knots(a, b, degree, spans);

  // Samples spread along a line (or a single point) give no closed curve.
  Vec2 mean;
  for (const auto& s : samples) mean += s;
  mean = mean / m;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& s : samples) {
    const Vec2 d = s - mean;
    sxx += d.x * d.x;
    syy += d.y * d.y;
    sxy += d.x * d.y;
  }
  const double trace = sxx + syy;
  const double det = sxx * syy - sxy * sxy;
  if (!(trace > 0.0) || det <= 1e-12 * trace * trace) {
    throw std::invalid_argument("fit_closed_curve: samples are collinear or coincident");
  }

  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(spans, spans);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(spans, 2);
  std::vector<SpanBasis> rows;
  rows.reserve(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    const double zeta = a + (b - a) * static_cast<double>(k) / m;
    rows.emplace_back(kv, zeta, 0);
    const SpanBasis& row = rows.back();
    for (int r = 0; r < row.width(); ++r) {
      const int i = row.periodic_index(r, spans);
      rhs(i, 0) += row.value(0, r) * samples[static_cast<std::size_t>(k)].x;
      rhs(i, 1) += row.value(0, r) * samples[static_cast<std::size_t>(k)].y;
      for (int c = 0; c < row.width(); ++c) {
        normal(i, row.periodic_index(c, spans)) += row.value(0, r) * row.value(0, c);
      }
    }
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 1e-13 * ldlt.vectorD().maxCoeff()) {
    throw std::invalid_argument("fit_closed_curve: singular normal system");
  }
  const Eigen::MatrixXd coef = ldlt.solve(rhs);

  std::vector<Vec2> pts(static_cast<std::size_t>(spans));
  for (int i = 0; i < spans; ++i) pts[static_cast<std::size_t>(i)] = {coef(i, 0), coef(i, 1)};
  FitResult out{ClosedBSplineCurve(kv, std::move(pts))};

  double sq = 0.0;
  for (int k = 0; k < m; ++k) {
    const double r = norm(combine(out.curve, rows[static_cast<std::size_t>(k)], 0) -
                          samples[static_cast<std::size_t>(k)]);
    sq += r * r;
    out.max_residual = std::max(out.max_residual, r);
  }
  out.rms_residual = std::sqrt(sq / m);
  return out;
}

}  // namespace curveflow
