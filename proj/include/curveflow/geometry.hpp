#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>

#include "curveflow/bspline.hpp"
#include "curveflow/energy.hpp"
#include "curveflow/quadrature.hpp"

namespace curveflow {

/// Which curve supplies the line element |u_zeta| of the mass term.
enum class LineElement { Mid, Old, New };

inline LineElement parse_line_element(const std::string& s) {
  if (s == "mid") return LineElement::Mid;
  if (s == "old") return LineElement::Old;
  if (s == "new") return LineElement::New;
  throw std::invalid_argument("line_element must be \"mid\", \"old\" or \"new\", got \"" + s + "\"");
}

inline std::string to_string(LineElement e) {
  switch (e) {
    case LineElement::Old: return "old";
    case LineElement::New: return "new";
    case LineElement::Mid: break;
  }
  return "mid";
}

/// |u_zeta| of the chosen curve; Mid uses (u_new + u_old) / 2.
inline double line_element_speed(const Vec2& new_d1, const Vec2& old_d1, LineElement e) {
  switch (e) {
    case LineElement::Old: return norm(old_d1);
    case LineElement::New: return norm(new_d1);
    case LineElement::Mid: break;
  }
  return norm(0.5 * (new_d1 + old_d1));
}

inline double signed_curvature(const CurveJet& jet) {
  const double speed = norm(jet.d1);
  if (!(speed > 0.0)) throw DegenerateCurveError("signed_curvature: |u_zeta| = 0");
  return cross(jet.d1, jet.d2) / (speed * speed * speed);
}

inline double curve_length(const ClosedBSplineCurve& curve, const NodeTable& table) {
  double total = 0.0;
  for (const auto& node : table.nodes()) total += node.weight * norm(combine(curve, node.basis, 1));
  return total;
}

/// int kappa^2 ds = int_0^1 det(u', u'')^2 / |u'|^5 dzeta
inline double bending_energy(const ClosedBSplineCurve& curve, const NodeTable& table) {
  const double scale = length_scale(curve);
  double total = 0.0;
  for (const auto& node : table.nodes()) {
    const CurveJet jet = jet_from_basis(curve, node.basis);
    require_regular(jet, scale, node.zeta);
    const double s = norm(jet.d1);
    const double det = cross(jet.d1, jet.d2);
    total += node.weight * det * det / (s * s * s * s * s);
  }
  return total;
}

inline double bending_energy(const ClosedBSplineCurve& curve, const QuadratureRule& rule) {
  return bending_energy(curve, NodeTable(curve.knots(), rule));
}

struct TurningNumber {
  int value = 0;
  double raw = 0.0;
  bool integral = true;  ///< raw within 1e-3 of value
};

inline constexpr double kTurningTolerance = 1e-3;

/// (1 / 2 pi) int kappa ds, rounded; the unrounded value is kept for diagnostics.
inline TurningNumber turning_number(const ClosedBSplineCurve& curve, const NodeTable& table) {
  const double scale = length_scale(curve);
  double total = 0.0;
  for (const auto& node : table.nodes()) {
    const CurveJet jet = jet_from_basis(curve, node.basis);
    require_regular(jet, scale, node.zeta);
    total += node.weight * cross(jet.d1, jet.d2) / norm2(jet.d1);
  }
  TurningNumber out;
  out.raw = total / (2.0 * std::numbers::pi);
  out.value = static_cast<int>(std::lround(out.raw));
  out.integral = std::abs(out.raw - out.value) <= kTurningTolerance;
  return out;
}

inline TurningNumber turning_number(const ClosedBSplineCurve& curve, const QuadratureRule& rule) {
  return turning_number(curve, NodeTable(curve.knots(), rule));
}

/// Both sides of the discrete dissipation identity for one step.
struct DissipationAudit {
  double lhs = 0.0;  ///< (E[u_new] - E[u_old]) / dt
  double rhs = 0.0;  ///< -int |line element| |(u_new - u_old) / dt|^2 dzeta
};

template <EnergyDensity D>
DissipationAudit dissipation_audit(const ClosedBSplineCurve& u_old, const ClosedBSplineCurve& u_new, double dt,
                                   const D& density, const NodeTable& table,
                                   LineElement line = LineElement::Mid) {
  if (!(u_old.knots() == u_new.knots())) {
    throw std::invalid_argument("dissipation_audit: curves live in different spline spaces");
  }
  const double e_old = total_energy(u_old, density, table);
  const double e_new = total_energy(u_new, density, table);
  double mass = 0.0;
  for (const auto& node : table.nodes()) {
    const Vec2 vel = (combine(u_new, node.basis, 0) - combine(u_old, node.basis, 0)) / dt;
    const double speed =
        line_element_speed(combine(u_new, node.basis, 1), combine(u_old, node.basis, 1), line);
    mass += node.weight * speed * norm2(vel);
  }
  return {(e_new - e_old) / dt, -mass};
}

inline DissipationAudit dissipation_audit(const ClosedBSplineCurve& u_old, const ClosedBSplineCurve& u_new,
                                          double dt, const EnergyModel& model, const QuadratureRule& rule,
                                          LineElement line = LineElement::Mid) {
  const NodeTable table(u_old.knots(), rule);
  return std::visit([&](const auto& d) { return dissipation_audit(u_old, u_new, dt, d, table, line); }, model);
}

/// Smallest distance between cyclically adjacent control points.
inline double min_adjacent_distance(const ClosedBSplineCurve& curve) {
  const auto pts = curve.control_points();
  const std::size_t n = pts.size();
  if (n < 2) throw std::invalid_argument("min_adjacent_distance: need at least two control points");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) best = std::min(best, norm(pts[(i + 1) % n] - pts[i]));
  return best;
}

struct CurveDiagnostics {
  double length = 0.0;
  double bending = 0.0;
  double energy = 0.0;
  TurningNumber turning;
  double min_adjacent_cp_distance = 0.0;
};

inline CurveDiagnostics diagnose(const ClosedBSplineCurve& curve, const EnergyModel& model,
                                 const QuadratureRule& rule) {
  const NodeTable table(curve.knots(), rule);
  CurveDiagnostics out;
  out.length = curve_length(curve, table);
  out.bending = bending_energy(curve, table);
  out.energy = std::visit([&](const auto& d) { return total_energy(curve, d, table); }, model);
  out.turning = turning_number(curve, table);
  out.min_adjacent_cp_distance = min_adjacent_distance(curve);
  return out;
}

}  // namespace curveflow
