/**
 * @file energy.hpp
 * @brief Energy densities over curve jets and their discrete partial derivatives.
 *
 * A density G(u_zeta, u_zetazeta) defines E[u] = int_0^1 G dzeta. Its discrete
 * partial derivatives are vector functions D_j(u, v), j = 0..m, that satisfy
 *
 *   G(u) - G(v) = sum_j D_j(u, v) . (d^j u - d^j v)
 *
 * exactly (up to rounding) for every pair of jets. The dissipative time step is
 * built from these, so any new density must satisfy that identity.
 */
#pragma once

#include <array>
#include <cmath>
#include <concepts>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>

#include "curveflow/bspline.hpp"
#include "curveflow/errors.hpp"
#include "curveflow/quadrature.hpp"
#include "curveflow/vec2.hpp"

namespace curveflow {

/// D_j for j = 0..2; unused orders hold the zero vector.
struct DiscretePartials {
  std::array<Vec2, 3> by_order{};

  [[nodiscard]] const Vec2& operator[](int j) const { return by_order[static_cast<std::size_t>(j)]; }
  Vec2& operator[](int j) { return by_order[static_cast<std::size_t>(j)]; }
};

/// sum_j D_j . (d^j u - d^j v)
inline double chain_rule_pairing(const DiscretePartials& d, const CurveJet& u, const CurveJet& v) {
  return dot(d[0], u.position - v.position) + dot(d[1], u.d1 - v.d1) + dot(d[2], u.d2 - v.d2);
}

inline double length_density(const CurveJet& jet) { return norm(jet.d1); }

/// eps^2 det(u', u'')^2 / |u'|^5 + |u'|
inline double elastic_density(const CurveJet& jet, double epsilon) {
  const double speed = norm(jet.d1);
  if (!(speed > 0.0)) throw DegenerateCurveError("elastic_density: |u_zeta| = 0");
  const double det = cross(jet.d1, jet.d2);
  const double s2 = speed * speed;
  return epsilon * epsilon * det * det / (s2 * s2 * speed) + speed;
}

/// (u' + v') / (|u'| + |v'|) at order 1.
inline DiscretePartials length_discrete_partials(const CurveJet& u, const CurveJet& v) {
  const double denom = norm(u.d1) + norm(v.d1);
  if (!(denom > 0.0)) throw DegenerateCurveError("length partials: both tangents vanish");
  DiscretePartials out;
  out[1] = (u.d1 + v.d1) / denom;
  return out;
}

/// Length partials plus eps^2 times the partials of det(u',u'')^2 / |u'|^5.
///
/// Uses the splitting
///   G1(u) - G1(v) = (det_u^2 - det_v^2) / |u'|^5 + det_v^2 (|u'|^-5 - |v'|^-5),
/// with det_u^2 - det_v^2 = (det_u + det_v) [v2''(u1'-v1') - v1''(u2'-v2')
///                                          - u2'(u1''-v1'') + u1'(u2''-v2'')]
/// and  |u'|^-5 - |v'|^-5 = -S (u'+v').(u'-v') / (|u'|^5 |v'|^5 (|u'|^5 + |v'|^5)),
/// S = sum_{k=0..4} |u'|^(8-2k) |v'|^(2k).
inline DiscretePartials elastic_discrete_partials(const CurveJet& u, const CurveJet& v, double epsilon) {
  DiscretePartials out = length_discrete_partials(u, v);
  if (epsilon == 0.0) return out;

  const double su = norm(u.d1);
  const double sv = norm(v.d1);
  if (!(su > 0.0) || !(sv > 0.0)) throw DegenerateCurveError("elastic partials: degenerate jet");
  const double x = su * su;
  const double y = sv * sv;
  const double su5 = x * x * su;
  const double sv5 = y * y * sv;
  const double det_u = cross(u.d1, u.d2);
  const double det_v = cross(v.d1, v.d2);
  const double e2 = epsilon * epsilon;

  const double c_det = e2 * (det_u + det_v) / su5;
  // Horner form of x^4 + x^3 y + x^2 y^2 + x y^3 + y^4.
  const double s = (((x + y) * x + y * y) * x + y * y * y) * x + y * y * y * y;
  const double c_speed = e2 * det_v * det_v * s / (su5 * sv5 * (su5 + sv5));

  out[1] += c_det * Vec2{v.d2.y, -v.d2.x} - c_speed * (u.d1 + v.d1);
  out[2] += c_det * Vec2{-u.d1.y, u.d1.x};
  return out;
}

/// Density interface shared by the flows: highest jet order, G, and D_j.
template <class D>
concept EnergyDensity = requires(const D& d, const CurveJet& jet) {
  { D::order } -> std::convertible_to<int>;
  { d.density(jet) } -> std::convertible_to<double>;
  { d.discrete_partials(jet, jet) } -> std::same_as<DiscretePartials>;
};

/// E = int ds; its flow is curvature flow.
struct LengthEnergy {
  static constexpr int order = 1;
  [[nodiscard]] double density(const CurveJet& jet) const { return length_density(jet); }
  [[nodiscard]] DiscretePartials discrete_partials(const CurveJet& u, const CurveJet& v) const {
    return length_discrete_partials(u, v);
  }
};

/// E = eps^2 int kappa^2 ds + int ds; its flow is elastic flow.
struct ElasticEnergy {
  static constexpr int order = 2;
  double epsilon = 0.1;
  [[nodiscard]] double density(const CurveJet& jet) const { return elastic_density(jet, epsilon); }
  [[nodiscard]] DiscretePartials discrete_partials(const CurveJet& u, const CurveJet& v) const {
    return elastic_discrete_partials(u, v, epsilon);
  }
};

static_assert(EnergyDensity<LengthEnergy>);
static_assert(EnergyDensity<ElasticEnergy>);

/// Runtime choice of density, as selected by a run configuration.
using EnergyModel = std::variant<LengthEnergy, ElasticEnergy>;

inline int energy_order(const EnergyModel& model) {
  return std::visit([](const auto& d) { return std::decay_t<decltype(d)>::order; }, model);
}

/// Scale parameter used by the elimination threshold; zero for the length energy.
inline double energy_scale(const EnergyModel& model) {
  if (const auto* e = std::get_if<ElasticEnergy>(&model)) return e->epsilon;
  return 0.0;
}

inline std::string energy_name(const EnergyModel& model) {
  return std::holds_alternative<LengthEnergy>(model) ? "length" : "elastic";
}

/// int_0^1 G dzeta over precomputed quadrature nodes.
template <EnergyDensity D>
double total_energy(const ClosedBSplineCurve& curve, const D& density, const NodeTable& table) {
  if (curve.degree() < D::order + 1) {
    throw std::invalid_argument("total_energy: degree must be at least m + 1");
  }
  const double scale = length_scale(curve);
  double total = 0.0;
  for (const auto& node : table.nodes()) {
    const CurveJet jet = jet_from_basis(curve, node.basis);
    require_regular(jet, scale, node.zeta);
    total += node.weight * density.density(jet);
  }
  return total;
}

template <EnergyDensity D>
double total_energy(const ClosedBSplineCurve& curve, const D& density, const QuadratureRule& rule) {
  return total_energy(curve, density, NodeTable(curve.knots(), rule));
}

inline double total_energy(const ClosedBSplineCurve& curve, const EnergyModel& model,
                           const QuadratureRule& rule) {
  return std::visit([&](const auto& d) { return total_energy(curve, d, rule); }, model);
}

}  // namespace curveflow
