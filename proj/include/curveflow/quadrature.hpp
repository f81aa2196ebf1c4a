#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "curveflow/bspline.hpp"

namespace curveflow {

/// q-point rule on the reference interval [-1, 1].
struct QuadratureRule {
  int points = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline constexpr int kMaxQuadraturePoints = 32;

/// Gauss-Legendre nodes (ascending) and weights by Newton iteration on P_q.
inline QuadratureRule gauss_legendre(int q) {
  if (q < 1 || q > kMaxQuadraturePoints) {
    throw std::invalid_argument("gauss_legendre: q must lie in [1, 32], got " + std::to_string(q));
  }
  QuadratureRule rule;
  rule.points = q;
  rule.nodes.assign(static_cast<std::size_t>(q), 0.0);
  rule.weights.assign(static_cast<std::size_t>(q), 0.0);
  const int half = (q + 1) / 2;
  // P_q(x) and P_{q-1}(x) by the three-term recurrence.
  auto legendre = [q](double x) {
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= q; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    return std::pair{p1, p0};
  };
  for (int i = 0; i < half; ++i) {
    // Tricomi's initial guess for the i-th largest root.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [pq, pm] = legendre(x);
      const double dx = pq / (q * (x * pq - pm) / (x * x - 1.0));
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const auto [pq, pm] = legendre(x);
    const double dp = q * (x * pq - pm) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[static_cast<std::size_t>(q - 1 - i)] = x;
    rule.nodes[static_cast<std::size_t>(i)] = -x;
    rule.weights[static_cast<std::size_t>(q - 1 - i)] = w;
    rule.weights[static_cast<std::size_t>(i)] = w;
  }
  if (q % 2 == 1) rule.nodes[static_cast<std::size_t>(q / 2)] = 0.0;
  return rule;
}

/// Parameter of reference node g mapped into span k.
inline double span_node(const KnotVector& kv, const QuadratureRule& rule, int k, int g) {
  const double lo = kv.span_start(k);
  const double hi = kv.span_end(k);
  return 0.5 * (lo + hi) + 0.5 * (hi - lo) * rule.nodes[static_cast<std::size_t>(g)];
}

inline double span_weight(const KnotVector& kv, const QuadratureRule& rule, int k, int g) {
  return 0.5 * (kv.span_end(k) - kv.span_start(k)) * rule.weights[static_cast<std::size_t>(g)];
}

/// Sum over the N interior spans of the mapped rule. f is never evaluated on a knot.
template <class F>
double integrate_spans(F&& f, const KnotVector& kv, const QuadratureRule& rule) {
  double total = 0.0;
  for (int k = 0; k < kv.spans(); ++k) {
    double part = 0.0;
    for (int g = 0; g < rule.points; ++g) {
      part += span_weight(kv, rule, k, g) * f(span_node(kv, rule, k, g));
    }
    total += part;
  }
  return total;
}

/// Basis derivatives (orders 0..2) at every quadrature node of a knot vector.
///
/// Reused by energy, residual and diagnostic integrals, all of which sweep the
/// same nodes.
class NodeTable {
 public:
  struct Node {
    double zeta = 0.0;
    double weight = 0.0;
    SpanBasis basis;
  };

  NodeTable(const KnotVector& kv, const QuadratureRule& rule) : knots_(kv), rule_(rule) {
    const int orders = std::min(2, kv.degree());
    nodes_.reserve(static_cast<std::size_t>(kv.spans() * rule.points));
    for (int k = 0; k < kv.spans(); ++k) {
      for (int g = 0; g < rule.points; ++g) {
        const double z = span_node(kv, rule, k, g);
        nodes_.push_back({z, span_weight(kv, rule, k, g), SpanBasis(kv, z, orders)});
      }
    }
  }

  [[nodiscard]] const KnotVector& knots() const noexcept { return knots_; }
  [[nodiscard]] const QuadratureRule& rule() const noexcept { return rule_; }
  [[nodiscard]] const std::vector<Node>& nodes() const noexcept { return nodes_; }

  /// Nodes belonging to span k.
  [[nodiscard]] std::span<const Node> span_nodes(int k) const {
    return std::span<const Node>(nodes_).subspan(static_cast<std::size_t>(k * rule_.points),
                                                 static_cast<std::size_t>(rule_.points));
  }

 private:
  KnotVector knots_;
  QuadratureRule rule_;
  std::vector<Node> nodes_;
};

}  // namespace curveflow
