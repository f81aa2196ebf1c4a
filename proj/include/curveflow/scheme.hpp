/**
 * @file scheme.hpp
 * @brief Energy-dissipative time stepping for L2(ds) gradient flows of closed curves.
 *
 * One step finds control points of u_new such that, for every periodic basis
 * function B_i and component c,
 *
 *   int |line element| ((u_new - u_old) / dt)_c B_i dzeta
 *     + sum_j int D_j(u_new, u_old)_c d^j B_i dzeta = 0,
 *
 * where D_j are the discrete partials of the energy density. Testing with
 * (u_new - u_old) / dt gives (E[u_new] - E[u_old]) / dt = -int |.| |velocity|^2,
 * so every accepted step dissipates energy.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "curveflow/bspline.hpp"
#include "curveflow/energy.hpp"
#include "curveflow/errors.hpp"
#include "curveflow/geometry.hpp"
#include "curveflow/quadrature.hpp"

namespace curveflow {

struct SolverConfig {
  double tol = 1e-10;  ///< residual max-norm
  int max_iter = 50;
  int max_halvings = 30;
  LineElement line_element = LineElement::Mid;
};

/// Residual of one time step as a function of the new control points.
///
/// Unknowns are laid out as [P_0.x, P_0.y, P_1.x, ...]. Contributions are kept
/// per span so a finite-difference Jacobian column only recomputes the p + 1
/// spans that a control point touches.
template <EnergyDensity D>
class StepSystem {
 public:
  StepSystem(const ClosedBSplineCurve& u_old, double dt, const D& density, const NodeTable& table,
             LineElement line = LineElement::Mid)
      : old_(u_old), dt_(dt), density_(density), table_(table), line_(line) {
    if (!(u_old.knots() == table.knots())) {
      throw std::invalid_argument("StepSystem: quadrature table built for a different knot vector");
    }
    if (u_old.degree() < D::order + 1) {
      throw std::invalid_argument("StepSystem: degree must be at least m + 1");
    }
    if (!(dt > 0.0)) throw std::invalid_argument("StepSystem: time increment must be positive");
    scale_ = length_scale(u_old);
    const auto& nodes = table.nodes();
    old_jets_.reserve(nodes.size());
    for (const auto& node : nodes) old_jets_.push_back(jet_from_basis(u_old, node.basis));
  }

  [[nodiscard]] int spans() const noexcept { return old_.size(); }
  [[nodiscard]] int unknowns() const noexcept { return 2 * old_.size(); }
  [[nodiscard]] int width() const noexcept { return old_.degree() + 1; }

  /// Writes the 2(p+1) local entries of span k; also accumulates |term| magnitudes.
  void span_contribution(std::span<const Vec2> pts, int k, std::span<double> out,
                         std::span<double> magnitude) const {
    const int n = spans();
    const int w = width();
    std::fill(out.begin(), out.end(), 0.0);
    std::fill(magnitude.begin(), magnitude.end(), 0.0);
    const int q = table_.rule().points;
    const auto nodes = table_.span_nodes(k);
    for (int g = 0; g < q; ++g) {
      const auto& node = nodes[static_cast<std::size_t>(g)];
      const SpanBasis& basis = node.basis;
      CurveJet jet;
      for (int r = 0; r < w; ++r) {
        const Vec2& P = pts[static_cast<std::size_t>((k + r) % n)];
        jet.position += basis.value(0, r) * P;
        jet.d1 += basis.value(1, r) * P;
        if (basis.max_order() >= 2) jet.d2 += basis.value(2, r) * P;
      }
      const CurveJet& old = old_jets_[static_cast<std::size_t>(k * q + g)];
      require_regular(jet, scale_, node.zeta);
      const double speed = line_element_speed(jet.d1, old.d1, line_);
      if (!(speed > kRegularityFloor * scale_)) {
        throw DegenerateCurveError("degenerate line element at zeta = " + std::to_string(node.zeta));
      }
      const Vec2 mass = speed * (jet.position - old.position) / dt_;
      const DiscretePartials dp = density_.discrete_partials(jet, old);
      for (int r = 0; r < w; ++r) {
        for (int c = 0; c < 2; ++c) {
          double term = (mass[c] + dp[0][c]) * basis.value(0, r) + dp[1][c] * basis.value(1, r);
          // The difference quotient carries the rounding of both positions, scaled by 1/dt.
          const double mass_mag = speed * (std::abs(jet.position[c]) + std::abs(old.position[c])) / dt_;
          double mag = (mass_mag + std::abs(dp[0][c])) * std::abs(basis.value(0, r)) +
                       std::abs(dp[1][c] * basis.value(1, r));
          if (basis.max_order() >= 2) {
            term += dp[2][c] * basis.value(2, r);
            mag += std::abs(dp[2][c] * basis.value(2, r));
          }
          out[static_cast<std::size_t>(2 * r + c)] += node.weight * term;
          magnitude[static_cast<std::size_t>(2 * r + c)] += node.weight * mag;
        }
      }
    }
  }

  struct Evaluation {
    std::vector<double> residual;
    std::vector<double> local;  ///< per-span contributions, 2(p+1) per span
    double magnitude = 0.0;     ///< largest summed |term| of any residual entry
  };

  [[nodiscard]] Evaluation evaluate(std::span<const Vec2> pts) const {
    const int n = spans();
    const int w = width();
    const auto local_size = static_cast<std::size_t>(2 * w);
    Evaluation ev;
    ev.residual.assign(static_cast<std::size_t>(unknowns()), 0.0);
    ev.local.assign(static_cast<std::size_t>(n) * local_size, 0.0);
    std::vector<double> mag_local(local_size, 0.0);
    std::vector<double> mag(static_cast<std::size_t>(unknowns()), 0.0);
    for (int k = 0; k < n; ++k) {
      std::span<double> out(ev.local.data() + static_cast<std::size_t>(k) * local_size, local_size);
      span_contribution(pts, k, out, mag_local);
      for (int r = 0; r < w; ++r) {
        const int i = (k + r) % n;
        for (int c = 0; c < 2; ++c) {
          ev.residual[static_cast<std::size_t>(2 * i + c)] += out[static_cast<std::size_t>(2 * r + c)];
          mag[static_cast<std::size_t>(2 * i + c)] += mag_local[static_cast<std::size_t>(2 * r + c)];
        }
      }
    }
    ev.magnitude = *std::max_element(mag.begin(), mag.end());
    return ev;
  }

  [[nodiscard]] std::vector<double> residual(std::span<const Vec2> pts) const { return evaluate(pts).residual; }

  /// Forward-difference Jacobian, perturbing one unknown at a time.
  [[nodiscard]] Eigen::MatrixXd jacobian(std::span<const Vec2> pts, const Evaluation& base) const {
    const int n = spans();
    const int w = width();
    const auto local_size = static_cast<std::size_t>(2 * w);
    const int dim = unknowns();
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(dim, dim);
    std::vector<Vec2> work(pts.begin(), pts.end());
    std::vector<double> out(local_size);
    std::vector<double> scratch(local_size);
    const double root_eps = std::sqrt(std::numeric_limits<double>::epsilon());
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < 2; ++c) {
        const int col = 2 * i + c;
        const double x0 = work[static_cast<std::size_t>(i)][c];
        const double step = root_eps * (1.0 + std::abs(x0));
        work[static_cast<std::size_t>(i)][c] = x0 + step;
        const double actual = work[static_cast<std::size_t>(i)][c] - x0;
        for (int s = 0; s < w; ++s) {
          const int k = ((i - s) % n + n) % n;
          span_contribution(work, k, out, scratch);
          const double* ref = base.local.data() + static_cast<std::size_t>(k) * local_size;
          for (int r = 0; r < w; ++r) {
            const int row_cp = (k + r) % n;
            for (int cc = 0; cc < 2; ++cc) {
              const auto li = static_cast<std::size_t>(2 * r + cc);
              jac(2 * row_cp + cc, col) += (out[li] - ref[li]) / actual;
            }
          }
        }
        work[static_cast<std::size_t>(i)][c] = x0;
      }
    }
    return jac;
  }

 private:
  ClosedBSplineCurve old_;
  double dt_;
  D density_;
  const NodeTable& table_;
  LineElement line_;
  double scale_ = 0.0;
  std::vector<CurveJet> old_jets_;
};

/// Residual vector (2N entries, [P_0.x, P_0.y, ...]) of one step.
template <EnergyDensity D>
std::vector<double> assemble_residual(const ClosedBSplineCurve& u_new, const ClosedBSplineCurve& u_old, double dt,
                                      const D& density, const QuadratureRule& rule,
                                      LineElement line = LineElement::Mid) {
  if (!(u_new.knots() == u_old.knots())) {
    throw std::invalid_argument("assemble_residual: curves live in different spline spaces");
  }
  const NodeTable table(u_old.knots(), rule);
  return StepSystem<D>(u_old, dt, density, table, line).residual(u_new.control_points());
}

inline std::vector<double> assemble_residual(const ClosedBSplineCurve& u_new, const ClosedBSplineCurve& u_old,
                                             double dt, const EnergyModel& model, const QuadratureRule& rule,
                                             LineElement line = LineElement::Mid) {
  return std::visit([&](const auto& d) { return assemble_residual(u_new, u_old, dt, d, rule, line); }, model);
}

/// sum_j int D_j(u_new, u_old)_c d^j B_i dzeta alone, without the mass term.
template <EnergyDensity D>
std::vector<double> assemble_gradient_pairing(const ClosedBSplineCurve& u_new, const ClosedBSplineCurve& u_old,
                                              const D& density, const QuadratureRule& rule) {
  const NodeTable table(u_old.knots(), rule);
  const int n = u_old.size();
  std::vector<double> out(static_cast<std::size_t>(2 * n), 0.0);
  for (const auto& node : table.nodes()) {
    const CurveJet ju = jet_from_basis(u_new, node.basis);
    const CurveJet jv = jet_from_basis(u_old, node.basis);
    const DiscretePartials dp = density.discrete_partials(ju, jv);
    for (int r = 0; r < node.basis.width(); ++r) {
      const int i = node.basis.periodic_index(r, n);
      for (int c = 0; c < 2; ++c) {
        double term = 0.0;
        for (int j = 0; j <= std::min(D::order, node.basis.max_order()); ++j) {
          term += dp[j][c] * node.basis.value(j, r);
        }
        out[static_cast<std::size_t>(2 * i + c)] += node.weight * term;
      }
    }
  }
  return out;
}

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

struct StepResult {
  ClosedBSplineCurve curve;
  int iterations = 0;
  double residual_norm = 0.0;
};

/// Rounding noise in a residual entry relative to the size of its summed terms.
inline constexpr double kResidualRoundoffFactor = 1e3 * std::numeric_limits<double>::epsilon();

/// Solves one step by damped Newton from u_new = u_old.
template <EnergyDensity D>
StepResult solve_step(const ClosedBSplineCurve& u_old, double dt, const D& density, const NodeTable& table,
                      const SolverConfig& cfg = {}) {
  const StepSystem<D> system(u_old, dt, density, table, cfg.line_element);
  const int n = u_old.size();
  std::vector<Vec2> x(u_old.control_points().begin(), u_old.control_points().end());
  auto ev = system.evaluate(x);
  double rnorm = max_abs(ev.residual);

  for (int iter = 0; iter <= cfg.max_iter; ++iter) {
    const double target = std::max(cfg.tol, kResidualRoundoffFactor * ev.magnitude);
    if (rnorm <= target) return {u_old.with_points(std::move(x)), iter, rnorm};
    if (iter == cfg.max_iter) break;

    const Eigen::MatrixXd jac = system.jacobian(x, ev);
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
    const Eigen::Map<const Eigen::VectorXd> rvec(ev.residual.data(), static_cast<Eigen::Index>(ev.residual.size()));
    const Eigen::VectorXd delta = lu.solve(-rvec);
    if (!delta.allFinite() || !(lu.rcond() > 1e-15)) {
      throw SingularJacobianError("solve_step: Newton Jacobian is singular (rcond = " +
                                  std::to_string(lu.rcond()) + ")");
    }

    double lambda = 1.0;
    bool accepted = false;
    for (int h = 0; h <= cfg.max_halvings; ++h, lambda *= 0.5) {
      std::vector<Vec2> trial = x;
      for (int i = 0; i < n; ++i) {
        trial[static_cast<std::size_t>(i)].x += lambda * delta(2 * i);
        trial[static_cast<std::size_t>(i)].y += lambda * delta(2 * i + 1);
      }
      try {
        auto trial_ev = system.evaluate(trial);
        const double trial_norm = max_abs(trial_ev.residual);
        if (trial_norm < rnorm) {
          x = std::move(trial);
          ev = std::move(trial_ev);
          rnorm = trial_norm;
          accepted = true;
          break;
        }
      } catch (const DegenerateCurveError&) {
        // shorten the step and retry
      }
    }
    if (!accepted) {
      throw NonConvergenceError("solve_step: line search failed to reduce the residual (|R| = " +
                                std::to_string(rnorm) + ")");
    }
  }
  throw NonConvergenceError("solve_step: no convergence after " + std::to_string(cfg.max_iter) +
                            " iterations (|R| = " + std::to_string(rnorm) + ")");
}

template <EnergyDensity D>
StepResult solve_step(const ClosedBSplineCurve& u_old, double dt, const D& density, const QuadratureRule& rule,
                      const SolverConfig& cfg = {}) {
  const NodeTable table(u_old.knots(), rule);
  return solve_step(u_old, dt, density, table, cfg);
}

/// tau * min{1, 100 / int kappa^2 ds}
inline double initial_timestep(const ClosedBSplineCurve& curve, double tau, const QuadratureRule& rule) {
  if (!(tau > 0.0)) throw std::invalid_argument("initial_timestep: tau must be positive");
  const double bending = bending_energy(curve, rule);
  return bending > 0.0 ? tau * std::min(1.0, 100.0 / bending) : tau;
}

/// tau * min{1, 100 / slope^2}, slope = (E^n - E^{n-1}) / dt_{n-1}
inline double next_timestep(double prev_slope, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("next_timestep: tau must be positive");
  const double s2 = prev_slope * prev_slope;
  return s2 > 0.0 ? tau * std::min(1.0, 100.0 / s2) : tau;
}

struct EliminationRule {
  double factor = 0.1;
  double floor = 0.05;

  /// factor * max{eps, floor}
  [[nodiscard]] double threshold(double epsilon) const { return factor * std::max(epsilon, floor); }
};

struct EliminationResult {
  ClosedBSplineCurve curve;
  int removed = 0;
};

/// Removes control points closer than the threshold to their predecessor.
///
/// Pairs are scanned by index; the higher-indexed point of a violating pair is
/// dropped and the scan restarts on a rebuilt uniform knot vector with one span
/// fewer. Stops at N = p + 1.
inline EliminationResult eliminate_close_points(const ClosedBSplineCurve& curve, double epsilon,
                                                const EliminationRule& rule = {}) {
  const int p = curve.degree();
  if (curve.size() <= p + 1) {
    throw std::invalid_argument("eliminate_close_points: need N > p + 1 to remove a control point");
  }
  const double threshold = rule.threshold(epsilon);
  std::vector<Vec2> pts(curve.control_points().begin(), curve.control_points().end());
  int removed = 0;
  bool changed = true;
  while (changed && static_cast<int>(pts.size()) > p + 1) {
    changed = false;
    const std::size_t n = pts.size();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = (i + 1) % n;
      if (norm(pts[j] - pts[i]) < threshold) {
        pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(std::max(i, j)));
        ++removed;
        changed = true;
        break;
      }
    }
  }
  if (removed == 0) return {curve, 0};
  const auto& kv = curve.knots();
  const int n = static_cast<int>(pts.size());
  return {ClosedBSplineCurve(make_uniform_periodic_knots(kv.a(), kv.b(), p, n), std::move(pts)), removed};
}

struct FlowSettings {
  EnergyModel energy = ElasticEnergy{0.1};
  double tau = 0.01;
  double t_end = 1.0;
  int quadrature_points = 5;
  SolverConfig newton;
  int retry_max = 8;  ///< dt halvings after a failed step
  bool eliminate = true;
  EliminationRule elimination;
  double steady_tol = 1e-6;  ///< max control-point speed counted as steady
  int steady_count = 10;
  long max_steps = 1'000'000;
};

/// State recorded after every accepted step (and once for the initial curve).
struct Frame {
  long n = 0;
  double t = 0.0;
  double dt = 0.0;
  double energy = 0.0;
  double dissipation_lhs = 0.0;
  double dissipation_rhs = 0.0;
  int turning_number = 0;
  ClosedBSplineCurve curve;

  [[nodiscard]] int spans() const noexcept { return curve.size(); }
};

enum class FlowStatus { ReachedEnd, Steady, Aborted, StepLimit };

inline std::string to_string(FlowStatus s) {
  switch (s) {
    case FlowStatus::ReachedEnd: return "reached_end";
    case FlowStatus::Steady: return "steady";
    case FlowStatus::Aborted: return "aborted";
    case FlowStatus::StepLimit: return "step_limit";
  }
  return "unknown";
}

struct FlowResult {
  std::vector<Frame> frames;
  FlowStatus status = FlowStatus::ReachedEnd;
  std::string message;
  long eliminations = 0;
  long retries = 0;
};

/// Called with each frame as soon as it is recorded.
using FrameObserver = std::function<void(const Frame&)>;

/// Max control-point displacement divided by dt.
inline double control_point_speed(const ClosedBSplineCurve& a, const ClosedBSplineCurve& b, double dt) {
  double m = 0.0;
  for (int i = 0; i < a.size(); ++i) m = std::max(m, norm(b.control_point(i) - a.control_point(i)));
  return m / dt;
}

template <EnergyDensity D>
FlowResult run_flow(const ClosedBSplineCurve& initial, const D& density, const FlowSettings& cfg,
                    const FrameObserver& observer = {}) {
  if (!(cfg.tau > 0.0)) throw std::invalid_argument("run_flow: tau must be positive");
  const QuadratureRule rule = gauss_legendre(cfg.quadrature_points);
  const double eps = energy_scale(EnergyModel{density});

  FlowResult result;
  ClosedBSplineCurve curve = initial;
  std::optional<NodeTable> table;
  table.emplace(curve.knots(), rule);

  auto record = [&](Frame f) {
    if (observer) observer(f);
    result.frames.push_back(std::move(f));
  };

  double energy = total_energy(curve, density, *table);
  record({0, 0.0, 0.0, energy, 0.0, 0.0, turning_number(curve, *table).value, curve});

  double t = 0.0;
  double prev_slope = 0.0;
  int steady_run = 0;
  long n = 0;
  while (t < cfg.t_end) {
    if (n >= cfg.max_steps) {
      result.status = FlowStatus::StepLimit;
      result.message = "step limit reached";
      return result;
    }
    double dt = n == 0 ? initial_timestep(curve, cfg.tau, rule) : next_timestep(prev_slope, cfg.tau);

    std::optional<StepResult> step;
    std::string failure;
    for (int attempt = 0; attempt <= cfg.retry_max; ++attempt) {
      try {
        step = solve_step(curve, dt, density, *table, cfg.newton);
        break;
      } catch (const FlowError& e) {
        failure = e.what();
        if (attempt < cfg.retry_max) {
          dt *= 0.5;
          ++result.retries;
        }
      }
    }
    if (!step) {
      result.status = FlowStatus::Aborted;
      result.message = "step " + std::to_string(n + 1) + " at t = " + std::to_string(t) + ": " + failure;
      return result;
    }

    DissipationAudit audit;
    double speed = 0.0;
    bool eliminated = false;
    int turning = 0;
    try {
      audit = dissipation_audit(curve, step->curve, dt, density, *table, cfg.newton.line_element);
      speed = control_point_speed(curve, step->curve, dt);
      const double new_energy = total_energy(step->curve, density, *table);
      prev_slope = (new_energy - energy) / dt;
      energy = new_energy;
      curve = std::move(step->curve);
      t += dt;
      ++n;

      if (cfg.eliminate && curve.size() > curve.degree() + 1) {
        EliminationResult pruned = eliminate_close_points(curve, eps, cfg.elimination);
        if (pruned.removed > 0) {
          curve = std::move(pruned.curve);
          table.emplace(curve.knots(), rule);
          energy = total_energy(curve, density, *table);
          result.eliminations += pruned.removed;
          eliminated = true;
        }
      }
      turning = turning_number(curve, *table).value;
    } catch (const FlowError& e) {
      result.status = FlowStatus::Aborted;
      result.message = "step " + std::to_string(n) + " at t = " + std::to_string(t) + ": " + e.what();
      return result;
    }

    record({n, t, dt, energy, audit.lhs, audit.rhs, turning, curve});

    if (!eliminated && speed < cfg.steady_tol) {
      if (++steady_run >= cfg.steady_count) {
        result.status = FlowStatus::Steady;
        return result;
      }
    } else {
      steady_run = 0;
    }
  }
  result.status = FlowStatus::ReachedEnd;
  return result;
}

inline FlowResult run_flow(const ClosedBSplineCurve& initial, const FlowSettings& cfg,
                           const FrameObserver& observer = {}) {
  return std::visit([&](const auto& d) { return run_flow(initial, d, cfg, observer); }, cfg.energy);
}

}  // namespace curveflow
