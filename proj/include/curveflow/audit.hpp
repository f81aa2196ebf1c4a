#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "curveflow/frames_io.hpp"
#include "curveflow/geometry.hpp"

namespace curveflow {

struct AuditOptions {
  double identity_tol = 1e-6;  ///< bound on |lhs - rhs|
  /// Allowed energy rise per step, relative to |E|; absorbs rounding near steady states.
  double energy_slack = 1e-12;
};

/// Offline re-check of a saved trajectory.
struct AuditReport {
  long steps = 0;
  long steps_checked = 0;  ///< steps without elimination, recomputed from the two curves
  long steps_skipped = 0;  ///< steps that ended with an elimination
  double max_identity_gap = 0.0;     ///< max |lhs - rhs| from recomputation
  double max_stored_deviation = 0.0; ///< max deviation of stored lhs/rhs from recomputation
  double max_energy_rise = 0.0;      ///< largest E_n - E_{n-1} over checked steps
  long energy_increases = 0;
  long turning_mismatches = 0;  ///< stored turning number differs from recomputation
  long turning_changes = 0;     ///< turning number changed across a checked step
  long non_integral = 0;        ///< frames whose raw turning number is off an integer
  std::vector<std::string> failures;

  [[nodiscard]] bool ok() const { return failures.empty(); }
};

inline AuditReport audit_frames(const std::vector<FrameRecord>& records, const AuditOptions& opt = {}) {
  AuditReport rep;
  if (records.empty()) return rep;
  auto fail = [&](const std::string& msg) {
    if (rep.failures.size() < 20) rep.failures.push_back(msg);
  };

  for (std::size_t i = 0; i < records.size(); ++i) {
    const Frame& f = records[i].frame;
    const FrameMeta& meta = records[i].meta;
    const QuadratureRule rule = gauss_legendre(meta.quadrature_points);
    const NodeTable table(f.curve.knots(), rule);
    const TurningNumber tn = turning_number(f.curve, table);
    if (!tn.integral) ++rep.non_integral;
    if (tn.value != f.turning_number) {
      ++rep.turning_mismatches;
      fail("frame " + std::to_string(f.n) + ": stored turning number " + std::to_string(f.turning_number) +
           ", recomputed " + std::to_string(tn.value));
    }
    if (i == 0) continue;

    ++rep.steps;
    const Frame& prev = records[i - 1].frame;
    if (f.n != prev.n + 1) fail("frame " + std::to_string(f.n) + ": step index does not follow " + std::to_string(prev.n));
    if (!(f.curve.knots() == prev.curve.knots())) {
      ++rep.steps_skipped;
      continue;
    }
    ++rep.steps_checked;
    const DissipationAudit a = std::visit(
        [&](const auto& d) { return dissipation_audit(prev.curve, f.curve, f.dt, d, table, meta.line_element); },
        meta.energy);
    const double gap = std::abs(a.lhs - a.rhs);
    rep.max_identity_gap = std::max(rep.max_identity_gap, gap);
    if (gap > opt.identity_tol) {
      fail("step " + std::to_string(f.n) + ": |lhs - rhs| = " + std::to_string(gap));
    }
    const double dev = std::max(std::abs(a.lhs - f.dissipation_lhs), std::abs(a.rhs - f.dissipation_rhs));
    rep.max_stored_deviation = std::max(rep.max_stored_deviation, dev);
    if (dev > opt.identity_tol) fail("step " + std::to_string(f.n) + ": stored audit disagrees with recomputation");

    const double rise = f.energy - prev.energy;
    rep.max_energy_rise = std::max(rep.max_energy_rise, rise);
    if (rise > opt.energy_slack * std::abs(prev.energy)) {
      ++rep.energy_increases;
      fail("step " + std::to_string(f.n) + ": energy rose by " + std::to_string(rise));
    }
    if (f.turning_number != prev.turning_number) ++rep.turning_changes;
  }
  return rep;
}

}  // namespace curveflow
