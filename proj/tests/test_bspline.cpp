#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "curveflow/bspline.hpp"
#include "oracles.hpp"

using namespace curveflow;

TEST(Knots, CubicOnUnitIntervalWithSixSpans) {
  const auto kv = make_uniform_periodic_knots(0.0, 1.0, 3, 6);
  ASSERT_EQ(kv.knots().size(), 13u);
  EXPECT_DOUBLE_EQ(kv.h(), 1.0 / 6.0);
  EXPECT_DOUBLE_EQ(kv.knot(0), -0.5);
  EXPECT_DOUBLE_EQ(kv.knot(12), 1.5);
  EXPECT_EQ(kv.basis_count(), 9);
}

TEST(Knots, LinearOnTwoSpans) {
  const auto kv = make_uniform_periodic_knots(0.0, 1.0, 1, 2);
  const std::vector<double> want{-0.5, 0.0, 0.5, 1.0, 1.5};
  ASSERT_EQ(kv.knots().size(), want.size());
  for (std::size_t k = 0; k < want.size(); ++k) EXPECT_DOUBLE_EQ(kv.knots()[k], want[k]);
}

TEST(Knots, RejectsTooFewSpansAndEmptyInterval) {
  EXPECT_THROW(make_uniform_periodic_knots(0.0, 1.0, 3, 3), std::invalid_argument);
  EXPECT_THROW(make_uniform_periodic_knots(1.0, 1.0, 3, 6), std::invalid_argument);
  EXPECT_THROW(make_uniform_periodic_knots(2.0, 1.0, 3, 6), std::invalid_argument);
}

TEST(Knots, SpacingIsUniformOnShiftedInterval) {
  const auto kv = make_uniform_periodic_knots(-2.0, 3.0, 4, 9);
  for (int k = 0; k + 1 < static_cast<int>(kv.knots().size()); ++k) {
    EXPECT_NEAR(kv.knot(k + 1) - kv.knot(k), 5.0 / 9.0, 1e-14);
  }
  EXPECT_NEAR(kv.knot(4), -2.0, 1e-14);
  EXPECT_NEAR(kv.knot(13), 3.0, 1e-14);
}

TEST(Basis, LinearIsAHat) {
  const auto kv = make_uniform_periodic_knots(0.0, 1.0, 1, 4);
  EXPECT_NEAR(basis_eval(kv, 1, 0.3, 0), 0.8, 1e-15);
  EXPECT_NEAR(basis_eval(kv, 2, 0.3, 0), 0.2, 1e-15);
  EXPECT_EQ(basis_eval(kv, 0, 0.3, 0), 0.0);
  EXPECT_NEAR(basis_eval(kv, 1, 0.3, 1), -4.0, 1e-13);
}

TEST(Basis, UniformCubicAtInteriorKnot) {
  const auto kv = make_uniform_periodic_knots(0.0, 1.0, 3, 6);
  // N_2 has support [xi_2, xi_6]; xi_3 = 0 is its first interior knot.
  EXPECT_NEAR(basis_eval(kv, 2, kv.knot(3), 0), 1.0 / 6.0, 1e-15);
  EXPECT_NEAR(basis_eval(kv, 2, kv.knot(4), 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(basis_eval(kv, 2, kv.knot(5), 0), 1.0 / 6.0, 1e-15);
}

TEST(Basis, VanishesOutsideSupport) {
  const auto kv = make_uniform_periodic_knots(0.0, 1.0, 3, 8);
  for (int j = 0; j < kv.basis_count(); ++j) {
    for (double z = 0.0; z <= 1.0; z += 1.0 / 97.0) {
      if (z < kv.knot(j) || z > kv.knot(j + 4)) {
        for (int d = 0; d <= 3; ++d) EXPECT_EQ(basis_eval(kv, j, z, d), 0.0) << j << " " << z << " " << d;
      }
    }
  }
}

TEST(Basis, RejectsOrderAboveDegreeAndBadIndex) {
  const auto kv = make_uniform_periodic_knots(0.0, 1.0, 3, 6);
  EXPECT_THROW(basis_eval(kv, 0, 0.5, 4), std::invalid_argument);
  EXPECT_THROW(basis_eval(kv, 0, 0.5, -1), std::invalid_argument);
  EXPECT_THROW(basis_eval(kv, 9, 0.5, 0), std::out_of_range);
  EXPECT_THROW(periodic_basis_eval(kv, 6, 0.5, 0), std::out_of_range);
  EXPECT_THROW(periodic_basis_eval(kv, 0, 1.5, 0), std::invalid_argument);
}

TEST(Basis, MatchesReferenceRecursion) {
  std::mt19937_64 rng(7);
  for (int p = 1; p <= 5; ++p) {
    const int n = p + 4;
    const auto kv = make_uniform_periodic_knots(0.0, 1.0, p, n);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int s = 0; s < 50; ++s) {
      const double z = u(rng);
      for (int d = 0; d <= p; ++d) {
        const double scale = std::pow(static_cast<double>(n), d);
        for (int j = 0; j < kv.basis_count(); ++j) {
          EXPECT_NEAR(basis_eval(kv, j, z, d), oracle::bspline(0.0, 1.0, p, n, j, p, z, d), 1e-11 * scale);
        }
        const SpanBasis sb(kv, z, p);
        const int k = kv.span_of(z);
        for (int r = 0; r <= p; ++r) {
          EXPECT_NEAR(sb.value(d, r), oracle::bspline(0.0, 1.0, p, n, k + r, p, z, d), 1e-11 * scale);
        }
      }
    }
  }
}

TEST(Basis, PeriodicSumIsOne) {
  const auto kv = make_uniform_periodic_knots(0.0, 1.0, 3, 10);
  double s = 0.0;
  for (int i = 0; i < 10; ++i) s += periodic_basis_eval(kv, i, 0.37, 0);
  EXPECT_NEAR(s, 1.0, 1e-14);
}

TEST(Basis, PeriodicDerivativesMatchAcrossTheSeam) {
  for (int p = 1; p <= 5; ++p) {
    const auto kv = make_uniform_periodic_knots(0.0, 1.0, p, p + 3);
    for (int i = 0; i < p + 3; ++i) {
      for (int d = 0; d < p; ++d) {
        const double at_a = periodic_basis_eval(kv, i, 0.0, d);
        const double at_b = periodic_basis_eval(kv, i, 1.0, d);
        EXPECT_NEAR(at_a, at_b, 1e-10 * std::pow(p + 3.0, d)) << "p=" << p << " i=" << i << " d=" << d;
      }
    }
  }
}

TEST(Basis, RandomParameterProperties) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int p = 1; p <= 5; ++p) {
    const int n = 2 * p + 3;
    const auto kv = make_uniform_periodic_knots(0.0, 1.0, p, n);
    for (int s = 0; s < 1000; ++s) {
      const double z = u(rng);
      double sum = 0.0;
      std::vector<double> dsum(static_cast<std::size_t>(p + 1), 0.0);
      for (int i = 0; i < n; ++i) {
        const double v = periodic_basis_eval(kv, i, z, 0);
        EXPECT_GE(v, -1e-15);
        sum += v;
        for (int d = 1; d <= p; ++d) dsum[static_cast<std::size_t>(d)] += periodic_basis_eval(kv, i, z, d);
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
      for (int d = 1; d <= p; ++d) EXPECT_NEAR(dsum[static_cast<std::size_t>(d)], 0.0, 1e-9 * std::pow(n, d));
    }
  }
}

TEST(Basis, ContinuousUpToOrderPMinusOneAtKnots) {
  for (int p = 2; p <= 5; ++p) {
    const int n = p + 4;
    const auto kv = make_uniform_periodic_knots(0.0, 1.0, p, n);
    const double half = 0.5 * kv.h();
    for (int k = 1; k < n; ++k) {
      const double z = kv.knot(p + k);
      for (int j = 0; j < kv.basis_count(); ++j) {
        for (int d = 0; d < p; ++d) {
          // Taylor expansion of the left piece about the middle of its span is exact for degree p.
          double left = 0.0;
          double fact = 1.0;
          for (int m = 0; m + d <= p; ++m) {
            if (m > 0) fact *= m;
            left += basis_eval(kv, j, z - half, d + m) * std::pow(half, m) / fact;
          }
          EXPECT_NEAR(left, basis_eval(kv, j, z, d), 1e-8 * std::pow(n, d)) << p << " " << k << " " << j << " " << d;
        }
      }
    }
  }
}

TEST(Curve, ConstantControlPointsGiveAPoint) {
  const auto c = ClosedBSplineCurve::on_unit_interval(3, std::vector<Vec2>(7, Vec2{2.0, -1.0}));
  for (double z : {0.0, 0.2, 0.5, 0.99, 1.0}) {
    const Vec2 q = curve_eval(c, z, 0);
    EXPECT_NEAR(q.x, 2.0, 1e-14);
    EXPECT_NEAR(q.y, -1.0, 1e-14);
    EXPECT_NEAR(norm(curve_eval(c, z, 1)), 0.0, 1e-12);
    EXPECT_NEAR(norm(curve_eval(c, z, 2)), 0.0, 1e-10);
  }
  EXPECT_THROW((void)jet_at(c, 0.3), DegenerateCurveError);
}

TEST(Curve, RegularPolygonControlPointsApproachACircle) {
  auto spread = [](int n) {
    const auto c = ClosedBSplineCurve::on_unit_interval(3, oracle::circle_points(n, 1.0));
    double lo = INFINITY;
    double hi = 0.0;
    for (int k = 0; k < 2000; ++k) {
      const double r = norm(curve_eval(c, k / 2000.0, 0));
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    return hi - lo;
  };
  const double s8 = spread(8);
  const double s16 = spread(16);
  const double s32 = spread(32);
  EXPECT_LT(s16, s8);
  EXPECT_LT(s32, s16);
  EXPECT_LT(s32, 1e-4);
}

TEST(Curve, MatchesReferenceSum) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec2> pts;
  for (int i = 0; i < 9; ++i) pts.push_back({u(rng), u(rng)});
  const auto c = ClosedBSplineCurve::on_unit_interval(4, pts);
  for (int s = 0; s < 100; ++s) {
    const double z = 0.5 * (u(rng) + 1.0);
    for (int d = 0; d <= 4; ++d) {
      const Vec2 got = curve_eval(c, z, d);
      const Vec2 want = oracle::curve(pts, 4, z, d);
      EXPECT_NEAR(got.x, want.x, 1e-10 * std::pow(9.0, d));
      EXPECT_NEAR(got.y, want.y, 1e-10 * std::pow(9.0, d));
    }
  }
}

TEST(Curve, ClosesWithMatchingDerivatives) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int p = 1; p <= 5; ++p) {
    std::vector<Vec2> pts;
    for (int i = 0; i < p + 5; ++i) pts.push_back({u(rng), u(rng)});
    const auto c = ClosedBSplineCurve::on_unit_interval(p, pts);
    for (int d = 0; d < p; ++d) {
      const Vec2 a = curve_eval(c, 0.0, d);
      const Vec2 b = curve_eval(c, 1.0, d);
      EXPECT_NEAR(norm(a - b), 0.0, 1e-9 * std::pow(p + 5.0, d)) << "p=" << p << " d=" << d;
    }
  }
}

TEST(Curve, OrdersAboveDegreeAreZero) {
  const auto c = ClosedBSplineCurve::on_unit_interval(2, oracle::circle_points(6, 1.0));
  EXPECT_EQ(norm(curve_eval(c, 0.4, 3)), 0.0);
}

TEST(Curve, TranslatingControlPointsTranslatesTheCurve) {
  const auto pts = oracle::circle_points(10, 0.7);
  std::vector<Vec2> moved;
  for (const auto& q : pts) moved.push_back(q + Vec2{3.0, -2.0});
  const auto c = ClosedBSplineCurve::on_unit_interval(3, pts);
  const auto m = ClosedBSplineCurve::on_unit_interval(3, moved);
  for (double z = 0.0; z <= 1.0; z += 0.037) {
    EXPECT_NEAR(norm(curve_eval(m, z, 0) - curve_eval(c, z, 0) - Vec2{3.0, -2.0}), 0.0, 1e-13);
    EXPECT_NEAR(norm(curve_eval(m, z, 1) - curve_eval(c, z, 1)), 0.0, 1e-11);
  }
}

TEST(Curve, RejectsWrongPointCount) {
  EXPECT_THROW(ClosedBSplineCurve(make_uniform_periodic_knots(0.0, 1.0, 3, 6), oracle::circle_points(5, 1.0)),
               std::invalid_argument);
}

TEST(Fit, DenseCircleSamples) {
  const auto samples = oracle::circle_points(200, 1.0);
  const auto fit = fit_closed_curve(samples, 3, 12);
  EXPECT_EQ(fit.curve.size(), 12);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) worst = std::max(worst, std::abs(norm(curve_eval(fit.curve, k / 1000.0, 0)) - 1.0));
  EXPECT_LT(worst, 1e-3);
  EXPECT_LT(fit.max_residual, 1e-3);
}

TEST(Fit, ReproducesASplineFromItsSamples) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec2> pts;
  for (int i = 0; i < 8; ++i) pts.push_back({u(rng), u(rng)});
  const auto c = ClosedBSplineCurve::on_unit_interval(3, pts);
  std::vector<Vec2> samples;
  for (int k = 0; k < 40; ++k) samples.push_back(curve_eval(c, k / 40.0, 0));
  const auto fit = fit_closed_curve(samples, 3, 8);
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(norm(fit.curve.control_point(i) - pts[static_cast<std::size_t>(i)]), 0.0, 1e-10);
  EXPECT_LT(fit.max_residual, 1e-12);
}

TEST(Fit, RejectsDegenerateInput) {
  EXPECT_THROW(fit_closed_curve(oracle::circle_points(5, 1.0), 3, 6), std::invalid_argument);
  const std::vector<Vec2> same(50, Vec2{1.0, 1.0});
  EXPECT_THROW(fit_closed_curve(same, 3, 6), std::invalid_argument);
  std::vector<Vec2> line;
  for (int k = 0; k < 50; ++k) line.push_back({k * 0.1, 2.0 * k * 0.1});
  EXPECT_THROW(fit_closed_curve(line, 3, 6), std::invalid_argument);
}

TEST(Jet, MatchesCurveDerivativesAndCloses) {
  const auto c = fit_closed_curve(oracle::circle_points(200, 2.0), 3, 16).curve;
  const CurveJet j0 = jet_at(c, 0.0);
  const CurveJet j1 = jet_at(c, 1.0);
  EXPECT_NEAR(norm(j0.position - j1.position), 0.0, 1e-12);
  EXPECT_NEAR(norm(j0.d1 - j1.d1), 0.0, 1e-10);
  EXPECT_NEAR(norm(j0.d2 - j1.d2), 0.0, 1e-6);
  const CurveJet j = jet_at(c, 0.3);
  EXPECT_NEAR(dot(j.d1, j.position) / (norm(j.d1) * norm(j.position)), 0.0, 1e-3);
  EXPECT_NEAR(norm(j.d1), 4.0 * std::numbers::pi, 1e-2);
}
