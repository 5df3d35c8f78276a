#include "metscale/chart_calculus.hpp"
#include "metscale/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace metscale;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

double speed(const Chart& chart, const Eigen::VectorXd& x, const Eigen::VectorXd& v) {
  return std::sqrt(v.dot(chart.metric_at(x) * v));
}

}  // namespace

TEST(Chart, MetricOutsideDomainIsDomainError) {
  const Chart polar = charts::polar();
  EXPECT_THROW(polar.metric_at(vec({0.01, 0.0})), DomainError);
  EXPECT_NO_THROW(polar.metric_at(vec({1.0, 0.0})));
}

TEST(Chart, NonPositiveMetricIsInvalidChart) {
  CoordinateBox box{vec({-1}), vec({1})};
  const Chart bad("bad", box, [](const Eigen::VectorXd& x) {
    return Eigen::MatrixXd::Constant(1, 1, x(0));
  });
  EXPECT_THROW(bad.metric_at(vec({-0.5})), InvalidChart);
}

TEST(Christoffel, EuclideanVanishes) {
  const auto gamma = christoffel_at(charts::euclidean(3), vec({0.3, -0.2, 5.0}));
  EXPECT_LT(gamma.max_abs(), 1e-12);
}

TEST(Christoffel, PolarOracle) {
  // g = diag(1, r^2): Gamma^r_thth = -r, Gamma^th_rth = 1/r.
  const double r = 2.0;
  const auto gamma = christoffel_at(charts::polar(), vec({r, 0.7}));
  EXPECT_NEAR(gamma(0, 1, 1), -r, 1e-8);
  EXPECT_NEAR(gamma(1, 0, 1), 1.0 / r, 1e-8);
  EXPECT_NEAR(gamma(1, 1, 0), 1.0 / r, 1e-8);
  EXPECT_NEAR(gamma(0, 0, 0), 0.0, 1e-8);
  EXPECT_NEAR(gamma(1, 1, 1), 0.0, 1e-8);
  EXPECT_LT(gamma.lower_index_asymmetry(), 1e-15);
}

TEST(Christoffel, SphereOracle) {
  // g = diag(1, sin^2 th): Gamma^th_phph = -sin cos, Gamma^ph_thph = cot.
  const double th = 1.1;
  const auto gamma = christoffel_at(charts::sphere(), vec({th, 0.4}));
  EXPECT_NEAR(gamma(0, 1, 1), -std::sin(th) * std::cos(th), 1e-8);
  EXPECT_NEAR(gamma(1, 0, 1), std::cos(th) / std::sin(th), 1e-8);
  EXPECT_NEAR(gamma(0, 0, 0), 0.0, 1e-8);
}

TEST(Christoffel, ConstantScalingLeavesSymbolsUnchanged) {
  const Chart polar = charts::polar();
  const Eigen::VectorXd x = vec({3.0, -1.0});
  for (double lambda : {0.25, 4.0, 10.0}) {
    const auto base = christoffel_at(polar, x);
    const auto scaled = christoffel_at(scale_chart_constant(polar, ScaleFactor(lambda)), x);
    EXPECT_LT(max_abs_difference(base, scaled), 1e-6);
  }
}

TEST(Christoffel, ConformalFactorMatchesOracle) {
  // g = e^{2 phi} delta with phi = x1: Gamma^k_ij = d^k_i d_j phi + d^k_j d_i phi - d_ij d^k phi.
  const Chart flat = charts::euclidean(2);
  const Chart conformal =
      scale_chart_pointwise(flat, [](const Eigen::VectorXd& x) { return std::exp(2.0 * x(0)); });
  for (const Eigen::VectorXd& x : {vec({0.0, 0.0}), vec({0.4, -0.3})}) {
    const auto gamma = christoffel_at(conformal, x);
    const Eigen::Vector2d dphi(1.0, 0.0);
    for (int k = 0; k < 2; ++k)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          const double oracle = (k == i) * dphi(j) + (k == j) * dphi(i) - (i == j) * dphi(k);
          EXPECT_NEAR(gamma(k, i, j), oracle, 1e-6) << k << i << j;
        }
    EXPECT_GE(max_abs_difference(gamma, christoffel_at(flat, x)), 0.5);
  }
}

TEST(Christoffel, PointwiseNonPositiveFactorIsInvalidChart) {
  const Chart c = scale_chart_pointwise(charts::euclidean(2),
                                        [](const Eigen::VectorXd& x) { return x(0); });
  EXPECT_THROW(c.metric_at(vec({-1.0, 0.0})), InvalidChart);
}

TEST(Christoffel, TooCloseToBoundaryIsDomainError) {
  EXPECT_THROW(christoffel_at(charts::polar(), vec({0.1 + 1e-7, 0.0})), DomainError);
}

TEST(Geodesic, PolarStraightLine) {
  // From (r, th) = (1, 0) with velocity (0, 1): the Cartesian line (1, t).
  const auto path = geodesic_integrate(charts::polar(), vec({1.0, 0.0}), vec({0.0, 1.0}));
  ASSERT_EQ(path.size(), 1001u);
  const Eigen::VectorXd& end = path.positions.back();
  EXPECT_NEAR(end(0), std::sqrt(2.0), 1e-8);
  EXPECT_NEAR(end(1), std::numbers::pi / 4, 1e-8);
  EXPECT_DOUBLE_EQ(path.times.back(), 1.0);
}

TEST(Geodesic, SphereEquatorAndSpeedConservation) {
  const Chart sphere = charts::sphere();
  const auto eq = geodesic_integrate(sphere, vec({std::numbers::pi / 2, 0.0}), vec({0.0, 1.0}));
  EXPECT_NEAR(eq.positions.back()(0), std::numbers::pi / 2, 1e-10);
  EXPECT_NEAR(eq.positions.back()(1), 1.0, 1e-10);

  const auto path = geodesic_integrate(sphere, vec({1.0, 0.2}), vec({0.3, 0.4}));
  const double s0 = speed(sphere, path.positions.front(), path.velocities.front());
  for (std::size_t i = 0; i < path.size(); i += 100)
    EXPECT_NEAR(speed(sphere, path.positions[i], path.velocities[i]), s0, 1e-9);
  EXPECT_LT(geodesic_residual(sphere, path), 1e-5);
}

TEST(Geodesic, ConstantScalingGivesSamePath) {
  const Chart sphere = charts::sphere();
  const Eigen::VectorXd x0 = vec({1.0, 0.2}), v0 = vec({0.3, 0.4});
  const auto base = geodesic_integrate(sphere, x0, v0);
  for (double lambda : {0.25, 4.0, 10.0}) {
    const auto scaled = geodesic_integrate(scale_chart_constant(sphere, ScaleFactor(lambda)), x0, v0);
    EXPECT_LE(max_path_deviation(base, scaled), 1e-8);
  }
}

TEST(Geodesic, LeavingChartRaisesPartialPath) {
  try {
    geodesic_integrate(charts::polar(), vec({1.0, 0.0}), vec({-5.0, 0.0}));
    FAIL() << "expected PartialPathError";
  } catch (const PartialPathError& e) {
    EXPECT_GT(e.partial_path().size(), 1u);
    EXPECT_LT(e.partial_path().times.back(), 1.0);
  }
}

TEST(Geodesic, RejectsBadArguments) {
  EXPECT_THROW(geodesic_integrate(charts::polar(), vec({1.0, 0.0}), vec({1.0})), ContractViolation);
  EXPECT_THROW(geodesic_integrate(charts::polar(), vec({1.0, 0.0}), vec({1.0, 0.0}), 1.0, 0),
               ContractViolation);
}

TEST(Volume, DensityAndScaling) {
  const Chart polar = charts::polar();
  EXPECT_NEAR(volume_density(polar, vec({2.5, 1.0})), 2.5, 1e-14);
  const Chart scaled = scale_chart_constant(polar, ScaleFactor(4.0));
  EXPECT_NEAR(volume_density(scaled, vec({2.5, 1.0})), 4.0 * 2.5, 1e-13);
  EXPECT_EQ(scaled.name(), "polar*4");
}

TEST(Length, ChartCurveLength) {
  // Unit circle in polar coordinates: r = 1, th in [0, 2 pi].
  CoordinateCurve curve;
  for (int i = 0; i <= 400; ++i) {
    const double t = i / 400.0;
    curve.times.push_back(t);
    curve.points.push_back(vec({1.0, 2 * std::numbers::pi * t}));
  }
  EXPECT_NEAR(chart_curve_length(charts::polar(), curve), 2 * std::numbers::pi, 1e-10);
  EXPECT_NEAR(chart_curve_length(scale_chart_constant(charts::polar(), ScaleFactor(9.0)), curve),
              6 * std::numbers::pi, 1e-9);
}

TEST(Charts, ByNameAndEmbedding) {
  EXPECT_EQ(charts::by_name("euclidean:3").dimension(), 3);
  EXPECT_EQ(charts::by_name("sphere-chart").name(), "sphere-chart");
  EXPECT_THROW(charts::by_name("hyperbolic"), ContractViolation);
  const Eigen::Vector3d p = charts::sphere_to_ambient(vec({std::numbers::pi / 2, 0.0}));
  EXPECT_LT((p - Eigen::Vector3d(1, 0, 0)).norm(), 1e-15);
}

TEST(Csv, PathHeader) {
  const auto path = geodesic_integrate(charts::euclidean(2), vec({0, 0}), vec({1, 0}), 1.0, 4);
  std::ostringstream out;
  write_csv(out, path);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "t,x1,x2,v1,v2");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 6);
}
