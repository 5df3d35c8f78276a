#include "metscale/errors.hpp"
#include "metscale/scaled_metric.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

using namespace metscale;

namespace {

bool bitwise_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

}  // namespace

TEST(ScaleFactor, RejectsNonPositiveAndNonFinite) {
  EXPECT_THROW(ScaleFactor(0.0), ContractViolation);
  EXPECT_THROW(ScaleFactor(-2.0), ContractViolation);
  EXPECT_THROW(ScaleFactor(std::numeric_limits<double>::infinity()), ContractViolation);
  EXPECT_THROW(ScaleFactor(std::numeric_limits<double>::quiet_NaN()), ContractViolation);
  EXPECT_DOUBLE_EQ(ScaleFactor(9.0).sqrt(), 3.0);
}

TEST(ScaleFactor, VolumeFactor) {
  EXPECT_DOUBLE_EQ(volume_scale_factor(ScaleFactor(4.0), 2), 4.0);
  EXPECT_DOUBLE_EQ(volume_scale_factor(ScaleFactor(4.0), 3), 8.0);
  EXPECT_DOUBLE_EQ(volume_scale_factor(ScaleFactor(0.25), 6), 1.0 / 64.0);
  EXPECT_THROW(volume_scale_factor(ScaleFactor(2.0), 0), ContractViolation);
}

TEST(Scaled, EuclideanDistanceExample) {
  // (0,0) to (3,4) at lambda = 4: 2 * 5.
  const auto base = make_manifold("euclidean:2");
  ScaledManifold m(base, ScaleFactor(4.0));
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 1), b(2, 1);
  b << 3, 4;
  EXPECT_DOUBLE_EQ(m.distance(base->make_point(a), base->make_point(b)), 10.0);
  EXPECT_DOUBLE_EQ(m.volume_factor(), 4.0);
}

TEST(Scaled, RescaledComposesMultiplicatively) {
  ScaledManifold m(make_manifold("sphere:2"), ScaleFactor(2.0));
  EXPECT_DOUBLE_EQ(m.rescaled(ScaleFactor(3.0)).scale().value(), 6.0);
}

class ScaledLaws : public ::testing::TestWithParam<std::tuple<const char*, double>> {};

TEST_P(ScaledLaws, VariantQuantities) {
  const auto [spec, lambda] = GetParam();
  const auto base = make_manifold(spec);
  const ScaledManifold m(base, ScaleFactor(lambda));
  std::mt19937_64 rng(5);
  const double root = std::sqrt(lambda);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = base->random_point(rng);
    const auto u = base->random_tangent(p, rng);
    const auto v = base->random_tangent(p, rng);
    const auto q = base->exp_map(p, u.scaled_by(0.5));

    const double bi = base->inner_product(p, u, v);
    EXPECT_NEAR(m.inner(p, u, v), lambda * bi, 1e-12 * std::abs(lambda * bi) + 1e-300);
    EXPECT_NEAR(m.norm(p, u), root * base->norm(p, u), 1e-12 * root * base->norm(p, u));
    EXPECT_NEAR(m.distance(p, q), root * base->distance(p, q), 1e-12 * m.distance(p, q));

    const auto g = m.gradient(p, v);
    EXPECT_LE((g.components() - v.components() / lambda).norm(),
              1e-12 * v.components().norm() / lambda);
    // <grad_scaled, w>_scaled equals the base directional derivative <v, w>_g.
    EXPECT_NEAR(m.inner(p, g, u), bi, 1e-12 * (std::abs(bi) + 1.0));
  }
}

TEST_P(ScaledLaws, InvariantsAreBitwiseDelegated) {
  const auto [spec, lambda] = GetParam();
  const auto base = make_manifold(spec);
  const ScaledManifold m(base, ScaleFactor(lambda));
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = base->random_point(rng);
    const auto v = base->random_tangent(p, rng).scaled_by(0.5);
    const auto q = base->exp_map(p, v);
    EXPECT_TRUE(bitwise_equal(m.exp(p, v).coordinates(), q.coordinates()));
    EXPECT_TRUE(bitwise_equal(m.log(p, q).components(), base->log_map(p, q).components()));
    EXPECT_TRUE(bitwise_equal(m.transport(p, q, v).components(),
                              base->parallel_transport(p, q, v).components()));
    const Eigen::MatrixXd ambient = p.coordinates() + v.components();
    EXPECT_TRUE(bitwise_equal(m.projection(p, ambient).components(),
                              base->tangent_projection(p, ambient).components()));
  }
}

TEST_P(ScaledLaws, LogNormIsScaledDistance) {
  const auto [spec, lambda] = GetParam();
  const auto base = make_manifold(spec);
  const ScaledManifold m(base, ScaleFactor(lambda));
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = base->random_point(rng);
    const auto q = base->exp_map(p, base->random_tangent(p, rng).scaled_by(0.6));
    const double d = m.distance(p, q);
    EXPECT_NEAR(m.norm(p, m.log(p, q)), d, 1e-10 * d);
  }
}

INSTANTIATE_TEST_SUITE_P(Sweep, ScaledLaws,
                         ::testing::Combine(::testing::Values("euclidean:3", "sphere:2", "spd:2"),
                                            ::testing::Values(0.25, 1.0, 4.0, 10.0)));

TEST(Scaled, UnitScaleReproducesBaseExactly) {
  const auto base = make_manifold("spd:2");
  const ScaledManifold m(base, ScaleFactor(1.0));
  std::mt19937_64 rng(1);
  const auto p = base->random_point(rng);
  const auto u = base->random_tangent(p, rng);
  const auto q = base->exp_map(p, u);
  EXPECT_EQ(m.inner(p, u, u), base->inner_product(p, u, u));
  EXPECT_EQ(m.distance(p, q), base->distance(p, q));
  EXPECT_TRUE(bitwise_equal(m.gradient(p, u).components(), u.components()));
}

TEST(Scaled, GradientWithForeignBaseIsRejected) {
  const auto base = make_manifold("sphere:2");
  const ScaledManifold m(base, ScaleFactor(2.0));
  std::mt19937_64 rng(2);
  const auto p = base->random_point(rng);
  const auto q = base->exp_map(p, base->random_tangent(p, rng).scaled_by(0.3));
  EXPECT_THROW(m.gradient(q, base->random_tangent(p, rng)), ContractViolation);
}

TEST(Scaled, CurveLengthScales) {
  const auto base = make_manifold("euclidean:2");
  const ScaledManifold m(base, ScaleFactor(10.0));
  SampledCurve curve;
  curve.parameters = uniform_parameters(3);
  for (double t : curve.parameters) {
    Eigen::MatrixXd x(2, 1);
    x << 3 * t, 4 * t;
    curve.points.push_back(base->make_point(x));
  }
  EXPECT_NEAR(m.curve_length(curve), std::sqrt(10.0) * 5.0, 1e-12);
}
