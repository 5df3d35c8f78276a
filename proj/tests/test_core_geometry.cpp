#include "metscale/core_geometry.hpp"
#include "metscale/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace metscale;

namespace {

Eigen::MatrixXd col(std::initializer_list<double> values) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index i = 0;
  for (double v : values) m(i++, 0) = v;
  return m;
}

Eigen::MatrixXd diag(std::initializer_list<double> values) {
  return col(values).col(0).asDiagonal();
}

}  // namespace

TEST(Descriptor, ParsesFamilies) {
  const auto e = ManifoldDescriptor::parse("euclidean:3");
  EXPECT_EQ(e.family(), ManifoldFamily::kEuclidean);
  EXPECT_EQ(e.intrinsic_dimension(), 3);

  const auto s = ManifoldDescriptor::parse("sphere:2");
  EXPECT_EQ(s.intrinsic_dimension(), 2);
  EXPECT_EQ(s.ambient_rows(), 3);

  const auto p = ManifoldDescriptor::parse("spd:3");
  EXPECT_EQ(p.intrinsic_dimension(), 6);
  EXPECT_EQ(p.ambient_rows(), 3);
  EXPECT_EQ(p.ambient_cols(), 3);
  EXPECT_EQ(p.spec(), "spd:3");
}

TEST(Descriptor, RejectsMalformedSpecs) {
  EXPECT_THROW(ManifoldDescriptor::parse("torus:2"), ContractViolation);
  EXPECT_THROW(ManifoldDescriptor::parse("sphere"), ContractViolation);
  EXPECT_THROW(ManifoldDescriptor::parse("sphere:0"), ContractViolation);
  EXPECT_THROW(ManifoldDescriptor::parse("euclidean:x"), ContractViolation);
}

TEST(Euclidean, ClosedForms) {
  EuclideanSpace m(2);
  const auto p = m.make_point(col({1, 2}));
  const auto q = m.make_point(col({4, 6}));
  EXPECT_DOUBLE_EQ(m.distance(p, q), 5.0);
  const auto v = m.log_map(p, q);
  EXPECT_TRUE(v.components().isApprox(col({3, 4})));
  EXPECT_TRUE(m.exp_map(p, v).coordinates().isApprox(q.coordinates()));
  const auto w = m.make_tangent(p, col({-1, 0.5}));
  EXPECT_EQ(m.parallel_transport(p, q, w).components(), w.components());
  EXPECT_DOUBLE_EQ(m.inner_product(p, v, w), -1.0);
}

TEST(Sphere, QuarterTurnDistance) {
  Sphere s(2);
  const auto e1 = s.make_point(col({1, 0, 0}));
  const auto e2 = s.make_point(col({0, 1, 0}));
  EXPECT_NEAR(s.distance(e1, e2), std::numbers::pi / 2, 1e-15);
  const auto v = s.log_map(e1, e2);
  EXPECT_TRUE(v.components().isApprox(col({0, std::numbers::pi / 2, 0})));
  EXPECT_LT((s.exp_map(e1, v).coordinates() - e2.coordinates()).norm(), 1e-15);
}

TEST(Sphere, TransportAlongQuarterTurn) {
  Sphere s(2);
  const auto e1 = s.make_point(col({1, 0, 0}));
  const auto e2 = s.make_point(col({0, 1, 0}));
  // The direction of travel rotates into -e1; the normal direction is fixed.
  const auto along = s.parallel_transport(e1, e2, s.make_tangent(e1, col({0, 1, 0})));
  EXPECT_LT((along.components() - col({-1, 0, 0})).norm(), 1e-15);
  const auto normal = s.parallel_transport(e1, e2, s.make_tangent(e1, col({0, 0, 1})));
  EXPECT_LT((normal.components() - col({0, 0, 1})).norm(), 1e-15);
}

TEST(Sphere, RejectsOffManifoldInputs) {
  Sphere s(2);
  EXPECT_THROW(s.make_point(col({1, 1, 0})), ContractViolation);
  const auto e1 = s.make_point(col({1, 0, 0}));
  EXPECT_THROW(s.make_tangent(e1, col({1, 0, 0})), ContractViolation);
  EXPECT_THROW(s.make_point(col({1, 0})), ContractViolation);
}

TEST(Sphere, AntipodalLogIsDomainError) {
  Sphere s(2);
  const auto p = s.make_point(col({0, 0, 1}));
  const auto q = s.make_point(col({0, 0, -1}));
  EXPECT_THROW(s.log_map(p, q), DomainError);
  EXPECT_NEAR(s.distance(p, q), std::numbers::pi, 1e-15);
}

TEST(Sphere, ProjectionRemovesNormalComponent) {
  Sphere s(2);
  const auto p = s.make_point(col({0, 0, 1}));
  const auto v = s.tangent_projection(p, col({1, 2, 3}));
  EXPECT_TRUE(v.components().isApprox(col({1, 2, 0})));
}

TEST(Spd, DistanceFromIdentity) {
  SpdManifold m(2);
  const auto id = m.make_point(Eigen::MatrixXd::Identity(2, 2));
  const auto e_id = m.make_point(std::exp(1.0) * Eigen::MatrixXd::Identity(2, 2));
  EXPECT_NEAR(m.distance(id, e_id), std::sqrt(2.0), 1e-14);
}

TEST(Spd, LogAtIdentity) {
  SpdManifold m(2);
  const auto id = m.make_point(Eigen::MatrixXd::Identity(2, 2));
  const auto q = m.make_point(diag({std::exp(2.0), 1.0}));
  EXPECT_LT((m.log_map(id, q).components() - diag({2.0, 0.0})).norm(), 1e-13);
}

TEST(Spd, TransportIsIsometryOnScalarMatrices) {
  // P = I, Q = 4I: E = 2I, so V = I maps to E V E^T = 4I. Norms agree:
  // |I|_I = sqrt(2) and |4I|_{4I} = sqrt(tr(I)) = sqrt(2).
  SpdManifold m(2);
  const auto p = m.make_point(Eigen::MatrixXd::Identity(2, 2));
  const auto q = m.make_point(4.0 * Eigen::MatrixXd::Identity(2, 2));
  const auto v = m.make_tangent(p, Eigen::MatrixXd::Identity(2, 2));
  const auto w = m.parallel_transport(p, q, v);
  EXPECT_LT((w.components() - 4.0 * Eigen::MatrixXd::Identity(2, 2)).norm(), 1e-13);
  EXPECT_NEAR(m.norm(q, w), m.norm(p, v), 1e-14);
}

TEST(Spd, RejectsIndefiniteAndAsymmetric) {
  SpdManifold m(2);
  EXPECT_THROW(m.make_point(diag({1.0, -1.0})), DomainError);
  Eigen::MatrixXd a(2, 2);
  a << 1, 0.5, 0, 1;
  EXPECT_THROW(m.make_point(a), ContractViolation);
}

TEST(Spd, MatrixFunctionsInvertEachOther) {
  Eigen::MatrixXd s(3, 3);
  s << 0.3, 0.1, -0.2, 0.1, -0.5, 0.4, -0.2, 0.4, 0.2;
  const Eigen::MatrixXd p = spd::expm(s);
  EXPECT_LT((spd::logm(p) - s).norm(), 1e-13);
  const Eigen::MatrixXd r = spd::sqrtm(p);
  EXPECT_LT((r * r - p).norm(), 1e-13);
  EXPECT_LT((spd::inv_sqrtm(p) * r - Eigen::MatrixXd::Identity(3, 3)).norm(), 1e-13);
}

class AllManifolds : public ::testing::TestWithParam<const char*> {};

TEST_P(AllManifolds, ExpLogRoundTripAndAxioms) {
  const auto m = make_manifold(GetParam());
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 25; ++trial) {
    const auto p = m->random_point(rng);
    const auto v = m->random_tangent(p, rng).scaled_by(0.5);
    const auto q = m->exp_map(p, v);
    EXPECT_LT((m->log_map(p, q).components() - v.components()).norm(), 1e-8);
    EXPECT_NEAR(m->distance(p, q), m->norm(p, v), 1e-10);
    EXPECT_NEAR(m->distance(p, q), m->distance(q, p), 1e-10);
    EXPECT_NEAR(m->distance(p, p), 0.0, 1e-12);
    const auto w = m->random_tangent(p, rng);
    EXPECT_NEAR(m->norm(q, m->parallel_transport(p, q, w)), m->norm(p, w), 1e-10);
  }
}

TEST_P(AllManifolds, CurveLengthOfGeodesicIsDistance) {
  const auto m = make_manifold(GetParam());
  std::mt19937_64 rng(11);
  const auto p = m->random_point(rng);
  const auto v = m->random_tangent(p, rng).scaled_by(0.4);
  SampledCurve curve;
  curve.parameters = uniform_parameters(201);
  for (double t : curve.parameters) curve.points.push_back(m->exp_map(p, v.scaled_by(t)));
  EXPECT_NEAR(m->curve_length(curve), m->distance(p, curve.points.back()), 1e-6);
}

TEST_P(AllManifolds, MismatchedBaseIsContractViolation) {
  const auto m = make_manifold(GetParam());
  std::mt19937_64 rng(3);
  const auto p = m->random_point(rng);
  const auto q = m->exp_map(p, m->random_tangent(p, rng).scaled_by(0.3));
  const auto v = m->random_tangent(p, rng);
  EXPECT_THROW(m->norm(q, v), ContractViolation);
  EXPECT_THROW(m->exp_map(q, v), ContractViolation);
}

INSTANTIATE_TEST_SUITE_P(Builtins, AllManifolds,
                         ::testing::Values("euclidean:3", "sphere:2", "spd:2", "spd:3"));

TEST(CurveLength, RejectsBadParameters) {
  EuclideanSpace m(1);
  SampledCurve curve;
  curve.points = {m.make_point(col({0})), m.make_point(col({1}))};
  curve.parameters = {0.0, 0.0};
  EXPECT_THROW(m.curve_length(curve), ContractViolation);
  curve.parameters = {0.0};
  EXPECT_THROW(m.curve_length(curve), ContractViolation);
}
