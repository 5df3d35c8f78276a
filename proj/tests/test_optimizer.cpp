#include "metscale/errors.hpp"
#include "metscale/optimizer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace metscale;

namespace {

Eigen::MatrixXd col(std::initializer_list<double> values) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index i = 0;
  for (double v : values) m(i++, 0) = v;
  return m;
}

}  // namespace

TEST(Config, Validation) {
  EXPECT_THROW((OptimizerConfig{0.0, 10, 0.0}.validate()), ContractViolation);
  EXPECT_THROW((OptimizerConfig{0.1, 0, 0.0}.validate()), ContractViolation);
  EXPECT_THROW((OptimizerConfig{0.1, 10, -1.0}.validate()), ContractViolation);
  EXPECT_NO_THROW((OptimizerConfig{0.1, 10, 0.0}.validate()));
}

TEST(Descent, EuclideanMeanInOneStep) {
  // With eta = 1 the Euclidean Frechet gradient step lands on the mean.
  const auto m = make_manifold("euclidean:2");
  std::vector<ManifoldPoint> pts = {m->make_point(col({0, 0})), m->make_point(col({2, 0})),
                                    m->make_point(col({1, 3}))};
  const auto trace = riemannian_gd(m, frechet_objective(m, pts), pts[0], {1.0, 5, 1e-12});
  EXPECT_EQ(trace.stop_reason, StopReason::kConverged);
  EXPECT_LT((trace.final_point().coordinates() - col({1, 1})).norm(), 1e-14);
}

TEST(Descent, SphereMidpoint) {
  const auto s = make_manifold("sphere:2");
  std::vector<ManifoldPoint> pts = {s->make_point(col({1, 0, 0})), s->make_point(col({0, 1, 0}))};
  const auto trace = riemannian_gd(s, frechet_objective(s, pts), pts[0], {0.5, 1000, 1e-12});
  EXPECT_EQ(trace.stop_reason, StopReason::kConverged);
  const double h = 1.0 / std::sqrt(2.0);
  EXPECT_LT((trace.final_point().coordinates() - col({h, h, 0})).norm(), 1e-8);
}

TEST(Descent, MaxItersCountsUpdates) {
  const auto s = make_manifold("sphere:2");
  const auto problem = make_frechet_problem(*s, 5, 42);
  const auto trace =
      riemannian_gd(s, frechet_objective(s, problem.points), problem.x0, {0.1, 7, 0.0});
  EXPECT_EQ(trace.stop_reason, StopReason::kMaxIters);
  EXPECT_EQ(trace.size(), 8u);
  EXPECT_EQ(trace.values.size(), 8u);
  for (std::size_t k = 1; k < trace.size(); ++k) EXPECT_LE(trace.values[k], trace.values[k - 1]);
}

TEST(Descent, ObjectiveFailureIsReportedInTrace) {
  const auto s = make_manifold("sphere:2");
  const auto p = s->make_point(col({0, 0, 1}));
  // Antipodal data point: log is undefined at the start.
  const auto objective = frechet_objective(s, {s->make_point(col({0, 0, -1}))});
  const auto trace = riemannian_gd(s, objective, p, {0.1, 10, 0.0});
  EXPECT_EQ(trace.stop_reason, StopReason::kError);
  EXPECT_FALSE(trace.error.empty());
}

TEST(Descent, UnitScaleIsBitIdenticalToBase) {
  const auto m = make_manifold("spd:2");
  const auto problem = make_frechet_problem(*m, 4, 3);
  const auto obj = frechet_objective(m, problem.points);
  const auto a = riemannian_gd(m, obj, problem.x0, {0.1, 20, 0.0});
  const auto b = riemannian_gd(ScaledManifold(m, ScaleFactor(1.0)), obj, problem.x0, {0.1, 20, 0.0});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k)
    EXPECT_EQ(a.iterates[k].coordinates(), b.iterates[k].coordinates());
}

class Equivalence : public ::testing::TestWithParam<const char*> {};

TEST_P(Equivalence, ScaledStepMatchesRescaledBaseStep) {
  const auto m = make_manifold(GetParam());
  const auto problem = make_frechet_problem(*m, 5, 20240601);
  const auto result =
      equivalence_check(m, frechet_objective(m, problem.points), problem.x0, 0.1, ScaleFactor(4.0), 200);
  EXPECT_EQ(result.compared_iterates, 201u);
  EXPECT_LE(result.max_deviation, 1e-8);
}

INSTANTIATE_TEST_SUITE_P(Builtins, Equivalence, ::testing::Values("euclidean:3", "sphere:2", "spd:2"));

TEST(Calibration, RecoversSquaredFactor) {
  for (const char* spec : {"euclidean:3", "sphere:2", "spd:2"}) {
    const auto m = make_manifold(spec);
    const auto problem = make_frechet_problem(*m, 6, 17);
    const Eigen::MatrixXd d = pairwise_distances(*m, problem.points);
    for (double c : {0.5, 1.0, 3.0}) {
      const auto cal = calibrate_scale(*m, problem.points, c * d);
      EXPECT_NEAR(cal.lambda_star.value(), c * c, 1e-10 * c * c) << spec;
      EXPECT_LT(cal.fit_residual, 1e-20);
    }
  }
}

TEST(Calibration, MinimizesLoss) {
  const auto m = make_manifold("euclidean:2");
  const auto problem = make_frechet_problem(*m, 5, 8);
  const Eigen::MatrixXd d = pairwise_distances(*m, problem.points);
  Eigen::MatrixXd t = 2.0 * d;
  t(0, 1) = t(1, 0) = t(0, 1) + 0.3;  // noisy target
  const auto cal = calibrate_scale(*m, problem.points, t);
  const double l = cal.lambda_star.value();
  EXPECT_NEAR(calibration_loss(d, t, l), cal.fit_residual, 1e-12);
  EXPECT_LE(cal.fit_residual, calibration_loss(d, t, l * 1.001));
  EXPECT_LE(cal.fit_residual, calibration_loss(d, t, l * 0.999));
}

TEST(Calibration, DegenerateInputs) {
  const auto m = make_manifold("euclidean:2");
  const auto p = m->make_point(col({1, 1}));
  EXPECT_THROW(calibrate_scale(*m, {p, p, p}, Eigen::MatrixXd::Ones(3, 3)), DegenerateInput);
  const auto problem = make_frechet_problem(*m, 3, 1);
  EXPECT_THROW(calibrate_scale(*m, problem.points, Eigen::MatrixXd::Zero(3, 3)), DegenerateInput);
  EXPECT_THROW(calibrate_scale(*m, {p}, Eigen::MatrixXd::Zero(1, 1)), ContractViolation);
  EXPECT_THROW(calibrate_scale(*m, problem.points, Eigen::MatrixXd::Zero(2, 2)), ContractViolation);
}

TEST(Joint, PathMatchesBaseRunWithRescaledStep) {
  const auto m = make_manifold("sphere:2");
  const auto problem = make_frechet_problem(*m, 5, 99);
  const Eigen::MatrixXd t = 3.0 * pairwise_distances(*m, problem.points);
  const auto joint = joint_descent(m, problem.points, t, frechet_objective(m, problem.points),
                                   problem.x0, {0.1, 200, 1e-10});
  EXPECT_NEAR(joint.calibration.lambda_star.value(), 9.0, 1e-9);
  EXPECT_EQ(joint.base_run.size(), joint.trace.size());
  EXPECT_LE(joint.equivalence_deviation, 1e-8);
}

TEST(Problem, SeededAndDeterministic) {
  const auto m = make_manifold("spd:2");
  const auto a = make_frechet_problem(*m, 4, 5);
  const auto b = make_frechet_problem(*m, 4, 5);
  const auto c = make_frechet_problem(*m, 4, 6);
  EXPECT_EQ(a.points[2].coordinates(), b.points[2].coordinates());
  EXPECT_NE(a.points[2].coordinates(), c.points[2].coordinates());
  EXPECT_EQ(a.x0.coordinates(), a.points[0].coordinates());
}

TEST(Csv, TraceColumns) {
  const auto m = make_manifold("spd:2");
  const auto problem = make_frechet_problem(*m, 3, 5);
  const auto trace =
      riemannian_gd(m, frechet_objective(m, problem.points), problem.x0, {0.1, 2, 0.0});
  std::ostringstream out;
  write_csv(out, trace);
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "iter,f_value,grad_norm,coord_0,coord_1,coord_2,coord_3");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
}
