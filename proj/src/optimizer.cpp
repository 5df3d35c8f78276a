#include "metscale/optimizer.hpp"

#include "metscale/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace metscale {

namespace {

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void OptimizerConfig::validate() const {
  if (!std::isfinite(step_size) || !(step_size > 0.0))
    throw ContractViolation("step size must be finite and positive");
  if (max_iters < 1) throw ContractViolation("max_iters must be >= 1");
  if (!(grad_tol >= 0.0)) throw ContractViolation("grad_tol must be nonnegative");
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kConverged:
      return "converged";
    case StopReason::kMaxIters:
      return "max_iters";
    case StopReason::kError:
      return "error";
  }
  return "unknown";
}

OptimizerTrace riemannian_gd(const ScaledManifold& manifold, const Objective& objective,
                             const ManifoldPoint& x0, const OptimizerConfig& config) {
  config.validate();
  if (!objective.value_fn || !objective.gradient_fn)
    throw ContractViolation("riemannian_gd: objective is missing value or gradient");
  manifold.base().require_on_manifold(x0, "riemannian_gd");

  OptimizerTrace trace;
  ManifoldPoint x = x0;
  for (int k = 0;; ++k) {
    double value = 0.0;
    double grad_norm = 0.0;
    std::optional<TangentVector> direction;
    try {
      value = objective.value_fn(x);
      const TangentVector base_gradient = objective.gradient_fn(x);
      direction = manifold.gradient(x, base_gradient);
      grad_norm = manifold.norm(x, *direction);
    } catch (const std::runtime_error& e) {
      trace.stop_reason = StopReason::kError;
      trace.error = "iteration " + std::to_string(k) + ": " + e.what();
      return trace;
    } catch (const DomainError& e) {
      trace.stop_reason = StopReason::kError;
      trace.error = "iteration " + std::to_string(k) + ": " + e.what();
      return trace;
    }
    trace.iterates.push_back(x);
    trace.values.push_back(value);
    trace.grad_norms.push_back(grad_norm);

    if (grad_norm <= config.grad_tol) {
      trace.stop_reason = StopReason::kConverged;
      return trace;
    }
    if (k == config.max_iters) {
      trace.stop_reason = StopReason::kMaxIters;
      return trace;
    }
    try {
      x = manifold.exp(x, direction->scaled_by(-config.step_size));
    } catch (const std::runtime_error& e) {
      trace.stop_reason = StopReason::kError;
      trace.error = "update " + std::to_string(k) + ": " + e.what();
      return trace;
    } catch (const DomainError& e) {
      trace.stop_reason = StopReason::kError;
      trace.error = "update " + std::to_string(k) + ": " + e.what();
      return trace;
    }
  }
}

OptimizerTrace riemannian_gd(std::shared_ptr<const Manifold> manifold, const Objective& objective,
                             const ManifoldPoint& x0, const OptimizerConfig& config) {
  return riemannian_gd(ScaledManifold(std::move(manifold), ScaleFactor(1.0)), objective, x0,
                       config);
}

Objective frechet_objective(std::shared_ptr<const Manifold> manifold,
                            std::vector<ManifoldPoint> points) {
  if (!manifold) throw ContractViolation("frechet_objective: missing manifold");
  if (points.empty()) throw ContractViolation("frechet_objective needs at least one point");
  for (const auto& y : points) manifold->require_on_manifold(y, "frechet_objective");

  auto shared_points = std::make_shared<const std::vector<ManifoldPoint>>(std::move(points));
  Objective objective;
  objective.value_fn = [manifold, shared_points](const ManifoldPoint& x) {
    double sum = 0.0;
    for (const auto& y : *shared_points) {
      const double d = manifold->distance(x, y);
      sum += d * d;
    }
    return sum / (2.0 * static_cast<double>(shared_points->size()));
  };
  objective.gradient_fn = [manifold, shared_points](const ManifoldPoint& x) {
    TangentVector sum = manifold->zero_tangent(x);
    for (const auto& y : *shared_points) sum = sum + manifold->log_map(x, y);
    return sum.scaled_by(-1.0 / static_cast<double>(shared_points->size()));
  };
  return objective;
}

double max_iterate_deviation(const Manifold& manifold, const OptimizerTrace& a,
                             const OptimizerTrace& b) {
  const std::size_t n = std::min(a.size(), b.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    worst = std::max(worst, manifold.distance(a.iterates[k], b.iterates[k]));
  return worst;
}

EquivalenceResult equivalence_check(std::shared_ptr<const Manifold> manifold,
                                    const Objective& objective, const ManifoldPoint& x0,
                                    double eta, ScaleFactor lambda, int iters) {
  OptimizerConfig scaled_config{eta, iters, 0.0};
  OptimizerConfig base_config{eta / lambda.value(), iters, 0.0};
  scaled_config.validate();
  base_config.validate();

  EquivalenceResult result;
  result.scaled_run = riemannian_gd(ScaledManifold(manifold, lambda), objective, x0, scaled_config);
  result.base_run = riemannian_gd(manifold, objective, x0, base_config);
  result.compared_iterates = std::min(result.scaled_run.size(), result.base_run.size());
  result.max_deviation = max_iterate_deviation(*manifold, result.scaled_run, result.base_run);

  for (const OptimizerTrace* run : {&result.scaled_run, &result.base_run}) {
    if (run->stop_reason == StopReason::kError)
      throw EquivalenceFailure(
          std::string(run == &result.scaled_run ? "scaled" : "base") + " run failed: " + run->error,
          result.max_deviation, result.compared_iterates);
  }
  return result;
}

Eigen::MatrixXd pairwise_distances(const Manifold& manifold,
                                   const std::vector<ManifoldPoint>& points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      d(i, j) = d(j, i) = manifold.distance(points[i], points[j]);
  return d;
}

double calibration_loss(const Eigen::MatrixXd& base_distances, const Eigen::MatrixXd& targets,
                        double lambda) {
  const double root = std::sqrt(lambda);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < base_distances.rows(); ++i)
    for (Eigen::Index j = i + 1; j < base_distances.cols(); ++j) {
      const double r = root * base_distances(i, j) - targets(i, j);
      loss += r * r;
    }
  return loss;
}

Calibration calibrate_scale(const Manifold& manifold, const std::vector<ManifoldPoint>& base_points,
                            const Eigen::MatrixXd& target_distances) {
  const auto n = static_cast<Eigen::Index>(base_points.size());
  if (n < 2) throw ContractViolation("calibrate_scale needs at least 2 points");
  if (target_distances.rows() != n || target_distances.cols() != n)
    throw ContractViolation("calibrate_scale: target matrix must be N x N");
  if (!target_distances.allFinite() || target_distances.minCoeff() < 0.0)
    throw ContractViolation("calibrate_scale: targets must be finite and nonnegative");
  if ((target_distances - target_distances.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, target_distances.cwiseAbs().maxCoeff()))
    throw ContractViolation("calibrate_scale: target matrix must be symmetric");

  const Eigen::MatrixXd d = pairwise_distances(manifold, base_points);
  double cross = 0.0;
  double squares = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      cross += target_distances(i, j) * d(i, j);
      squares += d(i, j) * d(i, j);
    }
  if (!(squares > 0.0))
    throw DegenerateInput("calibrate_scale: all base distances are zero, scale is unidentifiable");
  const double root = cross / squares;
  if (!(root > 0.0))
    throw DegenerateInput("calibrate_scale: targets are uncorrelated with base distances");
  const double lambda = root * root;
  return {ScaleFactor(lambda), calibration_loss(d, target_distances, lambda)};
}

JointResult joint_descent(std::shared_ptr<const Manifold> manifold,
                          const std::vector<ManifoldPoint>& base_points,
                          const Eigen::MatrixXd& target_distances, const Objective& objective,
                          const ManifoldPoint& x0, const OptimizerConfig& config) {
  const Calibration calibration = calibrate_scale(*manifold, base_points, target_distances);
  OptimizerTrace trace =
      riemannian_gd(ScaledManifold(manifold, calibration.lambda_star), objective, x0, config);

  const int updates = std::max<int>(1, static_cast<int>(trace.size()) - 1);
  OptimizerConfig base_config{config.step_size / calibration.lambda_star.value(), updates, 0.0};
  OptimizerTrace base_run = riemannian_gd(manifold, objective, x0, base_config);
  const double deviation = max_iterate_deviation(*manifold, trace, base_run);
  return {std::move(trace), calibration, std::move(base_run), deviation};
}

std::vector<ManifoldPoint> sample_cluster(const Manifold& manifold, int count, double radius,
                                          std::mt19937_64& rng) {
  if (count < 1) throw ContractViolation("sample_cluster: count must be >= 1");
  if (!(radius >= 0.0)) throw ContractViolation("sample_cluster: radius must be nonnegative");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const ManifoldPoint centre = manifold.random_point(rng);
  std::vector<ManifoldPoint> points;
  points.reserve(count);
  for (int i = 0; i < count; ++i) {
    TangentVector v = manifold.random_tangent(centre, rng);
    const double len = manifold.norm(centre, v);
    const double target = radius * unit(rng);
    v = len > 0.0 ? v.scaled_by(target / len) : v;
    points.push_back(manifold.exp_map(centre, v));
  }
  return points;
}

FrechetProblem make_frechet_problem(const Manifold& manifold, int n_points, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<ManifoldPoint> points = sample_cluster(manifold, n_points, 0.8, rng);
  ManifoldPoint x0 = points.front();
  return {seed, std::move(points), std::move(x0)};
}

void write_csv(std::ostream& out, const OptimizerTrace& trace) {
  const Eigen::Index d = trace.iterates.empty() ? 0 : trace.iterates.front().coordinates().size();
  out << "iter,f_value,grad_norm";
  for (Eigen::Index c = 0; c < d; ++c) out << ",coord_" << c;
  out << "\n";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    out << k << "," << g17(trace.values[k]) << "," << g17(trace.grad_norms[k]);
    const Eigen::MatrixXd& x = trace.iterates[k].coordinates();
    for (Eigen::Index c = 0; c < d; ++c) out << "," << g17(x.data()[c]);
    out << "\n";
  }
}

}  // namespace metscale
