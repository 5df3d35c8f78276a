#pragma once

// Riemannian gradient descent with exponential-map updates
//
//   x_{k+1} = exp_{x_k}(-eta * grad f(x_k)),
//
// Frechet-mean objectives, the step-size equivalence harness (a run in the
// metric lambda*g with step eta against a base run with step eta/lambda) and a
// least-squares calibration of lambda against target distances.

#include "metscale/scaled_metric.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace metscale {

struct Objective {
  std::function<double(const ManifoldPoint&)> value_fn;
  /// Gradient in the base metric g, based at the argument.
  std::function<TangentVector(const ManifoldPoint&)> gradient_fn;
};

struct OptimizerConfig {
  double step_size = 0.1;
  int max_iters = 1000;
  double grad_tol = 1e-10;

  /// Throws ContractViolation unless step_size > 0, max_iters >= 1, grad_tol >= 0.
  void validate() const;
};

enum class StopReason { kConverged, kMaxIters, kError };

std::string to_string(StopReason reason);

struct OptimizerTrace {
  std::vector<ManifoldPoint> iterates;
  std::vector<double> values;
  /// Gradient norms in the metric of the run.
  std::vector<double> grad_norms;
  StopReason stop_reason = StopReason::kMaxIters;
  /// Set when stop_reason == kError.
  std::string error;

  std::size_t size() const { return iterates.size(); }
  const ManifoldPoint& final_point() const { return iterates.back(); }
};

/// Gradient descent in the metric lambda*g: the update uses grad_{g~} f and
/// norms are measured in g~. max_iters counts exp-map updates.
OptimizerTrace riemannian_gd(const ScaledManifold& manifold, const Objective& objective,
                             const ManifoldPoint& x0, const OptimizerConfig& config);

/// Gradient descent in the base metric g.
OptimizerTrace riemannian_gd(std::shared_ptr<const Manifold> manifold, const Objective& objective,
                             const ManifoldPoint& x0, const OptimizerConfig& config);

/// f(x) = 1/(2N) sum d(x, y_i)^2 with gradient -(1/N) sum log_x(y_i).
Objective frechet_objective(std::shared_ptr<const Manifold> manifold,
                            std::vector<ManifoldPoint> points);

struct EquivalenceResult {
  /// max_k d_g(x_k^scaled, x_k^base) over the compared prefix.
  double max_deviation = 0.0;
  std::size_t compared_iterates = 0;
  OptimizerTrace scaled_run;
  OptimizerTrace base_run;
};

/// Thrown when either arm of an equivalence run fails; carries the deviation
/// over the iterates both arms did produce.
class EquivalenceFailure : public std::runtime_error {
 public:
  EquivalenceFailure(const std::string& what, double partial_deviation, std::size_t compared)
      : std::runtime_error(what), partial_deviation_(partial_deviation), compared_(compared) {}
  double partial_deviation() const { return partial_deviation_; }
  std::size_t compared_iterates() const { return compared_; }

 private:
  double partial_deviation_;
  std::size_t compared_;
};

/// Runs `iters` updates on ScaledManifold(lambda) with step eta and on the base
/// manifold with step eta/lambda (grad_tol = 0 in both arms, so runs are
/// compared by iteration count) and measures the iterate deviation.
EquivalenceResult equivalence_check(std::shared_ptr<const Manifold> manifold,
                                    const Objective& objective, const ManifoldPoint& x0,
                                    double eta, ScaleFactor lambda, int iters);

/// Largest d_g between same-index iterates of two traces (common prefix).
double max_iterate_deviation(const Manifold& manifold, const OptimizerTrace& a,
                             const OptimizerTrace& b);

struct Calibration {
  ScaleFactor lambda_star;
  /// L(lambda*) = sum_{i<j} (sqrt(lambda*) d_ij - t_ij)^2.
  double fit_residual;
};

/// Calibration loss L(lambda) for given base distances and targets (upper
/// triangles of the matrices are used).
double calibration_loss(const Eigen::MatrixXd& base_distances, const Eigen::MatrixXd& targets,
                        double lambda);

Eigen::MatrixXd pairwise_distances(const Manifold& manifold,
                                   const std::vector<ManifoldPoint>& points);

/// Closed-form minimizer sqrt(lambda*) = sum t_ij d_ij / sum d_ij^2. Throws
/// DegenerateInput when every base distance is zero or the targets would make
/// lambda* vanish.
Calibration calibrate_scale(const Manifold& manifold, const std::vector<ManifoldPoint>& base_points,
                            const Eigen::MatrixXd& target_distances);

struct JointResult {
  OptimizerTrace trace;
  Calibration calibration;
  /// Base-metric run with step eta / lambda*.
  OptimizerTrace base_run;
  double equivalence_deviation = 0.0;
};

/// Calibrates lambda*, then descends on ScaledManifold(lambda*). A base-metric
/// run with step eta/lambda* and the same number of updates (grad_tol = 0) is
/// returned alongside, with the iterate deviation between the two.
JointResult joint_descent(std::shared_ptr<const Manifold> manifold,
                          const std::vector<ManifoldPoint>& base_points,
                          const Eigen::MatrixXd& target_distances, const Objective& objective,
                          const ManifoldPoint& x0, const OptimizerConfig& config);

/// `count` points exp_c(v_i) around a random centre c with ||v_i||_g drawn
/// uniformly from [0, radius). Keeps sphere clusters well away from antipodes
/// for radius < pi/2.
std::vector<ManifoldPoint> sample_cluster(const Manifold& manifold, int count, double radius,
                                          std::mt19937_64& rng);

struct FrechetProblem {
  std::uint64_t seed;
  std::vector<ManifoldPoint> points;
  /// Starts at the first sample.
  ManifoldPoint x0;
};

/// Seeded Frechet-mean instance with cluster radius 0.8.
FrechetProblem make_frechet_problem(const Manifold& manifold, int n_points, std::uint64_t seed);

/// Columns iter, f_value, grad_norm, coord_0..coord_{d-1} (ambient entries,
/// column-major), 17 significant digits.
void write_csv(std::ostream& out, const OptimizerTrace& trace);

}  // namespace metscale
