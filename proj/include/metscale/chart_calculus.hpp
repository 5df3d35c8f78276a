#pragma once

// Coordinate-chart numerics: metric matrices g_ij(x), Christoffel symbols by
// central differences, fixed-step RK4 geodesics, volume densities and chart
// rescaling (constant or position dependent).

#include "metscale/scaled_metric.hpp"

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace metscale {

using MetricFunction = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
using ScalarField = std::function<double(const Eigen::VectorXd&)>;

inline constexpr double kDefaultFdStep = 1e-5;
inline constexpr int kDefaultStepsPerUnitTime = 1000;

/// Axis-aligned box lower <= x <= upper.
struct CoordinateBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  /// True when every coordinate is at least `margin` inside the box.
  bool contains(const Eigen::VectorXd& x, double margin = 0.0) const;
};

class Chart {
 public:
  Chart(std::string name, CoordinateBox domain, MetricFunction metric_fn);

  const std::string& name() const { return name_; }
  int dimension() const { return static_cast<int>(domain_.lower.size()); }
  const CoordinateBox& domain() const { return domain_; }

  /// Throws DomainError outside the box and InvalidChart when the metric is not
  /// symmetric positive definite.
  Eigen::MatrixXd metric_at(const Eigen::VectorXd& x) const;

  /// Raw metric function, no domain or SPD checks.
  const MetricFunction& metric_function() const { return metric_fn_; }

 private:
  std::string name_;
  CoordinateBox domain_;
  MetricFunction metric_fn_;
};

/// Gamma^k_ij at one point; symbols[k](i, j).
struct ChristoffelField {
  Eigen::VectorXd point;
  std::vector<Eigen::MatrixXd> symbols;

  double operator()(int k, int i, int j) const { return symbols[k](i, j); }
  int dimension() const { return static_cast<int>(symbols.size()); }
  double max_abs() const;
  /// Largest |Gamma^k_ij - Gamma^k_ji|.
  double lower_index_asymmetry() const;
};

double max_abs_difference(const ChristoffelField& a, const ChristoffelField& b);

struct GeodesicPath {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> positions;
  std::vector<Eigen::VectorXd> velocities;

  std::size_t size() const { return times.size(); }
};

/// Thrown when a geodesic leaves the chart; carries the path up to the last
/// valid state.
class PartialPathError : public std::runtime_error {
 public:
  PartialPathError(const std::string& what, GeodesicPath partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const GeodesicPath& partial_path() const { return partial_; }

 private:
  GeodesicPath partial_;
};

/// Sampled coordinate curve x(t_i); t_i strictly increasing.
struct CoordinateCurve {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> points;
};

Eigen::MatrixXd metric_at(const Chart& chart, const Eigen::VectorXd& x);

/// Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij), derivatives by
/// central differences of step fd_step. x must sit fd_step inside the domain.
ChristoffelField christoffel_at(const Chart& chart, const Eigen::VectorXd& x,
                                double fd_step = kDefaultFdStep);

/// Classical RK4 for x'' + Gamma(x)[x', x'] = 0 on a uniform grid of `steps`
/// intervals over [0, t_end].
GeodesicPath geodesic_integrate(const Chart& chart, const Eigen::VectorXd& x0,
                                const Eigen::VectorXd& v0, double t_end = 1.0,
                                int steps = kDefaultStepsPerUnitTime,
                                double fd_step = kDefaultFdStep);

/// Max over interior nodes of |central second difference + Gamma[v, v]|, with
/// v from the stored velocities.
double geodesic_residual(const Chart& chart, const GeodesicPath& path,
                         double fd_step = kDefaultFdStep);

/// Largest pointwise position/velocity difference; paths must share a grid.
double max_path_deviation(const GeodesicPath& a, const GeodesicPath& b);

/// sqrt(det g_ij(x)).
double volume_density(const Chart& chart, const Eigen::VectorXd& x);

Chart scale_chart_constant(const Chart& chart, ScaleFactor lambda);

/// metric_fn becomes lambda_fn(x) * g(x). Non-positive lambda_fn values raise
/// InvalidChart at evaluation time.
Chart scale_chart_pointwise(const Chart& chart, ScalarField lambda_fn);

/// Trapezoidal quadrature of sqrt(x'^T g(x) x') with finite-difference
/// velocities (second order, one-sided at the ends).
double chart_curve_length(const Chart& chart, const CoordinateCurve& curve);

namespace charts {

/// Identity metric on [-1000, 1000]^n.
Chart euclidean(int n);
/// (r, theta) with g = diag(1, r^2), r in [0.1, 10].
Chart polar();
/// (theta, phi) on the unit 2-sphere with g = diag(1, sin^2 theta),
/// theta in [0.1, pi - 0.1].
Chart sphere();

/// "euclidean:n", "polar", "sphere-chart". Throws ContractViolation.
Chart by_name(const std::string& name);

/// Embedding of sphere-chart coordinates into R^3.
Eigen::Vector3d sphere_to_ambient(const Eigen::VectorXd& theta_phi);

}  // namespace charts

/// Columns t, x1..xn, v1..vn with 17 significant digits.
void write_csv(std::ostream& out, const GeodesicPath& path);

}  // namespace metscale
