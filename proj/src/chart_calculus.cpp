#include "metscale/chart_calculus.hpp"

#include "metscale/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <sstream>

namespace metscale {

namespace {

constexpr double kMetricSymmetryTol = 1e-12;
constexpr double kMinConditionReciprocal = 1e-14;

std::string format_point(const Eigen::VectorXd& x) {
  std::ostringstream out;
  out << "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) out << (i ? ", " : "") << x(i);
  out << ")";
  return out.str();
}

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Eigen::VectorXd filled(int n, double v) { return Eigen::VectorXd::Constant(n, v); }

}  // namespace

bool CoordinateBox::contains(const Eigen::VectorXd& x, double margin) const {
  if (x.size() != lower.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x(i))) return false;
    if (x(i) < lower(i) + margin || x(i) > upper(i) - margin) return false;
  }
  return true;
}

Chart::Chart(std::string name, CoordinateBox domain, MetricFunction metric_fn)
    : name_(std::move(name)), domain_(std::move(domain)), metric_fn_(std::move(metric_fn)) {
  if (domain_.lower.size() < 1 || domain_.lower.size() != domain_.upper.size())
    throw ContractViolation("chart '" + name_ + "': malformed domain box");
  if ((domain_.upper - domain_.lower).minCoeff() <= 0.0)
    throw ContractViolation("chart '" + name_ + "': empty domain box");
  if (!metric_fn_) throw ContractViolation("chart '" + name_ + "': missing metric function");
}

Eigen::MatrixXd Chart::metric_at(const Eigen::VectorXd& x) const {
  if (!domain_.contains(x))
    throw DomainError("chart '" + name_ + "': point " + format_point(x) + " outside domain");
  Eigen::MatrixXd g = metric_fn_(x);
  const int n = dimension();
  if (g.rows() != n || g.cols() != n || !g.allFinite())
    throw InvalidChart("chart '" + name_ + "': metric has wrong shape or non-finite entries");
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > kMetricSymmetryTol * scale)
    throw InvalidChart("chart '" + name_ + "': metric is not symmetric at " + format_point(x));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g, Eigen::EigenvaluesOnly);
  if (!(solver.eigenvalues().minCoeff() > 0.0))
    throw InvalidChart("chart '" + name_ + "': metric is not positive definite at " +
                       format_point(x));
  return g;
}

Eigen::MatrixXd metric_at(const Chart& chart, const Eigen::VectorXd& x) {
  return chart.metric_at(x);
}

// ---------------------------------------------------------------------------

double ChristoffelField::max_abs() const {
  double m = 0.0;
  for (const auto& s : symbols) m = std::max(m, s.cwiseAbs().maxCoeff());
  return m;
}

double ChristoffelField::lower_index_asymmetry() const {
  double m = 0.0;
  for (const auto& s : symbols) m = std::max(m, (s - s.transpose()).cwiseAbs().maxCoeff());
  return m;
}

double max_abs_difference(const ChristoffelField& a, const ChristoffelField& b) {
  if (a.dimension() != b.dimension())
    throw ContractViolation("comparing Christoffel fields of different dimension");
  double m = 0.0;
  for (int k = 0; k < a.dimension(); ++k)
    m = std::max(m, (a.symbols[k] - b.symbols[k]).cwiseAbs().maxCoeff());
  return m;
}

ChristoffelField christoffel_at(const Chart& chart, const Eigen::VectorXd& x, double fd_step) {
  if (!(fd_step > 0.0)) throw ContractViolation("christoffel_at: fd_step must be positive");
  const int n = chart.dimension();
  if (x.size() != n) throw ContractViolation("christoffel_at: coordinate has wrong dimension");
  if (!chart.domain().contains(x, fd_step))
    throw DomainError("chart '" + chart.name() + "': " + format_point(x) +
                      " is closer than fd_step to the domain boundary");

  const Eigen::MatrixXd g = chart.metric_at(x);
  std::vector<Eigen::MatrixXd> dg(n);
  for (int l = 0; l < n; ++l) {
    Eigen::VectorXd plus = x, minus = x;
    plus(l) += fd_step;
    minus(l) -= fd_step;
    dg[l] = (chart.metric_at(plus) - chart.metric_at(minus)) / (2.0 * fd_step);
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g);
  const Eigen::VectorXd& w = solver.eigenvalues();
  if (!(w.minCoeff() > kMinConditionReciprocal * w.maxCoeff()))
    throw NumericalError("chart '" + chart.name() + "': metric is numerically singular at " +
                         format_point(x));
  const Eigen::MatrixXd& u = solver.eigenvectors();
  const Eigen::MatrixXd g_inv = u * w.cwiseInverse().asDiagonal() * u.transpose();

  ChristoffelField field{x, std::vector<Eigen::MatrixXd>(n, Eigen::MatrixXd::Zero(n, n))};
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        double sum = 0.0;
        for (int l = 0; l < n; ++l)
          sum += g_inv(k, l) * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
        field.symbols[k](i, j) = field.symbols[k](j, i) = 0.5 * sum;
      }
    }
  }
  return field;
}

// ---------------------------------------------------------------------------

namespace {

Eigen::VectorXd geodesic_acceleration(const Chart& chart, const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& v, double fd_step) {
  const ChristoffelField gamma = christoffel_at(chart, x, fd_step);
  Eigen::VectorXd a(x.size());
  for (int k = 0; k < gamma.dimension(); ++k) a(k) = -v.dot(gamma.symbols[k] * v);
  return a;
}

}  // namespace

GeodesicPath geodesic_integrate(const Chart& chart, const Eigen::VectorXd& x0,
                                const Eigen::VectorXd& v0, double t_end, int steps,
                                double fd_step) {
  const int n = chart.dimension();
  if (x0.size() != n || v0.size() != n)
    throw ContractViolation("geodesic_integrate: initial state has wrong dimension");
  if (!(t_end > 0.0) || !std::isfinite(t_end))
    throw ContractViolation("geodesic_integrate: t_end must be positive");
  if (steps < 1) throw ContractViolation("geodesic_integrate: steps must be >= 1");
  if (!chart.domain().contains(x0, fd_step))
    throw DomainError("geodesic_integrate: initial point " + format_point(x0) +
                      " is not interior to chart '" + chart.name() + "'");

  const double dt = t_end / steps;
  GeodesicPath path;
  path.times.reserve(steps + 1);
  path.positions.reserve(steps + 1);
  path.velocities.reserve(steps + 1);
  path.times.push_back(0.0);
  path.positions.push_back(x0);
  path.velocities.push_back(v0);

  Eigen::VectorXd x = x0;
  Eigen::VectorXd v = v0;
  for (int s = 0; s < steps; ++s) {
    try {
      const Eigen::VectorXd k1x = v;
      const Eigen::VectorXd k1v = geodesic_acceleration(chart, x, v, fd_step);
      const Eigen::VectorXd k2x = v + 0.5 * dt * k1v;
      const Eigen::VectorXd k2v =
          geodesic_acceleration(chart, x + 0.5 * dt * k1x, k2x, fd_step);
      const Eigen::VectorXd k3x = v + 0.5 * dt * k2v;
      const Eigen::VectorXd k3v =
          geodesic_acceleration(chart, x + 0.5 * dt * k2x, k3x, fd_step);
      const Eigen::VectorXd k4x = v + dt * k3v;
      const Eigen::VectorXd k4v = geodesic_acceleration(chart, x + dt * k3x, k4x, fd_step);
      Eigen::VectorXd x_next = x + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
      Eigen::VectorXd v_next = v + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
      if (!chart.domain().contains(x_next, fd_step))
        throw DomainError("next state " + format_point(x_next) + " leaves the chart");
      x = std::move(x_next);
      v = std::move(v_next);
    } catch (const DomainError& e) {
      const std::string message = "geodesic left chart '" + chart.name() + "' at t = " +
                                  g17(path.times.back()) + ": " + e.what();
      throw PartialPathError(message, std::move(path));
    }
    path.times.push_back(s + 1 == steps ? t_end : (s + 1) * dt);
    path.positions.push_back(x);
    path.velocities.push_back(v);
  }
  return path;
}

double geodesic_residual(const Chart& chart, const GeodesicPath& path, double fd_step) {
  if (path.size() < 3) return 0.0;
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < path.size(); ++i) {
    const double h1 = path.times[i] - path.times[i - 1];
    const double h2 = path.times[i + 1] - path.times[i];
    const Eigen::VectorXd second =
        2.0 * (h1 * path.positions[i + 1] - (h1 + h2) * path.positions[i] +
               h2 * path.positions[i - 1]) /
        (h1 * h2 * (h1 + h2));
    const Eigen::VectorXd a =
        geodesic_acceleration(chart, path.positions[i], path.velocities[i], fd_step);
    worst = std::max(worst, (second - a).cwiseAbs().maxCoeff());
  }
  return worst;
}

double max_path_deviation(const GeodesicPath& a, const GeodesicPath& b) {
  if (a.size() != b.size()) throw ContractViolation("max_path_deviation: paths differ in length");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.times[i] != b.times[i])
      throw ContractViolation("max_path_deviation: paths use different time grids");
    worst = std::max(worst, (a.positions[i] - b.positions[i]).cwiseAbs().maxCoeff());
    worst = std::max(worst, (a.velocities[i] - b.velocities[i]).cwiseAbs().maxCoeff());
  }
  return worst;
}

// ---------------------------------------------------------------------------

double volume_density(const Chart& chart, const Eigen::VectorXd& x) {
  return std::sqrt(chart.metric_at(x).determinant());
}

Chart scale_chart_constant(const Chart& chart, ScaleFactor lambda) {
  MetricFunction base = chart.metric_function();
  const double factor = lambda.value();
  return Chart(chart.name() + "*" + g17(factor), chart.domain(),
               [base = std::move(base), factor](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
                 return factor * base(x);
               });
}

Chart scale_chart_pointwise(const Chart& chart, ScalarField lambda_fn) {
  if (!lambda_fn) throw ContractViolation("scale_chart_pointwise: missing scale function");
  MetricFunction base = chart.metric_function();
  std::string name = chart.name() + "*lambda(x)";
  return Chart(name, chart.domain(),
               [base = std::move(base), lambda_fn = std::move(lambda_fn),
                name](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
                 const double factor = lambda_fn(x);
                 if (!std::isfinite(factor) || !(factor > 0.0))
                   throw InvalidChart("chart '" + name + "': non-positive scale " + g17(factor) +
                                      " at " + format_point(x));
                 return factor * base(x);
               });
}

double chart_curve_length(const Chart& chart, const CoordinateCurve& curve) {
  const std::size_t count = curve.points.size();
  if (count < 2) throw ContractViolation("chart_curve_length needs at least 2 samples");
  if (curve.times.size() != count)
    throw ContractViolation("chart_curve_length: time count differs from point count");
  for (std::size_t i = 1; i < count; ++i)
    if (!(curve.times[i] > curve.times[i - 1]))
      throw ContractViolation("chart_curve_length: times must be strictly increasing");

  const auto& t = curve.times;
  const auto& x = curve.points;
  std::vector<Eigen::VectorXd> velocity(count);
  if (count == 2) {
    velocity[0] = velocity[1] = (x[1] - x[0]) / (t[1] - t[0]);
  } else {
    for (std::size_t i = 1; i + 1 < count; ++i) {
      const double h1 = t[i] - t[i - 1];
      const double h2 = t[i + 1] - t[i];
      velocity[i] = (-h2 / (h1 * (h1 + h2))) * x[i - 1] + ((h2 - h1) / (h1 * h2)) * x[i] +
                    (h1 / (h2 * (h1 + h2))) * x[i + 1];
    }
    {
      const double h1 = t[1] - t[0];
      const double h2 = t[2] - t[1];
      velocity[0] = (-(2.0 * h1 + h2) / (h1 * (h1 + h2))) * x[0] + ((h1 + h2) / (h1 * h2)) * x[1] -
                    (h1 / (h2 * (h1 + h2))) * x[2];
    }
    {
      const double h1 = t[count - 2] - t[count - 3];
      const double h2 = t[count - 1] - t[count - 2];
      velocity[count - 1] = (h2 / (h1 * (h1 + h2))) * x[count - 3] -
                            ((h1 + h2) / (h1 * h2)) * x[count - 2] +
                            ((2.0 * h2 + h1) / (h2 * (h1 + h2))) * x[count - 1];
    }
  }

  std::vector<double> speed(count);
  for (std::size_t i = 0; i < count; ++i) {
    const Eigen::MatrixXd g = chart.metric_at(x[i]);
    speed[i] = std::sqrt(std::max(0.0, velocity[i].dot(g * velocity[i])));
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < count; ++i)
    total += 0.5 * (t[i + 1] - t[i]) * (speed[i] + speed[i + 1]);
  return total;
}

// ---------------------------------------------------------------------------

namespace charts {

Chart euclidean(int n) {
  if (n < 1) throw ContractViolation("euclidean chart dimension must be >= 1");
  return Chart("euclidean:" + std::to_string(n), {filled(n, -1000.0), filled(n, 1000.0)},
               [n](const Eigen::VectorXd&) -> Eigen::MatrixXd {
                 return Eigen::MatrixXd::Identity(n, n);
               });
}

Chart polar() {
  Eigen::VectorXd lower(2), upper(2);
  lower << 0.1, -4.0 * std::numbers::pi;
  upper << 10.0, 4.0 * std::numbers::pi;
  return Chart("polar", {lower, upper}, [](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, 2);
    g(0, 0) = 1.0;
    g(1, 1) = x(0) * x(0);
    return g;
  });
}

Chart sphere() {
  Eigen::VectorXd lower(2), upper(2);
  lower << 0.1, -4.0 * std::numbers::pi;
  upper << std::numbers::pi - 0.1, 4.0 * std::numbers::pi;
  return Chart("sphere-chart", {lower, upper}, [](const Eigen::VectorXd& x) -> Eigen::MatrixXd {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, 2);
    const double s = std::sin(x(0));
    g(0, 0) = 1.0;
    g(1, 1) = s * s;
    return g;
  });
}

Chart by_name(const std::string& name) {
  if (name == "polar") return polar();
  if (name == "sphere-chart") return sphere();
  const std::string prefix = "euclidean:";
  if (name.rfind(prefix, 0) == 0) {
    const std::string digits = name.substr(prefix.size());
    if (!digits.empty() && digits.size() <= 4 &&
        std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }))
      return euclidean(std::stoi(digits));
  }
  throw ContractViolation("unknown chart '" + name +
                          "' (expected euclidean:<n>, polar, or sphere-chart)");
}

Eigen::Vector3d sphere_to_ambient(const Eigen::VectorXd& theta_phi) {
  const double theta = theta_phi(0);
  const double phi = theta_phi(1);
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

}  // namespace charts

void write_csv(std::ostream& out, const GeodesicPath& path) {
  const std::size_t n = path.positions.empty() ? 0 : path.positions.front().size();
  out << "t";
  for (std::size_t i = 1; i <= n; ++i) out << ",x" << i;
  for (std::size_t i = 1; i <= n; ++i) out << ",v" << i;
  out << "\n";
  for (std::size_t r = 0; r < path.size(); ++r) {
    out << g17(path.times[r]);
    for (std::size_t i = 0; i < n; ++i) out << "," << g17(path.positions[r](i));
    for (std::size_t i = 0; i < n; ++i) out << "," << g17(path.velocities[r](i));
    out << "\n";
  }
}

}  // namespace metscale
