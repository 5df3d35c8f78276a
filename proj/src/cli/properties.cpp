// The verify suite: one record per scaling law, each evaluated on seeded
// random inputs with its own derived random stream.

#include "metscale/chart_calculus.hpp"
#include "metscale/cli.hpp"
#include "metscale/core_geometry.hpp"
#include "metscale/errors.hpp"
#include "metscale/optimizer.hpp"
#include "metscale/scaled_metric.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <future>
#include <limits>
#include <numbers>

namespace metscale::cli {

namespace {

using Rng = std::mt19937_64;

constexpr int kCasesPerManifold = 100;
constexpr int kGradientCases = 50;
constexpr int kChartPoints = 20;
constexpr double kFdStep = 1e-5;

double rel_err(double a, double b, double floor = 0.0) {
  const double scale = std::max({std::abs(a), std::abs(b), floor});
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

std::vector<double> lambda_sweep(const RunConfig& config, std::vector<double> fixed) {
  if (std::find(fixed.begin(), fixed.end(), config.lambda) == fixed.end())
    fixed.push_back(config.lambda);
  return fixed;
}

std::vector<double> variant_lambdas(const RunConfig& config) {
  return lambda_sweep(config, {0.25, 1.0, 4.0, 10.0});
}

std::vector<double> invariant_lambdas(const RunConfig& config) {
  return lambda_sweep(config, {0.25, 4.0, 10.0});
}

std::vector<std::shared_ptr<const Manifold>> test_manifolds() {
  return {make_manifold("euclidean:3"), make_manifold("sphere:2"), make_manifold("spd:2")};
}

const char* kManifoldSubject = "euclidean:3,sphere:2,spd:2";
const char* kChartSubject = "euclidean:2,polar,sphere-chart";

/// Random tangent at p with g-norm uniform in (0, max_norm].
TangentVector bounded_tangent(const Manifold& m, const ManifoldPoint& p, Rng& rng,
                              double max_norm) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  TangentVector v = m.random_tangent(p, rng);
  const double len = m.norm(p, v);
  const double target = max_norm * (1.0 - unit(rng));
  return len > 0.0 ? v.scaled_by(target / len) : v;
}

PropertyRecord make_record(std::string id, std::string category, std::string subject,
                           const RunConfig& config, double factor, double deviation,
                           double tolerance, std::string bound = "max", std::string note = {}) {
  PropertyRecord r;
  r.id = std::move(id);
  r.category = std::move(category);
  r.subject = std::move(subject);
  r.lambda = config.lambda;
  r.factor = factor;
  r.max_deviation = deviation;
  r.tolerance = tolerance;
  r.bound = std::move(bound);
  r.note = std::move(note);
  r.pass = std::isfinite(deviation) &&
           (r.bound == "min" ? deviation >= tolerance : deviation <= tolerance);
  return r;
}

// Smooth ambient test functions with their Euclidean gradients.
struct AmbientFunction {
  std::function<double(const Eigen::MatrixXd&)> value;
  std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)> gradient;
};

std::vector<AmbientFunction> ambient_family(const Manifold& m, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const int rows = m.descriptor().ambient_rows();
  const int cols = m.descriptor().ambient_cols();
  auto draw = [&](bool symmetric) {
    Eigen::MatrixXd a(rows, cols);
    for (int j = 0; j < cols; ++j)
      for (int i = 0; i < rows; ++i) a(i, j) = normal(rng);
    if (symmetric) a = 0.5 * (a + a.transpose()).eval();
    return a;
  };
  std::vector<AmbientFunction> family;
  if (m.descriptor().family() == ManifoldFamily::kSpd) {
    const Eigen::MatrixXd a = draw(true);
    const Eigen::MatrixXd b = draw(true);
    family.push_back({[a](const Eigen::MatrixXd& x) { return (a * x).trace(); },
                      [a](const Eigen::MatrixXd&) -> Eigen::MatrixXd { return a; }});
    family.push_back({[b](const Eigen::MatrixXd& x) { return 0.5 * (x - b).squaredNorm(); },
                      [b](const Eigen::MatrixXd& x) -> Eigen::MatrixXd { return x - b; }});
    family.push_back(
        {[](const Eigen::MatrixXd& x) { return std::log(x.determinant()); },
         [](const Eigen::MatrixXd& x) -> Eigen::MatrixXd { return x.inverse(); }});
  } else {
    const Eigen::MatrixXd a = draw(false);
    Eigen::MatrixXd q(rows, rows);
    for (int j = 0; j < rows; ++j)
      for (int i = 0; i < rows; ++i) q(i, j) = normal(rng);
    const Eigen::MatrixXd s = 0.5 * (q + q.transpose());
    family.push_back({[a](const Eigen::MatrixXd& x) { return a.col(0).dot(x.col(0)); },
                      [a](const Eigen::MatrixXd&) -> Eigen::MatrixXd { return a; }});
    family.push_back(
        {[s](const Eigen::MatrixXd& x) { return 0.5 * x.col(0).dot(s * x.col(0)); },
         [s](const Eigen::MatrixXd& x) -> Eigen::MatrixXd { return s * x; }});
  }
  return family;
}

/// Central difference of f(exp_p(t v)) at t = 0.
double geodesic_derivative(const Manifold& m, const ManifoldPoint& p, const TangentVector& v,
                           const std::function<double(const ManifoldPoint&)>& f) {
  const double forward = f(m.exp_map(p, v.scaled_by(kFdStep)));
  const double backward = f(m.exp_map(p, v.scaled_by(-kFdStep)));
  return (forward - backward) / (2.0 * kFdStep);
}

Eigen::VectorXd chart_sample(const Chart& chart, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const CoordinateBox& box = chart.domain();
  Eigen::VectorXd x(chart.dimension());
  for (int i = 0; i < chart.dimension(); ++i) {
    double lo = box.lower(i);
    double hi = box.upper(i);
    // Keep the unbounded-looking euclidean box at a modest scale.
    lo = std::max(lo, -10.0);
    hi = std::min(hi, 10.0);
    const double margin = 0.2 * (hi - lo);
    x(i) = lo + margin + (hi - lo - 2.0 * margin) * unit(rng);
  }
  return x;
}

/// Coordinate velocity with metric speed uniform in (0, 0.5].
Eigen::VectorXd chart_velocity(const Chart& chart, const Eigen::VectorXd& x, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd v(chart.dimension());
  for (int i = 0; i < chart.dimension(); ++i) v(i) = normal(rng);
  const double speed = std::sqrt(v.dot(chart.metric_at(x) * v));
  return v * (0.5 * (1.0 - unit(rng)) / speed);
}

std::vector<Chart> test_charts() { return {charts::euclidean(2), charts::polar(), charts::sphere()}; }

// ---------------------------------------------------------------------------
// Core geometry

PropertyRecord core_exp_log_roundtrip(const RunConfig& config, Rng& rng) {
  double worst = 0.0;
  for (const auto& m : test_manifolds()) {
    for (int c = 0; c < kCasesPerManifold; ++c) {
      const ManifoldPoint p = m->random_point(rng);
      const TangentVector v = bounded_tangent(*m, p, rng, 1.0);
      const ManifoldPoint q = m->exp_map(p, v);
      const TangentVector back = m->log_map(p, q);
      const TangentVector diff = back + v.scaled_by(-1.0);
      worst = std::max(worst, m->norm(p, diff));
      worst = std::max(worst, m->distance(m->exp_map(p, back), q));
    }
  }
  return make_record("core.exp_log_roundtrip", "invariant/exp-log", kManifoldSubject, config, 1.0,
                     worst, 1e-8);
}

PropertyRecord core_distance_axioms(const RunConfig& config, Rng& rng) {
  double worst = 0.0;
  for (const auto& m : test_manifolds()) {
    for (int c = 0; c < kCasesPerManifold; ++c) {
      const ManifoldPoint p = m->random_point(rng);
      const ManifoldPoint q = m->random_point(rng);
      const ManifoldPoint r = m->random_point(rng);
      const double pq = m->distance(p, q);
      worst = std::max(worst, std::abs(pq - m->distance(q, p)));
      worst = std::max(worst, m->distance(p, r) - pq - m->distance(q, r));
      worst = std::max(worst, m->distance(p, p));
    }
  }
  return make_record("core.distance_axioms", "measurement/distance", kManifoldSubject, config, 1.0,
                     std::max(0.0, worst), 1e-10);
}

PropertyRecord core_transport_isometry(const RunConfig& config, Rng& rng) {
  double worst = 0.0;
  for (const auto& m : test_manifolds()) {
    for (int c = 0; c < kCasesPerManifold; ++c) {
      const ManifoldPoint p = m->random_point(rng);
      const ManifoldPoint q = m->random_point(rng);
      const TangentVector v = m->random_tangent(p, rng);
      const TangentVector w = m->parallel_transport(p, q, v);
      worst = std::max(worst, std::abs(m->norm(q, w) - m->norm(p, v)));
    }
  }
  return make_record("core.transport_isometry", "invariant/transport", kManifoldSubject, config,
                     1.0, worst, 1e-10);
}

PropertyRecord core_gradient_identity(const RunConfig& config, Rng& rng) {
  double worst = 0.0;
  for (const auto& m : test_manifolds()) {
    const auto family = ambient_family(*m, rng);
    for (int c = 0; c < kGradientCases; ++c) {
      const ManifoldPoint p = m->random_point(rng);
      const TangentVector v = m->random_tangent(p, rng);
      for (const auto& f : family) {
        const TangentVector grad = m->riemannian_gradient(p, f.gradient(p.coordinates()));
        const double analytic = m->inner_product(p, grad, v);
        const double numeric = geodesic_derivative(
            *m, p, v, [&](const ManifoldPoint& x) { return f.value(x.coordinates()); });
        worst = std::max(worst, rel_err(analytic, numeric, 1e-3));
      }
    }
  }
  return make_record("core.gradient_identity", "measurement/gradient", kManifoldSubject, config,
                     1.0, worst, 1e-5);
}

PropertyRecord core_log_norm_distance(const RunConfig& config, Rng& rng) {
  double worst = 0.0;
  for (const auto& m : test_manifolds()) {
    for (int c = 0; c < kCasesPerManifold; ++c) {
      const ManifoldPoint p = m->random_point(rng);
      const ManifoldPoint q = m->random_point(rng);
      worst = std::max(worst, std::abs(m->norm(p, m->log_map(p, q)) - m->distance(p, q)));
    }
  }
  return make_record("core.log_norm_distance", "measurement/distance", kManifoldSubject, config,
                     1.0, worst, 1e-10);
}

// ---------------------------------------------------------------------------
// Scaled metric

PropertyRecord scaled_norm_law(const RunConfig& config, Rng& rng) {
  double worst = 0.0;
  for (const auto& m : test_manifolds())
    for (double lambda : variant_lambdas(config)) {
      const ScaledManifold sm(m, ScaleFactor(lambda));
      for (int c = 0; c < kCasesPerManifold; ++c) {
        const ManifoldPoint p = m->random_point(rng);
        const TangentVector v = m->random_tangent(p, rng);
        worst = std::max(worst, rel_err(sm.norm(p, v), std::sqrt(lambda) * m->norm(p, v)));
      }
    }
  return make_record("scaled.norm_law", "variant/norm", kManifoldSubject, config,
                     std::sqrt(config.lambda), worst, 1e-12);
}

PropertyRecord scaled_distance_law(const RunConfig& config, Rng& rng) {
  double worst = 0.0;
  for (const auto& m : test_manifolds())
    for (double lambda : variant_lambdas(config)) {
      const ScaledManifold sm(m, ScaleFactor(lambda));
      for (int c = 0; c < kCasesPerManifold; ++c) {
        const ManifoldPoint p = m->random_point(rng);
        const ManifoldPoint q = m->random_point(rng);
        worst = std::max(worst, rel_err(sm.distance(p, q), std::sqrt(lambda) * m->distance(p, q)));
      }
    }
  return make_record("scaled.distance_law", "variant/distance", kManifoldSubject, config,
                     std::sqrt(config.lambda), worst, 1e-12);
}

SampledCurve random_curve(const Manifold& m, Rng& rng, int samples) {
  const ManifoldPoint p = m.random_point(rng);
  const TangentVector v = bounded_tangent(m, p, rng, 1.0);
  const TangentVector w = bounded_tangent(m, p, rng, 0.3);
  SampledCurve curve;
  curve.parameters = uniform_parameters(static_cast<std::size_t>(samples));
  for (double t : curve.parameters)
    curve.points.push_back(m.exp_map(p, v.scaled_by(t) + w.scaled_by(std::sin(3.0 * t))));
  return curve;
}

PropertyRecord scaled_curve_length_law(const RunConfig& config, Rng& rng) {
  double worst = 0.0;
  for (const auto& m : test_manifolds())
    for (double lambda : variant_lambdas(config)) {
      const ScaledManifold sm(m, ScaleFactor(lambda));
      for (int c = 0; c < kCasesPerManifold; ++c) {
        const SampledCurve curve = random_curve(*m, rng, 11);
        worst = std::max(worst,
                         rel_err(sm.curve_length(curve), std::sqrt(lambda) * m->curve_length(curve)));
      }
    }
  return make_record("scaled.curve_length_law", "variant/length", kManifoldSubject, config,
                     std::sqrt(config.lambda), worst, 1e-12);
}

PropertyRecord scaled_gradient_law(const RunConfig& config, Rng& rng) {
  double worst = 0.0;
  for (const auto& m : test_manifolds()) {
    const auto family = ambient_family(*m, rng);
    for (double lambda : variant_lambdas(config)) {
      const ScaledManifold sm(m, ScaleFactor(lambda));
      for (int c = 0; c < kCasesPerManifold; ++c) {
        const ManifoldPoint p = m->random_point(rng);
        const auto& f = family[static_cast<std::size_t>(c) % family.size()];
        const TangentVector base = m->riemannian_gradient(p, f.gradient(p.coordinates()));
        const TangentVector scaled = sm.gradient(p, base);
        const Eigen::MatrixXd expected = base.components() / lambda;
        const double scale = max_abs(expected);
        if (scale > 0.0)
          worst = std::max(worst, max_abs(scaled.components() - expected) / scale);
      }
    }
  }
  return make_record("scaled.gradient_law", "variant/gradient", kManifoldSubject, config,
                     1.0 / config.lambda, worst, 1e-12);
}

PropertyRecord scaled_volume_factor(const RunConfig& config, Rng&) {
  double worst = 0.0;
  for (double lambda : variant_lambdas(config))
    for (int n = 1; n <= 8; ++n) {
      const double expected = std::exp(0.5 * n * std::log(lambda));
      worst = std::max(worst, rel_err(volume_scale_factor(ScaleFactor(lambda), n), expected));
    }
  const int n = ManifoldDescriptor::parse(config.manifold).intrinsic_dimension();
  return make_record("scaled.volume_factor", "variant/volume", "n=1..8", config,
                     volume_scale_factor(ScaleFactor(config.lambda), n), worst, 1e-14);
}

/// 0 when both matrices hold the same bit patterns, otherwise the largest
/// absolute entry difference (at least the smallest denormal).
double representation_gap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return std::numeric_limits<double>::infinity();
  if (std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0)
    return 0.0;
  return std::max(max_abs(a - b), std::numeric_limits<double>::denorm_min());
}

double value_gap(double a, double b) {
  if (std::memcmp(&a, &b, sizeof a) == 0) return 0.0;
  return std::max(std::abs(a - b), std::numeric_limits<double>::denorm_min());
}

Eigen::MatrixXd ambient_draw(const Manifold& m, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd w(m.descriptor().ambient_rows(), m.descriptor().ambient_cols());
  for (Eigen::Index j = 0; j < w.cols(); ++j)
    for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = normal(rng);
  return w;
}

PropertyRecord scaled_invariant_delegation(const RunConfig& config, Rng& rng) {
  double worst = 0.0;
  for (const auto& m : test_manifolds())
    for (double lambda : variant_lambdas(config)) {
      const ScaledManifold sm(m, ScaleFactor(lambda));
      for (int c = 0; c < kCasesPerManifold; ++c) {
        const ManifoldPoint p = m->random_point(rng);
        const ManifoldPoint q = m->random_point(rng);
        const TangentVector v = m->random_tangent(p, rng);
        const Eigen::MatrixXd w = ambient_draw(*m, rng);
        worst = std::max(worst, representation_gap(sm.exp(p, v).coordinates(),
                                                   m->exp_map(p, v).coordinates()));
        worst = std::max(worst, representation_gap(sm.log(p, q).components(),
                                                   m->log_map(p, q).components()));
        worst = std::max(worst, representation_gap(sm.transport(p, q, v).components(),
                                                   m->parallel_transport(p, q, v).components()));
        worst = std::max(worst, representation_gap(sm.projection(p, w).components(),
                                                   m->tangent_projection(p, w).components()));
      }
    }
  return make_record("scaled.invariant_delegation", "invariant/exp-log-transport-projection",
                     kManifoldSubject, config, 1.0, worst, 0.0, "max",
                     "bitwise comparison of scaled vs base outputs");
}

PropertyRecord scaled_composition(const RunConfig& config, Rng& rng) {
  double worst = 0.0;
  const auto lambdas = variant_lambdas(config);
  for (const auto& m : test_manifolds())
    for (double l1 : lambdas)
      for (double l2 : lambdas) {
        const ScaledManifold first(m, ScaleFactor(l1));
        const ScaledManifold twice = first.rescaled(ScaleFactor(l2));
        const ScaledManifold product(m, ScaleFactor(l1 * l2));
        for (int c = 0; c < 10; ++c) {
          const ManifoldPoint p = m->random_point(rng);
          const ManifoldPoint q = m->random_point(rng);
          const TangentVector v = m->random_tangent(p, rng);
          const SampledCurve curve = random_curve(*m, rng, 5);
          const double s2 = std::sqrt(l2);
          worst = std::max(worst, rel_err(s2 * first.norm(p, v), product.norm(p, v)));
          worst = std::max(worst, rel_err(s2 * first.distance(p, q), product.distance(p, q)));
          worst = std::max(worst,
                           rel_err(s2 * first.curve_length(curve), product.curve_length(curve)));
          worst = std::max(worst, rel_err(twice.norm(p, v), product.norm(p, v)));
          const Eigen::MatrixXd g1 = first.gradient(p, v).components() / l2;
          const Eigen::MatrixXd g12 = product.gradient(p, v).components();
          if (max_abs(g12) > 0.0) worst = std::max(worst, max_abs(g1 - g12) / max_abs(g12));
        }
      }
  return make_record("scaled.composition", "variant/composition", kManifoldSubject, config,
                     std::sqrt(config.lambda), worst, 1e-12);
}

PropertyRecord scaled_unit_identity(const RunConfig& config, Rng& rng) {
  double worst = 0.0;
  for (const auto& m : test_manifolds()) {
    const ScaledManifold sm(m, ScaleFactor(1.0));
    for (int c = 0; c < kCasesPerManifold; ++c) {
      const ManifoldPoint p = m->random_point(rng);
      const ManifoldPoint q = m->random_point(rng);
      const TangentVector u = m->random_tangent(p, rng);
      const TangentVector v = m->random_tangent(p, rng);
      const SampledCurve curve = random_curve(*m, rng, 5);
      worst = std::max(worst, value_gap(sm.inner(p, u, v), m->inner_product(p, u, v)));
      worst = std::max(worst, value_gap(sm.norm(p, v), m->norm(p, v)));
      worst = std::max(worst, value_gap(sm.distance(p, q), m->distance(p, q)));
      worst = std::max(worst, value_gap(sm.curve_length(curve), m->curve_length(curve)));
      worst = std::max(worst, value_gap(sm.volume_factor(), 1.0));
      worst = std::max(worst,
                       representation_gap(sm.gradient(p, v).components(), v.components()));
      worst = std::max(worst, representation_gap(sm.exp(p, v).coordinates(),
                                                 m->exp_map(p, v).coordinates()));
      worst = std::max(worst, representation_gap(sm.log(p, q).components(),
                                                 m->log_map(p, q).components()));
      worst = std::max(worst, representation_gap(sm.transport(p, q, v).components(),
                                                 m->parallel_transport(p, q, v).components()));
    }
  }
  return make_record("scaled.unit_identity", "identity/unit-scale", kManifoldSubject, config, 1.0,
                     worst, 0.0, "max", "lambda = 1 must reproduce the base manifold exactly");
}

/// Angle in g between two tangent vectors at p, via atan2 to stay accurate near 0.
double angle_between(const Manifold& m, const ManifoldPoint& p, const TangentVector& a,
                     const TangentVector& b) {
  const double bb = m.inner_product(p, b, b);
  const double ab = m.inner_product(p, a, b);
  const TangentVector perpendicular = a + b.scaled_by(-ab / bb);
  return std::atan2(m.norm(p, perpendicular), ab / std::sqrt(bb));
}

PropertyRecord scaled_gradient_direction(const RunConfig& config, Rng& rng) {
  double worst = 0.0;
  for (const auto& m : test_manifolds()) {
    const auto family = ambient_family(*m, rng);
    for (double lambda : variant_lambdas(config)) {
      const ScaledManifold sm(m, ScaleFactor(lambda));
      for (int c = 0; c < kCasesPerManifold; ++c) {
        const ManifoldPoint p = m->random_point(rng);
        const auto& f = family[static_cast<std::size_t>(c) % family.size()];
        const TangentVector base = m->riemannian_gradient(p, f.gradient(p.coordinates()));
        const double len = m->norm(p, base);
        if (len == 0.0) continue;
        const TangentVector scaled = sm.gradient(p, base);
        const Eigen::MatrixXd unit_base = base.components() / len;
        const Eigen::MatrixXd unit_scaled = scaled.components() / m->norm(p, scaled);
        worst = std::max(worst, max_abs(unit_base - unit_scaled));
      }
    }
  }
  return make_record("scaled.gradient_direction", "variant/gradient-direction", kManifoldSubject,
                     config, 1.0, worst, 1e-12);
}

PropertyRecord scaled_log_norm(const RunConfig& config, Rng& rng) {
  double worst = 0.0;
  for (const auto& m : test_manifolds())
    for (double lambda : variant_lambdas(config)) {
      const ScaledManifold sm(m, ScaleFactor(lambda));
      for (int c = 0; c < kCasesPerManifold; ++c) {
        const ManifoldPoint p = m->random_point(rng);
        const ManifoldPoint q = m->random_point(rng);
        worst = std::max(worst,
                         rel_err(sm.norm(p, sm.log(p, q)), std::sqrt(lambda) * m->distance(p, q)));
      }
    }
  return make_record("scaled.log_norm", "variant/log-norm", kManifoldSubject, config,
                     std::sqrt(config.lambda), worst, 1e-10);
}

// ---------------------------------------------------------------------------
// Chart calculus

PropertyRecord chart_connection_invariance(const RunConfig& config, Rng& rng) {
  double worst = 0.0;
  for (const Chart& chart : test_charts()) {
    std::vector<Eigen::VectorXd> points;
    for (int i = 0; i < kChartPoints; ++i) points.push_back(chart_sample(chart, rng));
    for (double lambda : invariant_lambdas(config)) {
      const Chart scaled = scale_chart_constant(chart, ScaleFactor(lambda));
      for (const auto& x : points)
        worst = std::max(worst,
                         max_abs_difference(christoffel_at(scaled, x), christoffel_at(chart, x)));
    }
  }
  return make_record("chart.connection_invariance", "invariant/connection", kChartSubject, config,
                     1.0, worst, 1e-6);
}

PropertyRecord chart_geodesic_invariance(const RunConfig& config, Rng& rng) {
  double worst = 0.0;
  for (const Chart& chart : test_charts()) {
    for (int c = 0; c < 2; ++c) {
      const Eigen::VectorXd x0 = chart_sample(chart, rng);
      const Eigen::VectorXd v0 = chart_velocity(chart, x0, rng);
      const GeodesicPath base = geodesic_integrate(chart, x0, v0);
      for (double lambda : invariant_lambdas(config)) {
        const Chart scaled = scale_chart_constant(chart, ScaleFactor(lambda));
        worst = std::max(worst, max_path_deviation(geodesic_integrate(scaled, x0, v0), base));
      }
    }
  }
  return make_record("chart.geodesic_invariance", "invariant/geodesics", kChartSubject, config, 1.0,
                     worst, 1e-8, "max", "RK4, 1000 steps over t in [0,1]");
}

PropertyRecord chart_volume_law(const RunConfig& config, Rng& rng) {
  double worst = 0.0;
  for (const Chart& chart : test_charts()) {
    std::vector<Eigen::VectorXd> points;
    for (int i = 0; i < kChartPoints; ++i) points.push_back(chart_sample(chart, rng));
    for (double lambda : variant_lambdas(config)) {
      const ScaleFactor factor(lambda);
      const Chart scaled = scale_chart_constant(chart, factor);
      const double expected = volume_scale_factor(factor, chart.dimension());
      for (const auto& x : points)
        worst = std::max(worst,
                         rel_err(volume_density(scaled, x) / volume_density(chart, x), expected));
    }
  }
  return make_record("chart.volume_law", "variant/volume", kChartSubject, config,
                     volume_scale_factor(ScaleFactor(config.lambda), 2), worst, 1e-10);
}

PropertyRecord chart_length_law(const RunConfig& config, Rng& rng) {
  double worst = 0.0;
  for (const Chart& chart : test_charts()) {
    for (int c = 0; c < 5; ++c) {
      const Eigen::VectorXd start = chart_sample(chart, rng);
      const Eigen::VectorXd drift = chart_velocity(chart, start, rng);
      const Eigen::VectorXd wobble = 0.2 * chart_velocity(chart, start, rng);
      CoordinateCurve curve;
      curve.times = uniform_parameters(101);
      for (double t : curve.times)
        curve.points.push_back(start + t * drift + std::sin(2.0 * std::numbers::pi * t) * wobble);
      const double base = chart_curve_length(chart, curve);
      for (double lambda : variant_lambdas(config)) {
        const Chart scaled = scale_chart_constant(chart, ScaleFactor(lambda));
        worst = std::max(worst, rel_err(chart_curve_length(scaled, curve), std::sqrt(lambda) * base));
      }
    }
  }
  return make_record("chart.length_law", "variant/length", kChartSubject, config,
                     std::sqrt(config.lambda), worst, 1e-10);
}

PropertyRecord chart_pointwise_noninvariance(const RunConfig& config, Rng&) {
  const Chart flat = charts::euclidean(2);
  const Chart conformal =
      scale_chart_pointwise(flat, [](const Eigen::VectorXd& x) { return std::exp(2.0 * x(0)); });
  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(2);
  const double change = max_abs_difference(christoffel_at(conformal, origin), christoffel_at(flat, origin));
  return make_record("chart.pointwise_noninvariance", "negative/position-dependent-scale",
                     "euclidean:2 with lambda(x)=exp(2 x1)", config, 1.0, change, 0.5, "min",
                     "expected non-invariance: passes when the connection changes");
}

PropertyRecord chart_exp_map_consistency(const RunConfig& config, Rng&) {
  const Chart chart = charts::sphere();
  const auto sphere = make_manifold("sphere:2");
  struct Start {
    double theta, phi, dtheta, dphi;
  };
  double worst = 0.0;
  for (const Start s : {Start{std::numbers::pi / 2, 0.0, 0.0, 1.0}, Start{1.0, 0.2, 0.3, 0.4}}) {
    Eigen::VectorXd x0(2), v0(2);
    x0 << s.theta, s.phi;
    v0 << s.dtheta, s.dphi;
    const GeodesicPath path = geodesic_integrate(chart, x0, v0);
    const Eigen::Vector3d d_theta(std::cos(s.theta) * std::cos(s.phi),
                                  std::cos(s.theta) * std::sin(s.phi), -std::sin(s.theta));
    const Eigen::Vector3d d_phi(-std::sin(s.theta) * std::sin(s.phi),
                                std::sin(s.theta) * std::cos(s.phi), 0.0);
    const ManifoldPoint p = sphere->make_point(charts::sphere_to_ambient(x0));
    const TangentVector v = sphere->make_tangent(p, s.dtheta * d_theta + s.dphi * d_phi);
    for (std::size_t i = 0; i < path.size(); ++i) {
      const Eigen::Vector3d ambient = charts::sphere_to_ambient(path.positions[i]);
      const ManifoldPoint q = sphere->exp_map(p, v.scaled_by(path.times[i]));
      worst = std::max(worst, (ambient - q.coordinates().col(0)).cwiseAbs().maxCoeff());
    }
  }
  return make_record("chart.exp_map_consistency", "invariant/cross-check",
                     "sphere-chart vs sphere:2", config, 1.0, worst, 1e-6);
}

// ---------------------------------------------------------------------------
// Optimizer

struct Problem {
  std::shared_ptr<const Manifold> manifold;
  FrechetProblem instance;
  Objective objective;
};

std::vector<Problem> optimizer_problems(Rng& rng) {
  std::vector<Problem> problems;
  for (const auto& m : test_manifolds()) {
    FrechetProblem instance = make_frechet_problem(*m, 5, rng());
    Objective objective = frechet_objective(m, instance.points);
    problems.push_back({m, std::move(instance), std::move(objective)});
  }
  return problems;
}

PropertyRecord opt_update_rule_identity(const RunConfig& config, Rng& rng) {
  constexpr double eta = 0.1;
  double worst = 0.0;
  for (const Problem& problem : optimizer_problems(rng))
    for (double lambda : invariant_lambdas(config)) {
      const ScaledManifold sm(problem.manifold, ScaleFactor(lambda));
      const OptimizerTrace trace =
          riemannian_gd(sm, problem.objective, problem.instance.x0, {eta, 50, 0.0});
      for (const ManifoldPoint& x : trace.iterates) {
        const TangentVector g = problem.objective.gradient_fn(x);
        const Eigen::MatrixXd scaled_step = sm.gradient(x, g).scaled_by(-eta).components();
        const Eigen::MatrixXd base_step = g.scaled_by(-eta / lambda).components();
        const double scale = max_abs(base_step);
        if (scale > 0.0) worst = std::max(worst, max_abs(scaled_step - base_step) / scale);
      }
    }
  return make_record("opt.update_rule_identity", "optimization/step-size", kManifoldSubject, config,
                     1.0 / config.lambda, worst, 1e-14);
}

PropertyRecord opt_trajectory_equivalence(const RunConfig& config, Rng& rng) {
  double worst = 0.0;
  for (const Problem& problem : optimizer_problems(rng))
    for (double lambda : invariant_lambdas(config)) {
      const EquivalenceResult r = equivalence_check(problem.manifold, problem.objective,
                                                    problem.instance.x0, 0.1, ScaleFactor(lambda), 200);
      worst = std::max(worst, r.max_deviation);
    }
  return make_record("opt.trajectory_equivalence", "optimization/step-size", kManifoldSubject,
                     config, 1.0 / config.lambda, worst, 1e-8, "max",
                     "eta = 0.1 on lambda*g vs eta/lambda on g, 200 updates");
}

PropertyRecord opt_gradient_direction(const RunConfig& config, Rng& rng) {
  double worst = 0.0;
  for (const Problem& problem : optimizer_problems(rng))
    for (double lambda : invariant_lambdas(config)) {
      const ScaledManifold sm(problem.manifold, ScaleFactor(lambda));
      const OptimizerTrace trace =
          riemannian_gd(sm, problem.objective, problem.instance.x0, {0.1, 100, 0.0});
      for (const ManifoldPoint& x : trace.iterates) {
        const TangentVector g = problem.objective.gradient_fn(x);
        if (problem.manifold->norm(x, g) == 0.0) continue;
        worst = std::max(worst, angle_between(*problem.manifold, x, sm.gradient(x, g), g));
      }
    }
  return make_record("opt.gradient_direction", "optimization/gradient-direction", kManifoldSubject,
                     config, 1.0, worst, 1e-12);
}

PropertyRecord opt_frechet_gradient(const RunConfig& config, Rng& rng) {
  double worst = 0.0;
  for (const Problem& problem : optimizer_problems(rng)) {
    const Manifold& m = *problem.manifold;
    for (int c = 0; c < 20; ++c) {
      const ManifoldPoint& anchor = problem.instance.points[static_cast<std::size_t>(c) % 5];
      const ManifoldPoint x = m.exp_map(anchor, bounded_tangent(m, anchor, rng, 0.3));
      const TangentVector v = m.random_tangent(x, rng);
      const double analytic = m.inner_product(x, problem.objective.gradient_fn(x), v);
      const double numeric = geodesic_derivative(m, x, v, problem.objective.value_fn);
      worst = std::max(worst, rel_err(analytic, numeric, 1e-3));
    }
  }
  return make_record("opt.frechet_gradient", "optimization/objective-gradient", kManifoldSubject,
                     config, 1.0, worst, 1e-5);
}

PropertyRecord opt_calibration_optimality(const RunConfig& config, Rng& rng) {
  std::uniform_real_distribution<double> noise(-0.1, 0.1);
  std::uniform_real_distribution<double> scale(0.3, 3.0);
  double worst = 0.0;
  for (const auto& m : test_manifolds())
    for (int c = 0; c < 10; ++c) {
      const auto points = sample_cluster(*m, 6, 1.0, rng);
      const Eigen::MatrixXd d = pairwise_distances(*m, points);
      Eigen::MatrixXd targets = Eigen::MatrixXd::Zero(d.rows(), d.cols());
      const double k = scale(rng);
      for (Eigen::Index i = 0; i < d.rows(); ++i)
        for (Eigen::Index j = i + 1; j < d.cols(); ++j)
          targets(i, j) = targets(j, i) = k * d(i, j) * (1.0 + noise(rng));
      const Calibration cal = calibrate_scale(*m, points, targets);
      const double at_star = calibration_loss(d, targets, cal.lambda_star.value());
      for (double step : {1.0 - 1e-3, 1.0 + 1e-3})
        worst = std::max(
            worst, at_star - calibration_loss(d, targets, cal.lambda_star.value() * step));
    }
  return make_record("opt.calibration_optimality", "optimization/scale-calibration",
                     kManifoldSubject, config, 1.0, std::max(0.0, worst), 0.0, "max",
                     "L(lambda*) - L(lambda*(1 +/- 1e-3)), must not be positive");
}

PropertyRecord opt_sphere_midpoint(const RunConfig& config, Rng&) {
  const auto sphere = make_manifold("sphere:2");
  const ManifoldPoint e1 = sphere->make_point(Eigen::Vector3d(1, 0, 0));
  const ManifoldPoint e2 = sphere->make_point(Eigen::Vector3d(0, 1, 0));
  const OptimizerTrace trace =
      riemannian_gd(sphere, frechet_objective(sphere, {e1, e2}), e1, {0.5, 100, 1e-10});
  const Eigen::Vector3d expected(std::sqrt(0.5), std::sqrt(0.5), 0.0);
  double deviation = (trace.final_point().coordinates().col(0) - expected).cwiseAbs().maxCoeff();
  if (trace.stop_reason != StopReason::kConverged) deviation = std::numeric_limits<double>::max();
  return make_record("opt.sphere_midpoint", "optimization/frechet-mean", "sphere:2 {e1,e2}",
                     config, 1.0, deviation, 1e-8, "max",
                     "eta = 0.5, converged in " + std::to_string(trace.size() - 1) + " updates");
}

PropertyRecord opt_calibration_recovery(const RunConfig& config, Rng& rng) {
  double worst = 0.0;
  for (const auto& m : test_manifolds()) {
    const auto points = sample_cluster(*m, 5, 1.0, rng);
    const Eigen::MatrixXd d = pairwise_distances(*m, points);
    for (double c : {0.5, 1.0, 3.0}) {
      const Calibration cal = calibrate_scale(*m, points, c * d);
      worst = std::max(worst, rel_err(cal.lambda_star.value(), c * c));
    }
  }
  return make_record("opt.calibration_recovery", "optimization/scale-calibration", kManifoldSubject,
                     config, 1.0, worst, 1e-10, "max", "targets = c * base distances, c in {0.5,1,3}");
}

PropertyRecord opt_joint_descent(const RunConfig& config, Rng& rng) {
  double worst = 0.0;
  for (const Problem& problem : optimizer_problems(rng)) {
    const Eigen::MatrixXd d = pairwise_distances(*problem.manifold, problem.instance.points);
    for (double c : {0.5, 1.0, 2.0, 3.0}) {
      const JointResult r = joint_descent(problem.manifold, problem.instance.points, c * d,
                                          problem.objective, problem.instance.x0, {0.1, 200, 1e-10});
      worst = std::max(worst, r.equivalence_deviation);
    }
  }
  return make_record("opt.joint_descent", "optimization/scale-calibration", kManifoldSubject,
                     config, 1.0, worst, 1e-8, "max", "calibrated run vs base run with eta/lambda*");
}

// ---------------------------------------------------------------------------

using PropertyFn = PropertyRecord (*)(const RunConfig&, Rng&);

const std::vector<std::pair<std::string, PropertyFn>>& registry() {
  static const std::vector<std::pair<std::string, PropertyFn>> table = {
      {"core.exp_log_roundtrip", core_exp_log_roundtrip},
      {"core.distance_axioms", core_distance_axioms},
      {"core.transport_isometry", core_transport_isometry},
      {"core.gradient_identity", core_gradient_identity},
      {"core.log_norm_distance", core_log_norm_distance},
      {"scaled.norm_law", scaled_norm_law},
      {"scaled.distance_law", scaled_distance_law},
      {"scaled.curve_length_law", scaled_curve_length_law},
      {"scaled.gradient_law", scaled_gradient_law},
      {"scaled.volume_factor", scaled_volume_factor},
      {"scaled.invariant_delegation", scaled_invariant_delegation},
      {"scaled.composition", scaled_composition},
      {"scaled.unit_identity", scaled_unit_identity},
      {"scaled.gradient_direction", scaled_gradient_direction},
      {"scaled.log_norm", scaled_log_norm},
      {"chart.connection_invariance", chart_connection_invariance},
      {"chart.geodesic_invariance", chart_geodesic_invariance},
      {"chart.volume_law", chart_volume_law},
      {"chart.length_law", chart_length_law},
      {"chart.pointwise_noninvariance", chart_pointwise_noninvariance},
      {"chart.exp_map_consistency", chart_exp_map_consistency},
      {"opt.update_rule_identity", opt_update_rule_identity},
      {"opt.trajectory_equivalence", opt_trajectory_equivalence},
      {"opt.gradient_direction", opt_gradient_direction},
      {"opt.frechet_gradient", opt_frechet_gradient},
      {"opt.calibration_optimality", opt_calibration_optimality},
      {"opt.sphere_midpoint", opt_sphere_midpoint},
      {"opt.calibration_recovery", opt_calibration_recovery},
      {"opt.joint_descent", opt_joint_descent},
  };
  return table;
}

constexpr const char* kCoverageId = "meta.coverage";

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::string_view property_id) {
  // FNV-1a over the id, then a splitmix64 finalizer over (root ^ hash).
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : property_id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t z = root ^ h;
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

const std::vector<std::string>& property_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> out;
    for (const auto& entry : registry()) out.push_back(entry.first);
    out.emplace_back(kCoverageId);
    return out;
  }();
  return ids;
}

PropertyRecord run_property(const std::string& id, const RunConfig& config) {
  const auto& table = registry();
  const auto it = std::find_if(table.begin(), table.end(),
                               [&](const auto& entry) { return entry.first == id; });
  if (it == table.end()) throw ContractViolation("unknown property id '" + id + "'");
  Rng rng(derive_seed(config.seed, id));
  try {
    return it->second(config, rng);
  } catch (const std::exception& e) {
    PropertyRecord r;
    r.id = id;
    r.category = "error";
    r.lambda = config.lambda;
    r.max_deviation = std::numeric_limits<double>::max();
    r.tolerance = 0.0;
    r.pass = false;
    r.note = std::string("exception: ") + e.what();
    return r;
  }
}

VerificationReport cmd_verify(const RunConfig& config) {
  config.validate();
  const auto& table = registry();
  std::vector<std::future<PropertyRecord>> pending;
  pending.reserve(table.size());
  for (const auto& entry : table)
    pending.push_back(std::async(std::launch::async, [&config, id = entry.first] {
      return run_property(id, config);
    }));

  VerificationReport report;
  report.version = version();
  report.seed = config.seed;
  report.lambda = config.lambda;
  // Futures are collected in registry order, so completion order never shows.
  for (auto& f : pending) report.records.push_back(f.get());

  const double expected = static_cast<double>(property_ids().size());
  PropertyRecord coverage;
  coverage.id = kCoverageId;
  coverage.category = "meta/coverage";
  coverage.subject = "records in this report";
  coverage.lambda = config.lambda;
  coverage.max_deviation = std::abs(static_cast<double>(report.records.size() + 1) - expected);
  coverage.tolerance = 0.0;
  coverage.pass = coverage.max_deviation == 0.0;
  coverage.note = "expected " + std::to_string(property_ids().size()) + " records";
  report.records.push_back(coverage);

  report.total = static_cast<int>(report.records.size());
  report.passed = static_cast<int>(
      std::count_if(report.records.begin(), report.records.end(), [](const auto& r) { return r.pass; }));
  report.failed = report.total - report.passed;
  return report;
}

}  // namespace metscale::cli
