#include "metscale/core_geometry.hpp"

#include "metscale/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace metscale {

namespace {

constexpr double kSphereNormTol = 1e-12;
constexpr double kSphereTangentTol = 1e-10;
constexpr double kSymmetryTol = 1e-12;
constexpr double kRenormalizationLimit = 1e-9;
constexpr double kAntipodeGuard = 1e-9;
constexpr double kBaseMatchTol = 1e-12;

double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

double asymmetry(const Eigen::MatrixXd& m) { return max_abs(m - m.transpose()); }

Eigen::MatrixXd gaussian_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd out(rows, cols);
  // Fill order is fixed (column-major) so seeded draws are reproducible.
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) out(i, j) = normal(rng);
  return out;
}

double column_dot(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.col(0).dot(b.col(0));
}

}  // namespace

std::string to_string(ManifoldFamily family) {
  switch (family) {
    case ManifoldFamily::kEuclidean:
      return "euclidean";
    case ManifoldFamily::kSphere:
      return "sphere";
    case ManifoldFamily::kSpd:
      return "spd";
  }
  return "unknown";
}

ManifoldDescriptor ManifoldDescriptor::euclidean(int n) {
  if (n < 1) throw ContractViolation("euclidean dimension must be >= 1");
  return ManifoldDescriptor(ManifoldFamily::kEuclidean, n, n, 1);
}

ManifoldDescriptor ManifoldDescriptor::sphere(int n) {
  if (n < 1) throw ContractViolation("sphere dimension must be >= 1");
  return ManifoldDescriptor(ManifoldFamily::kSphere, n, n + 1, 1);
}

ManifoldDescriptor ManifoldDescriptor::spd(int side) {
  if (side < 1) throw ContractViolation("spd matrix side must be >= 1");
  return ManifoldDescriptor(ManifoldFamily::kSpd, side * (side + 1) / 2, side, side);
}

ManifoldDescriptor ManifoldDescriptor::parse(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos || colon + 1 >= spec.size())
    throw ContractViolation("manifold spec must look like family:dim, got '" + spec + "'");
  const std::string family = spec.substr(0, colon);
  const std::string digits = spec.substr(colon + 1);
  if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
      digits.size() > 6)
    throw ContractViolation("bad dimension in manifold spec '" + spec + "'");
  const int dim = std::stoi(digits);
  if (family == "euclidean") return euclidean(dim);
  if (family == "sphere") return sphere(dim);
  if (family == "spd") return spd(dim);
  throw ContractViolation("unknown manifold family '" + family + "'");
}

std::string ManifoldDescriptor::spec() const {
  const int dim = family_ == ManifoldFamily::kSpd ? rows_ : intrinsic_dimension_;
  return to_string(family_) + ":" + std::to_string(dim);
}

// ---------------------------------------------------------------------------

TangentVector TangentVector::scaled_by(double factor) const {
  return TangentVector(base_, components_ * factor);
}

TangentVector TangentVector::divided_by(double divisor) const {
  return TangentVector(base_, components_ / divisor);
}

TangentVector TangentVector::operator+(const TangentVector& other) const {
  if (!(base_.descriptor() == other.base_.descriptor()) ||
      max_abs(base_.coordinates() - other.base_.coordinates()) > kBaseMatchTol)
    throw ContractViolation("adding tangent vectors at different base points");
  return TangentVector(base_, components_ + other.components_);
}

std::vector<double> uniform_parameters(std::size_t count) {
  std::vector<double> t(count, 0.0);
  for (std::size_t i = 0; i < count; ++i)
    t[i] = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
  return t;
}

// ---------------------------------------------------------------------------

ManifoldPoint Manifold::make_point(Eigen::MatrixXd coordinates) const {
  if (coordinates.rows() != descriptor_.ambient_rows() ||
      coordinates.cols() != descriptor_.ambient_cols()) {
    std::ostringstream msg;
    msg << descriptor_.spec() << ": point has shape " << coordinates.rows() << "x"
        << coordinates.cols();
    throw ContractViolation(msg.str());
  }
  if (!all_finite(coordinates)) throw ContractViolation(descriptor_.spec() + ": non-finite point");
  check_point(coordinates);
  return ManifoldPoint(std::move(coordinates), descriptor_);
}

TangentVector Manifold::make_tangent(const ManifoldPoint& base, Eigen::MatrixXd components) const {
  require_on_manifold(base, "make_tangent");
  if (components.rows() != descriptor_.ambient_rows() ||
      components.cols() != descriptor_.ambient_cols())
    throw ContractViolation(descriptor_.spec() + ": tangent has wrong shape");
  if (!all_finite(components)) throw ContractViolation(descriptor_.spec() + ": non-finite tangent");
  check_tangent(base, components);
  return TangentVector(base, std::move(components));
}

TangentVector Manifold::zero_tangent(const ManifoldPoint& base) const {
  require_on_manifold(base, "zero_tangent");
  return TangentVector(
      base, Eigen::MatrixXd::Zero(descriptor_.ambient_rows(), descriptor_.ambient_cols()));
}

double Manifold::norm(const ManifoldPoint& p, const TangentVector& v) const {
  return std::sqrt(inner_product(p, v, v));
}

double Manifold::curve_length(const SampledCurve& curve) const {
  if (curve.points.size() < 2) throw ContractViolation("curve_length needs at least 2 samples");
  if (curve.parameters.size() != curve.points.size())
    throw ContractViolation("curve_length: parameter count differs from point count");
  for (std::size_t i = 0; i < curve.parameters.size(); ++i) {
    const double t = curve.parameters[i];
    if (!(t >= 0.0 && t <= 1.0)) throw ContractViolation("curve parameters must lie in [0,1]");
    if (i > 0 && !(t > curve.parameters[i - 1]))
      throw ContractViolation("curve parameters must be strictly increasing");
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < curve.points.size(); ++i)
    total += distance(curve.points[i], curve.points[i + 1]);
  return total;
}

ManifoldPoint Manifold::random_point(std::mt19937_64& rng) const {
  return make_point(sample_point_coordinates(rng));
}

TangentVector Manifold::random_tangent(const ManifoldPoint& p, std::mt19937_64& rng) const {
  return tangent_projection(
      p, gaussian_matrix(descriptor_.ambient_rows(), descriptor_.ambient_cols(), rng));
}

void Manifold::require_on_manifold(const ManifoldPoint& p, const char* what) const {
  if (!(p.descriptor() == descriptor_))
    throw ContractViolation(std::string(what) + ": point belongs to " + p.descriptor().spec() +
                            ", not " + descriptor_.spec());
}

void Manifold::require_based_at(const ManifoldPoint& p, const TangentVector& v,
                                const char* what) const {
  require_on_manifold(p, what);
  if (!(v.base().descriptor() == descriptor_) ||
      max_abs(v.base().coordinates() - p.coordinates()) > kBaseMatchTol)
    throw ContractViolation(std::string(what) + ": tangent vector is not based at the given point");
}

// ---------------------------------------------------------------------------
// Euclidean

EuclideanSpace::EuclideanSpace(int n) : Manifold(ManifoldDescriptor::euclidean(n)) {}

double EuclideanSpace::inner_product(const ManifoldPoint& p, const TangentVector& u,
                                     const TangentVector& v) const {
  require_based_at(p, u, "inner_product");
  require_based_at(p, v, "inner_product");
  return column_dot(u.components(), v.components());
}

ManifoldPoint EuclideanSpace::exp_map(const ManifoldPoint& p, const TangentVector& v) const {
  require_based_at(p, v, "exp_map");
  return point_unchecked(p.coordinates() + v.components());
}

TangentVector EuclideanSpace::log_map(const ManifoldPoint& p, const ManifoldPoint& q) const {
  require_on_manifold(p, "log_map");
  require_on_manifold(q, "log_map");
  return tangent_unchecked(p, q.coordinates() - p.coordinates());
}

double EuclideanSpace::distance(const ManifoldPoint& p, const ManifoldPoint& q) const {
  require_on_manifold(p, "distance");
  require_on_manifold(q, "distance");
  return (q.coordinates() - p.coordinates()).norm();
}

TangentVector EuclideanSpace::parallel_transport(const ManifoldPoint& p, const ManifoldPoint& q,
                                                 const TangentVector& v) const {
  require_based_at(p, v, "parallel_transport");
  require_on_manifold(q, "parallel_transport");
  return tangent_unchecked(q, v.components());
}

TangentVector EuclideanSpace::tangent_projection(const ManifoldPoint& p,
                                                 const Eigen::MatrixXd& ambient) const {
  require_on_manifold(p, "tangent_projection");
  return make_tangent(p, ambient);
}

TangentVector EuclideanSpace::riemannian_gradient(const ManifoldPoint& p,
                                                  const Eigen::MatrixXd& ambient_gradient) const {
  return tangent_projection(p, ambient_gradient);
}

void EuclideanSpace::check_point(const Eigen::MatrixXd&) const {}

void EuclideanSpace::check_tangent(const ManifoldPoint&, const Eigen::MatrixXd&) const {}

Eigen::MatrixXd EuclideanSpace::sample_point_coordinates(std::mt19937_64& rng) const {
  return gaussian_matrix(descriptor().ambient_rows(), 1, rng);
}

// ---------------------------------------------------------------------------
// Sphere

Sphere::Sphere(int n) : Manifold(ManifoldDescriptor::sphere(n)) {}

double Sphere::inner_product(const ManifoldPoint& p, const TangentVector& u,
                             const TangentVector& v) const {
  require_based_at(p, u, "inner_product");
  require_based_at(p, v, "inner_product");
  return column_dot(u.components(), v.components());
}

ManifoldPoint Sphere::exp_map(const ManifoldPoint& p, const TangentVector& v) const {
  require_based_at(p, v, "exp_map");
  const Eigen::VectorXd x = p.coordinates().col(0);
  const Eigen::VectorXd u = v.components().col(0);
  const double speed = u.norm();
  if (speed == 0.0) return p;
  Eigen::VectorXd y = std::cos(speed) * x + (std::sin(speed) / speed) * u;
  const double len = y.norm();
  if (std::abs(len - 1.0) >= kRenormalizationLimit)
    throw ConsistencyError("sphere exp_map drifted off the sphere by " +
                           std::to_string(std::abs(len - 1.0)));
  y /= len;
  return point_unchecked(y);
}

TangentVector Sphere::log_map(const ManifoldPoint& p, const ManifoldPoint& q) const {
  require_on_manifold(p, "log_map");
  require_on_manifold(q, "log_map");
  const Eigen::VectorXd x = p.coordinates().col(0);
  const Eigen::VectorXd y = q.coordinates().col(0);
  const double c = x.dot(y);
  if (c <= -1.0 + kAntipodeGuard)
    throw DomainError("sphere log_map undefined: points are (nearly) antipodal");
  const Eigen::VectorXd w = y - c * x;
  const double s = w.norm();
  if (s == 0.0) return zero_tangent(p);
  const double angle = std::atan2(s, c);
  Eigen::VectorXd v = (angle / s) * w;
  v -= x.dot(v) * x;
  return tangent_unchecked(p, v);
}

double Sphere::distance(const ManifoldPoint& p, const ManifoldPoint& q) const {
  require_on_manifold(p, "distance");
  require_on_manifold(q, "distance");
  const Eigen::VectorXd x = p.coordinates().col(0);
  const Eigen::VectorXd y = q.coordinates().col(0);
  const double c = x.dot(y);
  return std::atan2((y - c * x).norm(), c);
}

TangentVector Sphere::parallel_transport(const ManifoldPoint& p, const ManifoldPoint& q,
                                         const TangentVector& v) const {
  require_based_at(p, v, "parallel_transport");
  const TangentVector direction = log_map(p, q);
  const Eigen::VectorXd u = direction.components().col(0);
  const double angle = u.norm();
  if (angle == 0.0) return tangent_unchecked(q, v.components());
  const Eigen::VectorXd e = u / angle;
  const Eigen::VectorXd x = p.coordinates().col(0);
  const Eigen::VectorXd y = q.coordinates().col(0);
  const Eigen::VectorXd w = v.components().col(0);
  const double along = e.dot(w);
  Eigen::VectorXd out = w + (std::cos(angle) - 1.0) * along * e - std::sin(angle) * along * x;
  out -= y.dot(out) * y;
  return tangent_unchecked(q, out);
}

TangentVector Sphere::tangent_projection(const ManifoldPoint& p,
                                         const Eigen::MatrixXd& ambient) const {
  require_on_manifold(p, "tangent_projection");
  if (ambient.rows() != descriptor().ambient_rows() || ambient.cols() != 1)
    throw ContractViolation("tangent_projection: ambient vector has wrong shape");
  const Eigen::VectorXd x = p.coordinates().col(0);
  Eigen::VectorXd w = ambient.col(0);
  w -= x.dot(w) * x;
  return tangent_unchecked(p, w);
}

TangentVector Sphere::riemannian_gradient(const ManifoldPoint& p,
                                          const Eigen::MatrixXd& ambient_gradient) const {
  return tangent_projection(p, ambient_gradient);
}

void Sphere::check_point(const Eigen::MatrixXd& coordinates) const {
  const double err = std::abs(coordinates.col(0).norm() - 1.0);
  if (err > kSphereNormTol)
    throw ContractViolation("sphere point is not unit norm (error " + std::to_string(err) + ")");
}

void Sphere::check_tangent(const ManifoldPoint& base, const Eigen::MatrixXd& components) const {
  const double dot = std::abs(base.coordinates().col(0).dot(components.col(0)));
  if (dot > kSphereTangentTol * std::max(1.0, components.norm()))
    throw ContractViolation("sphere tangent is not orthogonal to its base point");
}

Eigen::MatrixXd Sphere::sample_point_coordinates(std::mt19937_64& rng) const {
  Eigen::MatrixXd g;
  do {
    g = gaussian_matrix(descriptor().ambient_rows(), 1, rng);
  } while (g.norm() < 1e-6);
  return g / g.norm();
}

// ---------------------------------------------------------------------------
// SPD, affine-invariant metric

namespace spd {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

Eigen::MatrixXd expm(const Eigen::MatrixXd& symmetric) {
  return apply_spectral(symmetric, [](double w) { return std::exp(w); });
}

Eigen::MatrixXd logm(const Eigen::MatrixXd& spd) {
  return apply_spectral(spd, [](double w) {
    if (!(w > 0.0)) throw DomainError("matrix logarithm of a non-positive-definite matrix");
    return std::log(w);
  });
}

Eigen::MatrixXd sqrtm(const Eigen::MatrixXd& spd) {
  return apply_spectral(spd, [](double w) {
    if (!(w > 0.0)) throw DomainError("matrix square root of a non-positive-definite matrix");
    return std::sqrt(w);
  });
}

Eigen::MatrixXd inv_sqrtm(const Eigen::MatrixXd& spd) {
  return apply_spectral(spd, [](double w) {
    if (!(w > 0.0)) throw DomainError("inverse square root of a non-positive-definite matrix");
    return 1.0 / std::sqrt(w);
  });
}

}  // namespace spd

namespace {

// P^(1/2) and P^(-1/2) from one eigendecomposition.
struct SpdRoots {
  Eigen::MatrixXd half;
  Eigen::MatrixXd inv_half;
};

SpdRoots spd_roots(const Eigen::MatrixXd& p) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(p);
  const Eigen::VectorXd w = solver.eigenvalues();
  if (!(w.minCoeff() > 0.0)) throw DomainError("SPD base point is not positive definite");
  const Eigen::MatrixXd& u = solver.eigenvectors();
  const Eigen::VectorXd s = w.cwiseSqrt();
  return {u * s.asDiagonal() * u.transpose(), u * s.cwiseInverse().asDiagonal() * u.transpose()};
}

Eigen::MatrixXd checked_symmetrize(const Eigen::MatrixXd& m, const char* what) {
  const double drift = asymmetry(m) / std::max(1.0, max_abs(m));
  if (drift >= kRenormalizationLimit)
    throw ConsistencyError(std::string(what) + ": result asymmetry " + std::to_string(drift));
  return spd::symmetrize(m);
}

}  // namespace

SpdManifold::SpdManifold(int side) : Manifold(ManifoldDescriptor::spd(side)) {}

double SpdManifold::inner_product(const ManifoldPoint& p, const TangentVector& u,
                                  const TangentVector& v) const {
  require_based_at(p, u, "inner_product");
  require_based_at(p, v, "inner_product");
  Eigen::LLT<Eigen::MatrixXd> llt(p.coordinates());
  if (llt.info() != Eigen::Success) throw DomainError("SPD base point is not positive definite");
  const Eigen::MatrixXd a = llt.solve(u.components());
  const Eigen::MatrixXd b = llt.solve(v.components());
  return (a * b).trace();
}

ManifoldPoint SpdManifold::exp_map(const ManifoldPoint& p, const TangentVector& v) const {
  require_based_at(p, v, "exp_map");
  if (max_abs(v.components()) == 0.0) return p;
  const SpdRoots r = spd_roots(p.coordinates());
  const Eigen::MatrixXd whitened = spd::symmetrize(r.inv_half * v.components() * r.inv_half);
  const Eigen::MatrixXd out = r.half * spd::expm(whitened) * r.half;
  return point_unchecked(checked_symmetrize(out, "spd exp_map"));
}

TangentVector SpdManifold::log_map(const ManifoldPoint& p, const ManifoldPoint& q) const {
  require_on_manifold(p, "log_map");
  require_on_manifold(q, "log_map");
  const SpdRoots r = spd_roots(p.coordinates());
  const Eigen::MatrixXd whitened = spd::symmetrize(r.inv_half * q.coordinates() * r.inv_half);
  const Eigen::MatrixXd out = r.half * spd::logm(whitened) * r.half;
  return tangent_unchecked(p, checked_symmetrize(out, "spd log_map"));
}

double SpdManifold::distance(const ManifoldPoint& p, const ManifoldPoint& q) const {
  require_on_manifold(p, "distance");
  require_on_manifold(q, "distance");
  const SpdRoots r = spd_roots(p.coordinates());
  const Eigen::MatrixXd whitened = spd::symmetrize(r.inv_half * q.coordinates() * r.inv_half);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(whitened, Eigen::EigenvaluesOnly);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    const double w = solver.eigenvalues()(i);
    if (!(w > 0.0)) throw DomainError("SPD distance: argument is not positive definite");
    sum += std::log(w) * std::log(w);
  }
  return std::sqrt(sum);
}

TangentVector SpdManifold::parallel_transport(const ManifoldPoint& p, const ManifoldPoint& q,
                                              const TangentVector& v) const {
  require_based_at(p, v, "parallel_transport");
  require_on_manifold(q, "parallel_transport");
  // E = (Q P^-1)^(1/2) = P^(1/2) (P^(-1/2) Q P^(-1/2))^(1/2) P^(-1/2); v -> E v E^T.
  const SpdRoots r = spd_roots(p.coordinates());
  const Eigen::MatrixXd whitened = spd::symmetrize(r.inv_half * q.coordinates() * r.inv_half);
  const Eigen::MatrixXd e = r.half * spd::sqrtm(whitened) * r.inv_half;
  const Eigen::MatrixXd out = e * v.components() * e.transpose();
  return tangent_unchecked(q, checked_symmetrize(out, "spd parallel_transport"));
}

TangentVector SpdManifold::tangent_projection(const ManifoldPoint& p,
                                              const Eigen::MatrixXd& ambient) const {
  require_on_manifold(p, "tangent_projection");
  if (ambient.rows() != descriptor().ambient_rows() ||
      ambient.cols() != descriptor().ambient_cols())
    throw ContractViolation("tangent_projection: ambient matrix has wrong shape");
  return tangent_unchecked(p, spd::symmetrize(ambient));
}

TangentVector SpdManifold::riemannian_gradient(const ManifoldPoint& p,
                                               const Eigen::MatrixXd& ambient_gradient) const {
  const TangentVector sym = tangent_projection(p, ambient_gradient);
  const Eigen::MatrixXd& x = p.coordinates();
  return tangent_unchecked(p, spd::symmetrize(x * sym.components() * x));
}

void SpdManifold::check_point(const Eigen::MatrixXd& coordinates) const {
  if (asymmetry(coordinates) > kSymmetryTol * std::max(1.0, max_abs(coordinates)))
    throw ContractViolation("SPD point is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(coordinates, Eigen::EigenvaluesOnly);
  if (!(solver.eigenvalues().minCoeff() > 0.0))
    throw DomainError("SPD point is not positive definite");
}

void SpdManifold::check_tangent(const ManifoldPoint&, const Eigen::MatrixXd& components) const {
  if (asymmetry(components) > kSymmetryTol * std::max(1.0, max_abs(components)))
    throw ContractViolation("SPD tangent is not symmetric");
}

Eigen::MatrixXd SpdManifold::sample_point_coordinates(std::mt19937_64& rng) const {
  const int m = descriptor().ambient_rows();
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  Eigen::MatrixXd s(m, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i <= j; ++i) s(i, j) = s(j, i) = uniform(rng);
  return spd::symmetrize(spd::expm(s));
}

// ---------------------------------------------------------------------------

std::shared_ptr<const Manifold> make_manifold(const ManifoldDescriptor& descriptor) {
  switch (descriptor.family()) {
    case ManifoldFamily::kEuclidean:
      return std::make_shared<EuclideanSpace>(descriptor.intrinsic_dimension());
    case ManifoldFamily::kSphere:
      return std::make_shared<Sphere>(descriptor.intrinsic_dimension());
    case ManifoldFamily::kSpd:
      return std::make_shared<SpdManifold>(descriptor.ambient_rows());
  }
  throw ContractViolation("unknown manifold family");
}

std::shared_ptr<const Manifold> make_manifold(const std::string& spec) {
  return make_manifold(ManifoldDescriptor::parse(spec));
}

}  // namespace metscale
