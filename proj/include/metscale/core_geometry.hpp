#pragma once

// Concrete Riemannian manifolds in their ambient representation:
//
//   euclidean:n   R^n, points and tangents are n x 1 columns
//   sphere:n      unit sphere S^n in R^(n+1), (n+1) x 1 columns
//   spd:m         m x m symmetric positive-definite matrices with the
//                 affine-invariant metric <U,V>_P = tr(P^-1 U P^-1 V)
//
// Every geodesic quantity is closed form. Points and tangents are immutable
// values that can only be built through a Manifold, which checks invariants.

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace metscale {

enum class ManifoldFamily { kEuclidean, kSphere, kSpd };

std::string to_string(ManifoldFamily family);

class ManifoldDescriptor {
 public:
  /// `size` is the intrinsic dimension for euclidean and sphere, and the matrix
  /// side for spd.
  static ManifoldDescriptor euclidean(int n);
  static ManifoldDescriptor sphere(int n);
  static ManifoldDescriptor spd(int side);

  /// Parses "euclidean:3", "sphere:2", "spd:2". Throws ContractViolation.
  static ManifoldDescriptor parse(const std::string& spec);

  ManifoldFamily family() const { return family_; }
  int intrinsic_dimension() const { return intrinsic_dimension_; }
  int ambient_rows() const { return rows_; }
  int ambient_cols() const { return cols_; }

  /// Inverse of parse.
  std::string spec() const;

  friend bool operator==(const ManifoldDescriptor&, const ManifoldDescriptor&) = default;

 private:
  ManifoldDescriptor(ManifoldFamily family, int intrinsic, int rows, int cols)
      : family_(family), intrinsic_dimension_(intrinsic), rows_(rows), cols_(cols) {}

  ManifoldFamily family_;
  int intrinsic_dimension_;
  int rows_;
  int cols_;
};

class Manifold;

class ManifoldPoint {
 public:
  const Eigen::MatrixXd& coordinates() const { return coordinates_; }
  const ManifoldDescriptor& descriptor() const { return descriptor_; }

 private:
  friend class Manifold;
  ManifoldPoint(Eigen::MatrixXd coordinates, ManifoldDescriptor descriptor)
      : coordinates_(std::move(coordinates)), descriptor_(descriptor) {}

  Eigen::MatrixXd coordinates_;
  ManifoldDescriptor descriptor_;
};

class TangentVector {
 public:
  const ManifoldPoint& base() const { return base_; }
  const Eigen::MatrixXd& components() const { return components_; }

  /// Same base point, components multiplied by `factor`.
  TangentVector scaled_by(double factor) const;
  /// Same base point, components divided by `divisor`.
  TangentVector divided_by(double divisor) const;

  /// Component-wise sum; both vectors must share a base point.
  TangentVector operator+(const TangentVector& other) const;
  TangentVector operator-() const { return scaled_by(-1.0); }

 private:
  friend class Manifold;
  TangentVector(ManifoldPoint base, Eigen::MatrixXd components)
      : base_(std::move(base)), components_(std::move(components)) {}

  ManifoldPoint base_;
  Eigen::MatrixXd components_;
};

/// Discretely sampled curve gamma(t_i), t_i strictly increasing in [0, 1].
struct SampledCurve {
  std::vector<ManifoldPoint> points;
  std::vector<double> parameters;
};

/// Evenly spaced parameters t_i = i / (count - 1).
std::vector<double> uniform_parameters(std::size_t count);

class Manifold {
 public:
  explicit Manifold(ManifoldDescriptor descriptor) : descriptor_(descriptor) {}
  virtual ~Manifold() = default;

  Manifold(const Manifold&) = delete;
  Manifold& operator=(const Manifold&) = delete;

  const ManifoldDescriptor& descriptor() const { return descriptor_; }

  /// Validates the point invariants (unit norm, symmetric PD, finite).
  ManifoldPoint make_point(Eigen::MatrixXd coordinates) const;
  /// Validates tangency at `base`.
  TangentVector make_tangent(const ManifoldPoint& base, Eigen::MatrixXd components) const;
  TangentVector zero_tangent(const ManifoldPoint& base) const;

  virtual double inner_product(const ManifoldPoint& p, const TangentVector& u,
                               const TangentVector& v) const = 0;
  double norm(const ManifoldPoint& p, const TangentVector& v) const;

  virtual ManifoldPoint exp_map(const ManifoldPoint& p, const TangentVector& v) const = 0;
  virtual TangentVector log_map(const ManifoldPoint& p, const ManifoldPoint& q) const = 0;
  virtual double distance(const ManifoldPoint& p, const ManifoldPoint& q) const = 0;
  /// Transport along the minimizing geodesic from p to q.
  virtual TangentVector parallel_transport(const ManifoldPoint& p, const ManifoldPoint& q,
                                           const TangentVector& v) const = 0;
  virtual TangentVector tangent_projection(const ManifoldPoint& p,
                                           const Eigen::MatrixXd& ambient) const = 0;
  /// Converts the Euclidean gradient of a smooth extension into the metric
  /// gradient, i.e. the tangent G with g_p(G, X) = df_p(X) for all X.
  virtual TangentVector riemannian_gradient(const ManifoldPoint& p,
                                            const Eigen::MatrixXd& ambient_gradient) const = 0;

  /// Sum of geodesic distances between consecutive samples.
  double curve_length(const SampledCurve& curve) const;

  /// Throw ContractViolation when a point (or a tangent's base) is not from
  /// this manifold.
  void require_on_manifold(const ManifoldPoint& p, const char* what) const;
  void require_based_at(const ManifoldPoint& p, const TangentVector& v, const char* what) const;

  ManifoldPoint random_point(std::mt19937_64& rng) const;
  /// Gaussian ambient draw projected to T_p M.
  TangentVector random_tangent(const ManifoldPoint& p, std::mt19937_64& rng) const;

 protected:
  // Construction without validation for results whose invariants hold by
  // construction.
  ManifoldPoint point_unchecked(Eigen::MatrixXd coordinates) const {
    return ManifoldPoint(std::move(coordinates), descriptor_);
  }
  static TangentVector tangent_unchecked(const ManifoldPoint& base, Eigen::MatrixXd components) {
    return TangentVector(base, std::move(components));
  }

  virtual void check_point(const Eigen::MatrixXd& coordinates) const = 0;
  virtual void check_tangent(const ManifoldPoint& base, const Eigen::MatrixXd& components) const = 0;
  virtual Eigen::MatrixXd sample_point_coordinates(std::mt19937_64& rng) const = 0;

 private:
  ManifoldDescriptor descriptor_;
};

class EuclideanSpace final : public Manifold {
 public:
  explicit EuclideanSpace(int n);

  double inner_product(const ManifoldPoint& p, const TangentVector& u,
                       const TangentVector& v) const override;
  ManifoldPoint exp_map(const ManifoldPoint& p, const TangentVector& v) const override;
  TangentVector log_map(const ManifoldPoint& p, const ManifoldPoint& q) const override;
  double distance(const ManifoldPoint& p, const ManifoldPoint& q) const override;
  TangentVector parallel_transport(const ManifoldPoint& p, const ManifoldPoint& q,
                                   const TangentVector& v) const override;
  TangentVector tangent_projection(const ManifoldPoint& p,
                                   const Eigen::MatrixXd& ambient) const override;
  TangentVector riemannian_gradient(const ManifoldPoint& p,
                                    const Eigen::MatrixXd& ambient_gradient) const override;

 protected:
  void check_point(const Eigen::MatrixXd& coordinates) const override;
  void check_tangent(const ManifoldPoint& base, const Eigen::MatrixXd& components) const override;
  Eigen::MatrixXd sample_point_coordinates(std::mt19937_64& rng) const override;
};

class Sphere final : public Manifold {
 public:
  explicit Sphere(int n);

  double inner_product(const ManifoldPoint& p, const TangentVector& u,
                       const TangentVector& v) const override;
  ManifoldPoint exp_map(const ManifoldPoint& p, const TangentVector& v) const override;
  /// Throws DomainError when <p,q> <= -1 + 1e-9.
  TangentVector log_map(const ManifoldPoint& p, const ManifoldPoint& q) const override;
  double distance(const ManifoldPoint& p, const ManifoldPoint& q) const override;
  TangentVector parallel_transport(const ManifoldPoint& p, const ManifoldPoint& q,
                                   const TangentVector& v) const override;
  TangentVector tangent_projection(const ManifoldPoint& p,
                                   const Eigen::MatrixXd& ambient) const override;
  TangentVector riemannian_gradient(const ManifoldPoint& p,
                                    const Eigen::MatrixXd& ambient_gradient) const override;

 protected:
  void check_point(const Eigen::MatrixXd& coordinates) const override;
  void check_tangent(const ManifoldPoint& base, const Eigen::MatrixXd& components) const override;
  Eigen::MatrixXd sample_point_coordinates(std::mt19937_64& rng) const override;
};

class SpdManifold final : public Manifold {
 public:
  explicit SpdManifold(int side);

  double inner_product(const ManifoldPoint& p, const TangentVector& u,
                       const TangentVector& v) const override;
  ManifoldPoint exp_map(const ManifoldPoint& p, const TangentVector& v) const override;
  TangentVector log_map(const ManifoldPoint& p, const ManifoldPoint& q) const override;
  double distance(const ManifoldPoint& p, const ManifoldPoint& q) const override;
  TangentVector parallel_transport(const ManifoldPoint& p, const ManifoldPoint& q,
                                   const TangentVector& v) const override;
  TangentVector tangent_projection(const ManifoldPoint& p,
                                   const Eigen::MatrixXd& ambient) const override;
  TangentVector riemannian_gradient(const ManifoldPoint& p,
                                    const Eigen::MatrixXd& ambient_gradient) const override;

 protected:
  void check_point(const Eigen::MatrixXd& coordinates) const override;
  void check_tangent(const ManifoldPoint& base, const Eigen::MatrixXd& components) const override;
  Eigen::MatrixXd sample_point_coordinates(std::mt19937_64& rng) const override;
};

std::shared_ptr<const Manifold> make_manifold(const ManifoldDescriptor& descriptor);
std::shared_ptr<const Manifold> make_manifold(const std::string& spec);

namespace spd {

/// f applied to the eigenvalues of a symmetric matrix: U diag(f(w)) U^T.
template <typename Fn>
Eigen::MatrixXd apply_spectral(const Eigen::MatrixXd& symmetric, Fn&& fn) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
  Eigen::VectorXd values = solver.eigenvalues();
  for (Eigen::Index i = 0; i < values.size(); ++i) values(i) = fn(values(i));
  const Eigen::MatrixXd& vectors = solver.eigenvectors();
  return vectors * values.asDiagonal() * vectors.transpose();
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& symmetric);
/// Requires positive eigenvalues.
Eigen::MatrixXd logm(const Eigen::MatrixXd& spd);
Eigen::MatrixXd sqrtm(const Eigen::MatrixXd& spd);
Eigen::MatrixXd inv_sqrtm(const Eigen::MatrixXd& spd);
Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m);

}  // namespace spd

}  // namespace metscale
