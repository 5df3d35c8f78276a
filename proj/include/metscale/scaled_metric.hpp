#pragma once

// A base manifold with the constant rescaled metric g~ = lambda * g.
//
// Measurements (inner products, norms, distances, lengths, volume density,
// gradients) pick up powers of lambda. Geodesic structure (exp, log, parallel
// transport, tangent projection) is forwarded to the base manifold untouched,
// so scaled and base results are the same objects bit for bit.

#include "metscale/core_geometry.hpp"

#include <memory>

namespace metscale {

class ScaleFactor {
 public:
  /// Throws ContractViolation unless lambda is finite and > 0.
  explicit ScaleFactor(double lambda);

  double value() const { return lambda_; }
  double sqrt() const;

  friend bool operator==(const ScaleFactor&, const ScaleFactor&) = default;

 private:
  double lambda_;
};

/// Density ratio dvol_{lambda g} / dvol_g = lambda^(n/2).
double volume_scale_factor(ScaleFactor lambda, int n);

class ScaledManifold {
 public:
  ScaledManifold(std::shared_ptr<const Manifold> base, ScaleFactor scale);

  const Manifold& base() const { return *base_; }
  const std::shared_ptr<const Manifold>& base_ptr() const { return base_; }
  const ManifoldDescriptor& descriptor() const { return base_->descriptor(); }
  ScaleFactor scale() const { return scale_; }

  /// Wrapper over the same base with scale lambda * factor.
  ScaledManifold rescaled(ScaleFactor factor) const;

  // Variant quantities.
  double inner(const ManifoldPoint& p, const TangentVector& u, const TangentVector& v) const;
  double norm(const ManifoldPoint& p, const TangentVector& v) const;
  double distance(const ManifoldPoint& p, const ManifoldPoint& q) const;
  double curve_length(const SampledCurve& curve) const;
  double volume_factor() const;
  /// grad_{g~} f = grad_g f / lambda, from the base-metric gradient.
  TangentVector gradient(const ManifoldPoint& p, const TangentVector& base_gradient) const;
  /// Ambient Euclidean gradient straight to grad_{g~} f.
  TangentVector riemannian_gradient(const ManifoldPoint& p,
                                    const Eigen::MatrixXd& ambient_gradient) const;

  // Invariant structure, forwarded.
  ManifoldPoint exp(const ManifoldPoint& p, const TangentVector& v) const {
    return base_->exp_map(p, v);
  }
  TangentVector log(const ManifoldPoint& p, const ManifoldPoint& q) const {
    return base_->log_map(p, q);
  }
  TangentVector transport(const ManifoldPoint& p, const ManifoldPoint& q,
                          const TangentVector& v) const {
    return base_->parallel_transport(p, q, v);
  }
  TangentVector projection(const ManifoldPoint& p, const Eigen::MatrixXd& ambient) const {
    return base_->tangent_projection(p, ambient);
  }

 private:
  std::shared_ptr<const Manifold> base_;
  ScaleFactor scale_;
};

}  // namespace metscale
