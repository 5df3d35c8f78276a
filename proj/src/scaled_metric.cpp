#include "metscale/scaled_metric.hpp"

#include "metscale/errors.hpp"

#include <cmath>
#include <string>

namespace metscale {

ScaleFactor::ScaleFactor(double lambda) : lambda_(lambda) {
  if (!std::isfinite(lambda) || !(lambda > 0.0))
    throw ContractViolation("scale factor must be finite and positive, got " +
                            std::to_string(lambda));
}

double ScaleFactor::sqrt() const { return std::sqrt(lambda_); }

double volume_scale_factor(ScaleFactor lambda, int n) {
  if (n < 1) throw ContractViolation("volume_scale_factor: dimension must be >= 1");
  return std::pow(lambda.value(), 0.5 * n);
}

ScaledManifold::ScaledManifold(std::shared_ptr<const Manifold> base, ScaleFactor scale)
    : base_(std::move(base)), scale_(scale) {
  if (!base_) throw ContractViolation("ScaledManifold needs a base manifold");
}

ScaledManifold ScaledManifold::rescaled(ScaleFactor factor) const {
  return ScaledManifold(base_, ScaleFactor(scale_.value() * factor.value()));
}

double ScaledManifold::inner(const ManifoldPoint& p, const TangentVector& u,
                             const TangentVector& v) const {
  return scale_.value() * base_->inner_product(p, u, v);
}

double ScaledManifold::norm(const ManifoldPoint& p, const TangentVector& v) const {
  return std::sqrt(inner(p, v, v));
}

double ScaledManifold::distance(const ManifoldPoint& p, const ManifoldPoint& q) const {
  return scale_.sqrt() * base_->distance(p, q);
}

double ScaledManifold::curve_length(const SampledCurve& curve) const {
  return scale_.sqrt() * base_->curve_length(curve);
}

double ScaledManifold::volume_factor() const {
  return volume_scale_factor(scale_, descriptor().intrinsic_dimension());
}

TangentVector ScaledManifold::gradient(const ManifoldPoint& p,
                                       const TangentVector& base_gradient) const {
  base_->require_based_at(p, base_gradient, "scaled gradient");
  return base_gradient.divided_by(scale_.value());
}

TangentVector ScaledManifold::riemannian_gradient(const ManifoldPoint& p,
                                                  const Eigen::MatrixXd& ambient_gradient) const {
  return gradient(p, base_->riemannian_gradient(p, ambient_gradient));
}

}  // namespace metscale
