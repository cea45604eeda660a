#pragma once

#include <cmath>
#include <utility>

#include "distkit/distribution.hpp"

namespace distkit {

class Laplace final : public Distribution {
 public:
  Laplace(NdArray loc, NdArray scale, DistributionOptions opts = {})
      : Distribution(dist_detail::common_shape({&loc, &scale}), Shape::scalar(),
                     dist_detail::common_dtype({&loc, &scale}, "Laplace"),
                     Reparameterization::kFullyReparameterized, std::move(opts)),
        loc_(broadcast_to(loc, batch_shape())),
        scale_(broadcast_to(scale, batch_shape())) {
    if (validate_args()) dist_detail::require_positive(scale_, "Laplace", "scale");
  }

  std::string family_name() const override { return "Laplace"; }
  const NdArray& loc() const { return loc_; }
  const NdArray& scale() const { return scale_; }

 protected:
  NdArray sample_noise(const Shape& sample_shape, RngState& rng) const override {
    return uniform(rng, draw_shape(sample_shape), dtype());
  }

  // Inverse-cdf transform of a unit uniform, folded around the median.
  NdArray push_forward_impl(const NdArray& noise) const override {
    return dist_detail::zip3_any(
        noise, loc_, scale_, dtype(), [](double u, double m, double s) {
          const double w = u - 0.5;
          const double mag = std::log1p(-2.0 * std::fabs(w));  // <= 0
          return w >= 0.0 ? m - s * mag : m + s * mag;
        });
  }

  NdArray log_prob_impl(const NdArray& x) const override {
    return dist_detail::zip3_any(x, loc_, scale_, dtype(),
                                 [](double v, double m, double s) {
                                   return -std::fabs(v - m) / s - std::log(2.0 * s);
                                 });
  }

  NdArray cdf_impl(const NdArray& x) const override {
    return dist_detail::zip3_any(x, loc_, scale_, dtype(),
                                 [](double v, double m, double s) {
                                   const double z = (v - m) / s;
                                   return z < 0.0 ? 0.5 * std::exp(z)
                                                  : 1.0 - 0.5 * std::exp(-z);
                                 });
  }

  NdArray quantile_impl(const NdArray& p) const override {
    return dist_detail::zip3_any(p, loc_, scale_, dtype(),
                                 [](double q, double m, double s) {
                                   if (q < 0.5) return m + s * std::log(2.0 * q);
                                   return m - s * std::log(2.0 * (1.0 - q));
                                 });
  }

  NdArray mean_impl() const override { return loc_; }
  NdArray mode_impl() const override { return loc_; }
  NdArray variance_impl() const override { return scale_ * scale_ * 2.0; }
  NdArray entropy_impl() const override {
    return map_unary(scale_, [](double s) { return 1.0 + std::log(2.0 * s); });
  }

 private:
  NdArray loc_;
  NdArray scale_;
};

}  // namespace distkit
