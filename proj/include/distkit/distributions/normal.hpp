#pragma once

#include <cmath>
#include <utility>

#include "distkit/distribution.hpp"
#include "distkit/special.hpp"

namespace distkit {

inline constexpr double kLog2Pi = 1.8378770664093454836;  // ln(2*pi)

class Normal final : public Distribution {
 public:
  Normal(NdArray loc, NdArray scale, DistributionOptions opts = {})
      : Distribution(dist_detail::common_shape({&loc, &scale}), Shape::scalar(),
                     dist_detail::common_dtype({&loc, &scale}, "Normal"),
                     Reparameterization::kFullyReparameterized, std::move(opts)),
        loc_(broadcast_to(loc, batch_shape())),
        scale_(broadcast_to(scale, batch_shape())) {
    if (validate_args()) dist_detail::require_positive(scale_, "Normal", "scale");
  }

  std::string family_name() const override { return "Normal"; }
  const NdArray& loc() const { return loc_; }
  const NdArray& scale() const { return scale_; }

 protected:
  NdArray sample_noise(const Shape& sample_shape, RngState& rng) const override {
    return standard_normal(rng, draw_shape(sample_shape), dtype());
  }

  NdArray push_forward_impl(const NdArray& noise) const override {
    return loc_ + scale_ * noise;
  }

  NdArray log_prob_impl(const NdArray& x) const override {
    return dist_detail::zip3_any(x, loc_, scale_, dtype(),
                                 [](double v, double m, double s) {
                                   const double z = (v - m) / s;
                                   return -0.5 * z * z - std::log(s) - 0.5 * kLog2Pi;
                                 });
  }

  NdArray cdf_impl(const NdArray& x) const override {
    return dist_detail::zip3_any(x, loc_, scale_, dtype(),
                                 [](double v, double m, double s) {
                                   return special::normal_cdf01((v - m) / s);
                                 });
  }

  NdArray quantile_impl(const NdArray& p) const override {
    return dist_detail::zip3_any(p, loc_, scale_, dtype(),
                                 [](double q, double m, double s) {
                                   return m + s * special::normal_quantile01(q);
                                 });
  }

  NdArray mean_impl() const override { return loc_; }
  NdArray mode_impl() const override { return loc_; }
  NdArray variance_impl() const override { return scale_ * scale_; }
  NdArray entropy_impl() const override {
    return map_unary(scale_, [](double s) {
      return 0.5 * (1.0 + kLog2Pi) + std::log(s);
    });
  }

 private:
  NdArray loc_;
  NdArray scale_;
};

}  // namespace distkit
