#pragma once

#include <cmath>
#include <utility>

#include "distkit/distribution.hpp"
#include "distkit/special.hpp"

namespace distkit {

class Cauchy final : public Distribution {
 public:
  Cauchy(NdArray loc, NdArray scale, DistributionOptions opts = {})
      : Distribution(dist_detail::common_shape({&loc, &scale}), Shape::scalar(),
                     dist_detail::common_dtype({&loc, &scale}, "Cauchy"),
                     Reparameterization::kFullyReparameterized, std::move(opts)),
        loc_(broadcast_to(loc, batch_shape())),
        scale_(broadcast_to(scale, batch_shape())) {
    if (validate_args()) dist_detail::require_positive(scale_, "Cauchy", "scale");
  }

  std::string family_name() const override { return "Cauchy"; }
  const NdArray& loc() const { return loc_; }
  const NdArray& scale() const { return scale_; }

 protected:
  NdArray sample_noise(const Shape& sample_shape, RngState& rng) const override {
    return uniform(rng, draw_shape(sample_shape), dtype());
  }

  NdArray push_forward_impl(const NdArray& noise) const override {
    const NdArray t = map_unary(
        noise, [](double u) { return std::tan(special::kPi * (u - 0.5)); });
    return dist_detail::zip3_any(t, loc_, scale_, dtype(),
                                 [](double z, double m, double s) { return m + s * z; });
  }

  NdArray log_prob_impl(const NdArray& x) const override {
    return dist_detail::zip3_any(x, loc_, scale_, dtype(),
                                 [](double v, double m, double s) {
                                   const double z = (v - m) / s;
                                   return -std::log(special::kPi * s * (1.0 + z * z));
                                 });
  }

  NdArray cdf_impl(const NdArray& x) const override {
    return dist_detail::zip3_any(x, loc_, scale_, dtype(),
                                 [](double v, double m, double s) {
                                   return std::atan((v - m) / s) / special::kPi + 0.5;
                                 });
  }

  NdArray quantile_impl(const NdArray& p) const override {
    return dist_detail::zip3_any(p, loc_, scale_, dtype(),
                                 [](double q, double m, double s) {
                                   return m + s * std::tan(special::kPi * (q - 0.5));
                                 });
  }

  // Mean and variance are undefined for Cauchy; surfaced as NaN (or NaNError
  // when allow_nan_stats is off, via the base-class gate).
  NdArray mean_impl() const override {
    return NdArray::filled(batch_shape(), dtype(),
                           std::numeric_limits<double>::quiet_NaN());
  }

  NdArray variance_impl() const override {
    return NdArray::filled(batch_shape(), dtype(),
                           std::numeric_limits<double>::quiet_NaN());
  }

  NdArray mode_impl() const override { return loc_; }

  NdArray entropy_impl() const override {
    return map_unary(scale_,
                     [](double s) { return std::log(4.0 * special::kPi * s); });
  }

 private:
  NdArray loc_;
  NdArray scale_;
};

}  // namespace distkit
