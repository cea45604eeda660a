#pragma once

#include <cmath>
#include <utility>

#include "distkit/distribution.hpp"
#include "distkit/special.hpp"

namespace distkit {

class Beta final : public Distribution {
 public:
  Beta(NdArray concentration1, NdArray concentration0, DistributionOptions opts = {})
      : Distribution(dist_detail::common_shape({&concentration1, &concentration0}),
                     Shape::scalar(),
                     dist_detail::common_dtype({&concentration1, &concentration0},
                                               "Beta"),
                     Reparameterization::kNotReparameterized, std::move(opts)),
        concentration1_(broadcast_to(concentration1, batch_shape())),
        concentration0_(broadcast_to(concentration0, batch_shape())) {
    if (validate_args()) {
      dist_detail::require_positive(concentration1_, "Beta", "concentration1");
      dist_detail::require_positive(concentration0_, "Beta", "concentration0");
    }
  }

  std::string family_name() const override { return "Beta"; }
  const NdArray& concentration1() const { return concentration1_; }
  const NdArray& concentration0() const { return concentration0_; }

 protected:
  NdArray sample_impl(const Shape& sample_shape, RngState& rng) const override {
    const Shape full = draw_shape(sample_shape);
    const NdArray g1 = standard_gamma(rng, broadcast_to(concentration1_, full), dtype());
    const NdArray g0 = standard_gamma(rng, broadcast_to(concentration0_, full), dtype());
    return g1 / (g1 + g0);
  }

  NdArray log_prob_impl(const NdArray& x) const override {
    maybe_check_support(x);
    return dist_detail::zip3_any(
        x, concentration1_, concentration0_, dtype(), [](double v, double a, double b) {
          if (v < 0.0 || v > 1.0) return -std::numeric_limits<double>::infinity();
          return dist_detail::xlogy(a - 1.0, v) + dist_detail::xlogy(b - 1.0, 1.0 - v) -
                 log_beta(a, b);
        });
  }

  NdArray cdf_impl(const NdArray& x) const override {
    maybe_check_support(x);
    return dist_detail::zip3_any(x, concentration1_, concentration0_, dtype(),
                                 [](double v, double a, double b) {
                                   if (v <= 0.0) return 0.0;
                                   if (v >= 1.0) return 1.0;
                                   return special::reg_inc_beta(a, b, v);
                                 });
  }

  NdArray mean_impl() const override {
    return zip_broadcast(concentration1_, concentration0_,
                         [](double a, double b) { return a / (a + b); });
  }

  NdArray variance_impl() const override {
    return zip_broadcast(concentration1_, concentration0_, [](double a, double b) {
      const double s = a + b;
      return a * b / (s * s * (s + 1.0));
    });
  }

  // Interior mode requires both concentrations > 1; NaN otherwise.
  NdArray mode_impl() const override {
    return zip_broadcast(concentration1_, concentration0_, [](double a, double b) {
      if (a > 1.0 && b > 1.0) return (a - 1.0) / (a + b - 2.0);
      return std::numeric_limits<double>::quiet_NaN();
    });
  }

  NdArray entropy_impl() const override {
    return zip_broadcast(concentration1_, concentration0_, [](double a, double b) {
      return log_beta(a, b) - (a - 1.0) * special::digamma(a) -
             (b - 1.0) * special::digamma(b) +
             (a + b - 2.0) * special::digamma(a + b);
    });
  }

 private:
  static double log_beta(double a, double b) {
    return special::lgamma(a) + special::lgamma(b) - special::lgamma(a + b);
  }

  void maybe_check_support(const NdArray& x) const {
    if (!validate_args()) return;
    for (std::int64_t i = 0; i < x.size(); ++i) {
      const double v = x.get(i);
      if (v < 0.0 || v > 1.0) throw DomainError("Beta: value outside support [0, 1]");
    }
  }

  NdArray concentration1_;
  NdArray concentration0_;
};

}  // namespace distkit
