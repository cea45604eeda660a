#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include "distkit/distribution.hpp"
#include "distkit/special.hpp"

namespace distkit {

class Gamma final : public Distribution {
 public:
  // Exactly one of rate / log_rate must be given.
  Gamma(NdArray concentration, std::optional<NdArray> rate,
        std::optional<NdArray> log_rate = std::nullopt, DistributionOptions opts = {})
      : Distribution(
            dist_detail::common_shape(
                {&concentration, rate ? &*rate : &concentration,
                 log_rate ? &*log_rate : &concentration}),
            Shape::scalar(),
            dist_detail::common_dtype(
                {&concentration, rate ? &*rate : &concentration,
                 log_rate ? &*log_rate : &concentration},
                "Gamma"),
            Reparameterization::kNotReparameterized, std::move(opts)),
        concentration_(broadcast_to(concentration, batch_shape())) {
    dist_detail::require_exclusive(rate.has_value(), log_rate.has_value(), "Gamma",
                                   "rate", "log_rate");
    rate_ = rate ? broadcast_to(*rate, batch_shape())
                 : map_unary(broadcast_to(*log_rate, batch_shape()),
                             [](double lr) { return std::exp(lr); });
    if (validate_args()) {
      dist_detail::require_positive(concentration_, "Gamma", "concentration");
      dist_detail::require_positive(rate_, "Gamma", "rate");
    }
  }

  std::string family_name() const override { return "Gamma"; }
  const NdArray& concentration() const { return concentration_; }
  const NdArray& rate() const { return rate_; }

 protected:
  NdArray sample_impl(const Shape& sample_shape, RngState& rng) const override {
    const NdArray alpha = broadcast_to(concentration_, draw_shape(sample_shape));
    const NdArray g = standard_gamma(rng, alpha, dtype());
    return g / broadcast_to(rate_, draw_shape(sample_shape));
  }

  NdArray log_prob_impl(const NdArray& x) const override {
    maybe_check_support(x);
    return dist_detail::zip3_any(
        x, concentration_, rate_, dtype(), [](double v, double a, double r) {
          if (v < 0.0) return -std::numeric_limits<double>::infinity();
          return dist_detail::xlogy(a, r) + dist_detail::xlogy(a - 1.0, v) -
                 r * v - special::lgamma(a);
        });
  }

  NdArray cdf_impl(const NdArray& x) const override {
    maybe_check_support(x);
    return dist_detail::zip3_any(x, concentration_, rate_, dtype(),
                                 [](double v, double a, double r) {
                                   if (v <= 0.0) return 0.0;
                                   return special::reg_inc_gamma(a, r * v);
                                 });
  }

  NdArray mean_impl() const override { return concentration_ / rate_; }

  NdArray variance_impl() const override {
    return concentration_ / (rate_ * rate_);
  }

  // Defined only for concentration >= 1; NaN below (policed by the
  // allow_nan_stats gate in the base class).
  NdArray mode_impl() const override {
    return zip_broadcast(concentration_, rate_, [](double a, double r) {
      if (a < 1.0) return std::numeric_limits<double>::quiet_NaN();
      return (a - 1.0) / r;
    });
  }

  NdArray entropy_impl() const override {
    return zip_broadcast(concentration_, rate_, [](double a, double r) {
      return a - std::log(r) + special::lgamma(a) +
             (1.0 - a) * special::digamma(a);
    });
  }

 private:
  void maybe_check_support(const NdArray& x) const {
    if (!validate_args()) return;
    for (std::int64_t i = 0; i < x.size(); ++i) {
      if (x.get(i) < 0.0) throw DomainError("Gamma: value outside support [0, inf)");
    }
  }

  NdArray concentration_;
  NdArray rate_;
};

}  // namespace distkit
