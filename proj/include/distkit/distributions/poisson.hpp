#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include "distkit/distribution.hpp"
#include "distkit/special.hpp"

namespace distkit {

// Poisson over {0, 1, 2, ...}. Exactly one of rate / log_rate. Samples I64.
class Poisson final : public Distribution {
 public:
  Poisson(std::optional<NdArray> rate, std::optional<NdArray> log_rate = std::nullopt,
          DistributionOptions opts = {})
      : Distribution(canonical(rate, log_rate).shape(), Shape::scalar(),
                     dist_detail::common_dtype({&canonical(rate, log_rate)}, "Poisson"),
                     Reparameterization::kNotReparameterized, std::move(opts)) {
    rate_ = rate ? broadcast_to(*rate, batch_shape())
                 : map_unary(broadcast_to(*log_rate, batch_shape()),
                             [](double lr) { return std::exp(lr); });
    if (validate_args() && rate.has_value()) {
      dist_detail::require_positive(rate_, "Poisson", "rate");
    }
  }

  std::string family_name() const override { return "Poisson"; }
  const NdArray& rate() const { return rate_; }

 protected:
  bool accepts_integer_values() const override { return true; }

  NdArray sample_impl(const Shape& sample_shape, RngState& rng) const override {
    return standard_poisson(rng, broadcast_to(rate_, draw_shape(sample_shape)));
  }

  NdArray log_prob_impl(const NdArray& x) const override {
    return dist_detail::zip2_any(x, rate_, dtype(), [this](double k, double lam) {
      if (!dist_detail::is_integral_value(k) || k < 0.0) {
        if (validate_args()) {
          throw DomainError("Poisson: value is not a non-negative integer");
        }
        return -std::numeric_limits<double>::infinity();
      }
      return dist_detail::xlogy(k, lam) - lam - special::lgamma(k + 1.0);
    });
  }

  // P(X <= k) = 1 - P(floor(k)+1, lambda) via the regularized incomplete
  // gamma function; step function in k.
  NdArray cdf_impl(const NdArray& x) const override {
    return dist_detail::zip2_any(x, rate_, dtype(), [](double k, double lam) {
      if (k < 0.0) return 0.0;
      return 1.0 - special::reg_inc_gamma(std::floor(k) + 1.0, lam);
    });
  }

  NdArray mean_impl() const override { return rate_; }
  NdArray variance_impl() const override { return rate_; }

  NdArray mode_impl() const override {
    return map_unary(rate_, [](double lam) { return std::floor(lam); });
  }

 private:
  static const NdArray& canonical(const std::optional<NdArray>& rate,
                                  const std::optional<NdArray>& log_rate) {
    dist_detail::require_exclusive(rate.has_value(), log_rate.has_value(), "Poisson",
                                   "rate", "log_rate");
    return rate ? *rate : *log_rate;
  }

  NdArray rate_;
};

}  // namespace distkit
