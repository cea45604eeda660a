#pragma once

#include <cmath>
#include <utility>

#include "distkit/distribution.hpp"

namespace distkit {

class Exponential final : public Distribution {
 public:
  explicit Exponential(NdArray rate, DistributionOptions opts = {})
      : Distribution(rate.shape(), Shape::scalar(),
                     dist_detail::common_dtype({&rate}, "Exponential"),
                     Reparameterization::kFullyReparameterized, std::move(opts)),
        rate_(std::move(rate)) {
    if (validate_args()) dist_detail::require_positive(rate_, "Exponential", "rate");
  }

  std::string family_name() const override { return "Exponential"; }
  const NdArray& rate() const { return rate_; }

 protected:
  NdArray sample_noise(const Shape& sample_shape, RngState& rng) const override {
    return uniform(rng, draw_shape(sample_shape), dtype());
  }

  NdArray push_forward_impl(const NdArray& noise) const override {
    return dist_detail::zip2_any(noise, rate_, dtype(), [](double u, double r) {
      return -std::log(u) / r;
    });
  }

  NdArray log_prob_impl(const NdArray& x) const override {
    maybe_check_support(x);
    return dist_detail::zip2_any(x, rate_, dtype(), [](double v, double r) {
      if (v < 0.0) return -std::numeric_limits<double>::infinity();
      return std::log(r) - r * v;
    });
  }

  NdArray cdf_impl(const NdArray& x) const override {
    maybe_check_support(x);
    return dist_detail::zip2_any(x, rate_, dtype(), [](double v, double r) {
      return v < 0.0 ? 0.0 : -std::expm1(-r * v);
    });
  }

  NdArray quantile_impl(const NdArray& p) const override {
    return dist_detail::zip2_any(p, rate_, dtype(), [](double q, double r) {
      return -std::log1p(-q) / r;
    });
  }

  NdArray mean_impl() const override {
    return map_unary(rate_, [](double r) { return 1.0 / r; });
  }
  NdArray mode_impl() const override {
    return NdArray::zeros(batch_shape(), dtype());
  }
  NdArray variance_impl() const override {
    return map_unary(rate_, [](double r) { return 1.0 / (r * r); });
  }
  NdArray entropy_impl() const override {
    return map_unary(rate_, [](double r) { return 1.0 - std::log(r); });
  }

 private:
  void maybe_check_support(const NdArray& x) const {
    if (!validate_args()) return;
    for (std::int64_t i = 0; i < x.size(); ++i) {
      if (x.get(i) < 0.0) {
        throw DomainError("Exponential: value outside support [0, inf)");
      }
    }
  }

  NdArray rate_;
};

}  // namespace distkit
