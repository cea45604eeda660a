#pragma once

#include <cmath>
#include <utility>

#include "distkit/distribution.hpp"

namespace distkit {

class Uniform final : public Distribution {
 public:
  Uniform(NdArray low, NdArray high, DistributionOptions opts = {})
      : Distribution(dist_detail::common_shape({&low, &high}), Shape::scalar(),
                     dist_detail::common_dtype({&low, &high}, "Uniform"),
                     Reparameterization::kFullyReparameterized, std::move(opts)),
        low_(broadcast_to(low, batch_shape())),
        high_(broadcast_to(high, batch_shape())) {
    for (std::int64_t i = 0; i < low_.size(); ++i) {
      if (!(low_.get(i) < high_.get(i))) {
        throw InvalidParameterError("Uniform: low must be strictly less than high");
      }
    }
  }

  std::string family_name() const override { return "Uniform"; }
  const NdArray& low() const { return low_; }
  const NdArray& high() const { return high_; }

 protected:
  NdArray sample_noise(const Shape& sample_shape, RngState& rng) const override {
    return uniform(rng, draw_shape(sample_shape), dtype());
  }

  NdArray push_forward_impl(const NdArray& noise) const override {
    return dist_detail::zip3_any(
        noise, low_, high_, dtype(),
        [](double u, double lo, double hi) { return lo + (hi - lo) * u; });
  }

  NdArray log_prob_impl(const NdArray& x) const override {
    maybe_check_support(x);
    return dist_detail::zip3_any(x, low_, high_, dtype(),
                                 [](double v, double lo, double hi) {
                                   if (v < lo || v > hi) {
                                     return -std::numeric_limits<double>::infinity();
                                   }
                                   return -std::log(hi - lo);
                                 });
  }

  NdArray cdf_impl(const NdArray& x) const override {
    return dist_detail::zip3_any(x, low_, high_, dtype(),
                                 [](double v, double lo, double hi) {
                                   if (v <= lo) return 0.0;
                                   if (v >= hi) return 1.0;
                                   return (v - lo) / (hi - lo);
                                 });
  }

  NdArray quantile_impl(const NdArray& p) const override {
    return dist_detail::zip3_any(
        p, low_, high_, dtype(),
        [](double q, double lo, double hi) { return lo + (hi - lo) * q; });
  }

  NdArray mean_impl() const override {
    return zip_broadcast(low_, high_,
                         [](double lo, double hi) { return 0.5 * (lo + hi); });
  }

  NdArray variance_impl() const override {
    return zip_broadcast(low_, high_, [](double lo, double hi) {
      const double w = hi - lo;
      return w * w / 12.0;
    });
  }

  NdArray entropy_impl() const override {
    return zip_broadcast(low_, high_,
                         [](double lo, double hi) { return std::log(hi - lo); });
  }

 private:
  void maybe_check_support(const NdArray& x) const {
    if (!validate_args()) return;
    const Shape bs = broadcast_shapes(x.shape(), low_.shape());
    const BroadcastIndexer iv(bs, x.shape());
    const BroadcastIndexer ilo(bs, low_.shape());
    const BroadcastIndexer ihi(bs, high_.shape());
    for (std::int64_t i = 0; i < bs.num_elements(); ++i) {
      const double v = x.get(iv(i));
      if (v < low_.get(ilo(i)) || v > high_.get(ihi(i))) {
        throw DomainError("Uniform: value outside support [low, high]");
      }
    }
  }

  NdArray low_;
  NdArray high_;
};

}  // namespace distkit
