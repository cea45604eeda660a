#pragma once

#include <cmath>
#include <utility>

#include "distkit/distribution.hpp"
#include "distkit/special.hpp"

namespace distkit {

class StudentT final : public Distribution {
 public:
  StudentT(NdArray df, NdArray loc, NdArray scale, DistributionOptions opts = {})
      : Distribution(dist_detail::common_shape({&df, &loc, &scale}), Shape::scalar(),
                     dist_detail::common_dtype({&df, &loc, &scale}, "StudentT"),
                     Reparameterization::kNotReparameterized, std::move(opts)),
        df_(broadcast_to(df, batch_shape())),
        loc_(broadcast_to(loc, batch_shape())),
        scale_(broadcast_to(scale, batch_shape())) {
    if (validate_args()) {
      dist_detail::require_positive(df_, "StudentT", "df");
      dist_detail::require_positive(scale_, "StudentT", "scale");
    }
  }

  std::string family_name() const override { return "StudentT"; }
  const NdArray& df() const { return df_; }
  const NdArray& loc() const { return loc_; }
  const NdArray& scale() const { return scale_; }

 protected:
  // T = Z / sqrt(G / df) with Z ~ N(0,1), G ~ Gamma(df/2, rate=df/2), so
  // sqrt(G / df) = sqrt(Gamma(df/2, rate=df/2)) and T = Z / sqrt(that).
  NdArray sample_impl(const Shape& sample_shape, RngState& rng) const override {
    const Shape full = draw_shape(sample_shape);
    const NdArray z = standard_normal(rng, full, dtype());
    const NdArray half_df =
        broadcast_to(map_unary(df_, [](double v) { return 0.5 * v; }), full);
    const NdArray g = standard_gamma(rng, half_df, dtype());
    NdArray t = NdArray::zeros(full, dtype());
    const BroadcastIndexer im(full, loc_.shape());
    const BroadcastIndexer is(full, scale_.shape());
    const BroadcastIndexer id(full, df_.shape());
    for (std::int64_t i = 0; i < t.size(); ++i) {
      const double chi2 = 2.0 * g.get(i);  // Chi2(df) = 2 * Gamma(df/2, rate=1)
      const double denom = std::sqrt(chi2 / df_.get(id(i)));
      t.set(i, loc_.get(im(i)) + scale_.get(is(i)) * z.get(i) / denom);
    }
    return t;
  }

  NdArray log_prob_impl(const NdArray& x) const override {
    NdArray z = dist_detail::zip3_any(
        x, loc_, scale_, dtype(),
        [](double v, double m, double s) { return (v - m) / s; });
    return dist_detail::zip3_any(
        z, df_, scale_, dtype(), [](double zz, double nu, double s) {
          return special::lgamma(0.5 * (nu + 1.0)) - special::lgamma(0.5 * nu) -
                 0.5 * std::log(nu * special::kPi) - std::log(s) -
                 0.5 * (nu + 1.0) * std::log1p(zz * zz / nu);
        });
  }

  NdArray cdf_impl(const NdArray& x) const override {
    NdArray z = dist_detail::zip3_any(
        x, loc_, scale_, dtype(),
        [](double v, double m, double s) { return (v - m) / s; });
    return dist_detail::zip2_any(z, df_, dtype(), [](double zz, double nu) {
      const double w = special::reg_inc_beta(0.5 * nu, 0.5, nu / (nu + zz * zz));
      return zz >= 0.0 ? 1.0 - 0.5 * w : 0.5 * w;
    });
  }

  NdArray mean_impl() const override {
    return zip_broadcast(df_, loc_, [](double nu, double m) {
      return nu > 1.0 ? m : std::numeric_limits<double>::quiet_NaN();
    });
  }

  // Infinite for 1 < df <= 2, undefined (NaN) for df <= 1.
  NdArray variance_impl() const override {
    return dist_detail::zip2_any(df_, scale_, dtype(), [](double nu, double s) {
      if (nu > 2.0) return s * s * nu / (nu - 2.0);
      if (nu > 1.0) return std::numeric_limits<double>::infinity();
      return std::numeric_limits<double>::quiet_NaN();
    });
  }

  NdArray mode_impl() const override { return loc_; }

  NdArray entropy_impl() const override {
    return dist_detail::zip2_any(df_, scale_, dtype(), [](double nu, double s) {
      const double half = 0.5 * nu;
      const double log_beta = special::lgamma(half) + special::lgamma(0.5) -
                              special::lgamma(half + 0.5);
      return 0.5 * (nu + 1.0) *
                 (special::digamma(0.5 * (1.0 + nu)) - special::digamma(half)) +
             std::log(std::sqrt(nu)) + log_beta + std::log(s);
    });
  }

 private:
  NdArray df_;
  NdArray loc_;
  NdArray scale_;
};

}  // namespace distkit
