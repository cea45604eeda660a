#pragma once

#include <cmath>
#include <utility>

#include "distkit/distribution.hpp"
#include "distkit/special.hpp"

namespace distkit {

// Dirichlet over the (K-1)-simplex; concentration has shape batch ++ [K]
// and the trailing axis is the event.
class Dirichlet final : public Distribution {
 public:
  explicit Dirichlet(NdArray concentration, DistributionOptions opts = {})
      : Distribution(event_checked(concentration).shape().drop_suffix(1),
                     concentration.shape().suffix(1),
                     dist_detail::common_dtype({&concentration}, "Dirichlet"),
                     Reparameterization::kNotReparameterized, std::move(opts)),
        concentration_(std::move(concentration)),
        num_components_(concentration_.shape()[concentration_.rank() - 1]) {
    if (validate_args()) {
      dist_detail::require_positive(concentration_, "Dirichlet", "concentration");
    }
  }

  std::string family_name() const override { return "Dirichlet"; }
  const NdArray& concentration() const { return concentration_; }

 protected:
  NdArray sample_impl(const Shape& sample_shape, RngState& rng) const override {
    const Shape full = draw_shape(sample_shape);
    NdArray g = standard_gamma(rng, broadcast_to(concentration_, full), dtype());
    const std::int64_t rows = g.size() / num_components_;
    for (std::int64_t r = 0; r < rows; ++r) {
      double total = 0.0;
      for (std::int64_t k = 0; k < num_components_; ++k) {
        total += g.get(r * num_components_ + k);
      }
      for (std::int64_t k = 0; k < num_components_; ++k) {
        g.set(r * num_components_ + k, g.get(r * num_components_ + k) / total);
      }
    }
    return g;
  }

  NdArray log_prob_impl(const NdArray& x) const override {
    const Shape out_shape = lp_shape(x);
    const BroadcastIndexer ix(out_shape, x.shape().drop_suffix(1));
    const BroadcastIndexer ib(out_shape, batch_shape());
    NdArray out = NdArray::zeros(out_shape, dtype());
    for (std::int64_t i = 0; i < out.size(); ++i) {
      const std::int64_t xrow = ix(i) * num_components_;
      const std::int64_t brow = ib(i) * num_components_;
      double sum = 0.0;
      bool in_support = true;
      for (std::int64_t k = 0; k < num_components_; ++k) {
        const double v = x.get(xrow + k);
        if (v < 0.0 || v > 1.0) in_support = false;
        sum += v;
      }
      if (std::fabs(sum - 1.0) > kSimplexTol) in_support = false;
      if (!in_support) {
        if (validate_args()) {
          throw DomainError("Dirichlet: value is not on the probability simplex");
        }
        out.set(i, -std::numeric_limits<double>::infinity());
        continue;
      }
      double acc = 0.0;
      double alpha0 = 0.0;
      double log_norm = 0.0;
      for (std::int64_t k = 0; k < num_components_; ++k) {
        const double a = concentration_.get(brow + k);
        acc += dist_detail::xlogy(a - 1.0, x.get(xrow + k));
        alpha0 += a;
        log_norm += special::lgamma(a);
      }
      log_norm -= special::lgamma(alpha0);
      out.set(i, acc - log_norm);
    }
    return out;
  }

  NdArray mean_impl() const override {
    return per_component([](double a, double a0, std::int64_t) { return a / a0; });
  }

  NdArray variance_impl() const override {
    return per_component([](double a, double a0, std::int64_t) {
      const double m = a / a0;
      return m * (1.0 - m) / (a0 + 1.0);
    });
  }

  // Interior mode requires every component concentration > 1.
  NdArray mode_impl() const override {
    NdArray out = NdArray::zeros(draw_shape(Shape::scalar()), dtype());
    const std::int64_t rows = out.size() / num_components_;
    for (std::int64_t r = 0; r < rows; ++r) {
      double alpha0 = 0.0;
      bool interior = true;
      for (std::int64_t k = 0; k < num_components_; ++k) {
        const double a = concentration_.get(r * num_components_ + k);
        alpha0 += a;
        if (!(a > 1.0)) interior = false;
      }
      for (std::int64_t k = 0; k < num_components_; ++k) {
        const double a = concentration_.get(r * num_components_ + k);
        out.set(r * num_components_ + k,
                interior ? (a - 1.0) / (alpha0 - static_cast<double>(num_components_))
                         : std::numeric_limits<double>::quiet_NaN());
      }
    }
    return out;
  }

  NdArray entropy_impl() const override {
    NdArray out = NdArray::zeros(batch_shape(), dtype());
    for (std::int64_t r = 0; r < out.size(); ++r) {
      double alpha0 = 0.0;
      double log_norm = 0.0;
      for (std::int64_t k = 0; k < num_components_; ++k) {
        const double a = concentration_.get(r * num_components_ + k);
        alpha0 += a;
        log_norm += special::lgamma(a);
      }
      log_norm -= special::lgamma(alpha0);
      double acc = log_norm +
                   (alpha0 - static_cast<double>(num_components_)) *
                       special::digamma(alpha0);
      for (std::int64_t k = 0; k < num_components_; ++k) {
        const double a = concentration_.get(r * num_components_ + k);
        acc -= (a - 1.0) * special::digamma(a);
      }
      out.set(r, acc);
    }
    return out;
  }

 private:
  static constexpr double kSimplexTol = 1e-9;

  static const NdArray& event_checked(const NdArray& concentration) {
    if (concentration.rank() < 1) {
      throw InvalidParameterError(
          "Dirichlet: concentration needs a trailing component axis");
    }
    return concentration;
  }

  template <typename F>
  NdArray per_component(F f) const {
    NdArray out = NdArray::zeros(draw_shape(Shape::scalar()), dtype());
    const std::int64_t rows = out.size() / num_components_;
    for (std::int64_t r = 0; r < rows; ++r) {
      double alpha0 = 0.0;
      for (std::int64_t k = 0; k < num_components_; ++k) {
        alpha0 += concentration_.get(r * num_components_ + k);
      }
      for (std::int64_t k = 0; k < num_components_; ++k) {
        out.set(r * num_components_ + k,
                f(concentration_.get(r * num_components_ + k), alpha0, k));
      }
    }
    return out;
  }

  NdArray concentration_;
  std::int64_t num_components_;
};

}  // namespace distkit
