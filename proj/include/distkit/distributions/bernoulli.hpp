#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include "distkit/distribution.hpp"
#include "distkit/special.hpp"

namespace distkit {

// Bernoulli over {0, 1}. Parameterized by exactly one of logits / probs;
// logits are the canonical internal form. Samples are I64.
class Bernoulli final : public Distribution {
 public:
  Bernoulli(std::optional<NdArray> logits, std::optional<NdArray> probs = std::nullopt,
            DistributionOptions opts = {})
      : Distribution(canonical(logits, probs).shape(), Shape::scalar(),
                     dist_detail::common_dtype({&canonical(logits, probs)}, "Bernoulli"),
                     Reparameterization::kNotReparameterized, std::move(opts)) {
    if (logits) {
      logits_ = broadcast_to(*logits, batch_shape());
    } else {
      if (validate_args()) {
        for (std::int64_t i = 0; i < probs->size(); ++i) {
          const double p = probs->get(i);
          if (!(p > 0.0 && p < 1.0)) {
            throw InvalidParameterError("Bernoulli: probs must lie in (0, 1)");
          }
        }
      }
      logits_ = map_unary(broadcast_to(*probs, batch_shape()),
                          [](double p) { return std::log(p) - std::log1p(-p); });
    }
  }

  std::string family_name() const override { return "Bernoulli"; }
  const NdArray& logits() const { return logits_; }
  NdArray probs() const {
    return map_unary(logits_, [](double l) { return special::sigmoid(l); });
  }

 protected:
  bool accepts_integer_values() const override { return true; }

  NdArray sample_impl(const Shape& sample_shape, RngState& rng) const override {
    const Shape full = draw_shape(sample_shape);
    const NdArray u = uniform(rng, full, DType::F64);
    const BroadcastIndexer il(full, logits_.shape());
    NdArray out = NdArray::zeros(full, DType::I64);
    for (std::int64_t i = 0; i < out.size(); ++i) {
      const double p = special::sigmoid(logits_.get(il(i)));
      out.set_i64(i, u.get(i) < p ? 1 : 0);
    }
    return out;
  }

  NdArray log_prob_impl(const NdArray& x) const override {
    return dist_detail::zip2_any(x, logits_, dtype(), [this](double v, double l) {
      if (v == 1.0) return -special::softplus(-l);
      if (v == 0.0) return -special::softplus(l);
      if (validate_args()) throw DomainError("Bernoulli: value must be 0 or 1");
      return -std::numeric_limits<double>::infinity();
    });
  }

  NdArray cdf_impl(const NdArray& x) const override {
    return dist_detail::zip2_any(x, logits_, dtype(), [](double v, double l) {
      if (v < 0.0) return 0.0;
      if (v >= 1.0) return 1.0;
      return 1.0 - special::sigmoid(l);
    });
  }

  NdArray mean_impl() const override { return probs(); }

  NdArray variance_impl() const override {
    return map_unary(logits_, [](double l) {
      const double p = special::sigmoid(l);
      return p * (1.0 - p);
    });
  }

  NdArray mode_impl() const override {
    NdArray out = NdArray::zeros(batch_shape(), DType::I64);
    for (std::int64_t i = 0; i < out.size(); ++i) {
      out.set_i64(i, logits_.get(i) > 0.0 ? 1 : 0);
    }
    return out;
  }

  NdArray entropy_impl() const override {
    return map_unary(logits_, [](double l) {
      const double p = special::sigmoid(l);
      return p * special::softplus(-l) + (1.0 - p) * special::softplus(l);
    });
  }

 private:
  static const NdArray& canonical(const std::optional<NdArray>& logits,
                                  const std::optional<NdArray>& probs) {
    dist_detail::require_exclusive(logits.has_value(), probs.has_value(), "Bernoulli",
                                   "logits", "probs");
    return logits ? *logits : *probs;
  }

  NdArray logits_;
};

}  // namespace distkit
