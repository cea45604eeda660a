#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "distkit/bijector.hpp"
#include "distkit/distribution.hpp"
#include "distkit/errors.hpp"
#include "distkit/ndarray.hpp"

namespace distkit {

// The push-forward of `base` through `bijector`: y = F(x), x ~ base.
//
// With no overrides the batch shape is inherited and the event shape is
// F's image of the base event shape. Passing batch_shape/event_shape
// requires a scalar base (batch [] and event []): the base is drawn i.i.d.
// over the requested block and the log density sums over it. For injective
// F, log p(y) = base.log_prob(F^-1(y)) + ildj(y); smooth coverings sum the
// density over every algebraic preimage branch instead.
class TransformedDistribution : public Distribution {
 public:
  TransformedDistribution(DistributionPtr base, BijectorPtr bijector,
                          std::optional<Shape> batch_shape = std::nullopt,
                          std::optional<Shape> event_shape = std::nullopt,
                          DistributionOptions opts = {})
      : TransformedDistribution(Prepared(std::move(base), std::move(bijector),
                                         std::move(batch_shape), std::move(event_shape)),
                                std::move(opts)) {}

  std::string family_name() const override { return "TransformedDistribution"; }

  const DistributionPtr& base() const { return base_; }
  const BijectorPtr& bijector() const { return bijector_; }

 protected:
  NdArray sample_impl(const Shape& sample_shape, RngState& rng) const override {
    return bijector_->forward(base_->sample(base_sample_shape(sample_shape), rng));
  }

  NdArray sample_noise(const Shape& sample_shape, RngState& rng) const override {
    return base_->sample_with_noise(base_sample_shape(sample_shape), rng).noise;
  }

  NdArray push_forward_impl(const NdArray& noise) const override {
    return bijector_->forward(base_->push_forward(noise));
  }

  NdArray log_prob_impl(const NdArray& y) const override {
    try {
      return log_prob_vectorized(y);
    } catch (const DomainError&) {
      if (validate_args()) throw;
      return log_prob_per_event(y);
    }
  }

  // Affine-like transforms commute with expectations.
  NdArray mean_impl() const override {
    if (!bijector_->is_constant_jacobian() || !bijector_->is_injective()) {
      throw NotImplementedError(
          "TransformedDistribution: mean requires a constant-Jacobian bijector");
    }
    NdArray base_mean = base_->mean();
    if (overrides_) {
      base_mean = broadcast_to(base_mean, batch_shape().concat(in_event_));
    }
    return bijector_->forward(base_mean);
  }

  // H(F(X)) = H(X) + E[log|det DF|]; constant Jacobians make the correction
  // a single evaluation.
  NdArray entropy_impl() const override {
    if (!bijector_->is_constant_jacobian() || !bijector_->is_injective()) {
      throw NotImplementedError(
          "TransformedDistribution: entropy requires a constant-Jacobian bijector");
    }
    NdArray base_entropy = base_->entropy();
    if (overrides_) {
      const double block = static_cast<double>(in_event_.num_elements());
      base_entropy = map_unary(broadcast_to(base_entropy, batch_shape()),
                               [block](double h) { return h * block; });
    }
    const NdArray probe =
        NdArray::zeros(batch_shape().concat(in_event_), dtype());
    return base_entropy + bijector_->forward_log_det_jacobian(probe, in_event_.rank());
  }

 private:
  struct Prepared {
    DistributionPtr base;
    BijectorPtr bijector;
    Shape batch;
    Shape event;
    Shape in_event;
    bool overrides;

    Prepared(DistributionPtr base_in, BijectorPtr bijector_in,
             std::optional<Shape> batch_override, std::optional<Shape> event_override)
        : base(std::move(base_in)), bijector(std::move(bijector_in)) {
      if (!base) throw InvalidParameterError("TransformedDistribution: null base");
      if (!bijector) {
        throw InvalidParameterError("TransformedDistribution: null bijector");
      }
      overrides = batch_override.has_value() || event_override.has_value();
      if (overrides &&
          (base->batch_shape().rank() != 0 || base->event_shape().rank() != 0)) {
        throw InvalidParameterError(
            "TransformedDistribution: batch/event overrides need a scalar base");
      }
      batch = batch_override ? std::move(*batch_override) : base->batch_shape();
      if (event_override) {
        in_event = std::move(*event_override);
      } else {
        in_event = overrides ? Shape::scalar() : base->event_shape();
      }
      event = bijector->forward_event_shape(in_event);
    }
  };

  TransformedDistribution(Prepared prep, DistributionOptions opts)
      : Distribution(prep.batch, prep.event, prep.base->dtype(),
                     prep.base->reparameterization(), std::move(opts)),
        base_(std::move(prep.base)),
        bijector_(std::move(prep.bijector)),
        in_event_(std::move(prep.in_event)),
        overrides_(prep.overrides) {}

  // Sample shape handed to the base so that its draw covers sample ++ batch
  // ++ in-event; a scalar base contributes every axis i.i.d.
  Shape base_sample_shape(const Shape& sample_shape) const {
    if (!overrides_) return sample_shape;
    return sample_shape.concat(batch_shape()).concat(in_event_);
  }

  // Base log density of a preimage, reduced over the i.i.d. block when the
  // event shape was overridden.
  NdArray base_log_prob(const NdArray& x) const {
    NdArray lp = base_->log_prob(x);
    if (overrides_) lp = reduce_sum_trailing(lp, in_event_.rank());
    return lp;
  }

  NdArray log_prob_vectorized(const NdArray& y) const {
    if (bijector_->is_injective()) {
      const NdArray x = bijector_->inverse(y);
      const NdArray ildj =
          bijector_->inverse_log_det_jacobian(y, event_shape().rank());
      return base_log_prob(x) + ildj;
    }
    // p_Y(y) = sum over preimage branches of p_X(x_b) |det DF(x_b)|^-1,
    // with one term per algebraic branch (duplicates kept on purpose).
    const PreimageSet set = bijector_->preimage(y, /*collapse_duplicates=*/false);
    NdArray total = NdArray::filled(lp_shape(y), y.dtype(),
                                    -std::numeric_limits<double>::infinity());
    for (const NdArray& x : set.branches) {
      const NdArray term =
          base_log_prob(x) -
          bijector_->forward_log_det_jacobian(x, in_event_.rank());
      total = log_add_exp(total, term);
    }
    return total;
  }

  // Mixed in/out-of-support inputs: the bijector rejects whole arrays, so
  // score each event block alone and map rejections to zero density.
  NdArray log_prob_per_event(const NdArray& y) const {
    const int er = event_shape().rank();
    const Shape y_lead = y.shape().drop_suffix(er);
    const Shape out_lead = broadcast_shapes(y_lead, batch_shape());
    const std::int64_t block_elems = event_shape().num_elements();
    NdArray out = NdArray::zeros(out_lead, y.dtype());
    const BroadcastIndexer iy(out_lead, y_lead);
    const BroadcastIndexer ib(out_lead, batch_shape());
    for (std::int64_t r = 0; r < out.size(); ++r) {
      NdArray block = NdArray::zeros(event_shape(), y.dtype());
      for (std::int64_t k = 0; k < block_elems; ++k) {
        block.set(k, y.get(iy(r) * block_elems + k));
      }
      double lp;
      try {
        lp = log_prob_vectorized(block).get(ib(r));
      } catch (const DomainError&) {
        lp = -std::numeric_limits<double>::infinity();
      }
      out.set(r, lp);
    }
    return out;
  }

  DistributionPtr base_;
  BijectorPtr bijector_;
  Shape in_event_;
  bool overrides_;
};

}  // namespace distkit
