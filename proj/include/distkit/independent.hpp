#pragma once

#include <string>
#include <utility>

#include "distkit/distribution.hpp"
#include "distkit/errors.hpp"
#include "distkit/ndarray.hpp"

namespace distkit {

// Reinterprets the trailing `reinterpreted_batch_rank` batch axes of a base
// distribution as event axes: draws keep their shape, log densities sum over
// the reinterpreted block.
class Independent final : public Distribution {
 public:
  explicit Independent(DistributionPtr base, int reinterpreted_batch_rank = 1,
                       DistributionOptions opts = {})
      : Independent(Prepared(std::move(base), reinterpreted_batch_rank),
                    reinterpreted_batch_rank, std::move(opts)) {}

  std::string family_name() const override { return "Independent"; }

  const DistributionPtr& base() const { return base_; }
  int reinterpreted_batch_rank() const { return rank_; }

  bool accepts_integer_values() const override {
    return base_->accepts_integer_values();
  }

 protected:
  NdArray sample_impl(const Shape& sample_shape, RngState& rng) const override {
    return base_->sample(sample_shape, rng);
  }

  NdArray sample_noise(const Shape& sample_shape, RngState& rng) const override {
    return base_->sample_with_noise(sample_shape, rng).noise;
  }

  NdArray push_forward_impl(const NdArray& noise) const override {
    return base_->push_forward(noise);
  }

  NdArray log_prob_impl(const NdArray& x) const override {
    return reduce_sum_trailing(base_->log_prob(x), rank_);
  }

  NdArray mean_impl() const override { return base_->mean(); }
  NdArray variance_impl() const override { return base_->variance(); }
  NdArray mode_impl() const override { return base_->mode(); }

  NdArray entropy_impl() const override {
    return reduce_sum_trailing(base_->entropy(), rank_);
  }

 private:
  struct Prepared {
    DistributionPtr base;
    Shape batch;
    Shape event;

    Prepared(DistributionPtr base_in, int rank) : base(std::move(base_in)) {
      if (!base) throw InvalidParameterError("Independent: null base");
      if (rank < 0 || rank > base->batch_shape().rank()) {
        throw RankError("Independent: cannot reinterpret " + std::to_string(rank) +
                        " axes of batch shape " + base->batch_shape().to_string());
      }
      batch = base->batch_shape().drop_suffix(rank);
      event = base->batch_shape().suffix(rank).concat(base->event_shape());
    }
  };

  Independent(Prepared prep, int rank, DistributionOptions opts)
      : Distribution(std::move(prep.batch), std::move(prep.event),
                     prep.base->dtype(), prep.base->reparameterization(),
                     std::move(opts)),
        base_(std::move(prep.base)),
        rank_(rank) {}

  DistributionPtr base_;
  int rank_;
};

}  // namespace distkit
