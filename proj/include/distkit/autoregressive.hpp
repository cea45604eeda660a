#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "distkit/distribution.hpp"
#include "distkit/errors.hpp"
#include "distkit/ndarray.hpp"
#include "distkit/random.hpp"

namespace distkit {

// Maps an observed outcome (lead ++ event) to a distribution over the full
// event whose batch shape equals the lead axes.
using MakeDistFn = std::function<DistributionPtr(const NdArray&)>;

// Distribution defined by a fixed-point sampling chain: x starts at the zero
// outcome and is redrawn `num_steps` times from make_dist(x), every pass
// replaying the same noise. When make_dist(x)[i] depends only on x[j], j < i,
// num_steps = event size makes the chain exact ancestral sampling.
class Autoregressive final : public Distribution {
 public:
  Autoregressive(MakeDistFn make_dist, Shape event_shape,
                 std::optional<std::int64_t> num_steps = std::nullopt,
                 DistributionOptions opts = {})
      : Autoregressive(Prepared(std::move(make_dist), std::move(event_shape),
                                num_steps),
                       std::move(opts)) {}

  std::string family_name() const override { return "Autoregressive"; }

  std::int64_t num_steps() const { return num_steps_; }

  bool accepts_integer_values() const override {
    return probe_->accepts_integer_values();
  }

 protected:
  NdArray sample_impl(const Shape& sample_shape, RngState& rng) const override {
    const RngState replay = rng_detail::rejection_base(rng);
    NdArray x = NdArray::zeros(sample_shape.concat(event_shape()), DType::F64);
    for (std::int64_t step = 0; step < num_steps_; ++step) {
      const DistributionPtr d = checked_dist(make_dist_(x));
      RngState step_rng = replay;
      NdArray next = d->sample(Shape::scalar(), step_rng);
      if (next.shape() != x.shape()) {
        throw NonConvergentSpecError(
            "Autoregressive: make_dist draw shape changed from " +
            x.shape().to_string() + " to " + next.shape().to_string());
      }
      x = std::move(next);
    }
    return x;
  }

  // The chain's density at a fixed point: p(x) = make_dist(x).log_prob(x).
  NdArray log_prob_impl(const NdArray& x) const override {
    return checked_dist(make_dist_(x))->log_prob(x);
  }

 private:
  struct Prepared {
    MakeDistFn make_dist;
    Shape event;
    std::int64_t steps;
    DistributionPtr probe;

    Prepared(MakeDistFn make_dist_in, Shape event_in,
             std::optional<std::int64_t> num_steps) {
      make_dist = std::move(make_dist_in);
      event = std::move(event_in);
      if (!make_dist) throw InvalidParameterError("Autoregressive: null make_dist");
      steps = num_steps.value_or(event.num_elements());
      if (steps < 1) {
        throw InvalidParameterError("Autoregressive: num_steps must be >= 1");
      }
      probe = make_dist(NdArray::zeros(event, DType::F64));
      if (!probe) {
        throw InvalidParameterError("Autoregressive: make_dist returned null");
      }
    }
  };

  Autoregressive(Prepared prep, DistributionOptions opts)
      : Distribution(Shape::scalar(), std::move(prep.event), prep.probe->dtype(),
                     Reparameterization::kNotReparameterized, std::move(opts)),
        make_dist_(std::move(prep.make_dist)),
        num_steps_(prep.steps),
        probe_(std::move(prep.probe)) {}

  static DistributionPtr checked_dist(DistributionPtr d) {
    if (!d) throw InvalidParameterError("Autoregressive: make_dist returned null");
    return d;
  }

  MakeDistFn make_dist_;
  std::int64_t num_steps_;
  DistributionPtr probe_;
};

}  // namespace distkit
