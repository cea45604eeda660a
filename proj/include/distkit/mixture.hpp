#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "distkit/distribution.hpp"
#include "distkit/distributions/categorical.hpp"
#include "distkit/errors.hpp"
#include "distkit/ndarray.hpp"

namespace distkit {

using CategoricalPtr = std::shared_ptr<const Categorical>;

namespace mix_detail {

inline Shape append_ones(const Shape& s, int n) {
  std::vector<std::int64_t> d = s.dims();
  for (int i = 0; i < n; ++i) d.push_back(1);
  return Shape(std::move(d));
}

// sample ++ part_batch padded with interior ones so it right-aligns against
// sample ++ batch; the padding leaves flat indexing unchanged.
inline Shape padded_lead(const Shape& sample_shape, const Shape& part_batch,
                         int batch_rank) {
  std::vector<std::int64_t> d = sample_shape.dims();
  for (int i = part_batch.rank(); i < batch_rank; ++i) d.push_back(1);
  for (int i = 0; i < part_batch.rank(); ++i) d.push_back(part_batch[i]);
  return Shape(std::move(d));
}

// Column k of a [..., K] array, shaped like the leading axes.
inline NdArray take_column(const NdArray& a, std::int64_t k, std::int64_t K) {
  NdArray out = NdArray::zeros(a.shape().drop_suffix(1), a.dtype());
  for (std::int64_t r = 0; r < out.size(); ++r) out.set(r, a.get(r * K + k));
  return out;
}

inline void copy_block(const NdArray& src, std::int64_t src_off, NdArray& dst,
                       std::int64_t dst_off, std::int64_t count) {
  if (dst.dtype() == DType::I64) {
    for (std::int64_t k = 0; k < count; ++k) {
      dst.set_i64(dst_off + k, src.get_i64(src_off + k));
    }
  } else {
    for (std::int64_t k = 0; k < count; ++k) {
      dst.set(dst_off + k, src.get(src_off + k));
    }
  }
}

}  // namespace mix_detail

// Finite mixture over K components that share one batched distribution
// object whose rightmost batch axis indexes the component.
class MixtureSameFamily final : public Distribution {
 public:
  MixtureSameFamily(CategoricalPtr mixing, DistributionPtr components,
                    DistributionOptions opts = {})
      : MixtureSameFamily(Prepared(std::move(mixing), std::move(components)),
                          std::move(opts)) {}

  std::string family_name() const override { return "MixtureSameFamily"; }

  const CategoricalPtr& mixing() const { return mixing_; }
  const DistributionPtr& components() const { return components_; }

  bool accepts_integer_values() const override {
    return components_->accepts_integer_values();
  }

  // Jensen bound: H(Y) >= sum_k pi_k H(component_k).
  NdArray entropy_lower_bound() const {
    const NdArray h = components_->entropy();  // [..., K]
    const NdArray weighted = h * mixing_probs();
    return reduce_sum_axis(weighted, -1);
  }

 protected:
  // Ancestral sampling: draw an index per lead slot, draw every component,
  // keep the indexed block.
  NdArray sample_impl(const Shape& sample_shape, RngState& rng) const override {
    const NdArray idx = mixing_->sample(sample_shape, rng);
    const NdArray all = components_->sample(sample_shape, rng);
    const Shape out_lead = sample_shape.concat(batch_shape());
    NdArray out = NdArray::zeros(out_lead.concat(event_shape()), all.dtype());
    const int br = batch_shape().rank();
    const BroadcastIndexer ii(
        out_lead, mix_detail::padded_lead(sample_shape, mixing_->batch_shape(), br));
    const BroadcastIndexer ia(
        out_lead, mix_detail::padded_lead(
                      sample_shape, components_->batch_shape().drop_suffix(1), br));
    const std::int64_t ev = event_shape().num_elements();
    for (std::int64_t r = 0; r < out_lead.num_elements(); ++r) {
      const std::int64_t k = idx.get_i64(ii(r));
      mix_detail::copy_block(all, (ia(r) * num_components_ + k) * ev, out, r * ev, ev);
    }
    return out;
  }

  // log p(x) = LSE_k(log pi_k + log p_k(x)).
  NdArray log_prob_impl(const NdArray& x) const override {
    const Shape lead = x.shape().drop_suffix(event_shape().rank());
    const NdArray x_e = x.reshape(
        lead.concat(Shape{1}).concat(event_shape()));
    const NdArray per_component = components_->log_prob(x_e);
    return log_sum_exp(per_component + mixing_->logits(), -1);
  }

  NdArray mean_impl() const override { return weighted_component_sum(components_->mean()); }

  // Law of total variance with the component index as the latent variable.
  NdArray variance_impl() const override {
    const NdArray m = components_->mean();
    const NdArray second = components_->variance() + m * m;
    const NdArray mix_mean = weighted_component_sum(m);
    return weighted_component_sum(second) - mix_mean * mix_mean;
  }

 private:
  struct Prepared {
    CategoricalPtr mixing;
    DistributionPtr components;
    Shape batch;
    std::int64_t K;

    Prepared(CategoricalPtr mixing_in, DistributionPtr components_in)
        : mixing(std::move(mixing_in)), components(std::move(components_in)) {
      if (!mixing) throw InvalidParameterError("MixtureSameFamily: null mixing");
      if (!components) {
        throw InvalidParameterError("MixtureSameFamily: null components");
      }
      if (components->batch_shape().rank() < 1) {
        throw InvalidParameterError(
            "MixtureSameFamily: components need a trailing component axis");
      }
      K = components->batch_shape()[components->batch_shape().rank() - 1];
      if (mixing->num_categories() != K) {
        throw InvalidParameterError(
            "MixtureSameFamily: mixing has " +
            std::to_string(mixing->num_categories()) + " categories but there are " +
            std::to_string(K) + " components");
      }
      if (mixing->logits().dtype() != components->dtype()) {
        throw DTypeError("MixtureSameFamily: mixing and component dtypes differ");
      }
      batch = broadcast_shapes(components->batch_shape().drop_suffix(1),
                               mixing->batch_shape());
    }
  };

  MixtureSameFamily(Prepared prep, DistributionOptions opts)
      : Distribution(std::move(prep.batch), prep.components->event_shape(),
                     prep.components->dtype(),
                     Reparameterization::kNotReparameterized, std::move(opts)),
        mixing_(std::move(prep.mixing)),
        components_(std::move(prep.components)),
        num_components_(prep.K) {}

  NdArray mixing_probs() const {
    return map_unary(mixing_->logits(), [](double l) { return std::exp(l); });
  }

  // sum_k pi_k * stat_k over the component axis, past any event axes.
  NdArray weighted_component_sum(const NdArray& per_component_stat) const {
    const int er = event_shape().rank();
    const NdArray pi =
        mixing_probs().reshape(mix_detail::append_ones(
            mixing_->batch_shape().concat(Shape{num_components_}), er));
    return reduce_sum_axis(per_component_stat * pi, -(er + 1));
  }

  CategoricalPtr mixing_;
  DistributionPtr components_;
  std::int64_t num_components_;
};

// Finite mixture over an explicit list of component distributions sharing an
// event shape and dtype.
class Mixture final : public Distribution {
 public:
  Mixture(CategoricalPtr mixing, std::vector<DistributionPtr> components,
          DistributionOptions opts = {})
      : Mixture(Prepared(std::move(mixing), std::move(components)), std::move(opts)) {}

  std::string family_name() const override { return "Mixture"; }

  const CategoricalPtr& mixing() const { return mixing_; }
  const std::vector<DistributionPtr>& components() const { return components_; }

  bool accepts_integer_values() const override {
    return components_.front()->accepts_integer_values();
  }

  NdArray entropy_lower_bound() const {
    NdArray total = NdArray::zeros(batch_shape(), dtype());
    for (std::size_t k = 0; k < components_.size(); ++k) {
      total = total + component_prob(k) * components_[k]->entropy();
    }
    return total;
  }

 protected:
  NdArray sample_impl(const Shape& sample_shape, RngState& rng) const override {
    const NdArray idx = mixing_->sample(sample_shape, rng);
    std::vector<NdArray> draws;
    draws.reserve(components_.size());
    for (const auto& c : components_) draws.push_back(c->sample(sample_shape, rng));
    const Shape out_lead = sample_shape.concat(batch_shape());
    NdArray out = NdArray::zeros(out_lead.concat(event_shape()), draws.front().dtype());
    const int br = batch_shape().rank();
    const BroadcastIndexer ii(
        out_lead, mix_detail::padded_lead(sample_shape, mixing_->batch_shape(), br));
    std::vector<BroadcastIndexer> id;
    id.reserve(draws.size());
    for (std::size_t k = 0; k < draws.size(); ++k) {
      id.emplace_back(out_lead, mix_detail::padded_lead(
                                    sample_shape, components_[k]->batch_shape(), br));
    }
    const std::int64_t ev = event_shape().num_elements();
    for (std::int64_t r = 0; r < out_lead.num_elements(); ++r) {
      const auto k = static_cast<std::size_t>(idx.get_i64(ii(r)));
      mix_detail::copy_block(draws[k], id[k](r) * ev, out, r * ev, ev);
    }
    return out;
  }

  NdArray log_prob_impl(const NdArray& x) const override {
    NdArray total = NdArray::filled(lp_shape(x), dtype(),
                                    -std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < components_.size(); ++k) {
      const NdArray term = components_[k]->log_prob(x) + component_log_prob(k);
      total = log_add_exp(total, term);
    }
    return total;
  }

  NdArray mean_impl() const override {
    const int er = event_shape().rank();
    NdArray total = NdArray::zeros(batch_shape().concat(event_shape()), dtype());
    for (std::size_t k = 0; k < components_.size(); ++k) {
      const NdArray pi = component_prob(k).reshape(
          mix_detail::append_ones(mixing_->batch_shape(), er));
      total = total + components_[k]->mean() * pi;
    }
    return total;
  }

  NdArray variance_impl() const override {
    const int er = event_shape().rank();
    const NdArray mix_mean = mean_impl();
    NdArray total = NdArray::zeros(batch_shape().concat(event_shape()), dtype());
    for (std::size_t k = 0; k < components_.size(); ++k) {
      const NdArray pi = component_prob(k).reshape(
          mix_detail::append_ones(mixing_->batch_shape(), er));
      const NdArray m = components_[k]->mean();
      total = total + (components_[k]->variance() + m * m) * pi;
    }
    return total - mix_mean * mix_mean;
  }

 private:
  struct Prepared {
    CategoricalPtr mixing;
    std::vector<DistributionPtr> components;
    Shape batch;

    Prepared(CategoricalPtr mixing_in, std::vector<DistributionPtr> components_in)
        : mixing(std::move(mixing_in)), components(std::move(components_in)) {
      if (!mixing) throw InvalidParameterError("Mixture: null mixing");
      if (components.empty()) {
        throw InvalidParameterError("Mixture: needs at least one component");
      }
      for (const auto& c : components) {
        if (!c) throw InvalidParameterError("Mixture: null component");
      }
      const auto& first = *components.front();
      batch = mixing->batch_shape();
      for (const auto& c : components) {
        if (c->event_shape() != first.event_shape()) {
          throw ShapeError("Mixture: components disagree on event shape");
        }
        if (c->dtype() != first.dtype()) {
          throw DTypeError("Mixture: components disagree on dtype");
        }
        batch = broadcast_shapes(batch, c->batch_shape());
      }
      if (mixing->num_categories() !=
          static_cast<std::int64_t>(components.size())) {
        throw InvalidParameterError(
            "Mixture: mixing has " + std::to_string(mixing->num_categories()) +
            " categories but there are " + std::to_string(components.size()) +
            " components");
      }
      if (mixing->logits().dtype() != first.dtype()) {
        throw DTypeError("Mixture: mixing and component dtypes differ");
      }
    }
  };

  Mixture(Prepared prep, DistributionOptions opts)
      : Distribution(std::move(prep.batch),
                     prep.components.front()->event_shape(),
                     prep.components.front()->dtype(),
                     Reparameterization::kNotReparameterized, std::move(opts)),
        mixing_(std::move(prep.mixing)),
        components_(std::move(prep.components)) {}

  NdArray component_log_prob(std::size_t k) const {
    return mix_detail::take_column(mixing_->logits(), static_cast<std::int64_t>(k),
                                   mixing_->num_categories());
  }

  NdArray component_prob(std::size_t k) const {
    return map_unary(component_log_prob(k), [](double l) { return std::exp(l); });
  }

  CategoricalPtr mixing_;
  std::vector<DistributionPtr> components_;
};

}  // namespace distkit
