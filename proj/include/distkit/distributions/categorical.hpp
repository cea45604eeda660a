#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include "distkit/distribution.hpp"
#include "distkit/special.hpp"

namespace distkit {

namespace cat_detail {

inline const NdArray& canonical(const std::optional<NdArray>& logits,
                                const std::optional<NdArray>& probs,
                                const char* family) {
  dist_detail::require_exclusive(logits.has_value(), probs.has_value(), family,
                                 "logits", "probs");
  const NdArray& src = logits ? *logits : *probs;
  if (src.rank() < 1) {
    throw InvalidParameterError(std::string(family) +
                                ": parameters need a trailing category axis");
  }
  return src;
}

inline Shape batch_of(const NdArray& src) { return src.shape().drop_suffix(1); }

// Normalized log-probabilities over the trailing axis.
inline NdArray normalized_log_probs(const std::optional<NdArray>& logits,
                                    const std::optional<NdArray>& probs,
                                    bool validate, const char* family) {
  NdArray raw = logits ? *logits : map_unary(*probs, [&](double p) {
    if (validate && !(p >= 0.0)) {
      throw InvalidParameterError(std::string(family) + ": probs must be >= 0");
    }
    return std::log(p);
  });
  const NdArray lse = log_sum_exp(raw, -1);
  const std::int64_t k = raw.shape()[raw.rank() - 1];
  NdArray out = NdArray::zeros(raw.shape(), raw.dtype());
  for (std::int64_t row = 0; row < lse.size(); ++row) {
    const double denom = lse.get(row);
    if (std::isinf(denom) && denom < 0.0) {
      throw InvalidParameterError(std::string(family) +
                                  ": distribution over categories is empty");
    }
    for (std::int64_t j = 0; j < k; ++j) {
      out.set(row * k + j, raw.get(row * k + j) - denom);
    }
  }
  return out;
}

}  // namespace cat_detail

// Distribution over {0, ..., K-1}; parameters have shape batch ++ [K] and
// the trailing axis is absorbed into the (scalar-event) batch. Samples I64.
class Categorical final : public Distribution {
 public:
  Categorical(std::optional<NdArray> logits, std::optional<NdArray> probs = std::nullopt,
              DistributionOptions opts = {})
      : Distribution(
            cat_detail::batch_of(cat_detail::canonical(logits, probs, "Categorical")),
            Shape::scalar(),
            dist_detail::common_dtype(
                {&cat_detail::canonical(logits, probs, "Categorical")}, "Categorical"),
            Reparameterization::kNotReparameterized, std::move(opts)),
        log_probs_(cat_detail::normalized_log_probs(logits, probs, validate_args(),
                                                    "Categorical")),
        num_categories_(log_probs_.shape()[log_probs_.rank() - 1]) {}

  std::string family_name() const override { return "Categorical"; }
  std::int64_t num_categories() const { return num_categories_; }
  const NdArray& logits() const { return log_probs_; }
  NdArray probs() const {
    return map_unary(log_probs_, [](double lp) { return std::exp(lp); });
  }

 protected:
  bool accepts_integer_values() const override { return true; }

  NdArray sample_impl(const Shape& sample_shape, RngState& rng) const override {
    const Shape full = draw_shape(sample_shape);
    const NdArray u = uniform(rng, full, DType::F64);
    const BroadcastIndexer ib(full, batch_shape());
    NdArray out = NdArray::zeros(full, DType::I64);
    for (std::int64_t i = 0; i < out.size(); ++i) {
      const std::int64_t row = ib(i) * num_categories_;
      const double target = u.get(i);
      double cum = 0.0;
      std::int64_t pick = num_categories_ - 1;
      for (std::int64_t k = 0; k < num_categories_; ++k) {
        cum += std::exp(log_probs_.get(row + k));
        if (target < cum) {
          pick = k;
          break;
        }
      }
      out.set_i64(i, pick);
    }
    return out;
  }

  NdArray log_prob_impl(const NdArray& x) const override {
    const Shape out_shape = lp_shape(x);
    const BroadcastIndexer ix(out_shape, x.shape());
    const BroadcastIndexer ib(out_shape, batch_shape());
    NdArray out = NdArray::zeros(out_shape, dtype());
    for (std::int64_t i = 0; i < out.size(); ++i) {
      const double v = x.get(ix(i));
      if (!dist_detail::is_integral_value(v) || v < 0.0 ||
          v >= static_cast<double>(num_categories_)) {
        if (validate_args()) {
          throw DomainError("Categorical: value is not a category index");
        }
        out.set(i, -std::numeric_limits<double>::infinity());
        continue;
      }
      out.set(i, log_probs_.get(ib(i) * num_categories_ +
                                static_cast<std::int64_t>(v)));
    }
    return out;
  }

  NdArray mean_impl() const override {
    return per_batch([this](std::int64_t row) {
      double acc = 0.0;
      for (std::int64_t k = 0; k < num_categories_; ++k) {
        acc += static_cast<double>(k) * std::exp(log_probs_.get(row + k));
      }
      return acc;
    });
  }

  NdArray variance_impl() const override {
    return per_batch([this](std::int64_t row) {
      double m = 0.0, m2 = 0.0;
      for (std::int64_t k = 0; k < num_categories_; ++k) {
        const double p = std::exp(log_probs_.get(row + k));
        m += static_cast<double>(k) * p;
        m2 += static_cast<double>(k * k) * p;
      }
      return m2 - m * m;
    });
  }

  NdArray mode_impl() const override {
    NdArray out = NdArray::zeros(batch_shape(), DType::I64);
    for (std::int64_t i = 0; i < out.size(); ++i) {
      const std::int64_t row = i * num_categories_;
      std::int64_t best = 0;
      for (std::int64_t k = 1; k < num_categories_; ++k) {
        if (log_probs_.get(row + k) > log_probs_.get(row + best)) best = k;
      }
      out.set_i64(i, best);
    }
    return out;
  }

  NdArray entropy_impl() const override {
    return per_batch([this](std::int64_t row) {
      double acc = 0.0;
      for (std::int64_t k = 0; k < num_categories_; ++k) {
        const double lp = log_probs_.get(row + k);
        const double p = std::exp(lp);
        if (p > 0.0) acc -= p * lp;
      }
      return acc;
    });
  }

 private:
  template <typename F>
  NdArray per_batch(F f) const {
    NdArray out = NdArray::zeros(batch_shape(), dtype());
    for (std::int64_t i = 0; i < out.size(); ++i) out.set(i, f(i * num_categories_));
    return out;
  }

  NdArray log_probs_;
  std::int64_t num_categories_;
};

// One-hot encoding of Categorical: event shape [K], values are 0/1 vectors
// with a single 1.
class OneHotCategorical final : public Distribution {
 public:
  OneHotCategorical(std::optional<NdArray> logits,
                    std::optional<NdArray> probs = std::nullopt,
                    DistributionOptions opts = {})
      : Distribution(
            cat_detail::batch_of(
                cat_detail::canonical(logits, probs, "OneHotCategorical")),
            cat_detail::canonical(logits, probs, "OneHotCategorical")
                .shape()
                .suffix(1),
            dist_detail::common_dtype(
                {&cat_detail::canonical(logits, probs, "OneHotCategorical")},
                "OneHotCategorical"),
            Reparameterization::kNotReparameterized, std::move(opts)),
        log_probs_(cat_detail::normalized_log_probs(logits, probs, validate_args(),
                                                    "OneHotCategorical")),
        num_categories_(log_probs_.shape()[log_probs_.rank() - 1]) {}

  std::string family_name() const override { return "OneHotCategorical"; }
  std::int64_t num_categories() const { return num_categories_; }
  const NdArray& logits() const { return log_probs_; }
  NdArray probs() const {
    return map_unary(log_probs_, [](double lp) { return std::exp(lp); });
  }

 protected:
  bool accepts_integer_values() const override { return true; }

  NdArray sample_impl(const Shape& sample_shape, RngState& rng) const override {
    const Shape rows_shape = sample_shape.concat(batch_shape());
    const NdArray u = uniform(rng, rows_shape, DType::F64);
    const BroadcastIndexer ib(rows_shape, batch_shape());
    NdArray out = NdArray::zeros(draw_shape(sample_shape), DType::I64);
    for (std::int64_t i = 0; i < u.size(); ++i) {
      const std::int64_t row = ib(i) * num_categories_;
      const double target = u.get(i);
      double cum = 0.0;
      std::int64_t pick = num_categories_ - 1;
      for (std::int64_t k = 0; k < num_categories_; ++k) {
        cum += std::exp(log_probs_.get(row + k));
        if (target < cum) {
          pick = k;
          break;
        }
      }
      out.set_i64(i * num_categories_ + pick, 1);
    }
    return out;
  }

  NdArray log_prob_impl(const NdArray& x) const override {
    const Shape out_shape = lp_shape(x);
    const Shape lead = x.shape().drop_suffix(1);
    const BroadcastIndexer ix(out_shape, lead);
    const BroadcastIndexer ib(out_shape, batch_shape());
    NdArray out = NdArray::zeros(out_shape, dtype());
    for (std::int64_t i = 0; i < out.size(); ++i) {
      const std::int64_t xrow = ix(i) * num_categories_;
      const std::int64_t brow = ib(i) * num_categories_;
      double ones = 0.0;
      bool valid = true;
      double lp = 0.0;
      for (std::int64_t k = 0; k < num_categories_; ++k) {
        const double v = x.get(xrow + k);
        if (v != 0.0 && v != 1.0) {
          valid = false;
          break;
        }
        if (v == 1.0) {
          ones += 1.0;
          lp += log_probs_.get(brow + k);
        }
      }
      if (!valid || ones != 1.0) {
        if (validate_args()) {
          throw DomainError("OneHotCategorical: value is not a one-hot vector");
        }
        out.set(i, -std::numeric_limits<double>::infinity());
        continue;
      }
      out.set(i, lp);
    }
    return out;
  }

  NdArray mean_impl() const override { return probs(); }

  NdArray variance_impl() const override {
    return map_unary(log_probs_, [](double lp) {
      const double p = std::exp(lp);
      return p * (1.0 - p);
    });
  }

  NdArray mode_impl() const override {
    NdArray out = NdArray::zeros(draw_shape(Shape::scalar()), DType::I64);
    const std::int64_t rows = out.size() / num_categories_;
    for (std::int64_t i = 0; i < rows; ++i) {
      const std::int64_t row = i * num_categories_;
      std::int64_t best = 0;
      for (std::int64_t k = 1; k < num_categories_; ++k) {
        if (log_probs_.get(row + k) > log_probs_.get(row + best)) best = k;
      }
      out.set_i64(row + best, 1);
    }
    return out;
  }

  NdArray entropy_impl() const override {
    NdArray out = NdArray::zeros(batch_shape(), dtype());
    for (std::int64_t i = 0; i < out.size(); ++i) {
      double acc = 0.0;
      for (std::int64_t k = 0; k < num_categories_; ++k) {
        const double lp = log_probs_.get(i * num_categories_ + k);
        const double p = std::exp(lp);
        if (p > 0.0) acc -= p * lp;
      }
      out.set(i, acc);
    }
    return out;
  }

 private:
  NdArray log_probs_;
  std::int64_t num_categories_;
};

}  // namespace distkit
