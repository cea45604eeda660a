// Distribution base class. Public entry points validate, normalize shapes,
// and enforce policies; subclasses implement the *_impl hooks. Batch and
// event shapes are fixed at construction.
//
// Shape contract for a draw: sample_shape ++ batch_shape ++ event_shape.
// Shape contract for log_prob(x): x is lead ++ event_shape with the event
// axes matching exactly; the result has shape broadcast(lead, batch_shape).
#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "distkit/errors.hpp"
#include "distkit/ndarray.hpp"
#include "distkit/random.hpp"
#include "distkit/shape.hpp"

namespace distkit {

enum class Reparameterization { kFullyReparameterized, kNotReparameterized };

struct DistributionOptions {
  bool validate_args = false;
  bool allow_nan_stats = true;
  std::string name;
};

// A reparameterized draw split into its structural noise and the value the
// deterministic push-forward produced from it.
struct ReparamSample {
  NdArray noise;
  NdArray value;
};

class Distribution {
 public:
  virtual ~Distribution() = default;

  const Shape& batch_shape() const { return batch_shape_; }
  const Shape& event_shape() const { return event_shape_; }
  DType dtype() const { return dtype_; }
  const DistributionOptions& options() const { return options_; }
  Reparameterization reparameterization() const { return reparam_; }
  bool validate_args() const { return options_.validate_args; }

  virtual std::string family_name() const = 0;

  std::string name() const {
    return options_.name.empty() ? family_name() : options_.name;
  }

  // ---- Sampling ----

  NdArray sample(const Shape& sample_shape, RngState& rng) const {
    NdArray out = sample_impl(sample_shape, rng);
    return out;
  }

  NdArray sample(std::int64_t n, RngState& rng) const {
    return sample(Shape{n}, rng);
  }

  // Noise + value for reparameterized families. sample() runs through the
  // identical path, so value here is bit-for-bit what sample() returns when
  // handed an equal rng state.
  ReparamSample sample_with_noise(const Shape& sample_shape, RngState& rng) const {
    require_reparameterized("sample_with_noise");
    NdArray noise = sample_noise(sample_shape, rng);
    NdArray value = push_forward_impl(noise);
    return ReparamSample{std::move(noise), std::move(value)};
  }

  // Re-applies this distribution's deterministic transform to given noise.
  NdArray push_forward(const NdArray& noise) const {
    require_reparameterized("push_forward");
    return push_forward_impl(noise);
  }

  // ---- Densities ----

  NdArray log_prob(const NdArray& x) const {
    check_event_suffix(x, "log_prob");
    check_value_dtype(x, "log_prob");
    return log_prob_impl(x);
  }

  NdArray prob(const NdArray& x) const {
    return map_unary(log_prob(x), [](double lp) { return std::exp(lp); });
  }

  NdArray cdf(const NdArray& x) const {
    check_event_suffix(x, "cdf");
    check_value_dtype(x, "cdf");
    return cdf_impl(x);
  }

  NdArray log_cdf(const NdArray& x) const {
    return map_unary(cdf(x), [](double c) { return std::log(c); });
  }

  NdArray survival_function(const NdArray& x) const {
    return map_unary(cdf(x), [](double c) { return 1.0 - c; });
  }

  NdArray log_survival_function(const NdArray& x) const {
    return map_unary(cdf(x), [](double c) { return std::log1p(-c); });
  }

  NdArray quantile(const NdArray& p) const {
    check_value_dtype(p, "quantile");
    if (options_.validate_args) {
      for (std::int64_t i = 0; i < p.size(); ++i) {
        const double v = p.get(i);
        if (!(v >= 0.0 && v <= 1.0)) {
          throw DomainError(family_name() + ".quantile: probability outside [0, 1]");
        }
      }
    }
    return quantile_impl(p);
  }

  // ---- Statistics (batch-shaped) ----

  NdArray mean() const { return checked_stat(mean_impl(), "mean"); }
  NdArray variance() const { return checked_stat(variance_impl(), "variance"); }
  NdArray stddev() const {
    return checked_stat(
        map_unary(variance_impl(), [](double v) { return std::sqrt(v); }), "stddev");
  }
  NdArray mode() const { return checked_stat(mode_impl(), "mode"); }
  NdArray entropy() const { return checked_stat(entropy_impl(), "entropy"); }

  // Discrete families accept integer-typed values; continuous ones do not.
  // Public so that wrapper distributions can forward the inner policy.
  virtual bool accepts_integer_values() const { return false; }

 protected:
  Distribution(Shape batch_shape, Shape event_shape, DType dtype,
               Reparameterization reparam, DistributionOptions options)
      : batch_shape_(std::move(batch_shape)),
        event_shape_(std::move(event_shape)),
        dtype_(dtype),
        reparam_(reparam),
        options_(std::move(options)) {}

  // Default sampling is the reparameterized path; non-reparameterized
  // families override sample_impl directly.
  virtual NdArray sample_impl(const Shape& sample_shape, RngState& rng) const {
    return push_forward_impl(sample_noise(sample_shape, rng));
  }

  virtual NdArray sample_noise(const Shape& /*sample_shape*/, RngState& /*rng*/) const {
    throw NotReparameterizedError(family_name() + ": no noise source");
  }

  virtual NdArray push_forward_impl(const NdArray& /*noise*/) const {
    throw NotReparameterizedError(family_name() + ": no push-forward");
  }

  virtual NdArray log_prob_impl(const NdArray& x) const = 0;

  virtual NdArray cdf_impl(const NdArray& /*x*/) const {
    throw NotImplementedError(family_name() + ": cdf is not available in closed form");
  }

  virtual NdArray quantile_impl(const NdArray& /*p*/) const {
    throw NotImplementedError(family_name() + ": quantile is not available in closed form");
  }

  virtual NdArray mean_impl() const {
    throw NotImplementedError(family_name() + ": mean is not available in closed form");
  }

  virtual NdArray variance_impl() const {
    throw NotImplementedError(family_name() + ": variance is not available in closed form");
  }

  virtual NdArray mode_impl() const {
    throw NotImplementedError(family_name() + ": mode is not available in closed form");
  }

  virtual NdArray entropy_impl() const {
    throw NotImplementedError(family_name() + ": entropy is not available in closed form");
  }

  // Full shape of one batched draw: sample ++ batch ++ event.
  Shape draw_shape(const Shape& sample_shape) const {
    return sample_shape.concat(batch_shape_).concat(event_shape_);
  }

  // Shape of the log_prob result for input x (lead ++ event).
  Shape lp_shape(const NdArray& x) const {
    const Shape lead = x.shape().drop_suffix(event_shape_.rank());
    return broadcast_shapes(lead, batch_shape_);
  }

  void require_reparameterized(const char* op) const {
    if (reparam_ != Reparameterization::kFullyReparameterized) {
      throw NotReparameterizedError(family_name() + "." + op +
                                    ": family is not reparameterized");
    }
  }

  // Throws when a requested statistic came back NaN and the policy forbids
  // NaN statistics.
  NdArray checked_stat(NdArray value, const char* which) const {
    if (!options_.allow_nan_stats) {
      for (std::int64_t i = 0; i < value.size(); ++i) {
        if (std::isnan(value.get(i))) {
          throw NaNError(family_name() + "." + which + ": statistic is undefined");
        }
      }
    }
    return value;
  }

  void check_event_suffix(const NdArray& x, const char* op) const {
    if (x.rank() < event_shape_.rank() || !x.shape().ends_with(event_shape_)) {
      throw ShapeError(family_name() + "." + op + ": value shape " +
                       x.shape().to_string() + " does not end with event shape " +
                       event_shape_.to_string());
    }
  }

  void check_value_dtype(const NdArray& x, const char* op) const {
    if (x.dtype() == dtype_) return;
    if (accepts_integer_values() && x.dtype() == DType::I64) return;
    if (accepts_integer_values() && is_floating(x.dtype())) return;
    throw DTypeError(family_name() + "." + op + ": value dtype " +
                     dtype_name(x.dtype()) + " does not match distribution dtype " +
                     dtype_name(dtype_));
  }

 private:
  Shape batch_shape_;
  Shape event_shape_;
  DType dtype_;
  Reparameterization reparam_;
  DistributionOptions options_;
};

using DistributionPtr = std::shared_ptr<const Distribution>;

namespace dist_detail {

// x * log(y) with the 0 * log(0) = 0 convention.
inline double xlogy(double x, double y) {
  if (x == 0.0) return 0.0;
  return x * std::log(y);
}

// True when v holds a mathematical integer small enough for exact doubles.
inline bool is_integral_value(double v) {
  return std::isfinite(v) && v == std::floor(v) && std::fabs(v) <= 0x1.0p53;
}

// Elementwise map of (x, p0) -> out over broadcast shapes, keeping the
// output in `out_dtype`. The callable sees doubles regardless of dtypes.
template <typename F>
NdArray zip2_any(const NdArray& x, const NdArray& p0, DType out_dtype, F f) {
  const Shape out_shape = broadcast_shapes(x.shape(), p0.shape());
  const BroadcastIndexer ix(out_shape, x.shape());
  const BroadcastIndexer i0(out_shape, p0.shape());
  NdArray out = NdArray::zeros(out_shape, out_dtype);
  for (std::int64_t i = 0; i < out.size(); ++i) {
    out.set(i, f(x.get(ix(i)), p0.get(i0(i))));
  }
  return out;
}

template <typename F>
NdArray zip3_any(const NdArray& x, const NdArray& p0, const NdArray& p1,
                 DType out_dtype, F f) {
  const Shape out_shape =
      broadcast_shapes(broadcast_shapes(x.shape(), p0.shape()), p1.shape());
  const BroadcastIndexer ix(out_shape, x.shape());
  const BroadcastIndexer i0(out_shape, p0.shape());
  const BroadcastIndexer i1(out_shape, p1.shape());
  NdArray out = NdArray::zeros(out_shape, out_dtype);
  for (std::int64_t i = 0; i < out.size(); ++i) {
    out.set(i, f(x.get(ix(i)), p0.get(i0(i)), p1.get(i1(i))));
  }
  return out;
}

// Broadcast-checks a set of parameter arrays and returns their common
// (batch) shape.
inline Shape common_shape(const std::vector<const NdArray*>& params) {
  Shape s = Shape::scalar();
  for (const NdArray* p : params) s = broadcast_shapes(s, p->shape());
  return s;
}

inline void require_positive(const NdArray& p, const char* family, const char* param) {
  for (std::int64_t i = 0; i < p.size(); ++i) {
    if (!(p.get(i) > 0.0)) {
      throw InvalidParameterError(std::string(family) + ": " + param +
                                  " must be positive");
    }
  }
}

// Mutually exclusive parameter pairs: exactly one set, always enforced.
inline void require_exclusive(bool first_set, bool second_set, const char* family,
                              const char* first, const char* second) {
  if (first_set == second_set) {
    throw InvalidParameterError(std::string(family) + ": exactly one of " + first +
                                " and " + second + " must be given");
  }
}

inline DType common_dtype(const std::vector<const NdArray*>& params, const char* family) {
  if (params.empty()) return DType::F64;
  const DType dt = params.front()->dtype();
  for (const NdArray* p : params) {
    if (p->dtype() != dt) {
      throw DTypeError(std::string(family) + ": parameters have mixed dtypes");
    }
  }
  if (!is_floating(dt)) {
    throw DTypeError(std::string(family) + ": parameters must be floating point");
  }
  return dt;
}

}  // namespace dist_detail

}  // namespace distkit
