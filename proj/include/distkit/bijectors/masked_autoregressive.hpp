#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "distkit/bijector.hpp"
#include "distkit/errors.hpp"
#include "distkit/ndarray.hpp"
#include "distkit/random.hpp"

namespace distkit {

// Conditioner for a masked autoregressive flow: maps x of shape [..., d] to
// (shift, log_scale), each broadcastable against x. Entry i of either output
// may depend only on x[..., :i].
using AutoregressiveFn =
    std::function<std::pair<NdArray, NdArray>(const NdArray&)>;

namespace maf_detail {

inline void check_output(const NdArray& x, const NdArray& out, const char* which) {
  broadcast_shapes(x.shape(), out.shape());  // throws if incompatible
  if (out.dtype() != x.dtype()) {
    throw DTypeError(std::string("masked_autoregressive: conditioner ") + which +
                     " dtype differs from input");
  }
}

}  // namespace maf_detail

// y[..., i] = x[..., i] * exp(log_scale_i(x[..., :i])) + shift_i(x[..., :i]).
// The triangular dependence makes the forward pass a single conditioner call
// while the inverse peels off one coordinate per iteration (d calls).
class MaskedAutoregressive final : public Bijector {
 public:
  explicit MaskedAutoregressive(AutoregressiveFn fn, bool audit_dependence = false)
      : Bijector("MaskedAutoregressive", 1, 1,
                 /*constant_jacobian=*/false, /*injective=*/true),
        fn_(std::move(fn)),
        audit_dependence_(audit_dependence) {
    if (!fn_) throw InvalidParameterError("masked_autoregressive: null conditioner");
  }

 protected:
  NdArray forward_impl(const NdArray& x) const override {
    maybe_audit(x);
    auto [shift, log_scale] = conditioned(x);
    return zip_broadcast(zip_broadcast(x, log_scale,
                                       [](double v, double ls) { return v * std::exp(ls); }),
                         shift, [](double v, double s) { return v + s; });
  }

  NdArray inverse_impl(const NdArray& y) const override {
    maybe_audit(y);
    const std::int64_t d = y.shape()[y.rank() - 1];
    NdArray x = NdArray::zeros(y.shape(), y.dtype());
    // After iteration k every coordinate i < k is exact, because entry i of
    // the conditioner output only reads coordinates below i.
    for (std::int64_t step = 0; step < d; ++step) {
      auto [shift, log_scale] = conditioned(x);
      x = zip_broadcast(zip_broadcast(y, shift,
                                      [](double v, double s) { return v - s; }),
                        log_scale, [](double v, double ls) { return v * std::exp(-ls); });
    }
    return x;
  }

  NdArray forward_ldj_impl(const NdArray& x) const override {
    auto [shift, log_scale] = conditioned(x);
    (void)shift;
    return reduce_sum_trailing(broadcast_to(log_scale, x.shape()), 1);
  }

 private:
  std::pair<NdArray, NdArray> conditioned(const NdArray& v) const {
    auto out = fn_(v);
    maf_detail::check_output(v, out.first, "shift");
    maf_detail::check_output(v, out.second, "log_scale");
    return out;
  }

  // Probe the conditioner once with rank-1 inputs: bumping coordinate j must
  // leave both outputs unchanged at every index i <= j, bit for bit.
  void maybe_audit(const NdArray& sample_like) const {
    if (!audit_dependence_) return;
    std::call_once(audit_once_, [&] {
      const std::int64_t d = sample_like.shape()[sample_like.rank() - 1];
      NdArray base = NdArray::zeros(Shape{d}, sample_like.dtype());
      for (std::int64_t i = 0; i < d; ++i) base.set(i, 0.5 + 0.25 * double(i));
      auto [s0, ls0] = conditioned(base);
      NdArray s0b = broadcast_to(s0, base.shape());
      NdArray ls0b = broadcast_to(ls0, base.shape());
      for (std::int64_t j = 0; j < d; ++j) {
        NdArray bumped = base;
        bumped.set(j, base.get(j) + 0.75);
        auto [s1, ls1] = conditioned(bumped);
        NdArray s1b = broadcast_to(s1, base.shape());
        NdArray ls1b = broadcast_to(ls1, base.shape());
        for (std::int64_t i = 0; i <= j; ++i) {
          if (s1b.get(i) != s0b.get(i) || ls1b.get(i) != ls0b.get(i)) {
            throw DependenceViolationError(
                "masked_autoregressive: conditioner output " + std::to_string(i) +
                " changed when input " + std::to_string(j) +
                " was perturbed; dependence must be strictly triangular");
          }
        }
      }
    });
  }

  AutoregressiveFn fn_;
  bool audit_dependence_;
  mutable std::once_flag audit_once_;
};

// Reference conditioner: strictly lower-triangular linear maps for both the
// shift and the raw scale, with the log-scale squashed into (-5, 5) so the
// flow stays well conditioned. Deterministic in (d, seed).
inline AutoregressiveFn make_linear_autoregressive_fn(std::int64_t d, std::uint64_t seed) {
  if (d <= 0) {
    throw InvalidParameterError("make_linear_autoregressive_fn: d must be positive");
  }
  RngState rng = make_rng(seed);
  NdArray raw = standard_normal(rng, Shape{2 * d * d + 2 * d}, DType::F64);
  const double w_scale = 0.5 / std::sqrt(double(d));
  std::vector<double> w_shift(d * d, 0.0), w_log_scale(d * d, 0.0);
  std::vector<double> b_shift(d), b_log_scale(d);
  std::int64_t k = 0;
  for (std::int64_t i = 0; i < d; ++i) {
    for (std::int64_t j = 0; j < d; ++j) {
      const double ws = raw.get(k++) * w_scale;
      const double wl = raw.get(k++) * w_scale;
      if (j < i) {
        w_shift[i * d + j] = ws;
        w_log_scale[i * d + j] = wl;
      }
    }
  }
  for (std::int64_t i = 0; i < d; ++i) {
    b_shift[i] = raw.get(k++) * 0.5;
    b_log_scale[i] = raw.get(k++) * 0.5;
  }
  return [d, w_shift, w_log_scale, b_shift, b_log_scale](
             const NdArray& x) -> std::pair<NdArray, NdArray> {
    if (x.rank() < 1 || x.shape()[x.rank() - 1] != d) {
      throw ShapeError("linear autoregressive fn: trailing dimension must be " +
                       std::to_string(d) + ", got " + x.shape().to_string());
    }
    NdArray shift = NdArray::zeros(x.shape(), x.dtype());
    NdArray log_scale = NdArray::zeros(x.shape(), x.dtype());
    const std::int64_t rows = x.size() / d;
    for (std::int64_t r = 0; r < rows; ++r) {
      for (std::int64_t i = 0; i < d; ++i) {
        double s = b_shift[i];
        double l = b_log_scale[i];
        for (std::int64_t j = 0; j < i; ++j) {
          const double v = x.get(r * d + j);
          s += w_shift[i * d + j] * v;
          l += w_log_scale[i * d + j] * v;
        }
        shift.set(r * d + i, s);
        log_scale.set(r * d + i, 5.0 * std::tanh(l / 5.0));
      }
    }
    return {std::move(shift), std::move(log_scale)};
  };
}

}  // namespace distkit
