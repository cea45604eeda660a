// y = scale @ x + shift with scalar, diagonal, or lower-triangular scale.
// Scalar scale acts elementwise (event rank 0); diagonal and triangular
// scales act on length-d vector events (event rank 1). The log-det-jacobian
// is constant: 0 resp. log|m|, sum log|diag|, sum log|diag(tril)|.
#pragma once

#include <cmath>
#include <optional>
#include <utility>

#include "distkit/bijector.hpp"

namespace distkit {

class Affine final : public Bijector {
 public:
  explicit Affine(std::optional<NdArray> shift,
                  std::optional<double> scale_identity_multiplier = std::nullopt,
                  std::optional<NdArray> scale_diag = std::nullopt,
                  std::optional<NdArray> scale_tril = std::nullopt)
      : Bijector("Affine", min_rank(scale_diag, scale_tril),
                 min_rank(scale_diag, scale_tril),
                 /*constant_jacobian=*/true, /*injective=*/true),
        shift_(std::move(shift)) {
    const int given = (scale_identity_multiplier ? 1 : 0) + (scale_diag ? 1 : 0) +
                      (scale_tril ? 1 : 0);
    if (given > 1) {
      throw InvalidParameterError("Affine: at most one scale parameterization");
    }
    if (scale_tril) {
      if (scale_tril->rank() < 2 ||
          scale_tril->shape()[scale_tril->rank() - 1] !=
              scale_tril->shape()[scale_tril->rank() - 2]) {
        throw InvalidParameterError("Affine: scale_tril must be [..., d, d]");
      }
      tril_ = std::move(scale_tril);
      dim_ = tril_->shape()[tril_->rank() - 1];
      for (std::int64_t b = 0; b < tril_->size() / (dim_ * dim_); ++b) {
        for (std::int64_t i = 0; i < dim_; ++i) {
          if (tril_->get((b * dim_ + i) * dim_ + i) == 0.0) {
            throw InvalidParameterError("Affine: scale_tril has a zero diagonal");
          }
        }
      }
    } else if (scale_diag) {
      if (scale_diag->rank() < 1) {
        throw InvalidParameterError("Affine: scale_diag must be [..., d]");
      }
      for (std::int64_t i = 0; i < scale_diag->size(); ++i) {
        if (scale_diag->get(i) == 0.0) {
          throw InvalidParameterError("Affine: scale_diag has a zero entry");
        }
      }
      diag_ = std::move(scale_diag);
      dim_ = diag_->shape()[diag_->rank() - 1];
    } else {
      multiplier_ = scale_identity_multiplier.value_or(1.0);
      if (multiplier_ == 0.0) {
        throw InvalidParameterError("Affine: scale_identity_multiplier is zero");
      }
    }
  }

 protected:
  NdArray forward_impl(const NdArray& x) const override {
    NdArray scaled = apply_scale(x);
    if (!shift_) return scaled;
    return zip_broadcast(scaled, *shift_, [](double v, double s) { return v + s; });
  }

  NdArray inverse_impl(const NdArray& y) const override {
    NdArray centered =
        shift_ ? zip_broadcast(y, *shift_, [](double v, double s) { return v - s; })
               : y;
    return unapply_scale(centered);
  }

  NdArray forward_ldj_impl(const NdArray& x) const override {
    return ldj_for(x.shape(), x.dtype(), +1.0);
  }

  NdArray inverse_ldj_impl(const NdArray& y) const override {
    return ldj_for(y.shape(), y.dtype(), -1.0);
  }

 private:
  static int min_rank(const std::optional<NdArray>& diag,
                      const std::optional<NdArray>& tril) {
    return (diag || tril) ? 1 : 0;
  }

  NdArray apply_scale(const NdArray& x) const {
    if (tril_) return matvec(*tril_, x);
    if (diag_) return zip_broadcast(x, *diag_, [](double v, double d) { return v * d; });
    const double m = multiplier_;
    return map_unary(x, [m](double v) { return v * m; });
  }

  NdArray unapply_scale(const NdArray& y) const {
    if (tril_) return trisolve(*tril_, y);
    if (diag_) return zip_broadcast(y, *diag_, [](double v, double d) { return v / d; });
    const double m = multiplier_;
    return map_unary(y, [m](double v) { return v / m; });
  }

  // Lower-triangular matvec over the trailing axis with broadcast batch dims.
  NdArray matvec(const NdArray& L, const NdArray& x) const {
    if (x.rank() < 1 || x.shape()[x.rank() - 1] != dim_) {
      throw ShapeError("Affine: event axis does not match scale dimension");
    }
    const Shape lead =
        broadcast_shapes(x.shape().drop_suffix(1), L.shape().drop_suffix(2));
    const Shape out_shape = lead.concat(Shape{dim_});
    const BroadcastIndexer ix(lead, x.shape().drop_suffix(1));
    const BroadcastIndexer il(lead, L.shape().drop_suffix(2));
    NdArray out = NdArray::zeros(out_shape, x.dtype());
    for (std::int64_t r = 0; r < lead.num_elements(); ++r) {
      const std::int64_t xrow = ix(r) * dim_;
      const std::int64_t lrow = il(r) * dim_ * dim_;
      for (std::int64_t i = 0; i < dim_; ++i) {
        double acc = 0.0;
        for (std::int64_t j = 0; j <= i; ++j) {
          acc += L.get(lrow + i * dim_ + j) * x.get(xrow + j);
        }
        out.set(r * dim_ + i, acc);
      }
    }
    return out;
  }

  // Solves L x = y by forward substitution, batch-broadcast like matvec.
  NdArray trisolve(const NdArray& L, const NdArray& y) const {
    if (y.rank() < 1 || y.shape()[y.rank() - 1] != dim_) {
      throw ShapeError("Affine: event axis does not match scale dimension");
    }
    const Shape lead =
        broadcast_shapes(y.shape().drop_suffix(1), L.shape().drop_suffix(2));
    const Shape out_shape = lead.concat(Shape{dim_});
    const BroadcastIndexer iy(lead, y.shape().drop_suffix(1));
    const BroadcastIndexer il(lead, L.shape().drop_suffix(2));
    NdArray out = NdArray::zeros(out_shape, y.dtype());
    for (std::int64_t r = 0; r < lead.num_elements(); ++r) {
      const std::int64_t yrow = iy(r) * dim_;
      const std::int64_t lrow = il(r) * dim_ * dim_;
      for (std::int64_t i = 0; i < dim_; ++i) {
        double acc = y.get(yrow + i);
        for (std::int64_t j = 0; j < i; ++j) {
          acc -= L.get(lrow + i * dim_ + j) * out.get(r * dim_ + j);
        }
        out.set(r * dim_ + i, acc / L.get(lrow + i * dim_ + i));
      }
    }
    return out;
  }

  // Constant log-det, shaped like the value with its event axes dropped
  // (sign +1 forward, -1 inverse).
  NdArray ldj_for(const Shape& value_shape, DType dtype, double sign) const {
    if (tril_) {
      const Shape lead = broadcast_shapes(value_shape.drop_suffix(1),
                                          tril_->shape().drop_suffix(2));
      NdArray out = NdArray::zeros(lead, dtype);
      const BroadcastIndexer il(lead, tril_->shape().drop_suffix(2));
      for (std::int64_t r = 0; r < out.size(); ++r) {
        const std::int64_t lrow = il(r) * dim_ * dim_;
        double acc = 0.0;
        for (std::int64_t i = 0; i < dim_; ++i) {
          acc += std::log(std::fabs(tril_->get(lrow + i * dim_ + i)));
        }
        out.set(r, sign * acc);
      }
      return out;
    }
    if (diag_) {
      const Shape lead = broadcast_shapes(value_shape.drop_suffix(1),
                                          diag_->shape().drop_suffix(1));
      NdArray out = NdArray::zeros(lead, dtype);
      const BroadcastIndexer id(lead, diag_->shape().drop_suffix(1));
      for (std::int64_t r = 0; r < out.size(); ++r) {
        const std::int64_t drow = id(r) * dim_;
        double acc = 0.0;
        for (std::int64_t i = 0; i < dim_; ++i) {
          acc += std::log(std::fabs(diag_->get(drow + i)));
        }
        out.set(r, sign * acc);
      }
      return out;
    }
    return NdArray::filled(value_shape, dtype,
                           sign * std::log(std::fabs(multiplier_)));
  }

  std::optional<NdArray> shift_;
  std::optional<NdArray> diag_;
  std::optional<NdArray> tril_;
  double multiplier_ = 1.0;
  std::int64_t dim_ = 0;
};

}  // namespace distkit
