#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "distkit/bijectors/affine.hpp"
#include "distkit/distributions/normal.hpp"
#include "distkit/transformed.hpp"

namespace distkit {

namespace mvn_detail {

inline DistributionPtr standard_normal_base(DType dt) {
  return std::make_shared<Normal>(NdArray::scalar(0.0, dt),
                                  NdArray::scalar(1.0, dt));
}

inline double entropy_constant(std::int64_t d) {
  return 0.5 * static_cast<double>(d) * (1.0 + kLog2Pi);
}

}  // namespace mvn_detail

// Gaussian over length-d vectors with componentwise scales: the affine push
// forward loc + diag(scale) @ z of d i.i.d. standard normals.
class MultivariateNormalDiag final : public TransformedDistribution {
 public:
  MultivariateNormalDiag(NdArray loc, NdArray scale_diag,
                         DistributionOptions opts = {})
      : MultivariateNormalDiag(Prepared(std::move(loc), std::move(scale_diag)),
                               std::move(opts)) {}

  std::string family_name() const override { return "MultivariateNormalDiag"; }

  const NdArray& loc() const { return loc_; }
  const NdArray& scale_diag() const { return scale_diag_; }

 protected:
  NdArray mean_impl() const override { return loc_; }
  NdArray mode_impl() const override { return loc_; }
  NdArray variance_impl() const override { return scale_diag_ * scale_diag_; }

  NdArray entropy_impl() const override {
    const double c = mvn_detail::entropy_constant(event_shape()[0]);
    const NdArray log_det = reduce_sum_trailing(
        map_unary(scale_diag_,
                  [](double s) { return std::log(std::fabs(s)); }),
        1);
    return map_unary(log_det, [c](double ld) { return c + ld; });
  }

 private:
  struct Prepared {
    NdArray loc;
    NdArray diag;
    Shape batch;
    std::int64_t d;
    DType dt;

    Prepared(NdArray loc_in, NdArray diag_in)
        : loc(std::move(loc_in)), diag(std::move(diag_in)) {
      if (loc.rank() < 1 || diag.rank() < 1) {
        throw InvalidParameterError(
            "MultivariateNormalDiag: loc and scale_diag need a trailing event axis");
      }
      dt = dist_detail::common_dtype({&loc, &diag}, "MultivariateNormalDiag");
      const Shape full = broadcast_shapes(loc.shape(), diag.shape());
      d = full[full.rank() - 1];
      batch = full.drop_suffix(1);
      loc = broadcast_to(loc, full);
      diag = broadcast_to(diag, full);
    }
  };

  MultivariateNormalDiag(Prepared prep, DistributionOptions opts)
      : TransformedDistribution(
            mvn_detail::standard_normal_base(prep.dt),
            std::make_shared<Affine>(prep.loc, std::nullopt, prep.diag,
                                     std::nullopt),
            prep.batch, Shape{prep.d}, std::move(opts)),
        loc_(std::move(prep.loc)),
        scale_diag_(std::move(prep.diag)) {}

  NdArray loc_;
  NdArray scale_diag_;
};

// Gaussian over length-d vectors with a full lower-triangular scale:
// loc + L @ z, covariance L @ L^T.
class MultivariateNormalTriL final : public TransformedDistribution {
 public:
  MultivariateNormalTriL(NdArray loc, NdArray scale_tril,
                         DistributionOptions opts = {})
      : MultivariateNormalTriL(Prepared(std::move(loc), std::move(scale_tril)),
                               std::move(opts)) {}

  std::string family_name() const override { return "MultivariateNormalTriL"; }

  const NdArray& loc() const { return loc_; }
  const NdArray& scale_tril() const { return scale_tril_; }

 protected:
  NdArray mean_impl() const override { return loc_; }
  NdArray mode_impl() const override { return loc_; }

  // Diagonal of L L^T: row sums of squares.
  NdArray variance_impl() const override {
    const std::int64_t d = event_shape()[0];
    NdArray out = NdArray::zeros(batch_shape().concat(Shape{d}), dtype());
    for (std::int64_t b = 0; b < batch_shape().num_elements(); ++b) {
      for (std::int64_t j = 0; j < d; ++j) {
        double acc = 0.0;
        for (std::int64_t k = 0; k <= j; ++k) {
          const double v = scale_tril_.get((b * d + j) * d + k);
          acc += v * v;
        }
        out.set(b * d + j, acc);
      }
    }
    return out;
  }

  NdArray entropy_impl() const override {
    const std::int64_t d = event_shape()[0];
    const double c = mvn_detail::entropy_constant(d);
    NdArray out = NdArray::zeros(batch_shape(), dtype());
    for (std::int64_t b = 0; b < out.size(); ++b) {
      double acc = 0.0;
      for (std::int64_t j = 0; j < d; ++j) {
        acc += std::log(std::fabs(scale_tril_.get((b * d + j) * d + j)));
      }
      out.set(b, c + acc);
    }
    return out;
  }

 private:
  struct Prepared {
    NdArray loc;
    NdArray tril;
    Shape batch;
    std::int64_t d;
    DType dt;

    Prepared(NdArray loc_in, NdArray tril_in)
        : loc(std::move(loc_in)), tril(std::move(tril_in)) {
      if (loc.rank() < 1) {
        throw InvalidParameterError(
            "MultivariateNormalTriL: loc needs a trailing event axis");
      }
      if (tril.rank() < 2 ||
          tril.shape()[tril.rank() - 1] != tril.shape()[tril.rank() - 2]) {
        throw InvalidParameterError(
            "MultivariateNormalTriL: scale_tril must be [..., d, d]");
      }
      dt = dist_detail::common_dtype({&loc, &tril}, "MultivariateNormalTriL");
      d = tril.shape()[tril.rank() - 1];
      batch = broadcast_shapes(loc.shape().drop_suffix(1),
                               tril.shape().drop_suffix(2));
      const Shape full = batch.concat(Shape{d});
      if (broadcast_shapes(loc.shape(), full) != full) {
        throw IncompatibleShapesError(
            "MultivariateNormalTriL: loc " + loc.shape().to_string() +
            " does not broadcast to " + full.to_string());
      }
      loc = broadcast_to(loc, full);
      tril = broadcast_to(tril, batch.concat(Shape{d, d}));
    }
  };

  MultivariateNormalTriL(Prepared prep, DistributionOptions opts)
      : TransformedDistribution(
            mvn_detail::standard_normal_base(prep.dt),
            std::make_shared<Affine>(prep.loc, std::nullopt, std::nullopt,
                                     prep.tril),
            prep.batch, Shape{prep.d}, std::move(opts)),
        loc_(std::move(prep.loc)),
        scale_tril_(std::move(prep.tril)) {}

  NdArray loc_;
  NdArray scale_tril_;
};

}  // namespace distkit
