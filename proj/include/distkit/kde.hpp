#pragma once

#include <functional>
#include <memory>
#include <utility>

#include "distkit/distributions/normal.hpp"
#include "distkit/errors.hpp"
#include "distkit/independent.hpp"
#include "distkit/mixture.hpp"

namespace distkit {

// Builds one batched kernel distribution from the whole [n, ...event] point
// array; the result's last batch axis must index the n points.
using KernelBuilder = std::function<DistributionPtr(const NdArray&)>;

// Kernel density estimate: a uniform mixture of one kernel per data point.
inline std::shared_ptr<const MixtureSameFamily> kde(
    const NdArray& points, const KernelBuilder& kernel_builder,
    DistributionOptions opts = {}) {
  if (points.rank() < 1 || points.shape()[0] == 0) {
    throw EmptyPointsError("kde: needs at least one point");
  }
  if (!kernel_builder) throw InvalidParameterError("kde: null kernel_builder");
  DistributionPtr kernels = kernel_builder(points);
  if (!kernels) throw InvalidParameterError("kde: kernel_builder returned null");
  const std::int64_t n = points.shape()[0];
  auto mixing = std::make_shared<Categorical>(
      NdArray::zeros(Shape{n}, kernels->dtype()), std::nullopt, opts);
  return std::make_shared<MixtureSameFamily>(std::move(mixing),
                                             std::move(kernels), std::move(opts));
}

// Gaussian KDE with a shared isotropic bandwidth. Vector-valued points get
// an Independent wrapper so each kernel covers the whole event.
inline std::shared_ptr<const MixtureSameFamily> kde(const NdArray& points,
                                                    double bandwidth = 1.0,
                                                    DistributionOptions opts = {}) {
  if (!(bandwidth > 0.0)) {
    throw InvalidParameterError("kde: bandwidth must be positive");
  }
  return kde(
      points,
      [bandwidth](const NdArray& p) -> DistributionPtr {
        auto base = std::make_shared<Normal>(
            p, NdArray::scalar(bandwidth, p.dtype()));
        if (p.rank() <= 1) return base;
        return std::make_shared<Independent>(std::move(base), p.rank() - 1);
      },
      std::move(opts));
}

}  // namespace distkit
