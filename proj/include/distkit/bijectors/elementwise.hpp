// Scalar (event rank 0) bijectors: Identity, Exp, Sigmoid, Softplus, and the
// smooth coverings AbsValue and Square.
#pragma once

#include <cmath>
#include <utility>

#include "distkit/bijector.hpp"
#include "distkit/special.hpp"

namespace distkit {

class Identity final : public Bijector {
 public:
  Identity() : Bijector("Identity", 0, 0, /*constant_jacobian=*/true,
                        /*injective=*/true) {}

 protected:
  NdArray forward_impl(const NdArray& x) const override { return x; }
  NdArray inverse_impl(const NdArray& y) const override { return y; }
  NdArray forward_ldj_impl(const NdArray& x) const override {
    return NdArray::zeros(x.shape(), x.dtype());
  }
  NdArray inverse_ldj_impl(const NdArray& y) const override {
    return NdArray::zeros(y.shape(), y.dtype());
  }
};

class Exp final : public Bijector {
 public:
  Exp() : Bijector("Exp", 0, 0, /*constant_jacobian=*/false, /*injective=*/true) {}

 protected:
  NdArray forward_impl(const NdArray& x) const override {
    return map_unary(x, [](double v) { return std::exp(v); });
  }
  NdArray inverse_impl(const NdArray& y) const override {
    check_range(y);
    return map_unary(y, [](double v) { return std::log(v); });
  }
  NdArray forward_ldj_impl(const NdArray& x) const override { return x; }
  NdArray inverse_ldj_impl(const NdArray& y) const override {
    check_range(y);
    return map_unary(y, [](double v) { return -std::log(v); });
  }

 private:
  static void check_range(const NdArray& y) {
    for (std::int64_t i = 0; i < y.size(); ++i) {
      if (!(y.get(i) > 0.0)) {
        throw DomainError("Exp.inverse: value outside range (0, inf)");
      }
    }
  }
};

class Sigmoid final : public Bijector {
 public:
  Sigmoid()
      : Bijector("Sigmoid", 0, 0, /*constant_jacobian=*/false, /*injective=*/true) {}

 protected:
  NdArray forward_impl(const NdArray& x) const override {
    return map_unary(x, [](double v) { return special::sigmoid(v); });
  }
  NdArray inverse_impl(const NdArray& y) const override {
    check_range(y);
    return map_unary(y, [](double v) { return std::log(v) - std::log1p(-v); });
  }
  NdArray forward_ldj_impl(const NdArray& x) const override {
    return map_unary(x, [](double v) {
      return -special::softplus(v) - special::softplus(-v);
    });
  }
  NdArray inverse_ldj_impl(const NdArray& y) const override {
    check_range(y);
    return map_unary(y, [](double v) { return -std::log(v) - std::log1p(-v); });
  }

 private:
  static void check_range(const NdArray& y) {
    for (std::int64_t i = 0; i < y.size(); ++i) {
      const double v = y.get(i);
      if (!(v > 0.0 && v < 1.0)) {
        throw DomainError("Sigmoid.inverse: value outside range (0, 1)");
      }
    }
  }
};

class Softplus final : public Bijector {
 public:
  Softplus()
      : Bijector("Softplus", 0, 0, /*constant_jacobian=*/false, /*injective=*/true) {}

 protected:
  NdArray forward_impl(const NdArray& x) const override {
    return map_unary(x, [](double v) { return special::softplus(v); });
  }
  // softplus^-1(y) = log(e^y - 1), stabilized on both ends.
  NdArray inverse_impl(const NdArray& y) const override {
    check_range(y);
    return map_unary(y, [](double v) {
      if (v > 0.6931471805599453) return v + std::log1p(-std::exp(-v));
      return std::log(std::expm1(v));
    });
  }
  NdArray forward_ldj_impl(const NdArray& x) const override {
    return map_unary(x, [](double v) { return -special::softplus(-v); });
  }
  NdArray inverse_ldj_impl(const NdArray& y) const override {
    check_range(y);
    return map_unary(y, [](double v) { return -std::log1p(-std::exp(-v)); });
  }

 private:
  static void check_range(const NdArray& y) {
    for (std::int64_t i = 0; i < y.size(); ++i) {
      if (!(y.get(i) > 0.0)) {
        throw DomainError("Softplus.inverse: value outside range (0, inf)");
      }
    }
  }
};

// |x|: a two-to-one smooth covering of [0, inf).
class AbsValue final : public Bijector {
 public:
  AbsValue()
      : Bijector("AbsValue", 0, 0, /*constant_jacobian=*/false, /*injective=*/false) {}

 protected:
  NdArray forward_impl(const NdArray& x) const override {
    return map_unary(x, [](double v) { return std::fabs(v); });
  }
  PreimageSet preimage_impl(const NdArray& y) const override {
    check_range(y, "AbsValue");
    NdArray pos = map_unary(y, [](double v) { return v; });
    NdArray neg = map_unary(y, [](double v) { return -v; });
    return PreimageSet{{std::move(neg), std::move(pos)}};
  }
  NdArray forward_ldj_impl(const NdArray& x) const override {
    return NdArray::zeros(x.shape(), x.dtype());
  }
  NdArray inverse_ldj_impl(const NdArray& y) const override {
    check_range(y, "AbsValue");
    return NdArray::zeros(y.shape(), y.dtype());
  }

 private:
  static void check_range(const NdArray& y, const char* who) {
    for (std::int64_t i = 0; i < y.size(); ++i) {
      if (y.get(i) < 0.0) {
        throw DomainError(std::string(who) + ".preimage: value outside range [0, inf)");
      }
    }
  }
};

// x^2: a two-to-one smooth covering of [0, inf).
class Square final : public Bijector {
 public:
  Square()
      : Bijector("Square", 0, 0, /*constant_jacobian=*/false, /*injective=*/false) {}

 protected:
  NdArray forward_impl(const NdArray& x) const override {
    return map_unary(x, [](double v) { return v * v; });
  }
  PreimageSet preimage_impl(const NdArray& y) const override {
    check_range(y);
    NdArray pos = map_unary(y, [](double v) { return std::sqrt(v); });
    NdArray neg = map_unary(pos, [](double v) { return -v; });
    return PreimageSet{{std::move(neg), std::move(pos)}};
  }
  NdArray forward_ldj_impl(const NdArray& x) const override {
    return map_unary(x, [](double v) { return std::log(2.0 * std::fabs(v)); });
  }
  // Per-branch magnitude; identical for both branches (+-sqrt(y)).
  NdArray inverse_ldj_impl(const NdArray& y) const override {
    check_range(y);
    return map_unary(y, [](double v) {
      return -(std::log(2.0) + 0.5 * std::log(v));
    });
  }

 private:
  static void check_range(const NdArray& y) {
    for (std::int64_t i = 0; i < y.size(); ++i) {
      if (y.get(i) < 0.0) {
        throw DomainError("Square.preimage: value outside range [0, inf)");
      }
    }
  }
};

}  // namespace distkit
