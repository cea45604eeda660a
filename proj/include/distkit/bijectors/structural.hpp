// Structure-rearranging bijectors: Permute and Reshape (volume preserving),
// and SoftmaxCentered (maps R^k onto the interior of the k-simplex in
// R^{k+1} by appending a zero logit).
#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "distkit/bijector.hpp"

namespace distkit {

class Permute final : public Bijector {
 public:
  explicit Permute(std::vector<std::int64_t> perm)
      : Bijector("Permute", 1, 1, /*constant_jacobian=*/true, /*injective=*/true),
        perm_(std::move(perm)),
        inverse_perm_(perm_.size()) {
    std::vector<bool> seen(perm_.size(), false);
    for (std::size_t i = 0; i < perm_.size(); ++i) {
      const std::int64_t p = perm_[i];
      if (p < 0 || p >= static_cast<std::int64_t>(perm_.size()) ||
          seen[static_cast<std::size_t>(p)]) {
        throw InvalidParameterError("Permute: not a permutation");
      }
      seen[static_cast<std::size_t>(p)] = true;
      inverse_perm_[static_cast<std::size_t>(p)] = static_cast<std::int64_t>(i);
    }
  }

  Shape forward_event_shape(const Shape& in) const override {
    check_event(in, "forward_event_shape");
    return in;
  }
  Shape inverse_event_shape(const Shape& out) const override {
    check_event(out, "inverse_event_shape");
    return out;
  }

 protected:
  NdArray forward_impl(const NdArray& x) const override { return gather(x, perm_); }
  NdArray inverse_impl(const NdArray& y) const override {
    return gather(y, inverse_perm_);
  }
  NdArray forward_ldj_impl(const NdArray& x) const override {
    return NdArray::zeros(x.shape().drop_suffix(1), x.dtype());
  }
  NdArray inverse_ldj_impl(const NdArray& y) const override {
    return NdArray::zeros(y.shape().drop_suffix(1), y.dtype());
  }

 private:
  void check_event(const Shape& s, const char* op) const {
    if (s.rank() < 1 || s[s.rank() - 1] != static_cast<std::int64_t>(perm_.size())) {
      throw ShapeError("Permute." + std::string(op) + ": event shape " +
                       s.to_string() + " does not end in " +
                       std::to_string(perm_.size()));
    }
  }

  NdArray gather(const NdArray& v, const std::vector<std::int64_t>& idx) const {
    const std::int64_t n = static_cast<std::int64_t>(idx.size());
    if (v.rank() < 1 || v.shape()[v.rank() - 1] != n) {
      throw ShapeError("Permute: trailing axis does not match permutation length");
    }
    NdArray out = NdArray::zeros(v.shape(), v.dtype());
    const std::int64_t rows = v.size() / n;
    for (std::int64_t r = 0; r < rows; ++r) {
      for (std::int64_t i = 0; i < n; ++i) {
        out.set(r * n + i, v.get(r * n + idx[static_cast<std::size_t>(i)]));
      }
    }
    return out;
  }

  std::vector<std::int64_t> perm_;
  std::vector<std::int64_t> inverse_perm_;
};

class Reshape final : public Bijector {
 public:
  Reshape(Shape event_shape_in, Shape event_shape_out)
      : Bijector("Reshape", event_shape_in.rank(), event_shape_out.rank(),
                 /*constant_jacobian=*/true, /*injective=*/true),
        in_(std::move(event_shape_in)),
        out_(std::move(event_shape_out)) {
    if (in_.num_elements() != out_.num_elements()) {
      throw ShapeError("Reshape: " + in_.to_string() + " and " + out_.to_string() +
                       " hold different element counts");
    }
  }

  Shape forward_event_shape(const Shape& in) const override {
    if (in != in_) {
      throw ShapeError("Reshape.forward_event_shape: got " + in.to_string() +
                       ", declared " + in_.to_string());
    }
    return out_;
  }
  Shape inverse_event_shape(const Shape& out) const override {
    if (out != out_) {
      throw ShapeError("Reshape.inverse_event_shape: got " + out.to_string() +
                       ", declared " + out_.to_string());
    }
    return in_;
  }

 protected:
  NdArray forward_impl(const NdArray& x) const override {
    if (!x.shape().ends_with(in_)) {
      throw ShapeError("Reshape.forward: value shape " + x.shape().to_string() +
                       " does not end with " + in_.to_string());
    }
    return x.reshape(x.shape().drop_suffix(in_.rank()).concat(out_));
  }
  NdArray inverse_impl(const NdArray& y) const override {
    if (!y.shape().ends_with(out_)) {
      throw ShapeError("Reshape.inverse: value shape " + y.shape().to_string() +
                       " does not end with " + out_.to_string());
    }
    return y.reshape(y.shape().drop_suffix(out_.rank()).concat(in_));
  }
  NdArray forward_ldj_impl(const NdArray& x) const override {
    return NdArray::zeros(x.shape().drop_suffix(in_.rank()), x.dtype());
  }
  NdArray inverse_ldj_impl(const NdArray& y) const override {
    return NdArray::zeros(y.shape().drop_suffix(out_.rank()), y.dtype());
  }

 private:
  Shape in_;
  Shape out_;
};

// softmax([x; 0]): takes length-k unconstrained vectors onto the interior
// of the simplex in R^{k+1}. The log-det-jacobian is computed in the
// k-dimensional chart given by the first k output coordinates, where
// |det J| = prod_i y_i (over all k+1 coordinates).
class SoftmaxCentered final : public Bijector {
 public:
  SoftmaxCentered()
      : Bijector("SoftmaxCentered", 1, 1, /*constant_jacobian=*/false,
                 /*injective=*/true) {}

  Shape forward_event_shape(const Shape& in) const override {
    if (in.rank() < 1) {
      throw ShapeError("SoftmaxCentered.forward_event_shape: rank-0 event");
    }
    std::vector<std::int64_t> d = in.dims();
    d.back() += 1;
    return Shape(std::move(d));
  }
  Shape inverse_event_shape(const Shape& out) const override {
    if (out.rank() < 1 || out[out.rank() - 1] < 2) {
      throw ShapeError("SoftmaxCentered.inverse_event_shape: trailing axis of " +
                       out.to_string() + " cannot lose a coordinate");
    }
    std::vector<std::int64_t> d = out.dims();
    d.back() -= 1;
    return Shape(std::move(d));
  }

 protected:
  NdArray forward_impl(const NdArray& x) const override {
    const std::int64_t k = x.shape()[x.rank() - 1];
    const Shape out_shape = x.shape().drop_suffix(1).concat(Shape{k + 1});
    NdArray out = NdArray::zeros(out_shape, x.dtype());
    const std::int64_t rows = x.size() / k;
    for (std::int64_t r = 0; r < rows; ++r) {
      double m = 0.0;  // the appended zero logit
      for (std::int64_t i = 0; i < k; ++i) m = std::max(m, x.get(r * k + i));
      double total = std::exp(-m);
      for (std::int64_t i = 0; i < k; ++i) total += std::exp(x.get(r * k + i) - m);
      for (std::int64_t i = 0; i < k; ++i) {
        out.set(r * (k + 1) + i, std::exp(x.get(r * k + i) - m) / total);
      }
      out.set(r * (k + 1) + k, std::exp(-m) / total);
    }
    return out;
  }

  NdArray inverse_impl(const NdArray& y) const override {
    check_simplex(y);
    const std::int64_t kp1 = y.shape()[y.rank() - 1];
    const Shape out_shape = y.shape().drop_suffix(1).concat(Shape{kp1 - 1});
    NdArray out = NdArray::zeros(out_shape, y.dtype());
    const std::int64_t rows = y.size() / kp1;
    for (std::int64_t r = 0; r < rows; ++r) {
      const double log_last = std::log(y.get(r * kp1 + kp1 - 1));
      for (std::int64_t i = 0; i < kp1 - 1; ++i) {
        out.set(r * (kp1 - 1) + i, std::log(y.get(r * kp1 + i)) - log_last);
      }
    }
    return out;
  }

  NdArray forward_ldj_impl(const NdArray& x) const override {
    const NdArray y = forward_impl(x);
    return sum_log_rows(y, +1.0);
  }

  NdArray inverse_ldj_impl(const NdArray& y) const override {
    check_simplex(y);
    return sum_log_rows(y, -1.0);
  }

 private:
  static NdArray sum_log_rows(const NdArray& y, double sign) {
    const std::int64_t n = y.shape()[y.rank() - 1];
    NdArray out = NdArray::zeros(y.shape().drop_suffix(1), y.dtype());
    for (std::int64_t r = 0; r < out.size(); ++r) {
      double acc = 0.0;
      for (std::int64_t i = 0; i < n; ++i) acc += std::log(y.get(r * n + i));
      out.set(r, sign * acc);
    }
    return out;
  }

  static void check_simplex(const NdArray& y) {
    if (y.rank() < 1 || y.shape()[y.rank() - 1] < 2) {
      throw ShapeError("SoftmaxCentered.inverse: trailing axis too short");
    }
    const std::int64_t n = y.shape()[y.rank() - 1];
    const std::int64_t rows = y.size() / n;
    for (std::int64_t r = 0; r < rows; ++r) {
      double total = 0.0;
      for (std::int64_t i = 0; i < n; ++i) {
        const double v = y.get(r * n + i);
        if (!(v > 0.0)) {
          throw DomainError("SoftmaxCentered.inverse: coordinates must be positive");
        }
        total += v;
      }
      if (std::fabs(total - 1.0) > 1e-6) {
        throw DomainError("SoftmaxCentered.inverse: value is not on the simplex");
      }
    }
  }
};

}  // namespace distkit
