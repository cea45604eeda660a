// Dense n-dimensional arrays: the tensor-in, tensor-out currency of the
// library. Row-major flat storage, no views, no silent dtype promotion.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "distkit/errors.hpp"
#include "distkit/shape.hpp"

namespace distkit {

enum class DType { F32, F64, I64 };

inline std::string dtype_name(DType dt) {
  switch (dt) {
    case DType::F32: return "f32";
    case DType::F64: return "f64";
    case DType::I64: return "i64";
  }
  return "?";
}

inline bool is_floating(DType dt) { return dt != DType::I64; }

class NdArray {
 public:
  NdArray() : shape_(), dtype_(DType::F64), data_(std::vector<double>{0.0}) {}

  static NdArray zeros(const Shape& shape, DType dtype = DType::F64) {
    return filled(shape, dtype, 0.0);
  }

  static NdArray filled(const Shape& shape, DType dtype, double value) {
    NdArray out;
    out.shape_ = shape;
    out.dtype_ = dtype;
    const auto n = static_cast<std::size_t>(shape.num_elements());
    switch (dtype) {
      case DType::F32:
        out.data_ = std::vector<float>(n, static_cast<float>(value));
        break;
      case DType::F64:
        out.data_ = std::vector<double>(n, value);
        break;
      case DType::I64:
        out.data_ = std::vector<std::int64_t>(n, static_cast<std::int64_t>(value));
        break;
    }
    return out;
  }

  static NdArray f64(const Shape& shape, std::vector<double> values) {
    check_count(shape, values.size());
    NdArray out;
    out.shape_ = shape;
    out.dtype_ = DType::F64;
    out.data_ = std::move(values);
    return out;
  }

  static NdArray f32(const Shape& shape, std::vector<float> values) {
    check_count(shape, values.size());
    NdArray out;
    out.shape_ = shape;
    out.dtype_ = DType::F32;
    out.data_ = std::move(values);
    return out;
  }

  static NdArray i64(const Shape& shape, std::vector<std::int64_t> values) {
    check_count(shape, values.size());
    NdArray out;
    out.shape_ = shape;
    out.dtype_ = DType::I64;
    out.data_ = std::move(values);
    return out;
  }

  static NdArray scalar(double v, DType dtype = DType::F64) {
    return filled(Shape::scalar(), dtype, v);
  }

  const Shape& shape() const { return shape_; }
  DType dtype() const { return dtype_; }
  std::int64_t size() const { return shape_.num_elements(); }
  int rank() const { return shape_.rank(); }

  // Value read as double, whatever the dtype.
  double get(std::int64_t i) const {
    return std::visit(
        [i](const auto& v) { return static_cast<double>(v[static_cast<std::size_t>(i)]); },
        data_);
  }

  std::int64_t get_i64(std::int64_t i) const {
    return std::visit(
        [i](const auto& v) { return static_cast<std::int64_t>(v[static_cast<std::size_t>(i)]); },
        data_);
  }

  // Stores `v` cast into this array's dtype.
  void set(std::int64_t i, double v) {
    std::visit(
        [i, v](auto& vec) {
          using T = typename std::decay_t<decltype(vec)>::value_type;
          vec[static_cast<std::size_t>(i)] = static_cast<T>(v);
        },
        data_);
  }

  void set_i64(std::int64_t i, std::int64_t v) {
    std::visit(
        [i, v](auto& vec) {
          using T = typename std::decay_t<decltype(vec)>::value_type;
          vec[static_cast<std::size_t>(i)] = static_cast<T>(v);
        },
        data_);
  }

  std::vector<double> to_f64_vector() const {
    std::vector<double> out(static_cast<std::size_t>(size()));
    for (std::int64_t i = 0; i < size(); ++i) out[static_cast<std::size_t>(i)] = get(i);
    return out;
  }

  NdArray cast(DType dtype) const {
    if (dtype == dtype_) return *this;
    NdArray out = zeros(shape_, dtype);
    for (std::int64_t i = 0; i < size(); ++i) {
      if (dtype == DType::I64) {
        out.set_i64(i, get_i64(i));
      } else {
        out.set(i, get(i));
      }
    }
    return out;
  }

  NdArray reshape(const Shape& shape) const {
    if (shape.num_elements() != size()) {
      throw ShapeError("reshape " + shape_.to_string() + " -> " + shape.to_string() +
                       " changes element count");
    }
    NdArray out = *this;
    out.shape_ = shape;
    out.provenance_ = 0;
    return out;
  }

  // Provenance tokens tie values produced by bijectors to their cache
  // entries. 0 means "not produced by any bijector".
  std::uint64_t provenance() const { return provenance_; }
  void set_provenance(std::uint64_t p) { provenance_ = p; }

 private:
  static void check_count(const Shape& shape, std::size_t n) {
    if (static_cast<std::int64_t>(n) != shape.num_elements()) {
      throw ShapeError("value count does not match shape " + shape.to_string());
    }
  }

  Shape shape_;
  DType dtype_;
  std::variant<std::vector<float>, std::vector<double>, std::vector<std::int64_t>> data_;
  std::uint64_t provenance_ = 0;
};

namespace detail {
inline void require_floating(const NdArray& x, const char* op) {
  if (!is_floating(x.dtype())) {
    throw DTypeError(std::string(op) + " requires a floating dtype, got " +
                     dtype_name(x.dtype()));
  }
}

inline void require_same_dtype(const NdArray& a, const NdArray& b, const char* op) {
  if (a.dtype() != b.dtype()) {
    throw DTypeError(std::string(op) + ": mixed dtypes " + dtype_name(a.dtype()) +
                     " and " + dtype_name(b.dtype()));
  }
}
}  // namespace detail

// Elementwise unary map; computes in double, stores in the input dtype.
template <typename F>
NdArray map_unary(const NdArray& x, F f) {
  detail::require_floating(x, "map_unary");
  NdArray out = NdArray::zeros(x.shape(), x.dtype());
  for (std::int64_t i = 0; i < x.size(); ++i) out.set(i, f(x.get(i)));
  return out;
}

// Elementwise binary map with right-aligned broadcasting.
template <typename F>
NdArray zip_broadcast(const NdArray& a, const NdArray& b, F f) {
  detail::require_same_dtype(a, b, "zip_broadcast");
  detail::require_floating(a, "zip_broadcast");
  const Shape out_shape = broadcast_shapes(a.shape(), b.shape());
  NdArray out = NdArray::zeros(out_shape, a.dtype());
  const BroadcastIndexer ia(out_shape, a.shape());
  const BroadcastIndexer ib(out_shape, b.shape());
  for (std::int64_t i = 0; i < out.size(); ++i) {
    out.set(i, f(a.get(ia(i)), b.get(ib(i))));
  }
  return out;
}

inline NdArray operator+(const NdArray& a, const NdArray& b) {
  return zip_broadcast(a, b, [](double x, double y) { return x + y; });
}
inline NdArray operator-(const NdArray& a, const NdArray& b) {
  return zip_broadcast(a, b, [](double x, double y) { return x - y; });
}
inline NdArray operator*(const NdArray& a, const NdArray& b) {
  return zip_broadcast(a, b, [](double x, double y) { return x * y; });
}
inline NdArray operator/(const NdArray& a, const NdArray& b) {
  return zip_broadcast(a, b, [](double x, double y) { return x / y; });
}

inline NdArray operator+(const NdArray& a, double s) {
  return map_unary(a, [s](double x) { return x + s; });
}
inline NdArray operator-(const NdArray& a, double s) {
  return map_unary(a, [s](double x) { return x - s; });
}
inline NdArray operator*(const NdArray& a, double s) {
  return map_unary(a, [s](double x) { return x * s; });
}
inline NdArray operator/(const NdArray& a, double s) {
  return map_unary(a, [s](double x) { return x / s; });
}
inline NdArray operator-(const NdArray& a) {
  return map_unary(a, [](double x) { return -x; });
}

inline NdArray broadcast_to(const NdArray& x, const Shape& shape) {
  const BroadcastIndexer ix(shape, x.shape());
  NdArray out = NdArray::zeros(shape, x.dtype());
  for (std::int64_t i = 0; i < out.size(); ++i) {
    if (x.dtype() == DType::I64) {
      out.set_i64(i, x.get_i64(ix(i)));
    } else {
      out.set(i, x.get(ix(i)));
    }
  }
  return out;
}

// Sum over the last `k` axes. Per output element the reduction walks the
// trailing block in row-major order (last axis fastest); this order is part
// of the contract for factorized log densities.
inline NdArray reduce_sum_trailing(const NdArray& x, int k) {
  if (k < 0 || k > x.rank()) throw RankError("reduce_sum_trailing: bad axis count");
  const Shape out_shape = x.shape().drop_suffix(k);
  const std::int64_t block = x.shape().suffix(k).num_elements();
  NdArray out = NdArray::zeros(out_shape, x.dtype());
  for (std::int64_t i = 0; i < out.size(); ++i) {
    double acc = 0.0;
    for (std::int64_t j = 0; j < block; ++j) acc += x.get(i * block + j);
    out.set(i, acc);
  }
  return out;
}

namespace detail {
inline int normalize_axis(int axis, int rank) {
  const int a = axis < 0 ? axis + rank : axis;
  if (a < 0 || a >= rank) throw RankError("axis out of bounds");
  return a;
}

// Decomposes a shape around `axis` into (outer, extent, inner) so that
// flat = (o * extent + k) * inner + j.
struct AxisSplit {
  std::int64_t outer, extent, inner;
};

inline AxisSplit split_axis(const Shape& shape, int axis) {
  AxisSplit s{1, shape[axis], 1};
  for (int i = 0; i < axis; ++i) s.outer *= shape[i];
  for (int i = axis + 1; i < shape.rank(); ++i) s.inner *= shape[i];
  return s;
}

inline Shape drop_axis(const Shape& shape, int axis) {
  std::vector<std::int64_t> d;
  for (int i = 0; i < shape.rank(); ++i) {
    if (i != axis) d.push_back(shape[i]);
  }
  return Shape(std::move(d));
}
}  // namespace detail

inline NdArray reduce_sum_axis(const NdArray& x, int axis) {
  const int a = detail::normalize_axis(axis, x.rank());
  const auto s = detail::split_axis(x.shape(), a);
  NdArray out = NdArray::zeros(detail::drop_axis(x.shape(), a), x.dtype());
  for (std::int64_t o = 0; o < s.outer; ++o) {
    for (std::int64_t j = 0; j < s.inner; ++j) {
      double acc = 0.0;
      for (std::int64_t k = 0; k < s.extent; ++k) {
        acc += x.get((o * s.extent + k) * s.inner + j);
      }
      out.set(o * s.inner + j, acc);
    }
  }
  return out;
}

inline NdArray reduce_max_axis(const NdArray& x, int axis) {
  const int a = detail::normalize_axis(axis, x.rank());
  const auto s = detail::split_axis(x.shape(), a);
  if (s.extent == 0) throw ShapeError("reduce_max_axis over empty axis");
  NdArray out = NdArray::zeros(detail::drop_axis(x.shape(), a), x.dtype());
  for (std::int64_t o = 0; o < s.outer; ++o) {
    for (std::int64_t j = 0; j < s.inner; ++j) {
      double best = x.get(o * s.extent * s.inner + j);
      for (std::int64_t k = 1; k < s.extent; ++k) {
        best = std::max(best, x.get((o * s.extent + k) * s.inner + j));
      }
      out.set(o * s.inner + j, best);
    }
  }
  return out;
}

// Elementwise log(exp(a) + exp(b)) with broadcasting; -inf entries act as
// adding zero probability mass.
inline NdArray log_add_exp(const NdArray& a, const NdArray& b) {
  return zip_broadcast(a, b, [](double u, double v) {
    if (std::isinf(u) && u < 0.0) return v;
    if (std::isinf(v) && v < 0.0) return u;
    const double m = std::max(u, v);
    return m + std::log(std::exp(u - m) + std::exp(v - m));
  });
}

// log(sum(exp(x))) along `axis`, with max subtraction. Finite whenever any
// entry along the axis is finite.
inline NdArray log_sum_exp(const NdArray& x, int axis) {
  detail::require_floating(x, "log_sum_exp");
  const int a = detail::normalize_axis(axis, x.rank());
  const auto s = detail::split_axis(x.shape(), a);
  if (s.extent == 0) throw ShapeError("log_sum_exp over empty axis");
  NdArray out = NdArray::zeros(detail::drop_axis(x.shape(), a), x.dtype());
  for (std::int64_t o = 0; o < s.outer; ++o) {
    for (std::int64_t j = 0; j < s.inner; ++j) {
      double m = -std::numeric_limits<double>::infinity();
      for (std::int64_t k = 0; k < s.extent; ++k) {
        m = std::max(m, x.get((o * s.extent + k) * s.inner + j));
      }
      double acc = 0.0;
      if (std::isinf(m) && m < 0) {
        out.set(o * s.inner + j, m);
        continue;
      }
      for (std::int64_t k = 0; k < s.extent; ++k) {
        acc += std::exp(x.get((o * s.extent + k) * s.inner + j) - m);
      }
      out.set(o * s.inner + j, m + std::log(acc));
    }
  }
  return out;
}

inline double reduce_sum_all(const NdArray& x) {
  double acc = 0.0;
  for (std::int64_t i = 0; i < x.size(); ++i) acc += x.get(i);
  return acc;
}

inline double reduce_mean_all(const NdArray& x) {
  return reduce_sum_all(x) / static_cast<double>(x.size());
}

}  // namespace distkit
