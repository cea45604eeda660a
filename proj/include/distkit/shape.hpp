// Statically known tensor shapes and right-aligned broadcasting.
#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "distkit/errors.hpp"

namespace distkit {

class Shape {
 public:
  Shape() = default;
  Shape(std::initializer_list<std::int64_t> dims) : dims_(dims) { check(); }
  explicit Shape(std::vector<std::int64_t> dims) : dims_(std::move(dims)) { check(); }

  static Shape scalar() { return Shape{}; }

  int rank() const { return static_cast<int>(dims_.size()); }

  std::int64_t operator[](int i) const { return dims_[static_cast<std::size_t>(i)]; }

  const std::vector<std::int64_t>& dims() const { return dims_; }

  std::int64_t num_elements() const {
    std::int64_t n = 1;
    for (auto d : dims_) n *= d;
    return n;
  }

  bool operator==(const Shape& other) const { return dims_ == other.dims_; }
  bool operator!=(const Shape& other) const { return dims_ != other.dims_; }

  // First `n` axes.
  Shape prefix(int n) const {
    return Shape(std::vector<std::int64_t>(dims_.begin(), dims_.begin() + n));
  }

  // Last `n` axes.
  Shape suffix(int n) const {
    return Shape(std::vector<std::int64_t>(dims_.end() - n, dims_.end()));
  }

  // All but the last `n` axes.
  Shape drop_suffix(int n) const { return prefix(rank() - n); }

  Shape concat(const Shape& other) const {
    std::vector<std::int64_t> d = dims_;
    d.insert(d.end(), other.dims_.begin(), other.dims_.end());
    return Shape(std::move(d));
  }

  // True when `other` equals the trailing axes of this shape.
  bool ends_with(const Shape& other) const {
    if (other.rank() > rank()) return false;
    return std::equal(other.dims_.begin(), other.dims_.end(),
                      dims_.end() - other.rank());
  }

  std::string to_string() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < dims_.size(); ++i) {
      if (i) os << ',';
      os << dims_[i];
    }
    os << ']';
    return os.str();
  }

 private:
  void check() const {
    for (auto d : dims_) {
      if (d < 0) throw ShapeError("negative extent in shape " + to_string());
    }
  }

  std::vector<std::int64_t> dims_;
};

// Right-aligned broadcast of two shapes. Aligned extents must match or one
// of them must be 1.
inline Shape broadcast_shapes(const Shape& a, const Shape& b) {
  const int rank = std::max(a.rank(), b.rank());
  std::vector<std::int64_t> out(static_cast<std::size_t>(rank), 1);
  for (int i = 0; i < rank; ++i) {
    const std::int64_t da = i < a.rank() ? a[a.rank() - 1 - i] : 1;
    const std::int64_t db = i < b.rank() ? b[b.rank() - 1 - i] : 1;
    if (da != db && da != 1 && db != 1) {
      throw IncompatibleShapesError("cannot broadcast " + a.to_string() +
                                    " with " + b.to_string());
    }
    out[static_cast<std::size_t>(rank - 1 - i)] = std::max(da, db);
  }
  return Shape(std::move(out));
}

// Maps flat indices in an output shape to flat indices in a broadcast input.
// Broadcast axes contribute stride 0; no data is ever copied.
class BroadcastIndexer {
 public:
  BroadcastIndexer(const Shape& out, const Shape& in) {
    const int rank = out.rank();
    if (in.rank() > rank) {
      throw IncompatibleShapesError("input rank exceeds output rank");
    }
    out_dims_.resize(static_cast<std::size_t>(rank));
    strides_.resize(static_cast<std::size_t>(rank));
    std::int64_t in_stride = 1;
    for (int i = rank - 1; i >= 0; --i) {
      const int j = i - (rank - in.rank());
      const std::int64_t d_out = out[i];
      const std::int64_t d_in = j >= 0 ? in[j] : 1;
      if (d_in != d_out && d_in != 1) {
        throw IncompatibleShapesError("cannot broadcast " + in.to_string() +
                                      " into " + out.to_string());
      }
      out_dims_[static_cast<std::size_t>(i)] = d_out;
      strides_[static_cast<std::size_t>(i)] = d_in == 1 ? 0 : in_stride;
      if (j >= 0) in_stride *= d_in;
    }
  }

  std::int64_t operator()(std::int64_t flat) const {
    std::int64_t in_flat = 0;
    for (int i = static_cast<int>(out_dims_.size()) - 1; i >= 0; --i) {
      const auto d = out_dims_[static_cast<std::size_t>(i)];
      in_flat += (flat % d) * strides_[static_cast<std::size_t>(i)];
      flat /= d;
    }
    return in_flat;
  }

 private:
  std::vector<std::int64_t> out_dims_;
  std::vector<std::int64_t> strides_;
};

}  // namespace distkit
