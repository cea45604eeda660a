// Bijector contract: differentiable transforms with tracked volume change.
//
// forward maps x -> F(x); inverse undoes it; the two log-det-jacobians
// differ only in sign at corresponding points. Values produced by forward /
// inverse carry a provenance token; each bijector instance keeps a small
// LRU cache keyed by those tokens so inverting a value it itself produced
// is a lookup instead of a kernel run.
#pragma once

#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "distkit/errors.hpp"
#include "distkit/ndarray.hpp"
#include "distkit/shape.hpp"

namespace distkit {

// The full set of preimages of a point under a non-injective map.
struct PreimageSet {
  std::vector<NdArray> branches;
};

namespace bij_detail {

// Process-wide switch for preimage caching. Initialized from the
// DISTKIT_CACHE environment variable ("off" disables) and adjustable at
// runtime.
inline std::atomic<bool>& cache_flag() {
  static std::atomic<bool> flag([] {
    const char* env = std::getenv("DISTKIT_CACHE");
    return !(env != nullptr && std::string(env) == "off");
  }());
  return flag;
}

inline std::uint64_t next_token() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}

// Bounded map from provenance token to an (input, output) pair, evicting
// the least recently used entry once full.
class LruPairCache {
 public:
  explicit LruPairCache(std::size_t capacity) : capacity_(capacity) {}

  void put(std::uint64_t token, NdArray in, NdArray out) {
    if (capacity_ == 0) return;
    auto it = entries_.find(token);
    if (it != entries_.end()) {
      order_.erase(it->second.where);
      entries_.erase(it);
    }
    order_.push_front(token);
    entries_.emplace(token, Entry{std::move(in), std::move(out), order_.begin()});
    if (entries_.size() > capacity_) {
      const std::uint64_t oldest = order_.back();
      order_.pop_back();
      entries_.erase(oldest);
    }
  }

  // Returns the stored pair and refreshes recency.
  std::optional<std::pair<NdArray, NdArray>> get(std::uint64_t token) {
    auto it = entries_.find(token);
    if (it == entries_.end()) return std::nullopt;
    order_.erase(it->second.where);
    order_.push_front(token);
    it->second.where = order_.begin();
    return std::make_pair(it->second.in, it->second.out);
  }

  std::size_t size() const { return entries_.size(); }

 private:
  struct Entry {
    NdArray in;
    NdArray out;
    std::list<std::uint64_t>::iterator where;
  };
  std::size_t capacity_;
  std::list<std::uint64_t> order_;
  std::unordered_map<std::uint64_t, Entry> entries_;
};

}  // namespace bij_detail

inline bool cache_enabled() { return bij_detail::cache_flag().load(); }
inline void set_cache_enabled(bool on) { bij_detail::cache_flag().store(on); }

class Bijector {
 public:
  Bijector(std::string name, int forward_min_event_rank, int inverse_min_event_rank,
           bool constant_jacobian, bool injective, std::size_t cache_capacity = 16)
      : name_(std::move(name)),
        forward_min_event_rank_(forward_min_event_rank),
        inverse_min_event_rank_(inverse_min_event_rank),
        is_constant_jacobian_(constant_jacobian),
        is_injective_(injective),
        forward_cache_(cache_capacity),
        inverse_cache_(cache_capacity) {}

  virtual ~Bijector() = default;

  const std::string& name() const { return name_; }
  int forward_min_event_rank() const { return forward_min_event_rank_; }
  int inverse_min_event_rank() const { return inverse_min_event_rank_; }
  bool is_constant_jacobian() const { return is_constant_jacobian_; }
  bool is_injective() const { return is_injective_; }

  // ---- Mapping ----

  virtual NdArray forward(const NdArray& x) const {
    check_rank(x, forward_min_event_rank_, "forward");
    if (cache_enabled() && x.provenance() != 0) {
      std::lock_guard<std::mutex> lock(mutex_);
      if (auto hit = inverse_cache_.get(x.provenance())) return hit->second;
    }
    ++forward_kernels_;
    NdArray y = forward_impl(x);
    if (cache_enabled()) {
      // Values produced by an inner bijector keep their token so every
      // level of a composite transform can recognize them later.
      if (y.provenance() == 0) y.set_provenance(bij_detail::next_token());
      std::lock_guard<std::mutex> lock(mutex_);
      forward_cache_.put(y.provenance(), x, y);
    }
    return y;
  }

  // Unique preimage; only defined for injective bijectors. Returns the
  // stored input bit-exactly when y was produced by this instance.
  virtual NdArray inverse(const NdArray& y) const {
    if (!is_injective_) {
      throw NotInvertibleError(name_ + ".inverse: map is a smooth covering; "
                               "use preimage()");
    }
    check_rank(y, inverse_min_event_rank_, "inverse");
    if (cache_enabled() && y.provenance() != 0) {
      std::lock_guard<std::mutex> lock(mutex_);
      if (auto hit = forward_cache_.get(y.provenance())) return hit->first;
    }
    ++inverse_kernels_;
    NdArray x = inverse_impl(y);
    if (cache_enabled()) {
      if (x.provenance() == 0) x.set_provenance(bij_detail::next_token());
      std::lock_guard<std::mutex> lock(mutex_);
      inverse_cache_.put(x.provenance(), x, y);
    }
    return x;
  }

  // Set-valued inverse. Injective maps yield a single branch; smooth
  // coverings enumerate every preimage (caching is not applied). With
  // collapse_duplicates, branches that coincide everywhere (e.g. the two
  // halves of AbsValue at y = 0) are reported once; density code passes
  // false to keep one entry per algebraic branch.
  virtual PreimageSet preimage(const NdArray& y, bool collapse_duplicates = true) const {
    if (is_injective_) return PreimageSet{{inverse(y)}};
    check_rank(y, inverse_min_event_rank_, "preimage");
    PreimageSet set = preimage_impl(y);
    if (collapse_duplicates) {
      std::vector<NdArray> kept;
      for (NdArray& b : set.branches) {
        bool dup = false;
        for (const NdArray& k : kept) {
          if (k.shape() == b.shape()) {
            bool same = true;
            for (std::int64_t i = 0; i < k.size(); ++i) {
              if (k.get(i) != b.get(i)) {
                same = false;
                break;
              }
            }
            if (same) {
              dup = true;
              break;
            }
          }
        }
        if (!dup) kept.push_back(std::move(b));
      }
      set.branches = std::move(kept);
    }
    return set;
  }

  // ---- Volume change ----

  // log|det DF| reduced over the trailing `event_rank` axes of x.
  virtual NdArray forward_log_det_jacobian(const NdArray& x, int event_rank) const {
    if (event_rank < forward_min_event_rank_) {
      throw RankError(name_ + ".forward_log_det_jacobian: event rank " +
                      std::to_string(event_rank) + " below minimum " +
                      std::to_string(forward_min_event_rank_));
    }
    check_rank(x, event_rank, "forward_log_det_jacobian");
    NdArray core = forward_ldj_impl(x);
    return reduce_sum_trailing(core, event_rank - forward_min_event_rank_);
  }

  // log|det DF^-1| reduced over the trailing `event_rank` axes of y.
  virtual NdArray inverse_log_det_jacobian(const NdArray& y, int event_rank) const {
    if (event_rank < inverse_min_event_rank_) {
      throw RankError(name_ + ".inverse_log_det_jacobian: event rank " +
                      std::to_string(event_rank) + " below minimum " +
                      std::to_string(inverse_min_event_rank_));
    }
    check_rank(y, event_rank, "inverse_log_det_jacobian");
    NdArray core = inverse_ldj_impl(y);
    return reduce_sum_trailing(core, event_rank - inverse_min_event_rank_);
  }

  // ---- Event-shape plumbing ----

  virtual Shape forward_event_shape(const Shape& in) const { return in; }
  virtual Shape inverse_event_shape(const Shape& out) const { return out; }

  // ---- Instrumentation ----

  std::uint64_t forward_kernel_count() const { return forward_kernels_.load(); }
  std::uint64_t inverse_kernel_count() const { return inverse_kernels_.load(); }
  void reset_kernel_counts() const {
    forward_kernels_.store(0);
    inverse_kernels_.store(0);
  }

 protected:
  virtual NdArray forward_impl(const NdArray& x) const = 0;

  virtual NdArray inverse_impl(const NdArray& /*y*/) const {
    throw NotImplementedError(name_ + ": inverse is not implemented");
  }

  virtual PreimageSet preimage_impl(const NdArray& /*y*/) const {
    throw NotImplementedError(name_ + ": preimage is not implemented");
  }

  // Per-minimal-event log-det terms; the public entry points reduce any
  // extra trailing axes. A subclass must override at least one direction;
  // the default derives each from the other through the companion point.
  virtual NdArray forward_ldj_impl(const NdArray& x) const {
    NdArray neg = inverse_ldj_impl(forward(x));
    return map_unary(neg, [](double v) { return -v; });
  }

  virtual NdArray inverse_ldj_impl(const NdArray& y) const {
    NdArray neg = forward_ldj_impl(inverse(y));
    return map_unary(neg, [](double v) { return -v; });
  }

  void check_rank(const NdArray& v, int need, const char* op) const {
    if (v.rank() < need) {
      throw RankError(name_ + "." + op + ": value rank " +
                      std::to_string(v.rank()) + " below event rank " +
                      std::to_string(need));
    }
  }

 private:
  std::string name_;
  int forward_min_event_rank_;
  int inverse_min_event_rank_;
  bool is_constant_jacobian_;
  bool is_injective_;
  mutable std::atomic<std::uint64_t> forward_kernels_{0};
  mutable std::atomic<std::uint64_t> inverse_kernels_{0};
  mutable std::mutex mutex_;
  mutable bij_detail::LruPairCache forward_cache_;  // token(y) -> (x, y)
  mutable bij_detail::LruPairCache inverse_cache_;  // token(x) -> (x, y)
};

using BijectorPtr = std::shared_ptr<const Bijector>;

}  // namespace distkit
