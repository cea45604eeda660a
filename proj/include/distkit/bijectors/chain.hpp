#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "distkit/bijector.hpp"
#include "distkit/errors.hpp"
#include "distkit/ndarray.hpp"

namespace distkit {

namespace chain_detail {

// Execution order is right-to-left: parts.back() runs first under forward().
inline std::vector<BijectorPtr> checked(std::vector<BijectorPtr> parts) {
  for (const auto& p : parts) {
    if (!p) throw InvalidParameterError("chain: null bijector");
  }
  return parts;
}

inline std::string joined_name(const std::vector<BijectorPtr>& parts) {
  std::string out = "Chain(";
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ",";
    out += parts[i]->name();
  }
  return out + ")";
}

struct RankPlan {
  int forward_min = 0;  // event rank required of the chain's input
  int inverse_min = 0;  // event rank of the chain's output at that minimum
};

// Walk the parts in execution order tracking the event rank of the value in
// flight. Whenever a part needs more trailing structure than is available,
// the chain's own input requirement grows by the deficit; each part then
// shifts the rank by its own (inverse_min - forward_min).
inline RankPlan plan_ranks(const std::vector<BijectorPtr>& parts) {
  RankPlan plan;
  int current = 0;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    const Bijector& b = **it;
    if (b.forward_min_event_rank() > current) {
      plan.forward_min += b.forward_min_event_rank() - current;
      current = b.forward_min_event_rank();
    }
    current += b.inverse_min_event_rank() - b.forward_min_event_rank();
  }
  plan.inverse_min = current;
  return plan;
}

inline bool all_constant(const std::vector<BijectorPtr>& parts) {
  for (const auto& p : parts) {
    if (!p->is_constant_jacobian()) return false;
  }
  return true;
}

inline bool all_injective(const std::vector<BijectorPtr>& parts) {
  for (const auto& p : parts) {
    if (!p->is_injective()) return false;
  }
  return true;
}

}  // namespace chain_detail

// Composition y = parts[0](parts[1](...parts[n-1](x)...)); an empty chain is
// the identity. Log-det terms are evaluated part by part at the event rank
// the value has at that stage, so shape-changing parts compose correctly.
class Chain final : public Bijector {
 public:
  explicit Chain(std::vector<BijectorPtr> parts)
      : Chain(Prepared(chain_detail::checked(std::move(parts)))) {}

  const std::vector<BijectorPtr>& parts() const { return parts_; }

  NdArray forward_log_det_jacobian(const NdArray& x, int event_rank) const override {
    if (event_rank < forward_min_event_rank()) {
      throw RankError(name() + ".forward_log_det_jacobian: event rank " +
                      std::to_string(event_rank) + " below minimum " +
                      std::to_string(forward_min_event_rank()));
    }
    check_rank(x, event_rank, "forward_log_det_jacobian");
    NdArray cur = x;
    int rank = event_rank;
    NdArray total = NdArray::zeros(cur.shape().drop_suffix(rank), cur.dtype());
    for (auto it = parts_.rbegin(); it != parts_.rend(); ++it) {
      const Bijector& b = **it;
      total = total + b.forward_log_det_jacobian(cur, rank);
      rank += b.inverse_min_event_rank() - b.forward_min_event_rank();
      cur = b.forward(cur);
    }
    return total;
  }

  NdArray inverse_log_det_jacobian(const NdArray& y, int event_rank) const override {
    if (event_rank < inverse_min_event_rank()) {
      throw RankError(name() + ".inverse_log_det_jacobian: event rank " +
                      std::to_string(event_rank) + " below minimum " +
                      std::to_string(inverse_min_event_rank()));
    }
    check_rank(y, event_rank, "inverse_log_det_jacobian");
    NdArray cur = y;
    int rank = event_rank;
    NdArray total = NdArray::zeros(cur.shape().drop_suffix(rank), cur.dtype());
    for (const auto& p : parts_) {
      total = total + p->inverse_log_det_jacobian(cur, rank);
      rank += p->forward_min_event_rank() - p->inverse_min_event_rank();
      cur = p->inverse(cur);
    }
    return total;
  }

  Shape forward_event_shape(const Shape& in) const override {
    Shape s = in;
    for (auto it = parts_.rbegin(); it != parts_.rend(); ++it) {
      s = (*it)->forward_event_shape(s);
    }
    return s;
  }

  Shape inverse_event_shape(const Shape& out) const override {
    Shape s = out;
    for (const auto& p : parts_) s = p->inverse_event_shape(s);
    return s;
  }

 protected:
  NdArray forward_impl(const NdArray& x) const override {
    NdArray cur = x;
    for (auto it = parts_.rbegin(); it != parts_.rend(); ++it) {
      cur = (*it)->forward(cur);
    }
    return cur;
  }

  NdArray inverse_impl(const NdArray& y) const override {
    NdArray cur = y;
    for (const auto& p : parts_) cur = p->inverse(cur);
    return cur;
  }

  PreimageSet preimage_impl(const NdArray& y) const override {
    std::vector<NdArray> branches{y};
    for (const auto& p : parts_) {
      std::vector<NdArray> next;
      for (const auto& v : branches) {
        PreimageSet s = p->preimage(v, /*collapse_duplicates=*/false);
        for (auto& b : s.branches) next.push_back(std::move(b));
      }
      branches = std::move(next);
    }
    return PreimageSet{std::move(branches)};
  }

  NdArray forward_ldj_impl(const NdArray& x) const override {
    return Chain::forward_log_det_jacobian(x, forward_min_event_rank());
  }

  NdArray inverse_ldj_impl(const NdArray& y) const override {
    return Chain::inverse_log_det_jacobian(y, inverse_min_event_rank());
  }

 private:
  struct Prepared {
    std::vector<BijectorPtr> parts;
    chain_detail::RankPlan plan;
    bool constant;
    bool injective;
    std::string name;

    explicit Prepared(std::vector<BijectorPtr> p)
        : parts(std::move(p)),
          plan(chain_detail::plan_ranks(parts)),
          constant(chain_detail::all_constant(parts)),
          injective(chain_detail::all_injective(parts)),
          name(chain_detail::joined_name(parts)) {}
  };

  explicit Chain(Prepared prep)
      : Bijector(std::move(prep.name), prep.plan.forward_min, prep.plan.inverse_min,
                 prep.constant, prep.injective),
        parts_(std::move(prep.parts)) {}

  std::vector<BijectorPtr> parts_;
};

// Runs another bijector backwards; only defined for injective maps.
class Invert final : public Bijector {
 public:
  explicit Invert(BijectorPtr inner) : Invert(required(std::move(inner)), 0) {}

  const BijectorPtr& inner() const { return inner_; }

  NdArray forward(const NdArray& x) const override { return inner_->inverse(x); }

  NdArray inverse(const NdArray& y) const override { return inner_->forward(y); }

  PreimageSet preimage(const NdArray& y, bool /*collapse_duplicates*/ = true) const override {
    return PreimageSet{{inner_->forward(y)}};
  }

  NdArray forward_log_det_jacobian(const NdArray& x, int event_rank) const override {
    return inner_->inverse_log_det_jacobian(x, event_rank);
  }

  NdArray inverse_log_det_jacobian(const NdArray& y, int event_rank) const override {
    return inner_->forward_log_det_jacobian(y, event_rank);
  }

  Shape forward_event_shape(const Shape& in) const override {
    return inner_->inverse_event_shape(in);
  }

  Shape inverse_event_shape(const Shape& out) const override {
    return inner_->forward_event_shape(out);
  }

 protected:
  // The public entry points above delegate wholesale, so the inner bijector's
  // caches and kernel counters do all the work; these hooks are unreachable.
  NdArray forward_impl(const NdArray& x) const override { return inner_->inverse(x); }

  NdArray inverse_impl(const NdArray& y) const override { return inner_->forward(y); }

 private:
  Invert(BijectorPtr inner, int)
      : Bijector("Invert(" + inner->name() + ")",
                 inner->inverse_min_event_rank(), inner->forward_min_event_rank(),
                 inner->is_constant_jacobian(), /*injective=*/true),
        inner_(std::move(inner)) {}

  static BijectorPtr required(BijectorPtr inner) {
    if (!inner) throw InvalidParameterError("invert: null bijector");
    if (!inner->is_injective()) {
      throw NotInvertibleError("invert: " + inner->name() +
                               " is not injective; its preimages are sets, not points");
    }
    return inner;
  }

  BijectorPtr inner_;
};

}  // namespace distkit
