#pragma once

// Closed-form KL divergence between same-family pairs, dispatched through a
// type-indexed registry, plus cross-entropy derived as entropy(p) + kl(p, q).
// There is no Monte Carlo fallback: unregistered pairs throw NotImplementedError.

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <typeindex>
#include <typeinfo>
#include <utility>

#include "distkit/distribution.hpp"
#include "distkit/distributions/bernoulli.hpp"
#include "distkit/distributions/beta.hpp"
#include "distkit/distributions/categorical.hpp"
#include "distkit/distributions/dirichlet.hpp"
#include "distkit/distributions/gamma.hpp"
#include "distkit/distributions/laplace.hpp"
#include "distkit/distributions/mvn.hpp"
#include "distkit/distributions/normal.hpp"
#include "distkit/errors.hpp"
#include "distkit/ndarray.hpp"
#include "distkit/shape.hpp"
#include "distkit/special.hpp"

namespace distkit {
namespace kl_detail {

// Every formula below evaluates to exactly 0.0 when the two parameter sets are
// bitwise equal: each term is either a difference of identical subexpressions
// or carries a factor that vanishes exactly.

inline NdArray normal_vs_normal(const Normal& p, const Normal& q) {
  const NdArray r = p.scale() / q.scale();
  const NdArray m = (p.loc() - q.loc()) / q.scale();
  return zip_broadcast(r, m, [](double rr, double mm) {
    return -std::log(rr) + 0.5 * (rr * rr + mm * mm) - 0.5;
  });
}

inline NdArray laplace_vs_laplace(const Laplace& p, const Laplace& q) {
  const NdArray dist = map_unary(p.loc() - q.loc(),
                                 [](double v) { return std::fabs(v); });
  const NdArray r = p.scale() / q.scale();
  const NdArray core = zip_broadcast(r, dist / p.scale(), [](double rr, double tt) {
    return -std::log(rr) + rr * std::exp(-tt) - 1.0;
  });
  return core + dist / q.scale();
}

inline NdArray gamma_vs_gamma(const Gamma& p, const Gamma& q) {
  const NdArray& a1 = p.concentration();
  const NdArray& b1 = p.rate();
  const NdArray& a2 = q.concentration();
  const NdArray& b2 = q.rate();
  const NdArray log_rate_ratio =
      zip_broadcast(b1, b2, [](double x, double y) { return std::log(x) - std::log(y); });
  return (a1 - a2) * special::digamma(a1) +
         (special::lgamma(a2) - special::lgamma(a1)) + a2 * log_rate_ratio +
         a1 * ((b2 - b1) / b1);
}

inline NdArray beta_vs_beta(const Beta& p, const Beta& q) {
  const NdArray& a1 = p.concentration1();
  const NdArray& b1 = p.concentration0();
  const NdArray& a2 = q.concentration1();
  const NdArray& b2 = q.concentration0();
  const NdArray s1 = a1 + b1;
  const NdArray log_beta1 =
      special::lgamma(a1) + special::lgamma(b1) - special::lgamma(s1);
  const NdArray log_beta2 =
      special::lgamma(a2) + special::lgamma(b2) - special::lgamma(a2 + b2);
  return (log_beta2 - log_beta1) + (a1 - a2) * special::digamma(a1) +
         (b1 - b2) * special::digamma(b1) +
         ((a2 - a1) + (b2 - b1)) * special::digamma(s1);
}

inline NdArray categorical_vs_categorical(const Categorical& p, const Categorical& q) {
  if (p.num_categories() != q.num_categories()) {
    throw ShapeError("kl_divergence: Categorical category counts differ: " +
                     std::to_string(p.num_categories()) + " vs " +
                     std::to_string(q.num_categories()));
  }
  const NdArray term = zip_broadcast(p.logits(), q.logits(), [](double a, double b) {
    const double pa = std::exp(a);
    return pa == 0.0 ? 0.0 : pa * (a - b);
  });
  return reduce_sum_axis(term, -1);
}

inline NdArray bernoulli_vs_bernoulli(const Bernoulli& p, const Bernoulli& q) {
  return zip_broadcast(p.logits(), q.logits(), [](double a, double b) {
    return special::sigmoid(a) * (special::softplus(-b) - special::softplus(-a)) +
           special::sigmoid(-a) * (special::softplus(b) - special::softplus(a));
  });
}

inline NdArray dirichlet_vs_dirichlet(const Dirichlet& p, const Dirichlet& q) {
  if (p.event_shape() != q.event_shape()) {
    throw ShapeError("kl_divergence: Dirichlet event shapes differ: " +
                     p.event_shape().to_string() + " vs " +
                     q.event_shape().to_string());
  }
  const Shape full = broadcast_shapes(p.concentration().shape(), q.concentration().shape());
  const NdArray a = broadcast_to(p.concentration(), full);
  const NdArray b = broadcast_to(q.concentration(), full);
  const NdArray a0 = reduce_sum_trailing(a, 1);
  const NdArray b0 = reduce_sum_trailing(b, 1);
  const NdArray a0_col = a0.reshape(a0.shape().concat(Shape{1}));
  const NdArray per_component =
      (special::lgamma(b) - special::lgamma(a)) +
      (a - b) * (special::digamma(a) - special::digamma(a0_col));
  return (special::lgamma(a0) - special::lgamma(b0)) +
         reduce_sum_trailing(per_component, 1);
}

inline NdArray mvn_diag_vs_mvn_diag(const MultivariateNormalDiag& p,
                                    const MultivariateNormalDiag& q) {
  if (p.event_shape() != q.event_shape()) {
    throw ShapeError("kl_divergence: MultivariateNormalDiag event shapes differ: " +
                     p.event_shape().to_string() + " vs " +
                     q.event_shape().to_string());
  }
  const NdArray r = p.scale_diag() / q.scale_diag();
  const NdArray m = (p.loc() - q.loc()) / q.scale_diag();
  const NdArray per_coordinate = zip_broadcast(r, m, [](double rr, double mm) {
    return -std::log(std::fabs(rr)) + 0.5 * (rr * rr + mm * mm) - 0.5;
  });
  return reduce_sum_trailing(per_coordinate, 1);
}

}  // namespace kl_detail

// Registry keyed on ordered (dynamic type of p, dynamic type of q). Populated
// once from the static table below; additional pairs may be registered before
// concurrent use begins, after which reads are lock-free and thread-safe.
class KlRegistry {
 public:
  using Fn = std::function<NdArray(const Distribution&, const Distribution&)>;

  static KlRegistry& instance() {
    static KlRegistry registry;
    return registry;
  }

  // Registration is directional: adding (P, Q) says nothing about (Q, P).
  void add(std::type_index p, std::type_index q, Fn fn) {
    table_[std::make_pair(p, q)] = std::move(fn);
  }

  const Fn* find(std::type_index p, std::type_index q) const {
    const auto it = table_.find(std::make_pair(p, q));
    return it == table_.end() ? nullptr : &it->second;
  }

 private:
  template <typename P, typename Q>
  void add_typed(NdArray (*fn)(const P&, const Q&)) {
    add(typeid(P), typeid(Q), [fn](const Distribution& p, const Distribution& q) {
      return fn(static_cast<const P&>(p), static_cast<const Q&>(q));
    });
  }

  KlRegistry() {
    add_typed<Normal, Normal>(&kl_detail::normal_vs_normal);
    add_typed<Laplace, Laplace>(&kl_detail::laplace_vs_laplace);
    add_typed<Gamma, Gamma>(&kl_detail::gamma_vs_gamma);
    add_typed<Beta, Beta>(&kl_detail::beta_vs_beta);
    add_typed<Categorical, Categorical>(&kl_detail::categorical_vs_categorical);
    add_typed<Bernoulli, Bernoulli>(&kl_detail::bernoulli_vs_bernoulli);
    add_typed<Dirichlet, Dirichlet>(&kl_detail::dirichlet_vs_dirichlet);
    add_typed<MultivariateNormalDiag, MultivariateNormalDiag>(
        &kl_detail::mvn_diag_vs_mvn_diag);
  }

  std::map<std::pair<std::type_index, std::type_index>, Fn> table_;
};

inline NdArray kl_divergence(const Distribution& p, const Distribution& q) {
  if (p.dtype() != q.dtype()) {
    throw DTypeError("kl_divergence: mixed dtypes " + dtype_name(p.dtype()) +
                     " and " + dtype_name(q.dtype()));
  }
  const KlRegistry::Fn* fn = KlRegistry::instance().find(typeid(p), typeid(q));
  if (fn == nullptr) {
    throw NotImplementedError("kl_divergence: no closed form registered for " +
                              p.family_name() + " vs " + q.family_name());
  }
  return (*fn)(p, q);
}

inline NdArray kl_divergence(const DistributionPtr& p, const DistributionPtr& q) {
  if (p == nullptr || q == nullptr) {
    throw InvalidParameterError("kl_divergence: null distribution");
  }
  return kl_divergence(*p, *q);
}

inline NdArray cross_entropy(const Distribution& p, const Distribution& q) {
  return p.entropy() + kl_divergence(p, q);
}

inline NdArray cross_entropy(const DistributionPtr& p, const DistributionPtr& q) {
  if (p == nullptr || q == nullptr) {
    throw InvalidParameterError("cross_entropy: null distribution");
  }
  return cross_entropy(*p, *q);
}

}  // namespace distkit
