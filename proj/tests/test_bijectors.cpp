// Bijector invariants checked against independent oracles: numeric Jacobians
// via finite differences, round trips, log-det antisymmetry, chain
// additivity, and the preimage-cache counter semantics.
#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "distkit/bijectors.hpp"
#include "distkit/random.hpp"
#include "test_util.hpp"

namespace distkit {
namespace {

// Scoped cache kill-switch so correctness tests exercise the real kernels.
struct CacheOff {
  CacheOff() : prev(cache_enabled()) { set_cache_enabled(false); }
  ~CacheOff() { set_cache_enabled(prev); }
  bool prev;
};

NdArray uniform_in(double lo, double hi, const Shape& shape, std::uint64_t seed) {
  RngState rng = make_rng(seed);
  NdArray u = uniform(rng, shape);
  return map_unary(u, [=](double v) { return lo + (hi - lo) * v; });
}

std::vector<double> vec(const NdArray& a) {
  std::vector<double> out(static_cast<std::size_t>(a.size()));
  for (std::int64_t i = 0; i < a.size(); ++i) out[static_cast<std::size_t>(i)] = a.get(i);
  return out;
}

void expect_round_trip(const Bijector& b, const NdArray& x, double tol = 1e-9) {
  CacheOff off;
  const NdArray y = b.forward(x);
  const NdArray back = b.inverse(y);
  ASSERT_EQ(back.shape(), x.shape()) << b.name();
  for (std::int64_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(back.get(i), x.get(i), tol) << b.name() << " at " << i;
  }
  const NdArray again = b.forward(back);
  for (std::int64_t i = 0; i < y.size(); ++i) {
    EXPECT_NEAR(again.get(i), y.get(i), tol * std::max(1.0, std::fabs(y.get(i))))
        << b.name() << " re-forward at " << i;
  }
}

void expect_ldj_antisymmetry(const Bijector& b, const NdArray& x, int rank,
                             double tol = 1e-10) {
  CacheOff off;
  const NdArray f = b.forward_log_det_jacobian(x, rank);
  const NdArray y = b.forward(x);
  const int out_rank = rank + b.inverse_min_event_rank() - b.forward_min_event_rank();
  const NdArray inv = b.inverse_log_det_jacobian(y, out_rank);
  ASSERT_EQ(f.shape(), inv.shape()) << b.name();
  for (std::int64_t i = 0; i < f.size(); ++i) {
    EXPECT_NEAR(f.get(i) + inv.get(i), 0.0, tol) << b.name() << " at " << i;
  }
}

// log|det| of the map's Jacobian at x0, by Richardson finite differences.
double fd_log_det(const std::function<std::vector<double>(const std::vector<double>&)>& f,
                  const std::vector<double>& x0) {
  return testutil::log_abs_det(testutil::fd_jacobian(f, x0));
}

// Wraps bijector.forward as a flat vector map over a given event shape.
std::function<std::vector<double>(const std::vector<double>&)> as_vector_map(
    const Bijector& b, const Shape& event) {
  return [&b, event](const std::vector<double>& v) {
    NdArray x = NdArray::f64(event, v);
    return vec(b.forward(x));
  };
}

void expect_fd_matches_fldj(const Bijector& b, const NdArray& x, int rank,
                            double rtol = 1e-5) {
  CacheOff off;
  const double exact = b.forward_log_det_jacobian(x, rank).get(0);
  const double fd = fd_log_det(as_vector_map(b, x.shape()), vec(x));
  EXPECT_NEAR(fd, exact, rtol * std::max(1.0, std::fabs(exact))) << b.name();
}

TEST(Bijectors, RoundTripThousandPoints) {
  expect_round_trip(Identity(), uniform_in(-5, 5, Shape{1000}, 1));
  expect_round_trip(Exp(), uniform_in(-4, 4, Shape{1000}, 2));
  expect_round_trip(Sigmoid(), uniform_in(-8, 8, Shape{1000}, 3));
  expect_round_trip(Softplus(), uniform_in(-6, 6, Shape{1000}, 4));
  expect_round_trip(Affine(NdArray::scalar(0.7), -1.7),
                    uniform_in(-5, 5, Shape{1000}, 5));
  expect_round_trip(Affine(NdArray::f64(Shape{3}, {1.0, -2.0, 0.5}), std::nullopt,
                           NdArray::f64(Shape{3}, {0.5, -2.0, 3.0})),
                    uniform_in(-5, 5, Shape{1000, 3}, 6));
  expect_round_trip(Affine(std::nullopt, std::nullopt, std::nullopt,
                           NdArray::f64(Shape{2, 2}, {2.0, 0.0, 1.0, 3.0})),
                    uniform_in(-5, 5, Shape{1000, 2}, 7));
  expect_round_trip(Permute({2, 0, 1}), uniform_in(-5, 5, Shape{1000, 3}, 8));
  expect_round_trip(Reshape(Shape{2, 3}, Shape{6}),
                    uniform_in(-5, 5, Shape{1000, 2, 3}, 9));
  expect_round_trip(SoftmaxCentered(), uniform_in(-4, 4, Shape{1000, 3}, 10));
  expect_round_trip(MaskedAutoregressive(make_linear_autoregressive_fn(3, 11)),
                    uniform_in(-3, 3, Shape{1000, 3}, 12));
  expect_round_trip(Invert(std::make_shared<Exp>()),
                    uniform_in(0.1, 9.0, Shape{1000}, 13));
  expect_round_trip(
      Chain({std::make_shared<Affine>(NdArray::scalar(0.3), 2.0),
             std::make_shared<Exp>()}),
      uniform_in(-3, 3, Shape{1000}, 14));
}

TEST(Bijectors, LogDetAntisymmetry) {
  expect_ldj_antisymmetry(Exp(), uniform_in(-4, 4, Shape{64}, 21), 0);
  expect_ldj_antisymmetry(Exp(), uniform_in(-4, 4, Shape{16, 4}, 22), 1);
  expect_ldj_antisymmetry(Sigmoid(), uniform_in(-8, 8, Shape{64}, 23), 0);
  expect_ldj_antisymmetry(Softplus(), uniform_in(-6, 6, Shape{64}, 24), 0);
  expect_ldj_antisymmetry(Affine(NdArray::scalar(0.7), -1.7),
                          uniform_in(-5, 5, Shape{64}, 25), 0);
  expect_ldj_antisymmetry(Affine(std::nullopt, std::nullopt,
                                 NdArray::f64(Shape{3}, {0.5, -2.0, 3.0})),
                          uniform_in(-5, 5, Shape{8, 3}, 26), 1);
  expect_ldj_antisymmetry(Affine(std::nullopt, std::nullopt, std::nullopt,
                                 NdArray::f64(Shape{2, 2}, {2.0, 0.0, 1.0, 3.0})),
                          uniform_in(-5, 5, Shape{8, 2}, 27), 1);
  expect_ldj_antisymmetry(Permute({2, 0, 1}), uniform_in(-5, 5, Shape{8, 3}, 28), 1);
  expect_ldj_antisymmetry(Reshape(Shape{2, 3}, Shape{6}),
                          uniform_in(-5, 5, Shape{8, 2, 3}, 29), 2);
  expect_ldj_antisymmetry(SoftmaxCentered(), uniform_in(-4, 4, Shape{8, 3}, 30), 1);
  expect_ldj_antisymmetry(MaskedAutoregressive(make_linear_autoregressive_fn(3, 31)),
                          uniform_in(-3, 3, Shape{8, 3}, 32), 1);
  expect_ldj_antisymmetry(Invert(std::make_shared<Exp>()),
                          uniform_in(0.1, 9.0, Shape{64}, 33), 0);
}

TEST(Bijectors, NumericJacobianOracleElementwise) {
  expect_fd_matches_fldj(Exp(), uniform_in(-2, 2, Shape{5}, 41), 1);
  expect_fd_matches_fldj(Sigmoid(), uniform_in(-3, 3, Shape{5}, 42), 1);
  expect_fd_matches_fldj(Softplus(), uniform_in(-3, 3, Shape{5}, 43), 1);
  expect_fd_matches_fldj(Identity(), uniform_in(-3, 3, Shape{5}, 44), 1);
  // Square away from the fold point; FD needs a one-signed neighborhood.
  expect_fd_matches_fldj(Square(), uniform_in(0.5, 3.0, Shape{5}, 45), 1);
}

TEST(Bijectors, NumericJacobianOracleAffine) {
  Affine scalar_scale(NdArray::scalar(0.3), -1.7);
  NdArray x4 = uniform_in(-2, 2, Shape{4}, 46);
  expect_fd_matches_fldj(scalar_scale, x4, 1);
  EXPECT_NEAR(scalar_scale.forward_log_det_jacobian(x4, 1).get(0),
              4.0 * std::log(1.7), 1e-12);

  Affine diag_scale(std::nullopt, std::nullopt,
                    NdArray::f64(Shape{3}, {0.5, -2.0, 3.0}));
  NdArray x3 = uniform_in(-2, 2, Shape{3}, 47);
  expect_fd_matches_fldj(diag_scale, x3, 1);
  EXPECT_NEAR(diag_scale.forward_log_det_jacobian(x3, 1).get(0), std::log(3.0), 1e-12);

  Affine tril_scale(std::nullopt, std::nullopt, std::nullopt,
                    NdArray::f64(Shape{2, 2}, {2.0, 0.0, 1.0, 3.0}));
  NdArray x2 = uniform_in(-2, 2, Shape{2}, 48);
  expect_fd_matches_fldj(tril_scale, x2, 1);
  EXPECT_NEAR(tril_scale.forward_log_det_jacobian(x2, 1).get(0), std::log(6.0), 1e-12);
}

TEST(Bijectors, NumericJacobianOracleVolumePreserving) {
  Permute perm({2, 0, 1});
  NdArray x3 = uniform_in(-2, 2, Shape{3}, 49);
  EXPECT_EQ(perm.forward_log_det_jacobian(x3, 1).get(0), 0.0);
  {
    CacheOff off;
    EXPECT_NEAR(fd_log_det(as_vector_map(perm, Shape{3}), vec(x3)), 0.0, 1e-5);
  }

  Reshape reshape(Shape{2, 3}, Shape{6});
  NdArray x23 = uniform_in(-2, 2, Shape{2, 3}, 50);
  EXPECT_EQ(reshape.forward_log_det_jacobian(x23, 2).get(0), 0.0);
  {
    CacheOff off;
    auto f = [&](const std::vector<double>& v) {
      return vec(reshape.forward(NdArray::f64(Shape{2, 3}, v)));
    };
    EXPECT_NEAR(fd_log_det(f, vec(x23)), 0.0, 1e-5);
  }
}

TEST(Bijectors, NumericJacobianOracleSoftmaxCentered) {
  CacheOff off;
  SoftmaxCentered sc;
  const NdArray x = NdArray::f64(Shape{3}, {0.3, -0.8, 1.1});
  // R^3 -> R^4 lands on the simplex; the first-3-coordinates chart makes the
  // Jacobian square. Its determinant equals the product of all 4 outputs.
  auto chart = [&](const std::vector<double>& v) {
    std::vector<double> y = vec(sc.forward(NdArray::f64(Shape{3}, v)));
    y.pop_back();
    return y;
  };
  const double fd = fd_log_det(chart, vec(x));
  const double exact = sc.forward_log_det_jacobian(x, 1).get(0);
  EXPECT_NEAR(fd, exact, 1e-5 * std::max(1.0, std::fabs(exact)));

  const NdArray y = sc.forward(x);
  double sum_log = 0.0;
  for (std::int64_t i = 0; i < y.size(); ++i) sum_log += std::log(y.get(i));
  EXPECT_NEAR(exact, sum_log, 1e-12);
}

TEST(Bijectors, NumericJacobianOracleMaskedAutoregressive) {
  MaskedAutoregressive maf(make_linear_autoregressive_fn(4, 51));
  expect_fd_matches_fldj(maf, uniform_in(-2, 2, Shape{4}, 52), 1);
}

TEST(Bijectors, NumericJacobianOracleChain) {
  Chain chain({std::make_shared<Affine>(NdArray::scalar(0.3), 2.0),
               std::make_shared<Exp>()});
  expect_fd_matches_fldj(chain, uniform_in(-2, 2, Shape{4}, 53), 1);
}

TEST(Bijectors, ChainAdditivityAndRankBookkeeping) {
  CacheOff off;
  auto affine = std::make_shared<Affine>(NdArray::scalar(0.3), 2.0);
  auto exp = std::make_shared<Exp>();
  Chain chain({affine, exp});
  const NdArray x = uniform_in(-2, 2, Shape{7}, 61);
  const NdArray part_sum = exp->forward_log_det_jacobian(x, 0) +
                           affine->forward_log_det_jacobian(exp->forward(x), 0);
  const NdArray whole = chain.forward_log_det_jacobian(x, 0);
  for (std::int64_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(whole.get(i), part_sum.get(i), 1e-10);
  }

  // Shape-changing composition: [3] -softmax-> [4] -reshape-> [2,2].
  auto sc = std::make_shared<SoftmaxCentered>();
  auto rs = std::make_shared<Reshape>(Shape{4}, Shape{2, 2});
  Chain shaped({rs, sc});
  EXPECT_EQ(shaped.forward_min_event_rank(), 1);
  EXPECT_EQ(shaped.inverse_min_event_rank(), 2);
  EXPECT_EQ(shaped.forward_event_shape(Shape{3}), (Shape{2, 2}));
  EXPECT_EQ(shaped.inverse_event_shape(Shape{2, 2}), (Shape{3}));

  const NdArray x3 = uniform_in(-2, 2, Shape{5, 3}, 62);
  const NdArray y = shaped.forward(x3);
  EXPECT_EQ(y.shape(), (Shape{5, 2, 2}));
  const NdArray back = shaped.inverse(y);
  for (std::int64_t i = 0; i < x3.size(); ++i) {
    EXPECT_NEAR(back.get(i), x3.get(i), 1e-9);
  }

  const NdArray whole2 = shaped.forward_log_det_jacobian(x3, 1);
  const NdArray part2 = sc->forward_log_det_jacobian(x3, 1) +
                        rs->forward_log_det_jacobian(sc->forward(x3), 2);
  ASSERT_EQ(whole2.shape(), (Shape{5}));
  for (std::int64_t i = 0; i < whole2.size(); ++i) {
    EXPECT_NEAR(whole2.get(i), part2.get(i), 1e-10);
  }
  const NdArray ildj = shaped.inverse_log_det_jacobian(y, 2);
  for (std::int64_t i = 0; i < whole2.size(); ++i) {
    EXPECT_NEAR(whole2.get(i) + ildj.get(i), 0.0, 1e-10);
  }
}

TEST(Bijectors, EmptyChainIsIdentity) {
  Chain chain({});
  EXPECT_EQ(chain.name(), "Chain()");
  EXPECT_EQ(chain.forward_min_event_rank(), 0);
  EXPECT_EQ(chain.inverse_min_event_rank(), 0);
  EXPECT_TRUE(chain.is_constant_jacobian());
  EXPECT_TRUE(chain.is_injective());
  const NdArray x = uniform_in(-2, 2, Shape{5}, 63);
  const NdArray y = chain.forward(x);
  for (std::int64_t i = 0; i < x.size(); ++i) EXPECT_EQ(y.get(i), x.get(i));
  const NdArray ldj = chain.forward_log_det_jacobian(x, 0);
  EXPECT_EQ(ldj.shape(), x.shape());
  for (std::int64_t i = 0; i < ldj.size(); ++i) EXPECT_EQ(ldj.get(i), 0.0);
}

TEST(Bijectors, ChainPreimageEnumeratesBranches) {
  CacheOff off;
  // forward(x) = 2 * x^2 + 1; preimages of y are +-sqrt((y - 1) / 2).
  Chain chain({std::make_shared<Affine>(NdArray::scalar(1.0), 2.0),
               std::make_shared<Square>()});
  EXPECT_FALSE(chain.is_injective());
  EXPECT_THROW(chain.inverse(NdArray::scalar(9.0)), NotInvertibleError);
  const PreimageSet set = chain.preimage(NdArray::scalar(9.0));
  ASSERT_EQ(set.branches.size(), 2u);
  std::vector<double> roots{set.branches[0].get(0), set.branches[1].get(0)};
  std::sort(roots.begin(), roots.end());
  EXPECT_NEAR(roots[0], -2.0, 1e-12);
  EXPECT_NEAR(roots[1], 2.0, 1e-12);
}

TEST(Bijectors, CacheServesInverseOfOwnSample) {
  set_cache_enabled(true);
  Exp exp;
  const NdArray x = uniform_in(-3, 3, Shape{32}, 71);
  EXPECT_EQ(x.provenance(), 0u);
  const NdArray y = exp.forward(x);
  EXPECT_NE(y.provenance(), 0u);
  exp.reset_kernel_counts();
  const NdArray back = exp.inverse(y);
  EXPECT_EQ(exp.inverse_kernel_count(), 0u);
  for (std::int64_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(back.get(i), x.get(i)) << "stored preimage must be bit-exact";
  }
  // And the mirror direction: a computed preimage primes forward().
  const NdArray fresh = uniform_in(0.5, 2.0, Shape{32}, 72);
  const NdArray pre = exp.inverse(fresh);
  exp.reset_kernel_counts();
  const NdArray again = exp.forward(pre);
  EXPECT_EQ(exp.forward_kernel_count(), 0u);
  for (std::int64_t i = 0; i < fresh.size(); ++i) {
    EXPECT_EQ(again.get(i), fresh.get(i));
  }
}

TEST(Bijectors, CacheDisabledStillAgrees) {
  CacheOff off;
  Exp exp;
  const NdArray x = uniform_in(-3, 3, Shape{32}, 73);
  const NdArray y = exp.forward(x);
  EXPECT_EQ(y.provenance(), 0u);
  exp.reset_kernel_counts();
  const NdArray back = exp.inverse(y);
  EXPECT_GT(exp.inverse_kernel_count(), 0u);
  for (std::int64_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(back.get(i), x.get(i), 1e-9);
  }
}

TEST(Bijectors, CacheEvictsLeastRecentlyUsed) {
  set_cache_enabled(true);
  Exp exp;  // default capacity 16
  std::vector<NdArray> ys;
  for (int i = 0; i < 17; ++i) {
    ys.push_back(exp.forward(NdArray::scalar(0.1 * (i + 1))));
  }
  exp.reset_kernel_counts();
  (void)exp.inverse(ys.back());
  EXPECT_EQ(exp.inverse_kernel_count(), 0u) << "newest entry must still be cached";
  (void)exp.inverse(ys.front());
  EXPECT_EQ(exp.inverse_kernel_count(), 1u) << "oldest entry must have been evicted";
}

TEST(Bijectors, CacheIsPerInstance) {
  set_cache_enabled(true);
  Exp exp_a;
  Exp exp_b;
  const NdArray y = exp_a.forward(NdArray::scalar(0.5));
  exp_b.reset_kernel_counts();
  (void)exp_b.inverse(y);
  EXPECT_EQ(exp_b.inverse_kernel_count(), 1u);
}

TEST(Bijectors, ChainCacheAvoidsEveryInverseKernel) {
  set_cache_enabled(true);
  auto affine = std::make_shared<Affine>(NdArray::scalar(0.3), 2.0);
  auto exp = std::make_shared<Exp>();
  Chain chain({affine, exp});
  const NdArray x = uniform_in(-2, 2, Shape{16}, 74);
  const NdArray y = chain.forward(x);
  chain.reset_kernel_counts();
  affine->reset_kernel_counts();
  exp->reset_kernel_counts();

  const NdArray back = chain.inverse(y);
  EXPECT_EQ(chain.inverse_kernel_count(), 0u);
  EXPECT_EQ(affine->inverse_kernel_count(), 0u);
  EXPECT_EQ(exp->inverse_kernel_count(), 0u);
  for (std::int64_t i = 0; i < x.size(); ++i) EXPECT_EQ(back.get(i), x.get(i));

  // The part-wise inverse walk inside ildj is served by the part caches too.
  const NdArray ildj = chain.inverse_log_det_jacobian(y, 0);
  EXPECT_EQ(affine->inverse_kernel_count(), 0u);
  EXPECT_EQ(exp->inverse_kernel_count(), 0u);
  const NdArray fldj = chain.forward_log_det_jacobian(x, 0);
  for (std::int64_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(fldj.get(i) + ildj.get(i), 0.0, 1e-10);
  }
}

TEST(Bijectors, PreimageSetsOfCoverings) {
  CacheOff off;
  AbsValue abs_value;
  Square square;
  EXPECT_FALSE(abs_value.is_injective());
  EXPECT_FALSE(square.is_injective());
  EXPECT_THROW(abs_value.inverse(NdArray::scalar(1.0)), NotInvertibleError);
  EXPECT_THROW(square.inverse(NdArray::scalar(1.0)), NotInvertibleError);

  const PreimageSet two = square.preimage(NdArray::scalar(4.0));
  ASSERT_EQ(two.branches.size(), 2u);
  std::vector<double> roots{two.branches[0].get(0), two.branches[1].get(0)};
  std::sort(roots.begin(), roots.end());
  EXPECT_DOUBLE_EQ(roots[0], -2.0);
  EXPECT_DOUBLE_EQ(roots[1], 2.0);

  // At the fold point the two branches coincide and collapse to one...
  const PreimageSet collapsed = abs_value.preimage(NdArray::scalar(0.0));
  EXPECT_EQ(collapsed.branches.size(), 1u);
  EXPECT_EQ(collapsed.branches[0].get(0), 0.0);
  // ...unless the caller asks for one entry per algebraic branch.
  const PreimageSet kept = abs_value.preimage(NdArray::scalar(0.0), false);
  EXPECT_EQ(kept.branches.size(), 2u);

  // Mixed fold/regular coordinates keep both branches under collapsing.
  const PreimageSet mixed = abs_value.preimage(NdArray::f64(Shape{2}, {0.0, 2.0}));
  EXPECT_EQ(mixed.branches.size(), 2u);

  EXPECT_THROW(square.preimage(NdArray::scalar(-1.0)), DomainError);
  EXPECT_THROW(abs_value.preimage(NdArray::scalar(-1.0)), DomainError);
  EXPECT_THROW(Invert(std::make_shared<Square>()), NotInvertibleError);
  EXPECT_THROW(Invert(std::make_shared<AbsValue>()), NotInvertibleError);

  // Per-branch volume terms at the two square roots agree.
  EXPECT_NEAR(square.forward_log_det_jacobian(NdArray::scalar(2.0), 0).get(0),
              std::log(4.0), 1e-12);
  EXPECT_NEAR(square.forward_log_det_jacobian(NdArray::scalar(-2.0), 0).get(0),
              std::log(4.0), 1e-12);
  EXPECT_NEAR(square.inverse_log_det_jacobian(NdArray::scalar(4.0), 0).get(0),
              -std::log(4.0), 1e-12);
}

TEST(Bijectors, HandAnchors) {
  CacheOff off;
  Sigmoid sigmoid;
  EXPECT_DOUBLE_EQ(sigmoid.forward(NdArray::scalar(0.0)).get(0), 0.5);
  EXPECT_NEAR(sigmoid.inverse(NdArray::scalar(0.5)).get(0), 0.0, 1e-15);
  EXPECT_NEAR(sigmoid.inverse_log_det_jacobian(NdArray::scalar(0.25), 0).get(0),
              -std::log(0.25) - std::log(0.75), 1e-12);

  SoftmaxCentered sc;
  const NdArray half = sc.forward(NdArray::f64(Shape{1}, {0.0}));
  ASSERT_EQ(half.shape(), (Shape{2}));
  EXPECT_DOUBLE_EQ(half.get(0), 0.5);
  EXPECT_DOUBLE_EQ(half.get(1), 0.5);
  EXPECT_NEAR(sc.inverse_log_det_jacobian(half, 1).get(0), 2.0 * std::log(2.0), 1e-12);
  EXPECT_NEAR(sc.forward_log_det_jacobian(NdArray::f64(Shape{1}, {0.0}), 1).get(0),
              -2.0 * std::log(2.0), 1e-12);

  Exp exp;
  const NdArray x = uniform_in(-2, 2, Shape{9}, 81);
  const NdArray fldj = exp.forward_log_det_jacobian(x, 0);
  for (std::int64_t i = 0; i < x.size(); ++i) EXPECT_EQ(fldj.get(i), x.get(i));
  EXPECT_NEAR(exp.inverse_log_det_jacobian(NdArray::scalar(3.0), 0).get(0),
              -std::log(3.0), 1e-15);

  Affine negate(std::nullopt, -1.0);
  EXPECT_DOUBLE_EQ(negate.forward(NdArray::scalar(2.5)).get(0), -2.5);
  EXPECT_EQ(negate.forward_log_det_jacobian(NdArray::scalar(2.5), 0).get(0), 0.0);

  // -log x, the exponential-to-Gumbel warp, as a chain with Invert.
  Chain neg_log({std::make_shared<Affine>(std::nullopt, -1.0),
                 std::make_shared<Invert>(std::make_shared<Exp>())});
  EXPECT_NEAR(neg_log.forward(NdArray::scalar(2.0)).get(0), -std::log(2.0), 1e-15);
  EXPECT_NEAR(neg_log.forward_log_det_jacobian(NdArray::scalar(2.0), 0).get(0),
              -std::log(2.0), 1e-12);
  EXPECT_NEAR(neg_log.inverse_log_det_jacobian(NdArray::scalar(0.7), 0).get(0),
              -0.7, 1e-12);
}

TEST(Bijectors, InvertDelegatesWholesale) {
  set_cache_enabled(true);
  auto exp = std::make_shared<Exp>();
  Invert log_b(exp);
  EXPECT_EQ(log_b.name(), "Invert(Exp)");
  EXPECT_TRUE(log_b.is_injective());

  const NdArray y = uniform_in(0.5, 4.0, Shape{16}, 91);
  exp->reset_kernel_counts();
  const NdArray x = log_b.forward(y);
  for (std::int64_t i = 0; i < y.size(); ++i) {
    EXPECT_NEAR(x.get(i), std::log(y.get(i)), 1e-12);
  }
  EXPECT_EQ(log_b.forward_kernel_count(), 0u) << "delegation must not count locally";
  EXPECT_EQ(exp->inverse_kernel_count(), 1u);

  // The inner cache now serves the round trip.
  const NdArray back = log_b.inverse(x);
  EXPECT_EQ(exp->forward_kernel_count(), 0u);
  for (std::int64_t i = 0; i < y.size(); ++i) EXPECT_EQ(back.get(i), y.get(i));

  EXPECT_NEAR(log_b.forward_log_det_jacobian(NdArray::scalar(3.0), 0).get(0),
              -std::log(3.0), 1e-15);
  EXPECT_NEAR(log_b.inverse_log_det_jacobian(NdArray::scalar(3.0), 0).get(0), 3.0,
              1e-15);

  Invert sc_inv(std::make_shared<SoftmaxCentered>());
  EXPECT_EQ(sc_inv.forward_event_shape(Shape{4}), (Shape{3}));
  EXPECT_EQ(sc_inv.inverse_event_shape(Shape{3}), (Shape{4}));

  Invert twice(std::make_shared<Invert>(std::make_shared<Exp>()));
  EXPECT_NEAR(twice.forward(NdArray::scalar(1.5)).get(0), std::exp(1.5), 1e-12);
}

TEST(Bijectors, MaskedAutoregressiveSemantics) {
  CacheOff off;
  // The iterative inverse resolves one coordinate per sweep; d sweeps suffice.
  MaskedAutoregressive maf(make_linear_autoregressive_fn(3, 101));
  const NdArray x = uniform_in(-3, 3, Shape{50, 3}, 102);
  const NdArray y = maf.forward(x);
  const NdArray back = maf.inverse(y);
  for (std::int64_t i = 0; i < x.size(); ++i) {
    EXPECT_NEAR(back.get(i), x.get(i), 1e-10);
  }

  // Same seed, same conditioner; different seed, different warp.
  MaskedAutoregressive same(make_linear_autoregressive_fn(3, 101));
  const NdArray y_same = same.forward(x);
  for (std::int64_t i = 0; i < y.size(); ++i) EXPECT_EQ(y_same.get(i), y.get(i));
  MaskedAutoregressive other(make_linear_autoregressive_fn(3, 202));
  const NdArray y_other = other.forward(x);
  double max_diff = 0.0;
  for (std::int64_t i = 0; i < y.size(); ++i) {
    max_diff = std::max(max_diff, std::fabs(y_other.get(i) - y.get(i)));
  }
  EXPECT_GT(max_diff, 1e-6);

  EXPECT_THROW(maf.forward(NdArray::scalar(1.0)), RankError);
  EXPECT_THROW(maf.forward(NdArray::f64(Shape{2}, {0.0, 0.0})), ShapeError);
}

TEST(Bijectors, MaskedAutoregressiveDependenceAudit) {
  CacheOff off;
  // shift_i = x_i reads the current coordinate: not strictly triangular.
  AutoregressiveFn leaky = [](const NdArray& x) {
    return std::make_pair(x, NdArray::zeros(x.shape(), x.dtype()));
  };
  MaskedAutoregressive audited(leaky, /*audit_dependence=*/true);
  EXPECT_THROW(audited.forward(NdArray::f64(Shape{3}, {0.1, 0.2, 0.3})),
               DependenceViolationError);

  MaskedAutoregressive unaudited(leaky, /*audit_dependence=*/false);
  EXPECT_NO_THROW(unaudited.forward(NdArray::f64(Shape{3}, {0.1, 0.2, 0.3})));

  // log_scale_i = x_i leaks the same way.
  AutoregressiveFn leaky_scale = [](const NdArray& x) {
    return std::make_pair(NdArray::zeros(x.shape(), x.dtype()), x);
  };
  MaskedAutoregressive audited_scale(leaky_scale, true);
  EXPECT_THROW(audited_scale.forward(NdArray::f64(Shape{3}, {0.1, 0.2, 0.3})),
               DependenceViolationError);

  // A genuinely triangular conditioner passes its audit.
  MaskedAutoregressive ok(make_linear_autoregressive_fn(4, 103), true);
  EXPECT_NO_THROW(ok.forward(uniform_in(-2, 2, Shape{4}, 104)));
}

TEST(Bijectors, ValidationAndRankErrors) {
  EXPECT_THROW(Affine(std::nullopt, 2.0, NdArray::f64(Shape{2}, {1.0, 2.0})),
               InvalidParameterError);
  EXPECT_THROW(Affine(std::nullopt, 0.0), InvalidParameterError);
  EXPECT_THROW(Affine(std::nullopt, std::nullopt, NdArray::f64(Shape{2}, {1.0, 0.0})),
               InvalidParameterError);
  EXPECT_THROW(Affine(std::nullopt, std::nullopt, std::nullopt,
                      NdArray::f64(Shape{2, 2}, {0.0, 0.0, 1.0, 3.0})),
               InvalidParameterError);
  EXPECT_THROW(Affine(std::nullopt, std::nullopt, std::nullopt,
                      NdArray::f64(Shape{2, 3}, {1, 0, 0, 1, 1, 0})),
               InvalidParameterError);
  Affine diag(std::nullopt, std::nullopt, NdArray::f64(Shape{2}, {1.0, 2.0}));
  EXPECT_THROW(diag.forward(NdArray::f64(Shape{3}, {1, 2, 3})), ShapeError);
  EXPECT_THROW(diag.forward(NdArray::scalar(1.0)), RankError);

  EXPECT_THROW(Permute({0, 0}), InvalidParameterError);
  EXPECT_THROW(Permute({0, 2}), InvalidParameterError);
  Permute perm({1, 0});
  EXPECT_THROW(perm.forward(NdArray::scalar(1.0)), RankError);
  EXPECT_THROW(perm.forward(NdArray::f64(Shape{3}, {1, 2, 3})), ShapeError);
  EXPECT_THROW(perm.forward_event_shape(Shape{3}), ShapeError);
  EXPECT_THROW(perm.forward_log_det_jacobian(NdArray::f64(Shape{2}, {1, 2}), 0),
               RankError);

  EXPECT_THROW(Reshape(Shape{2, 3}, Shape{5}), ShapeError);
  Reshape reshape(Shape{2, 3}, Shape{6});
  EXPECT_THROW(reshape.forward(NdArray::zeros(Shape{3, 2})), ShapeError);
  EXPECT_THROW(reshape.forward_event_shape(Shape{6}), ShapeError);
  EXPECT_THROW(reshape.inverse_event_shape(Shape{2, 3}), ShapeError);

  Exp exp;
  EXPECT_THROW(exp.forward_log_det_jacobian(NdArray::scalar(1.0), 1), RankError);
  EXPECT_THROW(exp.inverse(NdArray::scalar(-1.0)), DomainError);
  EXPECT_THROW(Sigmoid().inverse(NdArray::scalar(1.5)), DomainError);
  EXPECT_THROW(Softplus().inverse(NdArray::scalar(0.0)), DomainError);

  SoftmaxCentered sc;
  EXPECT_THROW(sc.inverse(NdArray::f64(Shape{2}, {0.9, 0.3})), DomainError);
  EXPECT_THROW(sc.inverse(NdArray::f64(Shape{2}, {1.2, -0.2})), DomainError);
  EXPECT_THROW(sc.inverse_event_shape(Shape{1}), ShapeError);
  EXPECT_EQ(sc.forward_event_shape(Shape{2, 3}), (Shape{2, 4}));

  EXPECT_THROW(Chain({nullptr}), InvalidParameterError);
  EXPECT_THROW(Invert(nullptr), InvalidParameterError);
  EXPECT_THROW(MaskedAutoregressive(nullptr), InvalidParameterError);
}

}  // namespace
}  // namespace distkit
