#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "distkit/random.hpp"
#include "distkit/special.hpp"
#include "test_util.hpp"

namespace sp = distkit::special;
using distkit::DType;
using distkit::NdArray;
using distkit::RngState;
using distkit::Shape;

namespace {
double normal_cdf(double x) { return 0.5 * sp::erfc(-x / std::sqrt(2.0)); }

std::vector<double> draw_uniforms(std::uint64_t seed, std::int64_t n) {
  RngState rng = distkit::make_rng(seed);
  return distkit::uniform(rng, Shape{n}).to_f64_vector();
}
}  // namespace

TEST(Threefry, BlockCipherBasics) {
  using distkit::rng_detail::threefry2x64;
  const std::array<std::uint64_t, 2> key{0x0123456789ABCDEFULL, 0xFEDCBA9876543210ULL};
  // Deterministic.
  EXPECT_EQ(threefry2x64(key, {0, 0}), threefry2x64(key, {0, 0}));
  // Distinct counters give distinct blocks; collect a few thousand.
  std::set<std::uint64_t> seen;
  for (std::uint64_t c = 0; c < 4096; ++c) {
    seen.insert(threefry2x64(key, {c, 0})[0]);
  }
  EXPECT_EQ(seen.size(), 4096u);
  // Avalanche: flipping one counter bit flips roughly half the output bits.
  double total = 0.0;
  int cases = 0;
  for (int bit = 0; bit < 64; bit += 7) {
    for (std::uint64_t c : {0ULL, 123456789ULL, 0xDEADBEEFULL}) {
      const auto base = threefry2x64(key, {c, 7});
      const auto flip = threefry2x64(key, {c ^ (1ULL << bit), 7});
      total += std::popcount(base[0] ^ flip[0]) + std::popcount(base[1] ^ flip[1]);
      ++cases;
    }
  }
  const double mean_flips = total / cases;  // out of 128
  EXPECT_GT(mean_flips, 56.0);
  EXPECT_LT(mean_flips, 72.0);
}

TEST(Rng, SeedingAndReproducibility) {
  const RngState a = distkit::make_rng(42);
  const RngState b = distkit::make_rng(42);
  EXPECT_EQ(a, b);
  EXPECT_NE(distkit::make_rng(43), a);
  EXPECT_NE(distkit::make_rng(0), distkit::make_rng(1));

  // Bit-identical draws from equal states.
  RngState r1 = distkit::make_rng(7);
  RngState r2 = distkit::make_rng(7);
  const NdArray u1 = distkit::uniform(r1, Shape{1000});
  const NdArray u2 = distkit::uniform(r2, Shape{1000});
  for (std::int64_t i = 0; i < 1000; ++i) EXPECT_EQ(u1.get(i), u2.get(i));
  EXPECT_EQ(r1.counter, r2.counter);

  // Consecutive calls on the same state must not repeat.
  const NdArray u3 = distkit::uniform(r1, Shape{1000});
  int equal = 0;
  for (std::int64_t i = 0; i < 1000; ++i) equal += u1.get(i) == u3.get(i);
  EXPECT_EQ(equal, 0);
}

TEST(Rng, PrefixStability) {
  // Growing the requested size must not perturb earlier elements.
  const std::vector<double> small = draw_uniforms(99, 33);
  const std::vector<double> large = draw_uniforms(99, 1000);
  for (std::size_t i = 0; i < small.size(); ++i) EXPECT_EQ(small[i], large[i]);

  RngState r1 = distkit::make_rng(5);
  RngState r2 = distkit::make_rng(5);
  const NdArray n1 = distkit::standard_normal(r1, Shape{7});
  const NdArray n2 = distkit::standard_normal(r2, Shape{20});
  for (std::int64_t i = 0; i < 7; ++i) EXPECT_EQ(n1.get(i), n2.get(i));
}

TEST(Rng, FoldInAndSplit) {
  const RngState root = distkit::make_rng(1234);
  const auto kids = distkit::split(root, 8);
  ASSERT_EQ(kids.size(), 8u);
  for (std::size_t i = 0; i < kids.size(); ++i) {
    EXPECT_EQ(kids[i].counter, 0u);
    EXPECT_NE(kids[i].key, root.key);
    for (std::size_t j = i + 1; j < kids.size(); ++j) {
      EXPECT_NE(kids[i].key, kids[j].key);
    }
    EXPECT_EQ(kids[i], distkit::fold_in(root, i));
  }
  // fold_in is insensitive to the parent's counter position but sensitive
  // to the tag.
  RngState advanced = root;
  distkit::uniform(advanced, Shape{10});
  EXPECT_EQ(distkit::fold_in(advanced, 3), distkit::fold_in(root, 3));
  EXPECT_NE(distkit::fold_in(root, 3), distkit::fold_in(root, 4));

  // Child streams look independent of the parent stream: correlation of
  // aligned uniforms is tiny.
  RngState p = distkit::make_rng(1234);
  RngState c = distkit::fold_in(p, 0);
  const auto pu = distkit::uniform(p, Shape{20000}).to_f64_vector();
  const auto cu = distkit::uniform(c, Shape{20000}).to_f64_vector();
  double corr = 0.0;
  for (std::size_t i = 0; i < pu.size(); ++i) corr += (pu[i] - 0.5) * (cu[i] - 0.5);
  corr /= pu.size() * (1.0 / 12.0);  // normalized by Var[U]
  EXPECT_LT(std::fabs(corr), 0.05);
}

TEST(Uniform, RangeAndDistribution) {
  const std::vector<double> u = draw_uniforms(2024, 100000);
  double lo = 1.0, hi = 0.0;
  for (double v : u) {
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  // With 1e5 draws the extremes should approach the ends.
  EXPECT_LT(lo, 1e-4);
  EXPECT_GT(hi, 1.0 - 1e-4);
  EXPECT_NEAR(testutil::mean_of(u), 0.5, 5.0 / std::sqrt(12.0 * u.size()));
  EXPECT_NEAR(testutil::var_of(u), 1.0 / 12.0, 0.002);
  const double ks = testutil::ks_statistic(u, [](double x) { return x; });
  EXPECT_LT(ks, 1.7 / std::sqrt(static_cast<double>(u.size())));
}

TEST(Uniform, F32DtypeAndRange) {
  RngState rng = distkit::make_rng(31337);
  const NdArray u = distkit::uniform(rng, Shape{5000}, DType::F32);
  EXPECT_EQ(u.dtype(), DType::F32);
  for (std::int64_t i = 0; i < u.size(); ++i) {
    const float v = static_cast<float>(u.get(i));
    ASSERT_GT(v, 0.0f);
    ASSERT_LT(v, 1.0f);
  }
  EXPECT_NEAR(testutil::mean_of(u.to_f64_vector()), 0.5, 0.02);
}

TEST(Normal, BoxMullerHandValue) {
  // u = (1/2, 1/4): r = sqrt(2 ln 2), angle = pi/2.
  const auto [z0, z1] = distkit::rng_detail::box_muller(0.5, 0.25);
  EXPECT_NEAR(z0, 0.0, 1e-15);
  EXPECT_NEAR(z1, 1.1774100225154747, 1e-12);
  // Radius at u2 = 0 lands entirely on the cosine half.
  const auto [w0, w1] = distkit::rng_detail::box_muller(std::exp(-0.5), 0.0);
  EXPECT_NEAR(w0, 1.0, 1e-12);
  EXPECT_NEAR(w1, 0.0, 1e-12);
}

TEST(Normal, DistributionAgainstErfOracle) {
  RngState rng = distkit::make_rng(777);
  const auto z = distkit::standard_normal(rng, Shape{60000}).to_f64_vector();
  EXPECT_NEAR(testutil::mean_of(z), 0.0, 5.0 / std::sqrt(60000.0));
  EXPECT_NEAR(testutil::var_of(z), 1.0, 0.03);
  const double ks = testutil::ks_statistic(z, normal_cdf);
  EXPECT_LT(ks, 1.7 / std::sqrt(60000.0));
  // Pairs must be independent: lag-1 correlation near zero.
  double corr = 0.0;
  for (std::size_t i = 0; i + 1 < z.size(); ++i) corr += z[i] * z[i + 1];
  corr /= z.size();
  EXPECT_LT(std::fabs(corr), 0.025);
}

TEST(Gamma, MomentsAndCdf) {
  for (double alpha : {0.5, 1.0, 3.0, 20.0}) {
    RngState rng = distkit::make_rng(4242);
    const NdArray a = NdArray::filled(Shape{20000}, DType::F64, alpha);
    const auto g = distkit::standard_gamma(rng, a).to_f64_vector();
    EXPECT_EQ(rng.counter, 1u);
    for (double v : g) ASSERT_GT(v, 0.0);
    const double se = std::sqrt(alpha / 20000.0);
    EXPECT_NEAR(testutil::mean_of(g), alpha, 5.0 * se) << "alpha=" << alpha;
    EXPECT_NEAR(testutil::var_of(g), alpha, 0.12 * alpha + 5.0 * se) << "alpha=" << alpha;
    const double ks = testutil::ks_statistic(
        g, [alpha](double x) { return sp::reg_inc_gamma(alpha, x); });
    EXPECT_LT(ks, 1.7 / std::sqrt(20000.0)) << "alpha=" << alpha;
  }
}

TEST(Gamma, PerElementStreamsAreStable) {
  // The value at a flat index depends only on (state, index), not on how
  // many other elements were drawn.
  RngState r1 = distkit::make_rng(808);
  RngState r2 = distkit::make_rng(808);
  const NdArray a5 = NdArray::filled(Shape{5}, DType::F64, 2.5);
  const NdArray a9 = NdArray::filled(Shape{9}, DType::F64, 2.5);
  const NdArray g5 = distkit::standard_gamma(r1, a5);
  const NdArray g9 = distkit::standard_gamma(r2, a9);
  for (std::int64_t i = 0; i < 5; ++i) EXPECT_EQ(g5.get(i), g9.get(i));
  // Neighbouring elements are distinct (independent streams).
  EXPECT_NE(g9.get(0), g9.get(1));
}

TEST(Poisson, MomentsAcrossBothSamplers) {
  for (double lambda : {0.5, 4.0, 10.0, 30.0, 200.0}) {
    RngState rng = distkit::make_rng(606);
    const NdArray r = NdArray::filled(Shape{20000}, DType::F64, lambda);
    const NdArray k = distkit::standard_poisson(rng, r);
    EXPECT_EQ(k.dtype(), DType::I64);
    std::vector<double> v = k.to_f64_vector();
    for (double x : v) {
      ASSERT_GE(x, 0.0);
      ASSERT_EQ(x, std::floor(x));
    }
    const double se = std::sqrt(lambda / 20000.0);
    EXPECT_NEAR(testutil::mean_of(v), lambda, 5.0 * se) << "lambda=" << lambda;
    const double var_tol = 5.0 * std::sqrt((lambda + 2.0 * lambda * lambda) / 20000.0);
    EXPECT_NEAR(testutil::var_of(v), lambda, var_tol) << "lambda=" << lambda;
  }
}

TEST(Poisson, PmfMatchesClosedForm) {
  // lambda = 4 exercises the Knuth sampler; compare the empirical pmf of
  // small counts to e^{-l} l^k / k!.
  RngState rng = distkit::make_rng(919);
  const std::int64_t n = 40000;
  const NdArray r = NdArray::filled(Shape{n}, DType::F64, 4.0);
  const NdArray k = distkit::standard_poisson(rng, r);
  std::vector<double> freq(13, 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t c = k.get_i64(i);
    if (c < 13) freq[static_cast<std::size_t>(c)] += 1.0 / n;
  }
  for (int c = 0; c < 13; ++c) {
    const double pmf = std::exp(-4.0 + c * std::log(4.0) - sp::lgamma(c + 1.0));
    const double se = std::sqrt(pmf * (1.0 - pmf) / n);
    EXPECT_NEAR(freq[static_cast<std::size_t>(c)], pmf, 5.0 * se + 1e-4) << "k=" << c;
  }
}

TEST(Poisson, ZeroRateAndDeterminism) {
  RngState rng = distkit::make_rng(11);
  const NdArray r = NdArray::f64(Shape{3}, {0.0, 2.0, 2.0});
  const NdArray k = distkit::standard_poisson(rng, r);
  EXPECT_EQ(k.get_i64(0), 0);
  EXPECT_EQ(rng.counter, 1u);
  // Distinct elements with equal rates use distinct streams.
  RngState rng2 = distkit::make_rng(11);
  const NdArray k2 = distkit::standard_poisson(rng2, r);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(k.get_i64(i), k2.get_i64(i));
}

TEST(ScalarStreamTest, MatchesUniformOp) {
  // The scalar stream and the array op consume the same block sequence.
  const RngState base = distkit::make_rng(321);
  distkit::ScalarStream s(base);
  RngState rng = base;
  const NdArray u = distkit::uniform(rng, Shape{9});
  for (std::int64_t i = 0; i < 9; ++i) {
    EXPECT_EQ(s.next_uniform(), u.get(i));
  }
}
