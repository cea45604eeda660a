// Counter-based pseudo-randomness built on the Threefry-2x64 block cipher
// (20 rounds). Streams are pure functions of (key, counter), so every draw
// is reproducible, splittable, and independent of global state.
//
// State model:
//   * make_rng(seed)       -> fresh state, key derived by splitmix64.
//   * fold_in(state, tag)  -> statistically distinct child, counter reset.
//   * split(state, n)      -> n children, fold_in over 0..n-1.
//   * drawing ops          -> advance the passed state's counter in place by
//                             one block per 128 bits consumed.
//
// Rejection samplers (gamma, poisson) fold the flat element index into a
// per-call child state, so each element owns an unbounded stream and the
// parent state advances by exactly one block no matter how many proposals
// were rejected. Growing a draw's element count never perturbs the values
// at earlier indices.
#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "distkit/errors.hpp"
#include "distkit/ndarray.hpp"
#include "distkit/special.hpp"

namespace distkit {

struct RngState {
  std::array<std::uint64_t, 2> key{0, 0};
  std::uint64_t counter = 0;

  bool operator==(const RngState&) const = default;
};

namespace rng_detail {

inline constexpr std::uint64_t kDrawTag = 0x243F6A8885A308D3ULL;
inline constexpr std::uint64_t kFoldTag = 0x452821E638D01377ULL;
// Second-word tag for per-call rejection-sampler bases, so they can never
// alias a user-visible fold_in child.
inline constexpr std::uint64_t kRejectTag = 0x082EFA98EC4E6C89ULL;

inline std::array<std::uint64_t, 2> threefry2x64(
    std::array<std::uint64_t, 2> key, std::array<std::uint64_t, 2> ctr) {
  constexpr std::uint64_t kParity = 0x1BD11BDAA9FC1A22ULL;
  constexpr int kRot[8] = {16, 42, 12, 31, 16, 32, 24, 21};
  const std::uint64_t ks[3] = {key[0], key[1], kParity ^ key[0] ^ key[1]};
  std::uint64_t x0 = ctr[0] + ks[0];
  std::uint64_t x1 = ctr[1] + ks[1];
  for (int r = 0; r < 20; ++r) {
    x0 += x1;
    x1 = std::rotl(x1, kRot[r % 8]);
    x1 ^= x0;
    if (r % 4 == 3) {
      const std::uint64_t s = static_cast<std::uint64_t>(r / 4 + 1);
      x0 += ks[s % 3];
      x1 += ks[(s + 1) % 3] + s;
    }
  }
  return {x0, x1};
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// One 128-bit cipher block; advances the counter.
inline std::array<std::uint64_t, 2> next_block(RngState& rng) {
  const auto out = threefry2x64(rng.key, {rng.counter, kDrawTag});
  rng.counter += 1;
  return out;
}

// Maps a u64 to the open interval (0, 1): (k + 0.5) * 2^-53 over the top 53
// bits, so neither endpoint is ever produced.
inline double to_unit_f64(std::uint64_t r) {
  return (static_cast<double>(r >> 11) + 0.5) * 0x1.0p-53;
}

inline float to_unit_f32(std::uint64_t r) {
  return (static_cast<float>(r >> 40) + 0.5f) * 0x1.0p-24f;
}

inline constexpr double kTwoPi = 6.28318530717958647692;

// Box-Muller: two unit uniforms -> two independent standard normals.
inline std::pair<double, double> box_muller(double u1, double u2) {
  const double r = std::sqrt(-2.0 * std::log(u1));
  return {r * std::cos(kTwoPi * u2), r * std::sin(kTwoPi * u2)};
}

}  // namespace rng_detail

inline RngState make_rng(std::uint64_t seed) {
  RngState rng;
  std::uint64_t s = seed;
  rng.key[0] = rng_detail::splitmix64(s);
  rng.key[1] = rng_detail::splitmix64(s);
  rng.counter = 0;
  return rng;
}

// Child stream for `tag`; children with distinct tags are disjoint, and all
// of them are disjoint from the parent's own draw stream.
inline RngState fold_in(const RngState& rng, std::uint64_t tag) {
  RngState child;
  child.key = rng_detail::threefry2x64(rng.key, {tag, rng_detail::kFoldTag});
  child.counter = 0;
  return child;
}

inline std::vector<RngState> split(const RngState& rng, std::size_t n) {
  std::vector<RngState> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(fold_in(rng, static_cast<std::uint64_t>(i)));
  }
  return out;
}

// Sequential scalar stream over its own state, used by rejection samplers.
// Hands out one u64 per call, two per cipher block.
class ScalarStream {
 public:
  explicit ScalarStream(const RngState& rng) : state_(rng) {}

  std::uint64_t next_u64() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const auto block = rng_detail::next_block(state_);
    spare_ = block[1];
    have_spare_ = true;
    return block[0];
  }

  double next_uniform() { return rng_detail::to_unit_f64(next_u64()); }

  double next_normal() {
    if (have_normal_) {
      have_normal_ = false;
      return spare_normal_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const auto [z0, z1] = rng_detail::box_muller(u1, u2);
    spare_normal_ = z1;
    have_normal_ = true;
    return z0;
  }

 private:
  RngState state_;
  std::uint64_t spare_ = 0;
  bool have_spare_ = false;
  double spare_normal_ = 0.0;
  bool have_normal_ = false;
};

// Unit-open-interval uniforms. One u64 of entropy per element regardless of
// dtype; f32 output keeps 24 bits.
inline NdArray uniform(RngState& rng, const Shape& shape, DType dtype = DType::F64) {
  if (!is_floating(dtype)) throw DTypeError("uniform: dtype must be floating");
  const std::int64_t n = shape.num_elements();
  NdArray out = NdArray::zeros(shape, dtype);
  std::array<std::uint64_t, 2> block{};
  for (std::int64_t i = 0; i < n; ++i) {
    if (i % 2 == 0) block = rng_detail::next_block(rng);
    const std::uint64_t r = block[static_cast<std::size_t>(i % 2)];
    if (dtype == DType::F32) {
      out.set(i, rng_detail::to_unit_f32(r));
    } else {
      out.set(i, rng_detail::to_unit_f64(r));
    }
  }
  return out;
}

// Standard normals via Box-Muller over consecutive uniforms. Element 2j and
// 2j+1 form a pair; an odd final element computes a pair and keeps the cosine
// half. Always computed in f64, then stored in `dtype`.
inline NdArray standard_normal(RngState& rng, const Shape& shape, DType dtype = DType::F64) {
  if (!is_floating(dtype)) throw DTypeError("standard_normal: dtype must be floating");
  const std::int64_t n = shape.num_elements();
  NdArray out = NdArray::zeros(shape, dtype);
  std::array<std::uint64_t, 2> block{};
  auto draw_uniform = [&](std::int64_t j) {
    if (j % 2 == 0) block = rng_detail::next_block(rng);
    return rng_detail::to_unit_f64(block[static_cast<std::size_t>(j % 2)]);
  };
  std::int64_t j = 0;
  for (std::int64_t i = 0; i < n; i += 2) {
    const double u1 = draw_uniform(j++);
    const double u2 = draw_uniform(j++);
    const auto [z0, z1] = rng_detail::box_muller(u1, u2);
    out.set(i, z0);
    if (i + 1 < n) out.set(i + 1, z1);
  }
  return out;
}

namespace rng_detail {

// Marsaglia-Tsang squeeze sampler for Gamma(alpha, 1), alpha >= 1.
inline double gamma_ge1(ScalarStream& s, double alpha) {
  const double d = alpha - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = s.next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = s.next_uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

inline double gamma_one(ScalarStream& s, double alpha) {
  if (alpha < 1.0) {
    // Boost: Gamma(a) = Gamma(a+1) * U^{1/a}
    const double u = s.next_uniform();
    return gamma_ge1(s, alpha + 1.0) * std::pow(u, 1.0 / alpha);
  }
  return gamma_ge1(s, alpha);
}

// Knuth's product-of-uniforms for small rates.
inline std::int64_t poisson_knuth(ScalarStream& s, double lambda) {
  const double limit = std::exp(-lambda);
  std::int64_t k = 0;
  double p = 1.0;
  do {
    k += 1;
    p *= s.next_uniform();
  } while (p > limit);
  return k - 1;
}

// PTRS transformed-rejection sampler (Hormann) for lambda > 10.
inline std::int64_t poisson_ptrs(ScalarStream& s, double lambda) {
  const double log_lambda = std::log(lambda);
  const double b = 0.931 + 2.53 * std::sqrt(lambda);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = s.next_uniform() - 0.5;
    const double v = s.next_uniform();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
    const double rhs = kf * log_lambda - lambda - special::lgamma(kf + 1.0);
    if (lhs <= rhs) return static_cast<std::int64_t>(kf);
  }
}

inline std::int64_t poisson_one(ScalarStream& s, double lambda) {
  if (lambda <= 0.0) return 0;
  if (lambda <= 10.0) return poisson_knuth(s, lambda);
  return poisson_ptrs(s, lambda);
}

inline RngState rejection_base(RngState& rng) {
  RngState base;
  base.key = threefry2x64(rng.key, {rng.counter, kRejectTag});
  base.counter = 0;
  rng.counter += 1;
  return base;
}

}  // namespace rng_detail

// Gamma(alpha_i, 1) per element. Each element folds its flat index into a
// per-call child state; the parent advances one block total.
inline NdArray standard_gamma(RngState& rng, const NdArray& alpha, DType dtype = DType::F64) {
  if (!is_floating(dtype)) throw DTypeError("standard_gamma: dtype must be floating");
  const RngState base = rng_detail::rejection_base(rng);
  NdArray out = NdArray::zeros(alpha.shape(), dtype);
  for (std::int64_t i = 0; i < alpha.size(); ++i) {
    ScalarStream s(fold_in(base, static_cast<std::uint64_t>(i)));
    out.set(i, rng_detail::gamma_one(s, alpha.get(i)));
  }
  return out;
}

// Poisson(rate_i) per element, emitted as I64 counts.
inline NdArray standard_poisson(RngState& rng, const NdArray& rate) {
  const RngState base = rng_detail::rejection_base(rng);
  NdArray out = NdArray::zeros(rate.shape(), DType::I64);
  for (std::int64_t i = 0; i < rate.size(); ++i) {
    ScalarStream s(fold_in(base, static_cast<std::uint64_t>(i)));
    out.set_i64(i, rng_detail::poisson_one(s, rate.get(i)));
  }
  return out;
}

}  // namespace distkit
