#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numbers>

// Counter-based random numbers: every draw is a pure function of
// (seed, stream, index), so sample i is bit-identical no matter how the index
// range is chunked across workers.

namespace advsvm::rng {

// splitmix64 finalizer; bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

constexpr std::uint64_t word_at(std::uint64_t seed, std::uint64_t stream,
                                std::uint64_t index) {
  std::uint64_t h = mix64(seed ^ 0x9e3779b97f4a7c15ULL);
  h = mix64(h + 0x9e3779b97f4a7c15ULL * stream);
  return mix64(h + 0x9e3779b97f4a7c15ULL * index);
}

// 53-bit mantissa draws; (0,1] for the log argument, [0,1) for the angle.
constexpr double uniform_open01(std::uint64_t w) {
  return static_cast<double>((w >> 11) + 1) * 0x1.0p-53;
}

constexpr double uniform_half01(std::uint64_t w) {
  return static_cast<double>(w >> 11) * 0x1.0p-53;
}

// i-th standard normal of a stream via Box-Muller on counter words 2p, 2p+1
// where p = i/2. Addressable by index, which keeps chunked generation exact.
inline double standard_normal(std::uint64_t seed, std::uint64_t stream,
                              std::uint64_t index) {
  const std::uint64_t pair = index >> 1;
  const double u1 = uniform_open01(word_at(seed, stream, 2 * pair));
  const double u2 = uniform_half01(word_at(seed, stream, 2 * pair + 1));
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  return (index & 1) ? r * std::sin(t) : r * std::cos(t);
}

inline Eigen::VectorXd normal_vector(std::uint64_t seed, std::uint64_t stream,
                                     std::uint64_t base, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    v[i] = standard_normal(seed, stream, base + static_cast<std::uint64_t>(i));
  }
  return v;
}

// Stream ids used across the library.
namespace stream {
constexpr std::uint64_t positive_class = 1;
constexpr std::uint64_t negative_class = 2;
constexpr std::uint64_t adversary_noise = 3;
}  // namespace stream

}  // namespace advsvm::rng
