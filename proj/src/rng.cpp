#include "airyline/rng.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

namespace airyline::io {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

// SplitMix64 output for position `counter` of the sequence seeded by `key`.
std::uint64_t hash_draw(std::uint64_t key, std::uint64_t counter) noexcept {
  return mix64(key + (counter + 1) * kGolden);
}

double u64_to_unit(std::uint64_t x) noexcept {
  return (double(x >> 11) + 0.5) * 0x1.0p-53;
}

double unit_to_normal(double u) {
  // Phi^{-1}(u) = -sqrt(2) erfc^{-1}(2u)
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
}

double Stream::gamma(double shape) {
  return boost::math::gamma_p_inv(shape, uniform());
}

double Stream::chi(double k) {
  if (k <= 0.0) return 0.0;
  return std::sqrt(2.0 * gamma(0.5 * k));
}

Stream Stream::child(std::string_view tag, std::uint64_t index) const noexcept {
  return Stream(mix64(mix64(key_ ^ fnv1a64(tag)) + index * kGolden));
}

Stream derive_stream(std::uint64_t master_seed, std::uint64_t replica_id, std::string_view purpose) {
  std::uint64_t k = mix64(master_seed ^ 0x6A09E667F3BCC909ULL);
  k = mix64(k + (replica_id + 1) * kGolden);
  k = mix64(k ^ fnv1a64(purpose));
  return Stream(k);
}

}  // namespace airyline::io
