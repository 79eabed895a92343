#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace airyline::io {

// Counter-based streams. A stream is a 64-bit key; draw k is a pure function
// of (key, k), so any draw can be regenerated without replaying the stream.
std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t fnv1a64(std::string_view s) noexcept;
std::uint64_t hash_draw(std::uint64_t key, std::uint64_t counter) noexcept;

// (0,1) open interval, 53-bit resolution.
double u64_to_unit(std::uint64_t x) noexcept;
// Inverse-CDF transform of a unit uniform.
double unit_to_normal(double u);

class Stream {
 public:
  Stream() = default;
  explicit Stream(std::uint64_t key, std::uint64_t counter = 0) : key_(key), counter_(counter) {}

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept { return hash_draw(key_, counter_++); }
  double uniform() noexcept { return u64_to_unit(next_u64()); }
  double normal() { return unit_to_normal(uniform()); }
  // Gamma(shape, scale=1) through the inverse regularized incomplete gamma.
  double gamma(double shape);
  // chi with k degrees of freedom (k may be non-integer): sqrt(Gamma(k/2, 2)).
  double chi(double k);

  // Child stream keyed by (this key, tag); does not advance this stream.
  Stream child(std::string_view tag, std::uint64_t index = 0) const noexcept;

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

Stream derive_stream(std::uint64_t master_seed, std::uint64_t replica_id, std::string_view purpose);

}  // namespace airyline::io
