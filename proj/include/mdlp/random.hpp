#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace mdlp {

// splitmix64 finalizer; used to derive independent substream seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept;

// Single-owner random stream. Substreams derive from the construction seed
// only, so child(k) does not depend on how much of this stream was consumed.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  // Inverse-CDF draw; zero-probability entries are never returned.
  std::size_t categorical(std::span<const double> probs);
  RandomStream child(std::uint64_t index) const { return RandomStream(derive_seed(seed_, index)); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace mdlp
