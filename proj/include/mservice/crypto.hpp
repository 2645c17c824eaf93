#pragma once

#include <array>
#include <cstdint>
#include <mutex>
#include <string>
#include <string_view>

#include "mservice/config.hpp"

namespace mservice {

/// Deterministic CSPRNG: a ChaCha20 keystream keyed by BLAKE2b(seed, stream).
/// Same (seed, stream) always yields the same sequence. Thread-safe.
class SeededRandom {
 public:
  SeededRandom(std::uint64_t seed, std::string_view stream);

  std::uint64_t next_u64();
  /// Uniform in [0, bound) by rejection sampling. bound must be > 0.
  std::uint64_t uniform(std::uint64_t bound);
  /// `count` decimal digits, each uniform.
  std::string digits(std::size_t count);
  std::string hex(std::size_t bytes);

 private:
  std::array<unsigned char, 32> key_{};
  std::uint64_t counter_ = 0;
  std::mutex mutex_;
};

/// One-shot uniform draw in [0, bound) for the given seed.
std::uint64_t seeded_uniform(std::uint64_t seed, std::string_view stream, std::uint64_t bound);

/// Mixes a counter into a seed (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter) noexcept;

/// Seed drawn from the OS entropy source.
std::uint64_t fresh_seed();

/// Random token from the OS entropy source, hex encoded.
std::string random_token(std::size_t bytes = 32);

/// Salted Argon2id hash in libsodium's self-describing string format.
std::string hash_password(std::string_view password, PwhashProfile profile);
/// Constant-time verification against hash_password output.
bool verify_password(std::string_view hash, std::string_view password);

}  // namespace mservice
