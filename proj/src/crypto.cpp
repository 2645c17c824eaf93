#include "mservice/crypto.hpp"

#include <sodium.h>

#include <cstring>

#include "mservice/error.hpp"

namespace mservice {

namespace {

void ensure_sodium() {
  static const bool ready = [] { return sodium_init() >= 0; }();
  if (!ready) throw Error(ErrorCode::StorageFailure, "libsodium failed to initialise");
}

std::string to_hex(const unsigned char* data, std::size_t n) {
  std::string out(n * 2 + 1, '\0');
  sodium_bin2hex(out.data(), out.size(), data, n);
  out.resize(n * 2);
  return out;
}

}  // namespace

SeededRandom::SeededRandom(std::uint64_t seed, std::string_view stream) {
  ensure_sodium();
  unsigned char seed_bytes[8];
  for (int i = 0; i < 8; ++i) seed_bytes[i] = static_cast<unsigned char>(seed >> (8 * i));
  crypto_generichash_state st;
  crypto_generichash_init(&st, nullptr, 0, key_.size());
  crypto_generichash_update(&st, seed_bytes, sizeof seed_bytes);
  crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(stream.data()), stream.size());
  crypto_generichash_final(&st, key_.data(), key_.size());
}

std::uint64_t SeededRandom::next_u64() {
  std::lock_guard lock(mutex_);
  unsigned char nonce[crypto_stream_chacha20_NONCEBYTES] = {};
  for (std::size_t i = 0; i < 8 && i < sizeof nonce; ++i) nonce[i] = static_cast<unsigned char>(counter_ >> (8 * i));
  ++counter_;
  unsigned char block[8];
  crypto_stream_chacha20(block, sizeof block, nonce, key_.data());
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(block[i]) << (8 * i);
  return v;
}

std::uint64_t SeededRandom::uniform(std::uint64_t bound) {
  // reject the top partial bucket so every residue is equally likely
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  for (;;) {
    std::uint64_t v = next_u64();
    if (v < limit) return v % bound;
  }
}

std::string SeededRandom::digits(std::size_t count) {
  std::string out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(static_cast<char>('0' + uniform(10)));
  return out;
}

std::string SeededRandom::hex(std::size_t bytes) {
  std::string out;
  while (out.size() < bytes * 2) {
    std::uint64_t v = next_u64();
    unsigned char raw[8];
    std::memcpy(raw, &v, sizeof raw);
    out += to_hex(raw, sizeof raw);
  }
  out.resize(bytes * 2);
  return out;
}

std::uint64_t seeded_uniform(std::uint64_t seed, std::string_view stream, std::uint64_t bound) {
  SeededRandom rng(seed, stream);
  return rng.uniform(bound);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (counter + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t fresh_seed() {
  ensure_sodium();
  std::uint64_t v;
  randombytes_buf(&v, sizeof v);
  return v;
}

std::string random_token(std::size_t bytes) {
  ensure_sodium();
  std::string raw(bytes, '\0');
  randombytes_buf(raw.data(), raw.size());
  return to_hex(reinterpret_cast<const unsigned char*>(raw.data()), raw.size());
}

std::string hash_password(std::string_view password, PwhashProfile profile) {
  ensure_sodium();
  char out[crypto_pwhash_STRBYTES];
  auto ops = profile == PwhashProfile::Interactive ? crypto_pwhash_OPSLIMIT_INTERACTIVE : crypto_pwhash_OPSLIMIT_MIN;
  auto mem = profile == PwhashProfile::Interactive ? crypto_pwhash_MEMLIMIT_INTERACTIVE : crypto_pwhash_MEMLIMIT_MIN;
  if (crypto_pwhash_str(out, password.data(), password.size(), ops, mem) != 0)
    throw Error(ErrorCode::StorageFailure, "password hashing ran out of memory");
  return out;
}

bool verify_password(std::string_view hash, std::string_view password) {
  ensure_sodium();
  std::string h(hash);
  return crypto_pwhash_str_verify(h.c_str(), password.data(), password.size()) == 0;
}

}  // namespace mservice
