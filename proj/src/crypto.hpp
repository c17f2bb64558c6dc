#pragma once

#include <memory>
#include <optional>

#include "bytes.hpp"
#include "rng.hpp"

namespace lpsim::crypto {

constexpr size_t kHashSize = 32;
constexpr size_t kAeadKeySize = 32;
constexpr size_t kAeadNonceSize = 12;
constexpr size_t kAeadTagSize = 16;
constexpr size_t kSignatureSize = 64;

Bytes sha256(std::span<const uint8_t> data);

// Authenticated encryption, AES-256-GCM. Ciphertext layout: nonce || ct || tag.
Bytes aead_encrypt(const Bytes& key, std::span<const uint8_t> plaintext, Rng& rng);
std::optional<Bytes> aead_decrypt(const Bytes& key, std::span<const uint8_t> ciphertext);

// Counter-mode SHA-256 keystream; used to derive deterministic payloads.
Bytes prf_expand(std::span<const uint8_t> key_material, size_t out_len);

struct KeyPair {
  Bytes public_key;
  Bytes private_key;
};

// Signature and key-transport seam. The real provider runs ECDSA/ECIES on
// P-256; the null provider preserves the same contracts (wrong key fails,
// altered message fails, fixed signature size) without public-key math, so
// large sweeps stay fast.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual KeyPair generate_keypair(Rng& rng) = 0;
  virtual Bytes sign(const Bytes& private_key, std::span<const uint8_t> msg) = 0;
  virtual bool verify(const Bytes& public_key, std::span<const uint8_t> msg,
                      const Bytes& sig) = 0;
  // Hybrid asymmetric encryption of small payloads (session keys).
  virtual Bytes asym_encrypt(const Bytes& public_key, std::span<const uint8_t> plaintext,
                             Rng& rng) = 0;
  virtual std::optional<Bytes> asym_decrypt(const Bytes& private_key,
                                            std::span<const uint8_t> ciphertext) = 0;
};

std::unique_ptr<Provider> make_null_provider();
std::unique_ptr<Provider> make_openssl_provider();  // P-256, >=128-bit security

}  // namespace lpsim::crypto
