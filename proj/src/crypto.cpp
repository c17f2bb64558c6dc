#include "crypto.hpp"

#include <openssl/core_names.h>
#include <openssl/ec.h>
#include <openssl/ecdsa.h>
#include <openssl/evp.h>
#include <openssl/param_build.h>
#include <openssl/sha.h>

#include <cstring>
#include <stdexcept>

namespace lpsim::crypto {

namespace {

void concat(ByteWriter& w, std::initializer_list<std::span<const uint8_t>> parts) {
  for (auto p : parts) w.bytes(p);
}

Bytes tagged_hash(const char* tag, std::initializer_list<std::span<const uint8_t>> parts) {
  ByteWriter w;
  w.str(tag);
  concat(w, parts);
  return sha256(w.view());
}

}  // namespace

Bytes sha256(std::span<const uint8_t> data) {
  Bytes out(kHashSize);
  SHA256(data.data(), data.size(), out.data());
  return out;
}

Bytes prf_expand(std::span<const uint8_t> key_material, size_t out_len) {
  Bytes out;
  out.reserve(out_len);
  uint64_t counter = 0;
  while (out.size() < out_len) {
    ByteWriter w;
    w.bytes(key_material);
    w.u64(counter++);
    Bytes block = sha256(w.view());
    size_t take = std::min(block.size(), out_len - out.size());
    out.insert(out.end(), block.begin(), block.begin() + take);
  }
  return out;
}

Bytes aead_encrypt(const Bytes& key, std::span<const uint8_t> plaintext, Rng& rng) {
  Bytes nonce = rng.bytes(kAeadNonceSize);
  Bytes out = nonce;
  out.resize(kAeadNonceSize + plaintext.size() + kAeadTagSize);

  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  if (!ctx) throw std::runtime_error("EVP_CIPHER_CTX_new failed");
  int len = 0;
  int ok = EVP_EncryptInit_ex(ctx, EVP_aes_256_gcm(), nullptr, key.data(), nonce.data()) &&
           EVP_EncryptUpdate(ctx, out.data() + kAeadNonceSize, &len, plaintext.data(),
                             static_cast<int>(plaintext.size()));
  int ct_len = len;
  ok = ok && EVP_EncryptFinal_ex(ctx, out.data() + kAeadNonceSize + ct_len, &len);
  ct_len += len;
  ok = ok && EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_GET_TAG, kAeadTagSize,
                                 out.data() + kAeadNonceSize + ct_len);
  EVP_CIPHER_CTX_free(ctx);
  if (!ok) throw std::runtime_error("aead_encrypt failed");
  return out;
}

std::optional<Bytes> aead_decrypt(const Bytes& key, std::span<const uint8_t> ciphertext) {
  if (ciphertext.size() < kAeadNonceSize + kAeadTagSize) return std::nullopt;
  const uint8_t* nonce = ciphertext.data();
  const uint8_t* ct = ciphertext.data() + kAeadNonceSize;
  size_t ct_len = ciphertext.size() - kAeadNonceSize - kAeadTagSize;
  const uint8_t* tag = ct + ct_len;

  Bytes out(ct_len);
  EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
  if (!ctx) throw std::runtime_error("EVP_CIPHER_CTX_new failed");
  int len = 0;
  int ok = EVP_DecryptInit_ex(ctx, EVP_aes_256_gcm(), nullptr, key.data(), nonce) &&
           EVP_DecryptUpdate(ctx, out.data(), &len, ct, static_cast<int>(ct_len)) &&
           EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_SET_TAG, kAeadTagSize,
                               const_cast<uint8_t*>(tag)) &&
           EVP_DecryptFinal_ex(ctx, out.data() + len, &len) > 0;
  EVP_CIPHER_CTX_free(ctx);
  if (!ok) return std::nullopt;
  return out;
}

// ---------------------------------------------------------------------------
// Null provider: domain-separated hashes standing in for signatures and key
// transport. verify/decrypt fail on any key or message mismatch.

namespace {

class NullProvider final : public Provider {
 public:
  KeyPair generate_keypair(Rng& rng) override {
    KeyPair kp;
    kp.private_key = rng.bytes(32);
    kp.public_key = tagged_hash("null-pub", {kp.private_key});
    return kp;
  }

  Bytes sign(const Bytes& private_key, std::span<const uint8_t> msg) override {
    Bytes pub = tagged_hash("null-pub", {private_key});
    return make_sig(pub, msg);
  }

  bool verify(const Bytes& public_key, std::span<const uint8_t> msg,
              const Bytes& sig) override {
    return sig == make_sig(public_key, msg);
  }

  Bytes asym_encrypt(const Bytes& public_key, std::span<const uint8_t> plaintext,
                     Rng& rng) override {
    Bytes key = tagged_hash("null-kem", {public_key});
    return aead_encrypt(key, plaintext, rng);
  }

  std::optional<Bytes> asym_decrypt(const Bytes& private_key,
                                    std::span<const uint8_t> ciphertext) override {
    Bytes pub = tagged_hash("null-pub", {private_key});
    Bytes key = tagged_hash("null-kem", {pub});
    return aead_decrypt(key, ciphertext);
  }

 private:
  static Bytes make_sig(const Bytes& pub, std::span<const uint8_t> msg) {
    Bytes a = tagged_hash("null-sig-a", {pub, msg});
    Bytes b = tagged_hash("null-sig-b", {pub, msg});
    a.insert(a.end(), b.begin(), b.end());
    return a;  // kSignatureSize bytes, same as the raw ECDSA encoding
  }
};

// ---------------------------------------------------------------------------
// OpenSSL provider: ECDSA P-256 with raw r||s signatures (fixed 64 bytes) and
// an ECIES-style key transport (ephemeral ECDH + SHA-256 KDF + AES-256-GCM).

constexpr size_t kPointSize = 33;  // compressed P-256 point
constexpr size_t kScalarSize = 32;

struct EvpPkeyDeleter {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, EvpPkeyDeleter>;

PkeyPtr pkey_from_raw(const Bytes& public_key, const Bytes* private_key) {
  OSSL_PARAM_BLD* bld = OSSL_PARAM_BLD_new();
  OSSL_PARAM_BLD_push_utf8_string(bld, OSSL_PKEY_PARAM_GROUP_NAME, "prime256v1", 0);
  if (!public_key.empty())
    OSSL_PARAM_BLD_push_octet_string(bld, OSSL_PKEY_PARAM_PUB_KEY, public_key.data(),
                                     public_key.size());
  BIGNUM* priv_bn = nullptr;
  if (private_key) {
    priv_bn = BN_bin2bn(private_key->data(), static_cast<int>(private_key->size()), nullptr);
    OSSL_PARAM_BLD_push_BN(bld, OSSL_PKEY_PARAM_PRIV_KEY, priv_bn);
  }
  OSSL_PARAM* params = OSSL_PARAM_BLD_to_param(bld);
  EVP_PKEY_CTX* ctx = EVP_PKEY_CTX_new_from_name(nullptr, "EC", nullptr);
  EVP_PKEY* pkey = nullptr;
  int selection = private_key ? EVP_PKEY_KEYPAIR : EVP_PKEY_PUBLIC_KEY;
  if (EVP_PKEY_fromdata_init(ctx) <= 0 ||
      EVP_PKEY_fromdata(ctx, &pkey, selection, params) <= 0)
    pkey = nullptr;
  EVP_PKEY_CTX_free(ctx);
  OSSL_PARAM_free(params);
  OSSL_PARAM_BLD_free(bld);
  if (priv_bn) BN_free(priv_bn);
  if (!pkey) throw std::runtime_error("pkey_from_raw failed");
  return PkeyPtr(pkey);
}

KeyPair generate_p256() {
  EVP_PKEY* pkey = EVP_EC_gen("prime256v1");
  if (!pkey) throw std::runtime_error("EC keygen failed");
  PkeyPtr guard(pkey);

  KeyPair kp;
  size_t pub_len = 0;
  EVP_PKEY_get_octet_string_param(pkey, OSSL_PKEY_PARAM_PUB_KEY, nullptr, 0, &pub_len);
  kp.public_key.resize(pub_len);
  EVP_PKEY_get_octet_string_param(pkey, OSSL_PKEY_PARAM_PUB_KEY, kp.public_key.data(),
                                  pub_len, &pub_len);
  kp.public_key.resize(pub_len);

  BIGNUM* priv_bn = nullptr;
  EVP_PKEY_get_bn_param(pkey, OSSL_PKEY_PARAM_PRIV_KEY, &priv_bn);
  kp.private_key.resize(kScalarSize);
  BN_bn2binpad(priv_bn, kp.private_key.data(), kScalarSize);
  BN_free(priv_bn);
  return kp;
}

Bytes ecdh_derive(EVP_PKEY* own, EVP_PKEY* peer) {
  EVP_PKEY_CTX* ctx = EVP_PKEY_CTX_new(own, nullptr);
  size_t len = 0;
  if (EVP_PKEY_derive_init(ctx) <= 0 || EVP_PKEY_derive_set_peer(ctx, peer) <= 0 ||
      EVP_PKEY_derive(ctx, nullptr, &len) <= 0) {
    EVP_PKEY_CTX_free(ctx);
    throw std::runtime_error("ECDH derive failed");
  }
  Bytes secret(len);
  EVP_PKEY_derive(ctx, secret.data(), &len);
  secret.resize(len);
  EVP_PKEY_CTX_free(ctx);
  return secret;
}

class OpenSslProvider final : public Provider {
 public:
  KeyPair generate_keypair(Rng&) override { return generate_p256(); }

  Bytes sign(const Bytes& private_key, std::span<const uint8_t> msg) override {
    PkeyPtr pkey = pkey_from_raw({}, &private_key);
    EVP_MD_CTX* md = EVP_MD_CTX_new();
    size_t der_len = 0;
    Bytes der;
    int ok = EVP_DigestSignInit(md, nullptr, EVP_sha256(), nullptr, pkey.get()) &&
             EVP_DigestSign(md, nullptr, &der_len, msg.data(), msg.size());
    if (ok) {
      der.resize(der_len);
      ok = EVP_DigestSign(md, der.data(), &der_len, msg.data(), msg.size());
      der.resize(der_len);
    }
    EVP_MD_CTX_free(md);
    if (!ok) throw std::runtime_error("ECDSA sign failed");

    // DER -> fixed-width raw r||s so message sizes stay deterministic.
    const uint8_t* p = der.data();
    ECDSA_SIG* sig = d2i_ECDSA_SIG(nullptr, &p, static_cast<long>(der.size()));
    if (!sig) throw std::runtime_error("ECDSA DER parse failed");
    Bytes raw(kSignatureSize);
    BN_bn2binpad(ECDSA_SIG_get0_r(sig), raw.data(), kScalarSize);
    BN_bn2binpad(ECDSA_SIG_get0_s(sig), raw.data() + kScalarSize, kScalarSize);
    ECDSA_SIG_free(sig);
    return raw;
  }

  bool verify(const Bytes& public_key, std::span<const uint8_t> msg,
              const Bytes& sig) override {
    if (sig.size() != kSignatureSize || public_key.size() != kPointSize) return false;
    PkeyPtr pkey;
    try {
      pkey = pkey_from_raw(public_key, nullptr);
    } catch (const std::runtime_error&) {
      return false;
    }
    ECDSA_SIG* es = ECDSA_SIG_new();
    BIGNUM* r = BN_bin2bn(sig.data(), kScalarSize, nullptr);
    BIGNUM* s = BN_bin2bn(sig.data() + kScalarSize, kScalarSize, nullptr);
    ECDSA_SIG_set0(es, r, s);
    uint8_t der[80];
    uint8_t* dp = der;
    int der_len = i2d_ECDSA_SIG(es, &dp);
    ECDSA_SIG_free(es);
    if (der_len <= 0) return false;

    EVP_MD_CTX* md = EVP_MD_CTX_new();
    bool ok = EVP_DigestVerifyInit(md, nullptr, EVP_sha256(), nullptr, pkey.get()) &&
              EVP_DigestVerify(md, der, static_cast<size_t>(der_len), msg.data(),
                               msg.size()) == 1;
    EVP_MD_CTX_free(md);
    return ok;
  }

  Bytes asym_encrypt(const Bytes& public_key, std::span<const uint8_t> plaintext,
                     Rng& rng) override {
    KeyPair eph = generate_p256();
    PkeyPtr eph_pkey = pkey_from_raw(eph.public_key, &eph.private_key);
    PkeyPtr recipient = pkey_from_raw(public_key, nullptr);
    Bytes secret = ecdh_derive(eph_pkey.get(), recipient.get());
    Bytes key = tagged_hash("ecies-kdf", {secret, eph.public_key});
    Bytes out = eph.public_key;
    Bytes enc = aead_encrypt(key, plaintext, rng);
    out.insert(out.end(), enc.begin(), enc.end());
    return out;
  }

  std::optional<Bytes> asym_decrypt(const Bytes& private_key,
                                    std::span<const uint8_t> ciphertext) override {
    if (ciphertext.size() < kPointSize + kAeadNonceSize + kAeadTagSize) return std::nullopt;
    Bytes eph_pub(ciphertext.begin(), ciphertext.begin() + kPointSize);
    try {
      PkeyPtr own = pkey_from_raw({}, &private_key);
      PkeyPtr eph = pkey_from_raw(eph_pub, nullptr);
      Bytes secret = ecdh_derive(own.get(), eph.get());
      Bytes key = tagged_hash("ecies-kdf", {secret, eph_pub});
      return aead_decrypt(key, ciphertext.subspan(kPointSize));
    } catch (const std::runtime_error&) {
      return std::nullopt;
    }
  }
};

}  // namespace

std::unique_ptr<Provider> make_null_provider() { return std::make_unique<NullProvider>(); }
std::unique_ptr<Provider> make_openssl_provider() {
  return std::make_unique<OpenSslProvider>();
}

}  // namespace lpsim::crypto
