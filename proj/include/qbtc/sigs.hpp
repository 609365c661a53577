#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qbtc/bytes.hpp"
#include "qbtc/rng.hpp"
#include "qbtc/sha256.hpp"

namespace qbtc::sigs {

inline constexpr const char* kSchemeId = "lamport-sha256";

// Lamport-style one-time signatures over the first n bits of the SHA-256
// message hash: 2n secret preimages, the public key is the table of their
// hashes. One-way functions are all these keys ever need since the protocol
// signs exactly one message per key and then discards it.
struct Signature {
    Bytes bytes; // n preimages of 32 bytes each
    std::string scheme_id = kSchemeId;

    std::string to_hex() const { return qbtc::to_hex(bytes); }
    static Signature from_hex(std::string_view hex) { return Signature{from_hex_bytes(hex)}; }

  private:
    static Bytes from_hex_bytes(std::string_view hex) { return qbtc::from_hex(hex); }
};

struct PublicKey {
    std::vector<Hash256> hashes; // 2n entries: (bit 0, bit 1) per digest bit
    int digest_bits = 0;
    std::string scheme_id = kSchemeId;

    Bytes serialize() const;
    static PublicKey deserialize(std::span<const uint8_t> data);
    std::string to_hex() const { return qbtc::to_hex(serialize()); }
};

struct KeyPair;

// The secret half. Never serialized by the ledger or protocol modules; the
// one-time guard is shared mutable state so copies of the handle still
// enforce single use.
class PrivateKey {
  public:
    int digest_bits() const { return digest_bits_; }

  private:
    friend struct KeyPair;
    friend KeyPair keygen(int, Rng&);
    friend Signature sign(const PrivateKey&, std::span<const uint8_t>);

    std::vector<std::array<uint8_t, 32>> preimages_;
    int digest_bits_ = 0;
    std::shared_ptr<std::optional<Hash256>> signed_message_ = nullptr;
};

struct KeyPair {
    PrivateKey private_key;
    PublicKey public_key;
};

// security_param >= 4; the digest covers security_param bits of the message
// hash and the private key holds 2 * security_param preimages.
KeyPair keygen(int security_param, Rng& rng);

// Deterministic given the key. Repeating the same message returns the same
// signature; a second, different message throws KeyReuseError.
Signature sign(const PrivateKey& key, std::span<const uint8_t> message);

// Adversarial inputs (wrong lengths, garbage bytes) are rejections, never
// exceptions.
bool verify_sig(const PublicKey& key, std::span<const uint8_t> message, const Signature& sig);

} // namespace qbtc::sigs
