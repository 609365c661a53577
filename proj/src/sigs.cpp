#include "qbtc/sigs.hpp"

#include <algorithm>

#include "qbtc/errors.hpp"

namespace qbtc::sigs {

namespace {

constexpr uint8_t kSerialVersion = 1;

int digest_bit(const Hash256& digest, int i) { return (digest[i / 8] >> (7 - i % 8)) & 1; }

std::array<uint8_t, 32> random_preimage(Rng& rng) {
    std::array<uint8_t, 32> out{};
    for (int word = 0; word < 4; ++word) {
        const uint64_t v = rng.next_u64();
        for (int b = 0; b < 8; ++b)
            out[static_cast<size_t>(word * 8 + b)] = static_cast<uint8_t>(v >> (56 - 8 * b));
    }
    return out;
}

} // namespace

Bytes PublicKey::serialize() const {
    Bytes out;
    out.push_back(kSerialVersion);
    put_u16be(out, static_cast<uint16_t>(digest_bits));
    for (const auto& h : hashes)
        out.insert(out.end(), h.begin(), h.end());
    return out;
}

PublicKey PublicKey::deserialize(std::span<const uint8_t> data) {
    ByteReader reader(data);
    if (reader.u8() != kSerialVersion)
        throw FormatError("unknown public key version");
    PublicKey pk;
    pk.digest_bits = reader.u16be();
    if (pk.digest_bits < 4 || pk.digest_bits > 256)
        throw FormatError("public key digest width out of range");
    const size_t entries = 2 * static_cast<size_t>(pk.digest_bits);
    pk.hashes.reserve(entries);
    for (size_t i = 0; i < entries; ++i) {
        Bytes h = reader.take(32);
        Hash256 hash{};
        std::copy(h.begin(), h.end(), hash.begin());
        pk.hashes.push_back(hash);
    }
    if (!reader.done())
        throw FormatError("trailing bytes after public key");
    return pk;
}

KeyPair keygen(int security_param, Rng& rng) {
    if (security_param < 4)
        throw ConfigError("signature security parameter must be at least 4");
    if (security_param > 256)
        throw ConfigError("signature security parameter exceeds the digest width");
    KeyPair kp;
    kp.private_key.digest_bits_ = security_param;
    kp.private_key.signed_message_ = std::make_shared<std::optional<Hash256>>();
    kp.public_key.digest_bits = security_param;
    const size_t entries = 2 * static_cast<size_t>(security_param);
    kp.private_key.preimages_.reserve(entries);
    kp.public_key.hashes.reserve(entries);
    for (size_t i = 0; i < entries; ++i) {
        auto pre = random_preimage(rng);
        kp.private_key.preimages_.push_back(pre);
        kp.public_key.hashes.push_back(sha256(std::span<const uint8_t>(pre.data(), pre.size())));
    }
    return kp;
}

Signature sign(const PrivateKey& key, std::span<const uint8_t> message) {
    const Hash256 digest = sha256(message);
    if (key.signed_message_ == nullptr)
        throw KeyReuseError("signing with an uninitialized key");
    if (key.signed_message_->has_value()) {
        if (**key.signed_message_ != digest)
            throw KeyReuseError("one-time key already used for a different message");
    } else {
        *key.signed_message_ = digest;
    }
    Signature sig;
    sig.bytes.reserve(32 * static_cast<size_t>(key.digest_bits_));
    for (int i = 0; i < key.digest_bits_; ++i) {
        const auto& pre = key.preimages_[static_cast<size_t>(2 * i + digest_bit(digest, i))];
        sig.bytes.insert(sig.bytes.end(), pre.begin(), pre.end());
    }
    return sig;
}

bool verify_sig(const PublicKey& key, std::span<const uint8_t> message, const Signature& sig) {
    if (key.digest_bits < 4 ||
        key.hashes.size() != 2 * static_cast<size_t>(key.digest_bits))
        return false;
    if (sig.bytes.size() != 32 * static_cast<size_t>(key.digest_bits))
        return false;
    const Hash256 digest = sha256(message);
    for (int i = 0; i < key.digest_bits; ++i) {
        const auto revealed =
            std::span<const uint8_t>(sig.bytes.data() + 32 * static_cast<size_t>(i), 32);
        if (sha256(revealed) != key.hashes[static_cast<size_t>(2 * i + digest_bit(digest, i))])
            return false;
    }
    return true;
}

} // namespace qbtc::sigs
