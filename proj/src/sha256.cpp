#include "qbtc/sha256.hpp"

#include <openssl/evp.h>

#include "qbtc/errors.hpp"

namespace qbtc {

namespace {

// One context per thread, re-initialized per hash. Avoids the
// allocate/free churn of a fresh EVP_MD_CTX for every proof-of-work trial.
EVP_MD_CTX* local_ctx() {
    thread_local EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    return ctx;
}

} // namespace

Hash256 sha256(std::span<const uint8_t> data) {
    Hash256 out{};
    unsigned int len = 0;
    EVP_MD_CTX* ctx = local_ctx();
    if (EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx, out.data(), &len) != 1 || len != out.size())
        throw Error("sha256 digest failed");
    return out;
}

Hash256 sha256(std::string_view text) {
    return sha256(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(text.data()),
                                           text.size()));
}

Sha256::Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (ctx_ == nullptr ||
        EVP_DigestInit_ex(static_cast<EVP_MD_CTX*>(ctx_), EVP_sha256(), nullptr) != 1)
        throw Error("sha256 init failed");
}

Sha256::~Sha256() {
    if (ctx_ != nullptr)
        EVP_MD_CTX_free(static_cast<EVP_MD_CTX*>(ctx_));
}

Sha256& Sha256::update(std::span<const uint8_t> data) {
    if (EVP_DigestUpdate(static_cast<EVP_MD_CTX*>(ctx_), data.data(), data.size()) != 1)
        throw Error("sha256 update failed");
    return *this;
}

Sha256& Sha256::update(std::string_view text) {
    return update(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(text.data()),
                                           text.size()));
}

Sha256& Sha256::update_u32be(uint32_t v) {
    uint8_t buf[4];
    for (int i = 0; i < 4; ++i)
        buf[i] = static_cast<uint8_t>(v >> (24 - 8 * i));
    return update(std::span<const uint8_t>(buf, 4));
}

Sha256& Sha256::update_u64be(uint64_t v) {
    uint8_t buf[8];
    for (int i = 0; i < 8; ++i)
        buf[i] = static_cast<uint8_t>(v >> (56 - 8 * i));
    return update(std::span<const uint8_t>(buf, 8));
}

Hash256 Sha256::finish() {
    Hash256 out{};
    unsigned int len = 0;
    auto* ctx = static_cast<EVP_MD_CTX*>(ctx_);
    if (EVP_DigestFinal_ex(ctx, out.data(), &len) != 1 || len != out.size())
        throw Error("sha256 final failed");
    EVP_MD_CTX_free(ctx);
    ctx_ = nullptr;
    return out;
}

std::string hash_to_hex(const Hash256& h) {
    return to_hex(std::span<const uint8_t>(h.data(), h.size()));
}

Hash256 hash_from_hex(std::string_view hex) {
    Bytes raw = from_hex(hex);
    if (raw.size() != 32)
        throw FormatError("expected 32-byte hash");
    Hash256 out{};
    std::copy(raw.begin(), raw.end(), out.begin());
    return out;
}

uint64_t load_u64be(const uint8_t* p) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v = (v << 8) | p[i];
    return v;
}

} // namespace qbtc
