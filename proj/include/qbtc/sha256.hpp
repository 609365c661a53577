#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>

#include "qbtc/bytes.hpp"

namespace qbtc {

using Hash256 = std::array<uint8_t, 32>;

Hash256 sha256(std::span<const uint8_t> data);
Hash256 sha256(std::string_view text);

// Streaming interface for multi-part preimages (block headers, key
// derivation). The one-shot sha256() reuses a thread-local context and is
// the right call inside mining loops.
class Sha256 {
  public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;
    Sha256& update(std::span<const uint8_t> data);
    Sha256& update(std::string_view text);
    Sha256& update_u32be(uint32_t v);
    Sha256& update_u64be(uint64_t v);
    Hash256 finish();

  private:
    void* ctx_; // EVP_MD_CTX
};

std::string hash_to_hex(const Hash256& h);
Hash256 hash_from_hex(std::string_view hex);

uint64_t load_u64be(const uint8_t* p);

} // namespace qbtc
