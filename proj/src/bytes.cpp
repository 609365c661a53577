#include "qbtc/bytes.hpp"

#include "qbtc/errors.hpp"

namespace qbtc {

namespace {
constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}
} // namespace

std::string to_hex(std::span<const uint8_t> data) {
    std::string out;
    out.reserve(data.size() * 2);
    for (uint8_t b : data) {
        out.push_back(kHexDigits[b >> 4]);
        out.push_back(kHexDigits[b & 0x0f]);
    }
    return out;
}

Bytes from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0)
        throw FormatError("hex string has odd length");
    Bytes out;
    out.reserve(hex.size() / 2);
    for (size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_value(hex[i]);
        int lo = hex_value(hex[i + 1]);
        if (hi < 0 || lo < 0)
            throw FormatError("invalid hex digit");
        out.push_back(static_cast<uint8_t>((hi << 4) | lo));
    }
    return out;
}

void put_u16be(Bytes& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

void put_u32be(Bytes& out, uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8)
        out.push_back(static_cast<uint8_t>(v >> shift));
}

void put_u64be(Bytes& out, uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8)
        out.push_back(static_cast<uint8_t>(v >> shift));
}

uint8_t ByteReader::u8() {
    if (pos_ + 1 > data_.size())
        throw FormatError("truncated input: u8");
    return data_[pos_++];
}

uint16_t ByteReader::u16be() {
    uint16_t v = 0;
    if (pos_ + 2 > data_.size())
        throw FormatError("truncated input: u16");
    for (int i = 0; i < 2; ++i)
        v = static_cast<uint16_t>((v << 8) | data_[pos_++]);
    return v;
}

uint32_t ByteReader::u32be() {
    uint32_t v = 0;
    if (pos_ + 4 > data_.size())
        throw FormatError("truncated input: u32");
    for (int i = 0; i < 4; ++i)
        v = (v << 8) | data_[pos_++];
    return v;
}

uint64_t ByteReader::u64be() {
    uint64_t v = 0;
    if (pos_ + 8 > data_.size())
        throw FormatError("truncated input: u64");
    for (int i = 0; i < 8; ++i)
        v = (v << 8) | data_[pos_++];
    return v;
}

Bytes ByteReader::take(size_t count) {
    if (pos_ + count > data_.size())
        throw FormatError("truncated input: bytes");
    Bytes out(data_.begin() + static_cast<ptrdiff_t>(pos_),
              data_.begin() + static_cast<ptrdiff_t>(pos_ + count));
    pos_ += count;
    return out;
}

} // namespace qbtc
