#include "qbtc/gf2.hpp"

#include <algorithm>
#include <bit>

#include "qbtc/bytes.hpp"
#include "qbtc/errors.hpp"

namespace qbtc::gf2 {

namespace {

void check_ambient(int n) {
    if (n < 2 || n > kMaxAmbientDim || n % 2 != 0)
        throw DimensionError("ambient dimension must be even and within [2, 20], got " +
                             std::to_string(n));
}

// In-place reduced row echelon form; returns the surviving nonzero rows in
// pivot order (pivot columns strictly ascending).
std::vector<uint32_t> rref_words(std::vector<uint32_t> rows, int n) {
    size_t rank = 0;
    for (int col = 0; col < n && rank < rows.size(); ++col) {
        const uint32_t mask = 1u << (n - 1 - col);
        size_t pivot = rank;
        while (pivot < rows.size() && (rows[pivot] & mask) == 0)
            ++pivot;
        if (pivot == rows.size())
            continue;
        std::swap(rows[rank], rows[pivot]);
        for (size_t i = 0; i < rows.size(); ++i)
            if (i != rank && (rows[i] & mask))
                rows[i] ^= rows[rank];
        ++rank;
    }
    rows.resize(rank);
    return rows;
}

int pivot_column(uint32_t row, int n) { return n - std::bit_width(row); }

} // namespace

BitVec::BitVec(int n, uint32_t word) : word_(word), n_(n) {
    check_ambient(n);
    if (n < 32 && (word >> n) != 0)
        throw DimensionError("bit pattern wider than declared length");
}

BitVec BitVec::from_string(std::string_view bits) {
    uint32_t word = 0;
    for (char c : bits) {
        if (c != '0' && c != '1')
            throw FormatError("bit string may contain only 0 and 1");
        word = (word << 1) | static_cast<uint32_t>(c - '0');
    }
    return BitVec(static_cast<int>(bits.size()), word);
}

int BitVec::bit(int i) const {
    if (i < 0 || i >= n_)
        throw DimensionError("bit index out of range");
    return static_cast<int>((word_ >> (n_ - 1 - i)) & 1u);
}

BitVec BitVec::with_bit(int i, int v) const {
    if (i < 0 || i >= n_)
        throw DimensionError("bit index out of range");
    const uint32_t mask = 1u << (n_ - 1 - i);
    return BitVec(n_, v ? (word_ | mask) : (word_ & ~mask));
}

BitVec BitVec::operator^(const BitVec& other) const {
    if (n_ != other.n_)
        throw DimensionError("xor of vectors with different lengths");
    return BitVec(n_, word_ ^ other.word_);
}

std::string BitVec::to_string() const {
    std::string out(static_cast<size_t>(n_), '0');
    for (int i = 0; i < n_; ++i)
        if (bit(i))
            out[static_cast<size_t>(i)] = '1';
    return out;
}

std::string BitVec::to_hex() const {
    const int digits = (n_ + 3) / 4;
    std::string out(static_cast<size_t>(digits), '0');
    uint32_t v = word_;
    for (int i = digits - 1; i >= 0; --i) {
        out[static_cast<size_t>(i)] = "0123456789abcdef"[v & 0xf];
        v >>= 4;
    }
    return out;
}

BitVec BitVec::from_hex(int n, std::string_view hex) {
    check_ambient(n);
    if (static_cast<int>(hex.size()) != (n + 3) / 4)
        throw FormatError("hex row has wrong width for dimension " + std::to_string(n));
    uint32_t v = 0;
    for (char c : hex) {
        int d;
        if (c >= '0' && c <= '9')
            d = c - '0';
        else if (c >= 'a' && c <= 'f')
            d = c - 'a' + 10;
        else if (c >= 'A' && c <= 'F')
            d = c - 'A' + 10;
        else
            throw FormatError("invalid hex digit in subspace row");
        v = (v << 4) | static_cast<uint32_t>(d);
    }
    return BitVec(n, v);
}

int dot(const BitVec& a, const BitVec& b) {
    if (a.size() != b.size())
        throw DimensionError("dot of vectors with different lengths");
    return std::popcount(a.word() & b.word()) & 1;
}

Subspace::Subspace(int ambient_dim, std::vector<BitVec> generators)
    : ambient_dim_(ambient_dim), generators_(std::move(generators)) {
    check_ambient(ambient_dim);
    std::vector<uint32_t> words;
    words.reserve(generators_.size());
    for (const BitVec& g : generators_) {
        if (g.size() != ambient_dim_)
            throw DimensionError("generator length does not match ambient dimension");
        words.push_back(g.word());
    }
    auto reduced = rref_words(std::move(words), ambient_dim_);
    if (reduced.size() != generators_.size())
        throw DimensionError("generators are not linearly independent");
    basis_rref_.reserve(reduced.size());
    for (uint32_t w : reduced)
        basis_rref_.emplace_back(ambient_dim_, w);
}

Subspace Subspace::zero(int ambient_dim) { return Subspace(ambient_dim, {}); }

Subspace Subspace::full(int ambient_dim) {
    std::vector<BitVec> gens;
    gens.reserve(static_cast<size_t>(ambient_dim));
    for (int i = 0; i < ambient_dim; ++i)
        gens.push_back(BitVec::zero(ambient_dim).with_bit(i, 1));
    return Subspace(ambient_dim, std::move(gens));
}

bool Subspace::contains(const BitVec& x) const {
    if (x.size() != ambient_dim_)
        throw DimensionError("membership test across different dimensions");
    uint32_t v = x.word();
    for (const BitVec& row : basis_rref_) {
        const uint32_t lead = 1u << (std::bit_width(row.word()) - 1);
        if (v & lead)
            v ^= row.word();
    }
    return v == 0;
}

bool membership(const Subspace& space, const BitVec& x) { return space.contains(x); }

Subspace Subspace::orthogonal_complement() const {
    const int n = ambient_dim_;
    std::vector<int> pivot_of_row;
    std::vector<bool> is_pivot(static_cast<size_t>(n), false);
    for (const BitVec& row : basis_rref_) {
        int p = pivot_column(row.word(), n);
        pivot_of_row.push_back(p);
        is_pivot[static_cast<size_t>(p)] = true;
    }
    // Kernel basis: one vector per free column, unit in that column plus the
    // matching coefficient at each pivot column.
    std::vector<BitVec> kernel;
    for (int f = 0; f < n; ++f) {
        if (is_pivot[static_cast<size_t>(f)])
            continue;
        uint32_t v = 1u << (n - 1 - f);
        for (size_t i = 0; i < basis_rref_.size(); ++i) {
            if ((basis_rref_[i].word() >> (n - 1 - f)) & 1u)
                v |= 1u << (n - 1 - pivot_of_row[i]);
        }
        kernel.emplace_back(n, v);
    }
    return Subspace(n, std::move(kernel));
}

std::vector<BitVec> Subspace::enumerate() const {
    if (dim() > kMaxAmbientDim)
        throw CapacityError("cannot enumerate subspaces of dimension > 20");
    const size_t count = size_t{1} << dim();
    std::vector<uint32_t> words(count, 0);
    for (size_t mask = 1; mask < count; ++mask) {
        const int low = std::countr_zero(mask);
        words[mask] = words[mask & (mask - 1)] ^ basis_rref_[static_cast<size_t>(low)].word();
    }
    std::sort(words.begin(), words.end());
    std::vector<BitVec> out;
    out.reserve(count);
    for (uint32_t w : words)
        out.emplace_back(ambient_dim_, w);
    return out;
}

std::string Subspace::to_hex_lines() const {
    std::string out;
    for (const BitVec& row : basis_rref_) {
        out += row.to_hex();
        out += '\n';
    }
    return out;
}

Subspace Subspace::from_hex_lines(int ambient_dim, std::string_view text) {
    std::vector<BitVec> rows;
    size_t start = 0;
    while (start < text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string_view::npos)
            end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty())
            rows.push_back(BitVec::from_hex(ambient_dim, line));
        start = end + 1;
    }
    return Subspace(ambient_dim, std::move(rows));
}

Subspace sample_subspace(int n, int dim, Rng& rng) {
    check_ambient(n);
    if (dim < 0 || dim > n)
        throw DimensionError("subspace dimension must lie in [0, n]");
    while (true) {
        std::vector<uint32_t> words;
        words.reserve(static_cast<size_t>(dim));
        for (int i = 0; i < dim; ++i)
            words.push_back(rng.bits(n));
        if (static_cast<int>(rref_words(words, n).size()) != dim)
            continue; // rank-deficient draw; resample the whole matrix
        std::vector<BitVec> gens;
        gens.reserve(words.size());
        for (uint32_t w : words)
            gens.emplace_back(n, w);
        return Subspace(n, std::move(gens));
    }
}

} // namespace qbtc::gf2
