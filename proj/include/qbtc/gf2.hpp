#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qbtc/rng.hpp"

namespace qbtc::gf2 {

// Ambient dimensions above this would need more than 2^20 amplitudes in the
// state-vector simulator, so the whole library caps out here.
inline constexpr int kMaxAmbientDim = 20;

// Fixed-length vector over F_2. Component 0 is the most significant bit of
// the packed word, project-wide, so word() doubles as the basis-state index
// and numeric order equals lexicographic order on the bit string.
class BitVec {
  public:
    BitVec() = default;
    BitVec(int n, uint32_t word);
    static BitVec zero(int n) { return BitVec(n, 0); }
    static BitVec from_string(std::string_view bits); // e.g. "0110"

    int size() const { return n_; }
    uint32_t word() const { return word_; }
    int bit(int i) const;         // i = 0 is the most significant component
    BitVec with_bit(int i, int v) const;

    BitVec operator^(const BitVec& other) const;
    bool operator==(const BitVec&) const = default;
    auto operator<=>(const BitVec&) const = default;

    std::string to_string() const;
    std::string to_hex() const; // ceil(n/4) lowercase digits, value big-endian
    static BitVec from_hex(int n, std::string_view hex);

  private:
    uint32_t word_ = 0;
    int n_ = 0;
};

// Inner product over F_2: parity of the component-wise AND.
int dot(const BitVec& a, const BitVec& b);

// A linear subspace of F_2^n held as the generators it was built from plus
// the canonical reduced-row-echelon basis derived from them. Equality is a
// comparison of the canonical bases.
class Subspace {
  public:
    Subspace(int ambient_dim, std::vector<BitVec> generators); // requires independence
    static Subspace zero(int ambient_dim);
    static Subspace full(int ambient_dim);

    int ambient_dim() const { return ambient_dim_; }
    int dim() const { return static_cast<int>(basis_rref_.size()); }
    const std::vector<BitVec>& generators() const { return generators_; }
    const std::vector<BitVec>& basis_rref() const { return basis_rref_; }

    bool operator==(const Subspace& other) const {
        return ambient_dim_ == other.ambient_dim_ && basis_rref_ == other.basis_rref_;
    }

    bool contains(const BitVec& x) const;
    Subspace orthogonal_complement() const;
    std::vector<BitVec> enumerate() const; // all 2^dim members, sorted, no duplicates

    // Hex rows of basis_rref, one per line; the textual form used by the CLI
    // and the registry export.
    std::string to_hex_lines() const;
    static Subspace from_hex_lines(int ambient_dim, std::string_view text);

  private:
    int ambient_dim_ = 0;
    std::vector<BitVec> generators_;
    std::vector<BitVec> basis_rref_;
};

bool membership(const Subspace& space, const BitVec& x);

// Uniformly samples dim x n binary matrices until one has full rank and
// returns its span. The rejection probability is below 1 - prod(1 - 2^-i),
// so a handful of retries suffices at any dim <= n.
Subspace sample_subspace(int n, int dim, Rng& rng);

} // namespace qbtc::gf2
