#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qbtc/bytes.hpp"
#include "qbtc/gf2.hpp"
#include "qbtc/qsim.hpp"
#include "qbtc/rng.hpp"
#include "qbtc/sha256.hpp"

namespace qbtc::mini {

// A 3n-bit serial number. Canonical bytes are a u16 big-endian bit length
// followed by the value, big-endian in ceil(bits/8) bytes; this is also the
// unit the classical descriptor concatenates.
struct Serial {
    uint64_t value = 0;
    int bits = 0;

    Bytes canonical_bytes() const;
    static Serial from_canonical_bytes(std::span<const uint8_t> data);
    std::string to_hex() const; // hex of the value bytes only
    static Serial from_hex(int bits, std::string_view hex);

    auto operator<=>(const Serial&) const = default;
};

// Mini-scheme mint output (s_r, rho): a serial and the subspace state. The
// signature and timestamp are added by the protocol layer.
struct MintedShard {
    Serial serial;
    qsim::QuantumState state;
};

enum class VerifyStage {
    Form,
    SerialCheck,
    Quantum,
    Accepted,
};

const char* verify_stage_name(VerifyStage stage);

// Result of the staged mini-scheme verifier. `accepted` is the sampled
// outcome, `probability` the analytic acceptance probability of the
// submitted state, and `post_state` the state after the sampled (or, for
// the analytic variant, postselected) evolution.
struct VerifyOutcome {
    bool accepted = false;
    VerifyStage stage = VerifyStage::Form; // Accepted, or the stage that rejected
    double probability = 0.0;
    qsim::QuantumState post_state;
};

struct Candidate {
    Serial serial;
    qsim::QuantumState state;
};

// Trusted in-process stand-in for the classical oracle U: it houses the
// state generator G(r) and the serial verifier H(s), keyed by a public
// genesis value. Everything a verifier may learn about a hidden subspace
// flows through verify_serial / verify_m; the lab namespace below is the
// only other way in.
class OracleRegistry {
  public:
    OracleRegistry(const Hash256& genesis_seed, int n);
    OracleRegistry(OracleRegistry&& other) noexcept
        : seed_(other.seed_), n_(other.n_), table_(std::move(other.table_)),
          queries_(other.queries_.load()) {}
    OracleRegistry(const OracleRegistry&) = delete;
    OracleRegistry& operator=(const OracleRegistry&) = delete;
    OracleRegistry& operator=(OracleRegistry&&) = delete;

    int n() const { return n_; }
    int serial_bits() const { return 3 * n_; }
    const Hash256& genesis_seed() const { return seed_; }
    size_t registered_count() const { return table_.size(); }
    uint64_t query_count() const { return queries_.load(); }

    // G(r): deterministic in (genesis seed, r). Returns nullopt when the
    // derived serial is already registered for a different r; the caller
    // resamples r. The same r always returns the same registered pair.
    struct GenResult {
        Serial serial;
        gf2::Subspace subspace;
    };
    std::optional<GenResult> generate_state(uint32_t r);

    // H(s): registered-serial check. Counts one oracle query.
    bool verify_serial(const Serial& s) const;

    // Mint_M: draw a fresh secret r, derive (s_r, |A_r>), and return the
    // pair. The secret data stays in the registry.
    MintedShard mint_m(Rng& rng);

    // Verify_M with the projective outcomes sampled via rng. Stage order is
    // form check, serial check, V_A; rejection is immediate and leaves the
    // state untouched for purely classical failures.
    VerifyOutcome verify_m(const Serial& s, const qsim::QuantumState& rho, Rng& rng) const;

    // Verify_M in analytic postselection form: accepted iff the accept
    // branch is possible, post_state is that branch. Used by the longevity
    // experiment, where the accept branch is the quantity of interest.
    VerifyOutcome verify_m_analytic(const Serial& s, const qsim::QuantumState& rho) const;

    // Verify_2: both verifications run sequentially on their sampled
    // post-measurement evolutions; accepts iff both accept.
    bool verify_2(const Serial& s, const qsim::QuantumState& rho1, const qsim::QuantumState& rho2,
                  Rng& rng) const;

    // Count: number of candidates the verifier accepts, evaluated in order.
    int count_accepting(const std::vector<Candidate>& candidates, Rng& rng) const;

  private:
    friend const gf2::Subspace& lab_subspace_of(const OracleRegistry&, const Serial&);
    friend std::vector<std::pair<Serial, const gf2::Subspace*>>
    lab_entries(const OracleRegistry&);
    friend void lab_force_register(OracleRegistry&, const Serial&, gf2::Subspace);

    struct Entry {
        std::optional<uint32_t> r; // unknown for imported registries
        gf2::Subspace space;
        gf2::Subspace complement;
    };

    Serial derive_serial(uint32_t r) const;
    gf2::Subspace derive_subspace(uint32_t r) const;
    const Entry* find(const Serial& s) const;

    Hash256 seed_{};
    int n_ = 0;
    std::map<uint64_t, Entry> table_;
    mutable std::atomic<uint64_t> queries_{0};
};

namespace lab {

// Ground-truth helpers for experiments and tests. Protocol code never
// touches these: knowing A_r is exactly what lets a counterfeiter rebuild
// |A_r>, so outside the lab the subspace stays behind the oracle.
qsim::QuantumState prepare_state(const OracleRegistry& reg, const Serial& s);
const gf2::Subspace& subspace_of(const OracleRegistry& reg, const Serial& s);

// JSON-lines export/import: {"serial":hex,"bits":N,"basis":[rows...]}.
// Import rebuilds an oracle with the same query surface but no r values;
// the CLI uses it to carry oracle access across processes.
std::string export_registry_jsonl(const OracleRegistry& reg);
OracleRegistry import_registry_jsonl(const Hash256& genesis_seed, int n, std::string_view text);

void force_register(OracleRegistry& reg, const Serial& s, gf2::Subspace space);

} // namespace lab

} // namespace qbtc::mini
