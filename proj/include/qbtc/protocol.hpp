#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qbtc/ledger.hpp"
#include "qbtc/minischeme.hpp"
#include "qbtc/qsim.hpp"
#include "qbtc/sigs.hpp"

namespace qbtc::proto {

// Security and simulation parameters. lambda < 0 selects the default
// 1/(2m), which with an ideal epsilon = 0 puts the quantum pass threshold
// at exactly m while keeping lambda > 0.
struct ProtocolConfig {
    int n = 8;
    int m = 3;
    uint64_t t_max = 3600;
    uint64_t t_block = 600;
    double lambda = -1.0;
    double epsilon = 0.0;
    uint64_t supply_cap = 1'000'000;
    uint64_t seed = 1;
    uint32_t retarget_interval = 32;
    uint64_t max_mine_trials = 10'000'000;
    std::string initial_threshold_hex; // empty selects 2^256/t_block

    double lambda_value() const;
    int quantum_threshold() const; // ceil((1 - epsilon - lambda) * m)
    uint64_t k() const { return t_block == 0 ? 0 : t_max / t_block; }
    void validate() const; // throws ConfigError

    ledger::ChainConfig chain_config() const;
    Hash256 registry_seed() const;

    // Flat key-value config file: `key = value`, '#' comments.
    static ProtocolConfig from_kv_text(std::string_view text);
    static ProtocolConfig from_file(const std::string& path);
    std::string canonical_text() const; // fixed key order, resolved values
};

// A stage-one product: single-subspace money state plus the shard miner's
// signature over the serial. Move-only; the simulator treats quantum state
// as unclonable outside the lab helpers.
struct QuantumShard {
    mini::Serial serial;
    qsim::QuantumState state;
    sigs::Signature signature;
    uint64_t mint_time = 0;

    QuantumShard() = default;
    QuantumShard(QuantumShard&&) = default;
    QuantumShard& operator=(QuantumShard&&) = default;
    QuantumShard(const QuantumShard&) = delete;
    QuantumShard& operator=(const QuantumShard&) = delete;
};

// The m-fold composite with the coin miner's descriptor signature.
struct QuantumBitcoin {
    std::vector<QuantumShard> shards;
    sigs::Signature descriptor_signature;

    Bytes descriptor_bytes() const; // ordered shard serials, length-prefixed

    QuantumBitcoin() = default;
    QuantumBitcoin(QuantumBitcoin&&) = default;
    QuantumBitcoin& operator=(QuantumBitcoin&&) = default;
    QuantumBitcoin(const QuantumBitcoin&) = delete;
    QuantumBitcoin& operator=(const QuantumBitcoin&) = delete;
};

// Exclusive handle to a coin's quantum states: exactly one live token per
// coin, and transfer consumes its source. Double transfer is a runtime
// custody violation, mirroring what no-cloning makes physically impossible.
class CustodyToken {
  public:
    CustodyToken() = default;
    CustodyToken(CustodyToken&&) = default;
    CustodyToken& operator=(CustodyToken&&) = default;
    CustodyToken(const CustodyToken&) = delete;
    CustodyToken& operator=(const CustodyToken&) = delete;

    static CustodyToken issue(QuantumBitcoin&& coin, std::string owner_label);

    bool live() const { return cell_ != nullptr && cell_->coin.has_value(); }
    uint64_t coin_id() const;
    const std::string& owner_label() const { return owner_; }
    QuantumBitcoin& coin();             // throws CustodyError when consumed
    const QuantumBitcoin& coin() const; // throws CustodyError when consumed

    friend CustodyToken transfer(CustodyToken& token, std::string new_owner_label);

  private:
    struct Cell {
        std::optional<QuantumBitcoin> coin;
        uint64_t id = 0;
    };
    std::shared_ptr<Cell> cell_;
    std::string owner_;
};

// Local transaction: consumes the source token and issues a fresh one. No
// ledger write happens; the receiver verifies against a read-only chain.
CustodyToken transfer(CustodyToken& token, std::string new_owner_label);

// In-process shard marketplace, oldest first. No pricing model; what a
// shard trades for is outside the simulation.
class Marketplace {
  public:
    void publish(QuantumShard shard) { shards_.push_back(std::move(shard)); }
    void publish_front(QuantumShard shard) { shards_.push_front(std::move(shard)); }
    size_t size() const { return shards_.size(); }
    bool empty() const { return shards_.empty(); }
    const QuantumShard& peek(size_t i) const { return shards_[i]; }
    QuantumShard take(size_t i);
    size_t fresh_count(uint64_t now, uint64_t t_max) const;

  private:
    std::deque<QuantumShard> shards_;
};

enum class RejectStage {
    None,
    Form,
    Lookup,
    Signature,
    Quantum,
    Custody,
};
const char* reject_stage_name(RejectStage stage);

enum class MintFailure {
    None,
    MiningStalled,
    InsufficientFreshShards,
    DescriptorConflict,
    SupplyCapReached,
    SerialSpaceExhausted,
};
const char* mint_failure_name(MintFailure failure);

struct ShardMintResult {
    bool ok = false;
    MintFailure failure = MintFailure::None;
    QuantumShard shard; // valid when ok
    uint64_t block_height = 0;
    uint64_t mine_trials = 0;
};

struct CoinMintResult {
    bool ok = false;
    MintFailure failure = MintFailure::None;
    CustodyToken token; // live when ok
    uint64_t block_height = 0;
};

struct NaiveVerifyReport {
    bool accepted = false;
    RejectStage stage = RejectStage::None;
    double probability = 0.0; // analytic quantum acceptance when reached
};

struct CoinVerifyReport {
    bool accepted = false;
    RejectStage stage = RejectStage::None; // first failing stage
    int quantum_passes = 0;
    int quantum_threshold = 0;
    std::vector<bool> shard_passed;
    std::vector<double> shard_probability;
};

// KeyGen_Q is KeyGen_D with the configured security parameter.
sigs::KeyPair keygen_q(const ProtocolConfig& config, Rng& rng);

// The naive single-ledger construction: keygen, Mint_M, append under the
// Shard tag, retrying from Mint_M while the serial is already taken, then
// sign and assemble. The one key pair signs exactly one serial: the one
// that actually landed on the ledger.
ShardMintResult mint_naive(ledger::Chain& chain, mini::OracleRegistry& registry,
                           const ProtocolConfig& config, Rng& rng);

NaiveVerifyReport verify_naive(const ledger::Chain& chain, const mini::OracleRegistry& registry,
                               const QuantumShard& candidate, Rng& rng);

// Stage one of two-stage mining: identical to the naive mint, but the
// product is a quantum shard published to the marketplace with its ledger
// timestamp.
ShardMintResult mint_shard(ledger::Chain& chain, mini::OracleRegistry& registry,
                           const ProtocolConfig& config, Marketplace& market, Rng& rng);

// Selects m fresh shards oldest-first (verified, and aged at most t_max at
// selection time), removing them from the marketplace. Returns nullopt and
// leaves the marketplace untouched when fewer than m qualify.
std::optional<std::vector<QuantumShard>> select_fresh_shards(Marketplace& market,
                                                             const ProtocolConfig& config,
                                                             const mini::OracleRegistry& registry,
                                                             uint64_t now, Rng& rng);

// Stage two: combine m fresh shards under a descriptor signature and a
// Bitcoin-tag ledger entry. Failed appends return the selected shards to
// the marketplace.
CoinMintResult mint_bitcoin(ledger::Chain& chain, mini::OracleRegistry& registry,
                            const ProtocolConfig& config, Marketplace& market, Rng& rng);

// Composite verification. Classical stages run strictly before any quantum
// measurement; acceptance needs every classical stage plus at least
// ceil((1 - epsilon - lambda) * m) quantum passes. Post-measurement states
// are written back into the coin.
CoinVerifyReport verify_q(const ledger::Chain& chain, const mini::OracleRegistry& registry,
                          const ProtocolConfig& config, QuantumBitcoin& coin, Rng& rng);

namespace lab {

// Deep copies for adversarial experiments; protocol code never duplicates
// states.
QuantumShard clone_shard(const QuantumShard& shard);
QuantumBitcoin clone_coin(const QuantumBitcoin& coin);

} // namespace lab

} // namespace qbtc::proto
