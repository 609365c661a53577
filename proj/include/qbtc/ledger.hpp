#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qbtc/bytes.hpp"
#include "qbtc/rng.hpp"
#include "qbtc/sha256.hpp"

namespace qbtc::ledger {

// 256-bit unsigned integer for difficulty thresholds. Limb 0 is the most
// significant, so lexicographic limb comparison is big-endian integer order.
struct U256 {
    std::array<uint64_t, 4> limbs{};

    static U256 zero() { return U256{}; }
    static U256 max_value();
    static U256 pow2(int bits); // 2^bits for 0 <= bits < 256
    // floor((2^256 - 1) / divisor); the conventional way to pin a mean trial
    // count per block.
    static U256 max_div(uint64_t divisor);

    bool is_zero() const;
    auto operator<=>(const U256&) const = default;

    // floor(this * num / den), saturating at max_value on overflow.
    U256 scaled(uint64_t num, uint64_t den) const;

    std::array<uint8_t, 32> to_bytes() const;
    static U256 from_bytes(std::span<const uint8_t> bytes);
    std::string to_hex() const;
    static U256 from_hex(std::string_view hex);
};

// pow_hash read as a big-endian integer, strictly below the threshold.
bool hash_below(const Hash256& h, const U256& threshold);

enum class Tag : uint8_t {
    Shard = 0,
    Bitcoin = 1,
};

const char* tag_name(Tag tag);

// One dictionary record: serial (or concatenated descriptor) to minting
// public key, stamped with its block's tick.
struct LedgerEntry {
    Tag tag = Tag::Shard;
    Bytes serial_key;
    Bytes public_key;
    uint64_t timestamp = 0;
};

struct Block {
    uint64_t height = 0;
    Hash256 prev_hash{};
    uint64_t timestamp = 0;
    uint64_t nonce = 0;
    U256 threshold{}; // the difficulty this block's pow_hash had to beat
    std::vector<LedgerEntry> entries;
    Hash256 pow_hash{};
};

// Canonical serialization: fixed field order, big-endian integers, keys as
// hex text. The entries blob is shared verbatim between the proof-of-work
// preimage and the block record, so stored hashes are reproducible from
// stored fields alone.
Bytes serialize_entries(const std::vector<LedgerEntry>& entries);
std::vector<LedgerEntry> deserialize_entries(ByteReader& reader);
Hash256 compute_pow_hash(const Block& block);
Bytes serialize_block(const Block& block);
Block deserialize_block(std::span<const uint8_t> data);

// Splits a Bitcoin-tag descriptor back into its component shard serials.
std::vector<Bytes> descriptor_components(const Bytes& descriptor);

struct ChainConfig {
    U256 initial_threshold = U256::max_div(600);
    uint32_t retarget_interval = 32;
    uint64_t t_block = 600;           // target inter-block ticks
    uint64_t max_mine_trials = 10'000'000;
    std::string hash_name = "sha256"; // stable for the chain's lifetime
};

enum class AppendError {
    None,
    DuplicateSerial,
    DuplicateDescriptorShard,
    MiningStalled,
};

struct AppendResult {
    bool ok = false;
    AppendError error = AppendError::None;
    const Block* block = nullptr; // owned by the chain
    uint64_t trials = 0;
};

// Pure retarget rule: threshold scaled by observed/expected ticks, clamped
// to a factor of 4 per adjustment, floored at 1.
U256 retargeted_threshold(const U256& current, uint64_t observed_ticks, uint64_t expected_ticks);

// One physical chain with tagged entries covering both logical ledgers.
// Time is a logical tick clock: one proof-of-work trial advances it by one
// tick, which is also the discrete-event simulator's unit.
class Chain {
  public:
    explicit Chain(ChainConfig config);

    const ChainConfig& config() const { return config_; }
    const Block& genesis() const { return blocks_.front(); }
    const Block& tip() const { return blocks_[active_path_.back()]; }
    uint64_t height() const { return tip().height; }
    size_t block_count() const { return blocks_.size(); }

    uint64_t now() const { return now_; }
    void advance_time(uint64_t ticks) { now_ += ticks; }

    // Difficulty the next active-tip child must beat.
    U256 current_threshold() const;

    // Mines an entry onto the active tip: duplicate checks first (no mining
    // work on a doomed entry), then nonce trials, one tick each, until the
    // hash clears the threshold or the trial cap stalls out. The optional
    // hook runs between trial batches; if it lands a competing block the
    // loop restarts transparently on the new tip.
    AppendResult append(Tag tag, Bytes serial_key, Bytes public_key, Rng& rng,
                        const std::function<void()>& between_batches = {});

    struct LookupResult {
        Bytes public_key;
        uint64_t timestamp = 0;
        uint64_t height = 0;
    };
    // Active chain only; abandoned branches are invisible.
    std::optional<LookupResult> lookup(Tag tag, const Bytes& serial_key) const;

    // True iff the shard serial appears inside any Bitcoin-tag descriptor on
    // the active chain.
    bool shard_already_combined(const Bytes& shard_serial_key) const;

    uint64_t count_entries(Tag tag) const;

    // Zero for blocks not on the active chain.
    uint64_t confirmations(const Hash256& pow_hash) const;

    // External mining support (the simulator drives per-tick trials itself).
    std::optional<Block> try_seal(Tag tag, const Bytes& serial_key, const Bytes& public_key,
                                  uint64_t nonce, uint64_t tick) const;

    enum class Submit { ExtendedActive, Fork, Reorg, Rejected };
    Submit submit_block(const Block& block);

    std::vector<const Block*> active_blocks() const;
    const Block* find_block(const Hash256& pow_hash) const;

    struct AuditReport {
        bool ok = true;
        std::string detail;
    };
    // Recomputes every stored hash from serialized contents, checks each
    // pow_hash against its threshold and the replayed retarget schedule, and
    // re-validates active-chain serial uniqueness.
    AuditReport audit() const;

    double mean_interblock_ticks(uint64_t from_height = 0) const;

    // Append-only binary log: header then length-prefixed canonical block
    // records in insertion order (which preserves the first-seen rule on
    // reload).
    void save(std::ostream& out) const;
    static Chain load(std::istream& in);
    std::string to_jsonl() const;
    static Chain from_jsonl(std::string_view text);

  private:
    U256 threshold_for_child(size_t parent_index) const;
    const Block* ancestor(size_t index, uint64_t steps_up) const;
    bool violates_branch_rules(size_t parent_index, const LedgerEntry& entry,
                               AppendError* error) const;
    void rebuild_active_state();
    void extend_active_state(size_t block_index);

    ChainConfig config_;
    uint64_t now_ = 0;
    std::vector<Block> blocks_; // insertion order; 0 is genesis
    std::map<Hash256, size_t> by_hash_;
    std::vector<size_t> parent_of_;

    // Active-chain caches.
    std::vector<size_t> active_path_; // indexed by height
    std::map<Bytes, size_t> shard_index_;   // serial_key -> block index
    std::map<Bytes, size_t> bitcoin_index_; // descriptor -> block index
    std::map<Bytes, size_t> combined_shards_; // component serial -> block index
};

} // namespace qbtc::ledger
