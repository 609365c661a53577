#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "qbtc/analytics.hpp"
#include "qbtc/ledger.hpp"
#include "qbtc/minischeme.hpp"
#include "qbtc/protocol.hpp"
#include "qbtc/rng.hpp"
#include "qbtc/sha256.hpp"

namespace qbtc::simnet {

enum class EventKind {
    BlockFound,
    ShardPublished,
    CoinMinted,
    AttackWindowStart,
    AttackSuccess,
    AttackFail,
};
const char* event_kind_name(EventKind kind);

// Totally ordered by (tick, seq); a replay from the same seed reproduces
// the log bit for bit.
struct SimEvent {
    uint64_t tick = 0;
    uint64_t seq = 0;
    EventKind kind = EventKind::BlockFound;
    int actor = -1;
    std::string payload; // compact JSON fragment
};

struct EventLog {
    std::vector<SimEvent> events;

    void emit(uint64_t tick, EventKind kind, int actor, std::string payload);
    std::string to_jsonl() const;
    Hash256 digest() const;
};

// Honest-network run. One tick is one proof-of-work trial per miner; block
// discovery is therefore per-tick Bernoulli with the success probability
// set by the difficulty threshold, and inter-block times come out
// geometric. ledger_stress swaps the protocol payloads for synthetic unique
// entries so multi-thousand-block runs are not capped by the 2^n mint key
// space.
struct NetworkConfig {
    proto::ProtocolConfig protocol;
    int miners = 2;
    uint64_t duration = 0;
    bool ledger_stress = false;
    bool randomize_tiebreak = false; // fork ties default to first-seen
    uint64_t event_cap = 1'000'000;  // stop logging past this many events
};

struct NetworkResult {
    std::unique_ptr<ledger::Chain> chain;
    std::unique_ptr<mini::OracleRegistry> registry;
    proto::Marketplace marketplace;
    std::vector<proto::CustodyToken> coins;
    EventLog log;
    uint64_t blocks_found = 0;
    uint64_t forks = 0;
    uint64_t shards_published = 0;
    uint64_t coins_minted = 0;
};

NetworkResult run_honest_network(const NetworkConfig& config, uint64_t seed);

// The attacker in the reuse-attack model: a fraction p of the network's
// hash power, following the two-window schedule (mine shard blocks for one
// T_max window, then the combining block within another). Each block slot
// is won independently with probability p.
struct AttackerModel {
    double p = 0.0;
    int window_blocks = 0;     // k = floor(T_max / T_block) slots per window
    int shard_wins_needed = 0; // worst case m - 2, overridable for sensitivity

    static AttackerModel from_input(const analytics::ReuseBoundInput& input) {
        return AttackerModel{input.p, input.k, input.shard_wins_needed()};
    }
};

// Monte Carlo of the reuse attack in the simplified two-window model:
// k slots to win at least m-2 shard blocks, then k slots to win the
// combining block. Trials derive per-trial rng streams from (seed, index),
// so the count is identical for any worker split.
struct AttackReport {
    uint64_t trials = 0;
    uint64_t successes = 0;
    double measured_rate = 0.0;
    double exact_rate = 0.0; // two-window tail product
    double eta1 = 0.0;
    double eta2 = 0.0;
    double eta = 0.0;      // closed-form value at exactly m-2 and 1 wins
    double log2_eta = 0.0; // log-domain companion, safe against underflow
    double bound = 0.0;    // (k/2e) 2^(-gamma k)
    bool admissible = false;
    double p_limit = 0.0;
    int k = 0;
    int m = 0;
    double gamma = 0.0;
    double p = 0.0;
    uint64_t seed = 0;

    std::string to_json() const;
    static std::string csv_header();
    std::string csv_row() const;
};

AttackReport run_reuse_attack_trials(const analytics::ReuseBoundInput& input, uint64_t trials,
                                     uint64_t seed, int threads = 0, EventLog* log = nullptr,
                                     uint64_t log_cap = 0);

// Double-spend race baseline: each block goes to the attacker with
// probability p; success means the attacker's private chain exceeds the
// honest chain at any point after the merchant's confirmation depth, within
// a truncation depth of total blocks.
struct DoubleSpendReport {
    uint64_t trials = 0;
    uint64_t successes = 0;
    double rate = 0.0;
    int confirmations = 0;
    double p = 0.0;
    int max_depth = 0;
    uint64_t seed = 0;
};

DoubleSpendReport run_double_spend_baseline(double p, int confirmations, uint64_t trials,
                                            uint64_t seed, int max_depth = 200);

} // namespace qbtc::simnet
