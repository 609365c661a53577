#include "qbtc/simnet.hpp"

#include <algorithm>
#include <cstdio>
#include <thread>

#include "qbtc/errors.hpp"

namespace qbtc::simnet {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// A miner's current mining intent: the ledger entry it is grinding on plus
// the data needed to finish the product once the block lands.
struct Candidate {
    ledger::Tag tag = ledger::Tag::Shard;
    Bytes serial_key;
    Bytes public_key;
    // shard candidates
    mini::Serial serial;
    qsim::QuantumState state;
    std::optional<sigs::KeyPair> keypair;
    // coin candidates
    std::vector<proto::QuantumShard> reserved;
};

struct Miner {
    int id = 0;
    Rng rng{0};
    std::optional<Candidate> candidate;
    uint64_t stress_counter = 0;
};

} // namespace

const char* event_kind_name(EventKind kind) {
    switch (kind) {
    case EventKind::BlockFound:
        return "block_found";
    case EventKind::ShardPublished:
        return "shard_published";
    case EventKind::CoinMinted:
        return "coin_minted";
    case EventKind::AttackWindowStart:
        return "attack_window_start";
    case EventKind::AttackSuccess:
        return "attack_success";
    case EventKind::AttackFail:
        return "attack_fail";
    }
    return "unknown";
}

void EventLog::emit(uint64_t tick, EventKind kind, int actor, std::string payload) {
    events.push_back(SimEvent{tick, events.size(), kind, actor, std::move(payload)});
}

std::string EventLog::to_jsonl() const {
    std::string out;
    for (const SimEvent& e : events) {
        out += "{\"tick\":" + std::to_string(e.tick) + ",\"seq\":" + std::to_string(e.seq) +
               ",\"kind\":\"" + event_kind_name(e.kind) +
               "\",\"actor\":" + std::to_string(e.actor) + ",\"payload\":" +
               (e.payload.empty() ? "{}" : e.payload) + "}\n";
    }
    return out;
}

Hash256 EventLog::digest() const { return sha256(to_jsonl()); }

namespace {

void plan_candidate(Miner& miner, const NetworkConfig& config, ledger::Chain& chain,
                    mini::OracleRegistry& registry, proto::Marketplace& market,
                    uint64_t coins_minted, uint64_t tick) {
    Candidate cand;
    if (config.ledger_stress) {
        // Synthetic unique entry: exercises PoW, retargeting and the chain
        // indexes without consuming the 2^n mint key space.
        cand.tag = ledger::Tag::Shard;
        put_u32be(cand.serial_key, static_cast<uint32_t>(miner.id));
        put_u64be(cand.serial_key, miner.stress_counter++);
        cand.public_key = {0xab, 0xcd};
        miner.candidate = std::move(cand);
        return;
    }
    const proto::ProtocolConfig& proto_cfg = config.protocol;
    const bool want_coin = coins_minted < proto_cfg.supply_cap &&
                           market.fresh_count(tick, proto_cfg.t_max) >=
                               static_cast<size_t>(proto_cfg.m);
    if (want_coin) {
        auto selected =
            proto::select_fresh_shards(market, proto_cfg, registry, tick, miner.rng);
        if (selected) {
            cand.tag = ledger::Tag::Bitcoin;
            cand.reserved = std::move(*selected);
            cand.keypair = proto::keygen_q(proto_cfg, miner.rng);
            Bytes descriptor;
            for (const proto::QuantumShard& s : cand.reserved) {
                const Bytes piece = s.serial.canonical_bytes();
                descriptor.insert(descriptor.end(), piece.begin(), piece.end());
            }
            cand.serial_key = std::move(descriptor);
            cand.public_key = cand.keypair->public_key.serialize();
            miner.candidate = std::move(cand);
            return;
        }
    }
    // Default role: quantum shard miner. Remint while the drawn serial is
    // already on the active chain; if the 2^n key space has saturated the
    // miner idles this tick instead of spinning.
    for (int attempt = 0; attempt < 64; ++attempt) {
        mini::MintedShard minted = registry.mint_m(miner.rng);
        const Bytes serial_key = minted.serial.canonical_bytes();
        if (chain.lookup(ledger::Tag::Shard, serial_key).has_value())
            continue;
        cand.tag = ledger::Tag::Shard;
        cand.serial = minted.serial;
        cand.state = std::move(minted.state);
        cand.keypair = proto::keygen_q(proto_cfg, miner.rng);
        cand.serial_key = serial_key;
        cand.public_key = cand.keypair->public_key.serialize();
        miner.candidate = std::move(cand);
        return;
    }
    miner.candidate.reset();
}

} // namespace

NetworkResult run_honest_network(const NetworkConfig& config, uint64_t seed) {
    if (config.miners < 1)
        throw ConfigError("network needs at least one miner");
    config.protocol.validate();

    NetworkResult result;
    result.chain = std::make_unique<ledger::Chain>(config.protocol.chain_config());
    result.registry = std::make_unique<mini::OracleRegistry>(config.protocol.registry_seed(),
                                                             config.protocol.n);
    ledger::Chain& chain = *result.chain;
    mini::OracleRegistry& registry = *result.registry;

    std::vector<Miner> miners(static_cast<size_t>(config.miners));
    for (int i = 0; i < config.miners; ++i) {
        miners[static_cast<size_t>(i)].id = i;
        miners[static_cast<size_t>(i)].rng = Rng::from_stream(seed, static_cast<uint64_t>(i) + 1);
    }
    Rng tiebreak_rng = Rng::from_stream(seed, 0xf0f0f0f0ULL);

    for (uint64_t tick = 1; tick <= config.duration; ++tick) {
        chain.advance_time(1);
        // Phase 1: every miner grinds one nonce against the tick-start tip.
        struct Found {
            size_t miner_index;
            ledger::Block block;
        };
        std::vector<Found> found;
        for (Miner& miner : miners) {
            if (!miner.candidate.has_value())
                plan_candidate(miner, config, chain, registry, result.marketplace,
                               result.coins_minted, tick);
            if (!miner.candidate.has_value())
                continue; // nothing mintable right now
            const Candidate& cand = *miner.candidate;
            const uint64_t nonce = miner.rng.next_u64();
            auto sealed = chain.try_seal(cand.tag, cand.serial_key, cand.public_key, nonce, tick);
            if (sealed)
                found.push_back(Found{static_cast<size_t>(miner.id), std::move(*sealed)});
        }
        if (found.empty())
            continue;
        if (config.randomize_tiebreak && found.size() > 1) {
            for (size_t i = found.size(); i > 1; --i)
                std::swap(found[i - 1], found[tiebreak_rng.below(i)]);
        }
        // Phase 2: submission order decides the first-seen winner; the rest
        // attach as forks of the same parent.
        for (Found& f : found) {
            const auto verdict = chain.submit_block(f.block);
            if (verdict == ledger::Chain::Submit::Rejected)
                continue;
            const bool on_active = verdict != ledger::Chain::Submit::Fork;
            ++result.blocks_found;
            if (verdict == ledger::Chain::Submit::Fork)
                ++result.forks;
            Miner& miner = miners[f.miner_index];
            if (result.log.events.size() < config.event_cap) {
                result.log.emit(tick, EventKind::BlockFound, miner.id,
                                "{\"height\":" + std::to_string(f.block.height) + ",\"pow\":\"" +
                                    hash_to_hex(f.block.pow_hash).substr(0, 16) +
                                    "\",\"active\":" + (on_active ? "true" : "false") + "}");
            }
            if (!on_active)
                continue; // the losing fork keeps its candidate and re-mines
            Candidate cand = std::move(*miner.candidate);
            miner.candidate.reset();
            if (config.ledger_stress)
                continue;
            if (cand.tag == ledger::Tag::Shard) {
                proto::QuantumShard shard;
                shard.serial = cand.serial;
                shard.state = std::move(cand.state);
                shard.signature = sigs::sign(cand.keypair->private_key, cand.serial_key);
                shard.mint_time = f.block.timestamp;
                result.marketplace.publish(std::move(shard));
                ++result.shards_published;
                if (result.log.events.size() < config.event_cap)
                    result.log.emit(tick, EventKind::ShardPublished, miner.id,
                                    "{\"serial\":\"" + cand.serial.to_hex() + "\"}");
            } else {
                proto::QuantumBitcoin coin;
                coin.shards = std::move(cand.reserved);
                coin.descriptor_signature =
                    sigs::sign(cand.keypair->private_key, cand.serial_key);
                ++result.coins_minted;
                if (result.log.events.size() < config.event_cap)
                    result.log.emit(tick, EventKind::CoinMinted, miner.id,
                                    "{\"descriptor\":\"" + to_hex(cand.serial_key) +
                                        "\",\"shards\":" + std::to_string(coin.shards.size()) +
                                        "}");
                result.coins.push_back(
                    proto::CustodyToken::issue(std::move(coin), "miner-" +
                                                                   std::to_string(miner.id)));
            }
        }
    }
    return result;
}

std::string AttackReport::to_json() const {
    std::string out = "{";
    out += "\"k\":" + std::to_string(k) + ",\"m\":" + std::to_string(m) +
           ",\"gamma\":" + format_double(gamma) + ",\"p\":" + format_double(p) +
           ",\"trials\":" + std::to_string(trials) + ",\"successes\":" +
           std::to_string(successes) + ",\"measured_rate\":" + format_double(measured_rate) +
           ",\"exact_rate\":" + format_double(exact_rate) + ",\"eta1\":" + format_double(eta1) +
           ",\"eta2\":" + format_double(eta2) + ",\"eta\":" + format_double(eta) +
           ",\"log2_eta\":" + format_double(log2_eta) + ",\"bound\":" + format_double(bound) +
           ",\"admissible\":" + (admissible ? std::string("true") : std::string("false")) +
           ",\"p_limit\":" + format_double(p_limit) + ",\"seed\":" + std::to_string(seed) + "}";
    return out;
}

std::string AttackReport::csv_header() {
    return "k,m,gamma,p,trials,successes,measured_rate,exact_rate,eta1,eta2,eta,bound,"
           "admissible,seed\n";
}

std::string AttackReport::csv_row() const {
    return std::to_string(k) + "," + std::to_string(m) + "," + format_double(gamma) + "," +
           format_double(p) + "," + std::to_string(trials) + "," + std::to_string(successes) +
           "," + format_double(measured_rate) + "," + format_double(exact_rate) + "," +
           format_double(eta1) + "," + format_double(eta2) + "," + format_double(eta) + "," +
           format_double(bound) + "," + (admissible ? "1" : "0") + "," + std::to_string(seed) +
           "\n";
}

AttackReport run_reuse_attack_trials(const analytics::ReuseBoundInput& input, uint64_t trials,
                                     uint64_t seed, int threads, EventLog* log,
                                     uint64_t log_cap) {
    input.validate();
    const AttackerModel attacker = AttackerModel::from_input(input);

    auto run_trial = [&](uint64_t index) -> bool {
        Rng rng = Rng::from_stream(seed, index);
        // Window 1: shard blocks. Honest wins in the same slots do not deny
        // the attacker's count; the model errs in the attacker's favor.
        int wins = 0;
        for (int slot = 0; slot < attacker.window_blocks; ++slot)
            if (rng.bernoulli(attacker.p))
                ++wins;
        if (wins < attacker.shard_wins_needed)
            return false;
        // Window 2: the combining block.
        for (int slot = 0; slot < attacker.window_blocks; ++slot)
            if (rng.bernoulli(attacker.p))
                return true;
        return false;
    };

    uint64_t successes = 0;
    int worker_count = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    if (worker_count < 1)
        worker_count = 1;
    if (static_cast<uint64_t>(worker_count) > trials)
        worker_count = trials == 0 ? 1 : static_cast<int>(trials);

    if (worker_count == 1) {
        for (uint64_t i = 0; i < trials; ++i)
            if (run_trial(i))
                ++successes;
    } else {
        std::vector<uint64_t> partial(static_cast<size_t>(worker_count), 0);
        std::vector<std::thread> pool;
        for (int w = 0; w < worker_count; ++w) {
            pool.emplace_back([&, w] {
                const uint64_t lo = trials * static_cast<uint64_t>(w) /
                                    static_cast<uint64_t>(worker_count);
                const uint64_t hi = trials * (static_cast<uint64_t>(w) + 1) /
                                    static_cast<uint64_t>(worker_count);
                uint64_t count = 0;
                for (uint64_t i = lo; i < hi; ++i)
                    if (run_trial(i))
                        ++count;
                partial[static_cast<size_t>(w)] = count;
            });
        }
        for (auto& t : pool)
            t.join();
        for (uint64_t c : partial)
            successes += c;
    }

    if (log != nullptr && log_cap > 0) {
        const uint64_t cap = std::min(log_cap, trials);
        for (uint64_t i = 0; i < cap; ++i) {
            log->emit(i, EventKind::AttackWindowStart, 0, "{\"trial\":" + std::to_string(i) + "}");
            log->emit(i, run_trial(i) ? EventKind::AttackSuccess : EventKind::AttackFail, 0,
                      "{\"trial\":" + std::to_string(i) + "}");
        }
    }

    AttackReport report;
    report.trials = trials;
    report.successes = successes;
    report.measured_rate =
        trials == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(trials);
    report.exact_rate = analytics::two_window_exact(input);
    const analytics::EtaExact exact = analytics::eta_exact(input);
    report.eta1 = exact.eta1;
    report.eta2 = exact.eta2;
    report.eta = exact.eta;
    report.log2_eta = exact.log2_eta;
    const analytics::EtaBound bound = analytics::eta_bound(input);
    report.bound = bound.bound;
    report.admissible = bound.admissible;
    report.p_limit = bound.p_limit;
    report.k = input.k;
    report.m = input.m;
    report.gamma = input.gamma();
    report.p = input.p;
    report.seed = seed;
    return report;
}

DoubleSpendReport run_double_spend_baseline(double p, int confirmations, uint64_t trials,
                                            uint64_t seed, int max_depth) {
    if (confirmations < 1)
        throw ConfigError("double-spend baseline needs at least one confirmation");
    if (p < 0.0 || p >= 1.0)
        throw ConfigError("attacker fraction p must lie in [0, 1)");
    if (max_depth < confirmations)
        throw ConfigError("truncation depth must cover the confirmation count");
    uint64_t successes = 0;
    for (uint64_t i = 0; i < trials; ++i) {
        Rng rng = Rng::from_stream(seed, i);
        int honest = 0;
        int attacker = 0;
        for (int step = 0; step < max_depth; ++step) {
            if (rng.bernoulli(p))
                ++attacker;
            else
                ++honest;
            if (honest >= confirmations && attacker > honest) {
                ++successes;
                break;
            }
        }
    }
    DoubleSpendReport report;
    report.trials = trials;
    report.successes = successes;
    report.rate = trials == 0 ? 0.0 : static_cast<double>(successes) / static_cast<double>(trials);
    report.confirmations = confirmations;
    report.p = p;
    report.max_depth = max_depth;
    report.seed = seed;
    return report;
}

} // namespace qbtc::simnet
