#include "qbtc/protocol.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qbtc/errors.hpp"

namespace qbtc::proto {

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::atomic<uint64_t> next_coin_id{1};

} // namespace

double ProtocolConfig::lambda_value() const {
    return lambda < 0.0 ? 1.0 / (2.0 * static_cast<double>(m)) : lambda;
}

int ProtocolConfig::quantum_threshold() const {
    const double required = (1.0 - epsilon - lambda_value()) * static_cast<double>(m);
    return static_cast<int>(std::ceil(required - 1e-12));
}

void ProtocolConfig::validate() const {
    if (n < 4 || n > gf2::kMaxAmbientDim || n % 2 != 0)
        throw ConfigError("n must be even and within [4, 20]");
    if (m < 1)
        throw ConfigError("m must be at least 1");
    if (epsilon < 0.0 || epsilon >= 1.0)
        throw ConfigError("epsilon must lie in [0, 1)");
    const double lam = lambda_value();
    if (!(lam > 0.0) || !(lam < 1.0 - epsilon))
        throw ConfigError("lambda must lie in (0, 1 - epsilon)");
    if (std::floor((1.0 - epsilon - lam) * static_cast<double>(m)) < 1.0)
        throw ConfigError("floor((1 - epsilon - lambda) * m) must be at least 1");
    if (t_block == 0 || t_max == 0)
        throw ConfigError("t_block and t_max must be positive");
    if (k() < 3)
        throw ConfigError("floor(t_max / t_block) must be at least 3");
    if (retarget_interval == 0)
        throw ConfigError("retarget_interval must be positive");
    if (!initial_threshold_hex.empty())
        ledger::U256::from_hex(initial_threshold_hex); // throws on malformed hex
}

ledger::ChainConfig ProtocolConfig::chain_config() const {
    ledger::ChainConfig cfg;
    cfg.t_block = t_block;
    cfg.retarget_interval = retarget_interval;
    cfg.max_mine_trials = max_mine_trials;
    cfg.initial_threshold = initial_threshold_hex.empty()
                                ? ledger::U256::max_div(t_block)
                                : ledger::U256::from_hex(initial_threshold_hex);
    return cfg;
}

Hash256 ProtocolConfig::registry_seed() const {
    Sha256 h;
    h.update("qbtc/registry");
    h.update_u64be(seed);
    h.update_u32be(static_cast<uint32_t>(n));
    return h.finish();
}

ProtocolConfig ProtocolConfig::from_kv_text(std::string_view text) {
    ProtocolConfig cfg;
    size_t start = 0;
    int line_no = 0;
    while (start <= text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string_view::npos)
            end = text.size();
        std::string line(text.substr(start, end - start));
        start = end + 1;
        ++line_no;
        if (const size_t hash = line.find('#'); hash != std::string::npos)
            line.resize(hash);
        std::istringstream stream(line);
        std::string key, eq, value;
        if (!(stream >> key))
            continue; // blank line
        if (!(stream >> eq))
            throw ConfigError("config line " + std::to_string(line_no) + ": missing value");
        if (eq == "=") {
            if (!(stream >> value))
                throw ConfigError("config line " + std::to_string(line_no) + ": missing value");
        } else {
            value = eq;
        }
        try {
            if (key == "n")
                cfg.n = std::stoi(value);
            else if (key == "m")
                cfg.m = std::stoi(value);
            else if (key == "t_max")
                cfg.t_max = std::stoull(value);
            else if (key == "t_block")
                cfg.t_block = std::stoull(value);
            else if (key == "lambda")
                cfg.lambda = std::stod(value);
            else if (key == "epsilon")
                cfg.epsilon = std::stod(value);
            else if (key == "supply_cap")
                cfg.supply_cap = std::stoull(value);
            else if (key == "seed")
                cfg.seed = std::stoull(value);
            else if (key == "retarget_interval")
                cfg.retarget_interval = static_cast<uint32_t>(std::stoul(value));
            else if (key == "max_mine_trials")
                cfg.max_mine_trials = std::stoull(value);
            else if (key == "initial_threshold")
                cfg.initial_threshold_hex = value;
            else
                throw ConfigError("unknown config key: " + key);
        } catch (const std::invalid_argument&) {
            throw ConfigError("config line " + std::to_string(line_no) + ": bad value for " + key);
        } catch (const std::out_of_range&) {
            throw ConfigError("config line " + std::to_string(line_no) + ": value out of range");
        }
        if (end == text.size())
            break;
    }
    return cfg;
}

ProtocolConfig ProtocolConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_kv_text(buf.str());
}

std::string ProtocolConfig::canonical_text() const {
    std::string out;
    out += "n = " + std::to_string(n) + "\n";
    out += "m = " + std::to_string(m) + "\n";
    out += "t_max = " + std::to_string(t_max) + "\n";
    out += "t_block = " + std::to_string(t_block) + "\n";
    out += "lambda = " + format_double(lambda_value()) + "\n";
    out += "epsilon = " + format_double(epsilon) + "\n";
    out += "supply_cap = " + std::to_string(supply_cap) + "\n";
    out += "seed = " + std::to_string(seed) + "\n";
    out += "retarget_interval = " + std::to_string(retarget_interval) + "\n";
    out += "max_mine_trials = " + std::to_string(max_mine_trials) + "\n";
    out += "initial_threshold = " + chain_config().initial_threshold.to_hex() + "\n";
    return out;
}

Bytes QuantumBitcoin::descriptor_bytes() const {
    Bytes out;
    for (const QuantumShard& s : shards) {
        const Bytes piece = s.serial.canonical_bytes();
        out.insert(out.end(), piece.begin(), piece.end());
    }
    return out;
}

CustodyToken CustodyToken::issue(QuantumBitcoin&& coin, std::string owner_label) {
    CustodyToken token;
    token.cell_ = std::make_shared<Cell>();
    token.cell_->coin = std::move(coin);
    token.cell_->id = next_coin_id.fetch_add(1);
    token.owner_ = std::move(owner_label);
    return token;
}

uint64_t CustodyToken::coin_id() const {
    if (cell_ == nullptr)
        throw CustodyError("empty custody token");
    return cell_->id;
}

QuantumBitcoin& CustodyToken::coin() {
    if (!live())
        throw CustodyError("custody token has been consumed");
    return *cell_->coin;
}

const QuantumBitcoin& CustodyToken::coin() const {
    if (!live())
        throw CustodyError("custody token has been consumed");
    return *cell_->coin;
}

CustodyToken transfer(CustodyToken& token, std::string new_owner_label) {
    if (!token.live())
        throw CustodyError("transfer from a consumed custody token");
    CustodyToken next;
    next.cell_ = std::make_shared<CustodyToken::Cell>();
    next.cell_->coin = std::move(*token.cell_->coin);
    next.cell_->id = token.cell_->id;
    next.owner_ = std::move(new_owner_label);
    token.cell_->coin.reset(); // the source handle is dead from here on
    return next;
}

QuantumShard Marketplace::take(size_t i) {
    QuantumShard out = std::move(shards_[i]);
    shards_.erase(shards_.begin() + static_cast<ptrdiff_t>(i));
    return out;
}

size_t Marketplace::fresh_count(uint64_t now, uint64_t t_max) const {
    size_t count = 0;
    for (const QuantumShard& s : shards_)
        if (now - s.mint_time <= t_max)
            ++count;
    return count;
}

const char* reject_stage_name(RejectStage stage) {
    switch (stage) {
    case RejectStage::None:
        return "none";
    case RejectStage::Form:
        return "form";
    case RejectStage::Lookup:
        return "lookup";
    case RejectStage::Signature:
        return "signature";
    case RejectStage::Quantum:
        return "quantum";
    case RejectStage::Custody:
        return "custody";
    }
    return "unknown";
}

const char* mint_failure_name(MintFailure failure) {
    switch (failure) {
    case MintFailure::None:
        return "none";
    case MintFailure::MiningStalled:
        return "mining-stalled";
    case MintFailure::InsufficientFreshShards:
        return "insufficient-fresh-shards";
    case MintFailure::DescriptorConflict:
        return "descriptor-conflict";
    case MintFailure::SupplyCapReached:
        return "supply-cap-reached";
    case MintFailure::SerialSpaceExhausted:
        return "serial-space-exhausted";
    }
    return "unknown";
}

sigs::KeyPair keygen_q(const ProtocolConfig& config, Rng& rng) {
    return sigs::keygen(config.n, rng);
}

ShardMintResult mint_naive(ledger::Chain& chain, mini::OracleRegistry& registry,
                           const ProtocolConfig& config, Rng& rng) {
    const sigs::KeyPair keypair = keygen_q(config, rng);
    const Bytes public_key = keypair.public_key.serialize();
    // The r space has 2^n keys, so a saturated shard ledger makes every
    // retry collide; bail out after enough attempts to have seen them all.
    const int max_attempts = 4 << config.n;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        mini::MintedShard minted = registry.mint_m(rng);
        const Bytes serial_key = minted.serial.canonical_bytes();
        auto appended = chain.append(ledger::Tag::Shard, serial_key, public_key, rng);
        if (!appended.ok) {
            if (appended.error == ledger::AppendError::DuplicateSerial)
                continue; // start again from Mint_M with a fresh r
            return {false, MintFailure::MiningStalled, {}, 0, appended.trials};
        }
        ShardMintResult result;
        result.ok = true;
        result.shard.serial = minted.serial;
        result.shard.state = std::move(minted.state);
        result.shard.signature = sigs::sign(keypair.private_key, serial_key);
        result.shard.mint_time = appended.block->timestamp;
        result.block_height = appended.block->height;
        result.mine_trials = appended.trials;
        return result;
    }
    return {false, MintFailure::SerialSpaceExhausted, {}, 0, 0};
}

NaiveVerifyReport verify_naive(const ledger::Chain& chain, const mini::OracleRegistry& registry,
                               const QuantumShard& candidate, Rng& rng) {
    if (candidate.serial.bits != registry.serial_bits() || candidate.state.n != registry.n())
        return {false, RejectStage::Form, 0.0};
    const auto looked_up = chain.lookup(ledger::Tag::Shard, candidate.serial.canonical_bytes());
    if (!looked_up)
        return {false, RejectStage::Lookup, 0.0};
    sigs::PublicKey public_key;
    try {
        public_key = sigs::PublicKey::deserialize(looked_up->public_key);
    } catch (const FormatError&) {
        return {false, RejectStage::Signature, 0.0};
    }
    const Bytes serial_key = candidate.serial.canonical_bytes();
    if (!sigs::verify_sig(public_key, serial_key, candidate.signature))
        return {false, RejectStage::Signature, 0.0};
    const mini::VerifyOutcome outcome = registry.verify_m(candidate.serial, candidate.state, rng);
    return {outcome.accepted, outcome.accepted ? RejectStage::None : RejectStage::Quantum,
            outcome.probability};
}

ShardMintResult mint_shard(ledger::Chain& chain, mini::OracleRegistry& registry,
                           const ProtocolConfig& config, Marketplace& market, Rng& rng) {
    ShardMintResult result = mint_naive(chain, registry, config, rng);
    if (!result.ok)
        return result;
    QuantumShard published;
    published.serial = result.shard.serial;
    published.state = std::move(result.shard.state);
    published.signature = result.shard.signature;
    published.mint_time = result.shard.mint_time;
    market.publish(std::move(published));
    result.shard.state = qsim::QuantumState::zero_sentinel(config.n);
    return result;
}

std::optional<std::vector<QuantumShard>> select_fresh_shards(Marketplace& market,
                                                             const ProtocolConfig& config,
                                                             const mini::OracleRegistry& registry,
                                                             uint64_t now, Rng& rng) {
    std::vector<size_t> chosen;
    for (size_t i = 0; i < market.size() && chosen.size() < static_cast<size_t>(config.m); ++i) {
        const QuantumShard& shard = market.peek(i);
        if (now - shard.mint_time > config.t_max)
            continue; // expired for combination
        // Pre-purchase verification; the accepted branch reconstructs the
        // state as good as new, so an honest shard is not consumed by it.
        if (registry.verify_m(shard.serial, shard.state, rng).accepted)
            chosen.push_back(i);
    }
    if (chosen.size() < static_cast<size_t>(config.m))
        return std::nullopt;
    std::vector<QuantumShard> out;
    out.reserve(chosen.size());
    for (size_t j = 0; j < chosen.size(); ++j)
        out.push_back(market.take(chosen[j] - j)); // indices shift as we take
    return out;
}

CoinMintResult mint_bitcoin(ledger::Chain& chain, mini::OracleRegistry& registry,
                            const ProtocolConfig& config, Marketplace& market, Rng& rng) {
    CoinMintResult result;
    if (chain.count_entries(ledger::Tag::Bitcoin) >= config.supply_cap) {
        result.failure = MintFailure::SupplyCapReached;
        return result;
    }
    auto selected = select_fresh_shards(market, config, registry, chain.now(), rng);
    if (!selected) {
        result.failure = MintFailure::InsufficientFreshShards;
        return result;
    }
    QuantumBitcoin coin;
    coin.shards = std::move(*selected);
    const Bytes descriptor = coin.descriptor_bytes();

    const sigs::KeyPair keypair = keygen_q(config, rng);
    auto appended =
        chain.append(ledger::Tag::Bitcoin, descriptor, keypair.public_key.serialize(), rng);
    if (!appended.ok) {
        // Hand the shards back to the front, oldest first, before reporting.
        for (auto it = coin.shards.rbegin(); it != coin.shards.rend(); ++it)
            market.publish_front(std::move(*it));
        result.failure = appended.error == ledger::AppendError::MiningStalled
                             ? MintFailure::MiningStalled
                             : MintFailure::DescriptorConflict;
        return result;
    }
    coin.descriptor_signature = sigs::sign(keypair.private_key, descriptor);
    result.ok = true;
    result.block_height = appended.block->height;
    result.token = CustodyToken::issue(std::move(coin), "miner");
    return result;
}

CoinVerifyReport verify_q(const ledger::Chain& chain, const mini::OracleRegistry& registry,
                          const ProtocolConfig& config, QuantumBitcoin& coin, Rng& rng) {
    CoinVerifyReport report;
    report.quantum_threshold = config.quantum_threshold();

    // Stage 1: form.
    if (coin.shards.size() != static_cast<size_t>(config.m)) {
        report.stage = RejectStage::Form;
        return report;
    }
    for (const QuantumShard& s : coin.shards) {
        if (s.serial.bits != registry.serial_bits() || s.state.n != registry.n()) {
            report.stage = RejectStage::Form;
            return report;
        }
    }

    // Stage 2: descriptor lookup in the Bitcoin ledger.
    const Bytes descriptor = coin.descriptor_bytes();
    const auto coin_entry = chain.lookup(ledger::Tag::Bitcoin, descriptor);
    if (!coin_entry) {
        report.stage = RejectStage::Lookup;
        return report;
    }

    // Stage 3: descriptor signature.
    try {
        const sigs::PublicKey coin_key = sigs::PublicKey::deserialize(coin_entry->public_key);
        if (!sigs::verify_sig(coin_key, descriptor, coin.descriptor_signature)) {
            report.stage = RejectStage::Signature;
            return report;
        }
    } catch (const FormatError&) {
        report.stage = RejectStage::Signature;
        return report;
    }

    // Stages 4-5: per-shard lookups and signatures, still fully classical.
    std::vector<sigs::PublicKey> shard_keys;
    shard_keys.reserve(coin.shards.size());
    for (const QuantumShard& s : coin.shards) {
        const auto entry = chain.lookup(ledger::Tag::Shard, s.serial.canonical_bytes());
        if (!entry) {
            report.stage = RejectStage::Lookup;
            return report;
        }
        try {
            shard_keys.push_back(sigs::PublicKey::deserialize(entry->public_key));
        } catch (const FormatError&) {
            report.stage = RejectStage::Signature;
            return report;
        }
    }
    for (size_t i = 0; i < coin.shards.size(); ++i) {
        if (!sigs::verify_sig(shard_keys[i], coin.shards[i].serial.canonical_bytes(),
                              coin.shards[i].signature)) {
            report.stage = RejectStage::Signature;
            return report;
        }
    }

    // Stage 6: quantum verification, only now that every classical check
    // passed; measurement is destructive on the failure branch.
    for (QuantumShard& s : coin.shards) {
        mini::VerifyOutcome outcome = registry.verify_m(s.serial, s.state, rng);
        s.state = std::move(outcome.post_state);
        report.shard_passed.push_back(outcome.accepted);
        report.shard_probability.push_back(outcome.probability);
        if (outcome.accepted)
            ++report.quantum_passes;
    }
    report.accepted = report.quantum_passes >= report.quantum_threshold;
    report.stage = report.accepted ? RejectStage::None : RejectStage::Quantum;
    return report;
}

namespace lab {

QuantumShard clone_shard(const QuantumShard& shard) {
    QuantumShard out;
    out.serial = shard.serial;
    out.state = shard.state;
    out.signature = shard.signature;
    out.mint_time = shard.mint_time;
    return out;
}

QuantumBitcoin clone_coin(const QuantumBitcoin& coin) {
    QuantumBitcoin out;
    out.shards.reserve(coin.shards.size());
    for (const QuantumShard& s : coin.shards)
        out.shards.push_back(clone_shard(s));
    out.descriptor_signature = coin.descriptor_signature;
    return out;
}

} // namespace lab

} // namespace qbtc::proto
