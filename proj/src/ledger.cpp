#include "qbtc/ledger.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include "json.hpp"

#include "qbtc/errors.hpp"

namespace qbtc::ledger {

namespace {

constexpr char kChainMagic[8] = {'Q', 'B', 'C', 'H', 'A', 'I', 'N', '1'};
constexpr size_t kMineBatch = 256;

void patch_u64be(Bytes& buf, size_t offset, uint64_t v) {
    for (int i = 0; i < 8; ++i)
        buf[offset + static_cast<size_t>(i)] = static_cast<uint8_t>(v >> (56 - 8 * i));
}

} // namespace

U256 U256::max_value() {
    U256 v;
    v.limbs.fill(~uint64_t{0});
    return v;
}

U256 U256::pow2(int bits) {
    if (bits < 0 || bits >= 256)
        throw ConfigError("2^bits out of range for a 256-bit threshold");
    U256 v;
    v.limbs[static_cast<size_t>(3 - bits / 64)] = uint64_t{1} << (bits % 64);
    return v;
}

U256 U256::max_div(uint64_t divisor) {
    if (divisor == 0)
        throw ConfigError("division by zero");
    U256 out;
    unsigned __int128 rem = 0;
    for (size_t i = 0; i < 4; ++i) {
        const unsigned __int128 cur = (rem << 64) | U256::max_value().limbs[i];
        out.limbs[i] = static_cast<uint64_t>(cur / divisor);
        rem = cur % divisor;
    }
    return out;
}

bool U256::is_zero() const {
    for (uint64_t limb : limbs)
        if (limb != 0)
            return false;
    return true;
}

U256 U256::scaled(uint64_t num, uint64_t den) const {
    if (den == 0)
        throw ConfigError("division by zero");
    if (num == 0)
        return U256::zero();
    // 320-bit product, most significant limb first.
    std::array<uint64_t, 5> product{};
    unsigned __int128 carry = 0;
    for (int i = 3; i >= 0; --i) {
        const unsigned __int128 cur =
            static_cast<unsigned __int128>(limbs[static_cast<size_t>(i)]) * num + carry;
        product[static_cast<size_t>(i + 1)] = static_cast<uint64_t>(cur);
        carry = cur >> 64;
    }
    product[0] = static_cast<uint64_t>(carry);
    std::array<uint64_t, 5> quotient{};
    unsigned __int128 rem = 0;
    for (size_t i = 0; i < 5; ++i) {
        const unsigned __int128 cur = (rem << 64) | product[i];
        quotient[i] = static_cast<uint64_t>(cur / den);
        rem = cur % den;
    }
    if (quotient[0] != 0)
        return U256::max_value();
    U256 out;
    std::copy(quotient.begin() + 1, quotient.end(), out.limbs.begin());
    return out;
}

std::array<uint8_t, 32> U256::to_bytes() const {
    std::array<uint8_t, 32> out{};
    for (size_t i = 0; i < 4; ++i)
        for (int b = 0; b < 8; ++b)
            out[i * 8 + static_cast<size_t>(b)] = static_cast<uint8_t>(limbs[i] >> (56 - 8 * b));
    return out;
}

U256 U256::from_bytes(std::span<const uint8_t> bytes) {
    if (bytes.size() != 32)
        throw FormatError("threshold must be 32 bytes");
    U256 out;
    for (size_t i = 0; i < 4; ++i)
        out.limbs[i] = load_u64be(bytes.data() + i * 8);
    return out;
}

std::string U256::to_hex() const {
    const auto bytes = to_bytes();
    return qbtc::to_hex(std::span<const uint8_t>(bytes.data(), bytes.size()));
}

U256 U256::from_hex(std::string_view hex) {
    const Bytes raw = qbtc::from_hex(hex);
    return from_bytes(raw);
}

bool hash_below(const Hash256& h, const U256& threshold) {
    const auto bytes = threshold.to_bytes();
    for (size_t i = 0; i < 32; ++i) {
        if (h[i] != bytes[i])
            return h[i] < bytes[i];
    }
    return false; // equal is not strictly below
}

const char* tag_name(Tag tag) { return tag == Tag::Shard ? "shard" : "bitcoin"; }

Bytes serialize_entries(const std::vector<LedgerEntry>& entries) {
    Bytes out;
    put_u32be(out, static_cast<uint32_t>(entries.size()));
    for (const LedgerEntry& e : entries) {
        out.push_back(static_cast<uint8_t>(e.tag));
        const std::string serial_hex = qbtc::to_hex(e.serial_key);
        const std::string pk_hex = qbtc::to_hex(e.public_key);
        put_u32be(out, static_cast<uint32_t>(serial_hex.size()));
        out.insert(out.end(), serial_hex.begin(), serial_hex.end());
        put_u32be(out, static_cast<uint32_t>(pk_hex.size()));
        out.insert(out.end(), pk_hex.begin(), pk_hex.end());
        put_u64be(out, e.timestamp);
    }
    return out;
}

std::vector<LedgerEntry> deserialize_entries(ByteReader& reader) {
    const uint32_t count = reader.u32be();
    if (count > 1'000'000)
        throw FormatError("implausible entry count");
    std::vector<LedgerEntry> entries;
    entries.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        LedgerEntry e;
        const uint8_t tag = reader.u8();
        if (tag > 1)
            throw FormatError("unknown ledger entry tag");
        e.tag = static_cast<Tag>(tag);
        const uint32_t serial_len = reader.u32be();
        const Bytes serial_hex = reader.take(serial_len);
        e.serial_key = from_hex(std::string_view(
            reinterpret_cast<const char*>(serial_hex.data()), serial_hex.size()));
        const uint32_t pk_len = reader.u32be();
        const Bytes pk_hex = reader.take(pk_len);
        e.public_key = from_hex(
            std::string_view(reinterpret_cast<const char*>(pk_hex.data()), pk_hex.size()));
        e.timestamp = reader.u64be();
        entries.push_back(std::move(e));
    }
    return entries;
}

Hash256 compute_pow_hash(const Block& block) {
    const Bytes entries_blob = serialize_entries(block.entries);
    Bytes preimage;
    preimage.reserve(32 + entries_blob.size() + 16);
    preimage.insert(preimage.end(), block.prev_hash.begin(), block.prev_hash.end());
    preimage.insert(preimage.end(), entries_blob.begin(), entries_blob.end());
    put_u64be(preimage, block.timestamp);
    put_u64be(preimage, block.nonce);
    return sha256(std::span<const uint8_t>(preimage.data(), preimage.size()));
}

Bytes serialize_block(const Block& block) {
    Bytes out;
    put_u64be(out, block.height);
    out.insert(out.end(), block.prev_hash.begin(), block.prev_hash.end());
    put_u64be(out, block.timestamp);
    put_u64be(out, block.nonce);
    const auto threshold = block.threshold.to_bytes();
    out.insert(out.end(), threshold.begin(), threshold.end());
    const Bytes entries = serialize_entries(block.entries);
    out.insert(out.end(), entries.begin(), entries.end());
    out.insert(out.end(), block.pow_hash.begin(), block.pow_hash.end());
    return out;
}

Block deserialize_block(std::span<const uint8_t> data) {
    ByteReader reader(data);
    Block b;
    b.height = reader.u64be();
    const Bytes prev = reader.take(32);
    std::copy(prev.begin(), prev.end(), b.prev_hash.begin());
    b.timestamp = reader.u64be();
    b.nonce = reader.u64be();
    const Bytes threshold = reader.take(32);
    b.threshold = U256::from_bytes(threshold);
    b.entries = deserialize_entries(reader);
    const Bytes pow = reader.take(32);
    std::copy(pow.begin(), pow.end(), b.pow_hash.begin());
    if (!reader.done())
        throw FormatError("trailing bytes after block record");
    return b;
}

std::vector<Bytes> descriptor_components(const Bytes& descriptor) {
    std::vector<Bytes> out;
    size_t pos = 0;
    while (pos < descriptor.size()) {
        if (pos + 2 > descriptor.size())
            throw FormatError("truncated descriptor component");
        const int bits = (descriptor[pos] << 8) | descriptor[pos + 1];
        const size_t len = 2 + static_cast<size_t>((bits + 7) / 8);
        if (pos + len > descriptor.size())
            throw FormatError("truncated descriptor component");
        out.emplace_back(descriptor.begin() + static_cast<ptrdiff_t>(pos),
                         descriptor.begin() + static_cast<ptrdiff_t>(pos + len));
        pos += len;
    }
    if (out.empty())
        throw FormatError("empty descriptor");
    return out;
}

U256 retargeted_threshold(const U256& current, uint64_t observed_ticks, uint64_t expected_ticks) {
    if (expected_ticks == 0)
        throw ConfigError("retarget with zero expected ticks");
    uint64_t num = observed_ticks;
    uint64_t den = expected_ticks;
    if (num >= den && num / den >= 4) {
        num = 4;
        den = 1;
    } else if (num == 0 || (num < den && den / num >= 4)) {
        num = 1;
        den = 4;
    }
    U256 next = current.scaled(num, den);
    if (next.is_zero())
        next = U256::pow2(0);
    return next;
}

Chain::Chain(ChainConfig config) : config_(std::move(config)) {
    if (config_.t_block == 0 || config_.retarget_interval == 0)
        throw ConfigError("t_block and retarget_interval must be positive");
    if (config_.hash_name != "sha256")
        throw ConfigError("unsupported chain hash: " + config_.hash_name);
    Block genesis;
    genesis.height = 0;
    genesis.threshold = config_.initial_threshold;
    genesis.pow_hash = compute_pow_hash(genesis);
    by_hash_[genesis.pow_hash] = 0;
    blocks_.push_back(std::move(genesis));
    parent_of_.push_back(0);
    active_path_.push_back(0);
}

U256 Chain::threshold_for_child(size_t parent_index) const {
    const Block& parent = blocks_[parent_index];
    if (parent.height == 0 || parent.height % config_.retarget_interval != 0)
        return parent.threshold;
    const Block* window_start = ancestor(parent_index, config_.retarget_interval);
    const uint64_t observed = parent.timestamp - window_start->timestamp;
    const uint64_t expected =
        static_cast<uint64_t>(config_.retarget_interval) * config_.t_block;
    return retargeted_threshold(parent.threshold, observed, expected);
}

U256 Chain::current_threshold() const { return threshold_for_child(active_path_.back()); }

const Block* Chain::ancestor(size_t index, uint64_t steps_up) const {
    while (steps_up-- > 0) {
        if (blocks_[index].height == 0)
            throw Error("walked past genesis");
        index = parent_of_[index];
    }
    return &blocks_[index];
}

bool Chain::violates_branch_rules(size_t parent_index, const LedgerEntry& entry,
                                  AppendError* error) const {
    *error = AppendError::None;
    std::vector<Bytes> components;
    if (entry.tag == Tag::Bitcoin)
        components = descriptor_components(entry.serial_key);

    if (parent_index == active_path_.back()) {
        if (entry.tag == Tag::Shard) {
            if (shard_index_.count(entry.serial_key)) {
                *error = AppendError::DuplicateSerial;
                return true;
            }
        } else {
            if (bitcoin_index_.count(entry.serial_key)) {
                *error = AppendError::DuplicateSerial;
                return true;
            }
            for (const Bytes& c : components) {
                if (combined_shards_.count(c)) {
                    *error = AppendError::DuplicateDescriptorShard;
                    return true;
                }
            }
        }
        return false;
    }

    // Fork branch: validate against the ancestors of the given parent.
    for (size_t idx = parent_index;; idx = parent_of_[idx]) {
        for (const LedgerEntry& prior : blocks_[idx].entries) {
            if (prior.tag == entry.tag && prior.serial_key == entry.serial_key) {
                *error = AppendError::DuplicateSerial;
                return true;
            }
            if (entry.tag == Tag::Bitcoin && prior.tag == Tag::Bitcoin) {
                for (const Bytes& prior_c : descriptor_components(prior.serial_key))
                    for (const Bytes& c : components)
                        if (prior_c == c) {
                            *error = AppendError::DuplicateDescriptorShard;
                            return true;
                        }
            }
        }
        if (blocks_[idx].height == 0)
            break;
    }
    return false;
}

AppendResult Chain::append(Tag tag, Bytes serial_key, Bytes public_key, Rng& rng,
                           const std::function<void()>& between_batches) {
    LedgerEntry entry{tag, std::move(serial_key), std::move(public_key), 0};
    AppendError err = AppendError::None;
    if (violates_branch_rules(active_path_.back(), entry, &err))
        return {false, err, nullptr, 0};

    uint64_t trials = 0;
    while (true) {
        const size_t parent_index = active_path_.back();
        const Block& parent = blocks_[parent_index];
        const U256 threshold = threshold_for_child(parent_index);

        // Preimage layout: prev_hash | entries blob | timestamp | nonce.
        // The entry timestamp sits inside the blob and tracks the block
        // timestamp, so both u64 slots are patched per trial.
        const Bytes blob = serialize_entries({entry});
        const size_t entry_ts_offset = 32 + blob.size() - 8;
        Bytes preimage;
        preimage.reserve(32 + blob.size() + 16);
        preimage.insert(preimage.end(), parent.pow_hash.begin(), parent.pow_hash.end());
        preimage.insert(preimage.end(), blob.begin(), blob.end());
        const size_t block_ts_offset = preimage.size();
        put_u64be(preimage, 0);
        const size_t nonce_offset = preimage.size();
        put_u64be(preimage, 0);

        while (true) {
            if (trials >= config_.max_mine_trials)
                return {false, AppendError::MiningStalled, nullptr, trials};
            if (trials % kMineBatch == 0 && trials > 0) {
                if (between_batches)
                    between_batches();
                if (active_path_.back() != parent_index) {
                    // A competing block landed: restart transparently on the
                    // new tip, re-checking for an entry made stale by it.
                    if (violates_branch_rules(active_path_.back(), entry, &err))
                        return {false, err, nullptr, trials};
                    break;
                }
            }
            ++trials;
            ++now_;
            const uint64_t nonce = rng.next_u64();
            patch_u64be(preimage, entry_ts_offset, now_);
            patch_u64be(preimage, block_ts_offset, now_);
            patch_u64be(preimage, nonce_offset, nonce);
            const Hash256 h =
                sha256(std::span<const uint8_t>(preimage.data(), preimage.size()));
            if (!hash_below(h, threshold))
                continue;

            Block block;
            block.height = parent.height + 1;
            block.prev_hash = parent.pow_hash;
            block.timestamp = now_;
            block.nonce = nonce;
            block.threshold = threshold;
            entry.timestamp = now_;
            block.entries = {entry};
            block.pow_hash = h;
            if (submit_block(block) != Submit::ExtendedActive)
                throw Error("freshly mined block failed to extend the active chain");
            return {true, AppendError::None, &blocks_[active_path_.back()], trials};
        }
    }
}

std::optional<Block> Chain::try_seal(Tag tag, const Bytes& serial_key, const Bytes& public_key,
                                     uint64_t nonce, uint64_t tick) const {
    const size_t parent_index = active_path_.back();
    const Block& parent = blocks_[parent_index];
    Block block;
    block.height = parent.height + 1;
    block.prev_hash = parent.pow_hash;
    block.timestamp = tick;
    block.nonce = nonce;
    block.threshold = threshold_for_child(parent_index);
    block.entries = {LedgerEntry{tag, serial_key, public_key, tick}};
    block.pow_hash = compute_pow_hash(block);
    if (!hash_below(block.pow_hash, block.threshold))
        return std::nullopt;
    return block;
}

Chain::Submit Chain::submit_block(const Block& block) {
    if (by_hash_.count(block.pow_hash))
        return Submit::Rejected; // already known
    auto parent_it = by_hash_.find(block.prev_hash);
    if (parent_it == by_hash_.end())
        return Submit::Rejected;
    const size_t parent_index = parent_it->second;
    const Block& parent = blocks_[parent_index];
    if (block.height != parent.height + 1)
        return Submit::Rejected;
    if (block.threshold != threshold_for_child(parent_index))
        return Submit::Rejected;
    if (compute_pow_hash(block) != block.pow_hash)
        return Submit::Rejected;
    if (!hash_below(block.pow_hash, block.threshold))
        return Submit::Rejected;
    for (const LedgerEntry& e : block.entries) {
        if (e.timestamp != block.timestamp)
            return Submit::Rejected;
        AppendError err;
        if (violates_branch_rules(parent_index, e, &err))
            return Submit::Rejected;
    }

    const size_t index = blocks_.size();
    blocks_.push_back(block);
    by_hash_[block.pow_hash] = index;
    parent_of_.push_back(parent_index);

    if (block.height <= tip().height)
        return Submit::Fork; // first-seen tip keeps its place on ties
    if (parent_index == active_path_.back()) {
        extend_active_state(index);
        return Submit::ExtendedActive;
    }
    rebuild_active_state();
    return Submit::Reorg;
}

void Chain::extend_active_state(size_t block_index) {
    active_path_.push_back(block_index);
    for (const LedgerEntry& e : blocks_[block_index].entries) {
        if (e.tag == Tag::Shard) {
            shard_index_[e.serial_key] = block_index;
        } else {
            bitcoin_index_[e.serial_key] = block_index;
            for (const Bytes& c : descriptor_components(e.serial_key))
                combined_shards_[c] = block_index;
        }
    }
}

void Chain::rebuild_active_state() {
    // New best tip is the most recently attached strictly-highest block.
    size_t best = 0;
    for (size_t i = 0; i < blocks_.size(); ++i)
        if (blocks_[i].height > blocks_[best].height)
            best = i;
    std::vector<size_t> path;
    for (size_t idx = best;; idx = parent_of_[idx]) {
        path.push_back(idx);
        if (blocks_[idx].height == 0)
            break;
    }
    std::reverse(path.begin(), path.end());
    active_path_ = std::move(path);
    shard_index_.clear();
    bitcoin_index_.clear();
    combined_shards_.clear();
    std::vector<size_t> indices(active_path_.begin() + 1, active_path_.end());
    active_path_.resize(1);
    for (size_t idx : indices)
        extend_active_state(idx);
}

std::optional<Chain::LookupResult> Chain::lookup(Tag tag, const Bytes& serial_key) const {
    const auto& index = tag == Tag::Shard ? shard_index_ : bitcoin_index_;
    const auto it = index.find(serial_key);
    if (it == index.end())
        return std::nullopt;
    const Block& block = blocks_[it->second];
    for (const LedgerEntry& e : block.entries)
        if (e.tag == tag && e.serial_key == serial_key)
            return LookupResult{e.public_key, block.timestamp, block.height};
    return std::nullopt;
}

bool Chain::shard_already_combined(const Bytes& shard_serial_key) const {
    return combined_shards_.count(shard_serial_key) > 0;
}

uint64_t Chain::count_entries(Tag tag) const {
    return tag == Tag::Shard ? shard_index_.size() : bitcoin_index_.size();
}

uint64_t Chain::confirmations(const Hash256& pow_hash) const {
    const auto it = by_hash_.find(pow_hash);
    if (it == by_hash_.end())
        return 0;
    const Block& block = blocks_[it->second];
    if (block.height >= active_path_.size() || active_path_[block.height] != it->second)
        return 0; // abandoned branch
    return tip().height - block.height + 1;
}

std::vector<const Block*> Chain::active_blocks() const {
    std::vector<const Block*> out;
    out.reserve(active_path_.size());
    for (size_t idx : active_path_)
        out.push_back(&blocks_[idx]);
    return out;
}

const Block* Chain::find_block(const Hash256& pow_hash) const {
    const auto it = by_hash_.find(pow_hash);
    return it == by_hash_.end() ? nullptr : &blocks_[it->second];
}

Chain::AuditReport Chain::audit() const {
    auto fail = [](std::string detail) { return AuditReport{false, std::move(detail)}; };
    for (size_t i = 0; i < blocks_.size(); ++i) {
        const Block& b = blocks_[i];
        const Block round_trip = deserialize_block(serialize_block(b));
        if (compute_pow_hash(round_trip) != b.pow_hash)
            return fail("stored pow_hash does not reproduce from serialized contents at height " +
                        std::to_string(b.height));
        if (b.height == 0) {
            if (b.prev_hash != Hash256{} || i != 0)
                return fail("malformed genesis block");
            continue;
        }
        const auto parent_it = by_hash_.find(b.prev_hash);
        if (parent_it == by_hash_.end())
            return fail("orphan block in store");
        if (blocks_[parent_it->second].height + 1 != b.height)
            return fail("height does not follow parent");
        if (b.threshold != threshold_for_child(parent_it->second))
            return fail("threshold deviates from the retarget schedule");
        if (!hash_below(b.pow_hash, b.threshold))
            return fail("pow_hash not below its threshold");
        for (const LedgerEntry& e : b.entries)
            if (e.timestamp != b.timestamp)
                return fail("entry timestamp differs from block timestamp");
    }
    // Active-chain uniqueness, rebuilt from scratch.
    std::map<Bytes, int> shard_seen, bitcoin_seen, combined_seen;
    for (const Block* b : active_blocks()) {
        for (const LedgerEntry& e : b->entries) {
            if (e.tag == Tag::Shard) {
                if (shard_seen.count(e.serial_key))
                    return fail("duplicate shard serial on active chain");
                shard_seen[e.serial_key] = 1;
            } else {
                if (bitcoin_seen.count(e.serial_key))
                    return fail("duplicate bitcoin descriptor on active chain");
                bitcoin_seen[e.serial_key] = 1;
                for (const Bytes& c : descriptor_components(e.serial_key)) {
                    if (combined_seen.count(c))
                        return fail("shard combined into two bitcoins on active chain");
                    combined_seen[c] = 1;
                }
            }
        }
    }
    return AuditReport{};
}

double Chain::mean_interblock_ticks(uint64_t from_height) const {
    if (tip().height <= from_height)
        throw Error("not enough blocks to measure inter-block time");
    const Block& from = blocks_[active_path_[from_height]];
    return static_cast<double>(tip().timestamp - from.timestamp) /
           static_cast<double>(tip().height - from_height);
}

void Chain::save(std::ostream& out) const {
    Bytes header;
    header.insert(header.end(), std::begin(kChainMagic), std::end(kChainMagic));
    header.push_back(static_cast<uint8_t>(config_.hash_name.size()));
    header.insert(header.end(), config_.hash_name.begin(), config_.hash_name.end());
    put_u64be(header, config_.t_block);
    put_u32be(header, config_.retarget_interval);
    put_u64be(header, config_.max_mine_trials);
    const auto threshold = config_.initial_threshold.to_bytes();
    header.insert(header.end(), threshold.begin(), threshold.end());
    put_u64be(header, now_);
    put_u32be(header, static_cast<uint32_t>(blocks_.size()));
    out.write(reinterpret_cast<const char*>(header.data()),
              static_cast<std::streamsize>(header.size()));
    for (const Block& b : blocks_) {
        const Bytes record = serialize_block(b);
        Bytes framed;
        put_u32be(framed, static_cast<uint32_t>(record.size()));
        framed.insert(framed.end(), record.begin(), record.end());
        out.write(reinterpret_cast<const char*>(framed.data()),
                  static_cast<std::streamsize>(framed.size()));
    }
    if (!out)
        throw Error("failed to write chain log");
}

namespace {

Bytes read_exact(std::istream& in, size_t count) {
    Bytes buf(count);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(count));
    if (static_cast<size_t>(in.gcount()) != count)
        throw FormatError("truncated chain log");
    return buf;
}

} // namespace

Chain Chain::load(std::istream& in) {
    const Bytes magic = read_exact(in, sizeof(kChainMagic));
    if (!std::equal(magic.begin(), magic.end(), std::begin(kChainMagic)))
        throw FormatError("not a qbtc chain log");
    const uint8_t name_len = read_exact(in, 1)[0];
    const Bytes name = read_exact(in, name_len);
    ChainConfig config;
    config.hash_name.assign(name.begin(), name.end());
    {
        const Bytes fixed = read_exact(in, 8 + 4 + 8 + 32 + 8 + 4);
        ByteReader reader(fixed);
        config.t_block = reader.u64be();
        config.retarget_interval = reader.u32be();
        config.max_mine_trials = reader.u64be();
        config.initial_threshold = U256::from_bytes(reader.take(32));
        const uint64_t now = reader.u64be();
        const uint32_t count = reader.u32be();
        Chain chain(config);
        for (uint32_t i = 0; i < count; ++i) {
            const Bytes len_bytes = read_exact(in, 4);
            ByteReader len_reader(len_bytes);
            const Bytes record = read_exact(in, len_reader.u32be());
            const Block block = deserialize_block(record);
            if (i == 0) {
                if (serialize_block(block) != serialize_block(chain.genesis()))
                    throw FormatError("stored genesis does not match chain config");
                continue;
            }
            if (chain.submit_block(block) == Submit::Rejected)
                throw FormatError("invalid block record at index " + std::to_string(i));
        }
        chain.now_ = now;
        return chain;
    }
}

std::string Chain::to_jsonl() const {
    nlohmann::json header;
    header["format"] = "qbtc-chain-v1";
    header["hash"] = config_.hash_name;
    header["t_block"] = config_.t_block;
    header["retarget_interval"] = config_.retarget_interval;
    header["max_mine_trials"] = config_.max_mine_trials;
    header["initial_threshold"] = config_.initial_threshold.to_hex();
    header["now"] = now_;
    std::string out = header.dump() + "\n";
    for (const Block& b : blocks_) {
        nlohmann::json j;
        j["height"] = b.height;
        j["prev"] = hash_to_hex(b.prev_hash);
        j["timestamp"] = b.timestamp;
        j["nonce"] = b.nonce;
        j["threshold"] = b.threshold.to_hex();
        auto entries = nlohmann::json::array();
        for (const LedgerEntry& e : b.entries) {
            nlohmann::json ej;
            ej["tag"] = tag_name(e.tag);
            ej["serial"] = qbtc::to_hex(e.serial_key);
            ej["public_key"] = qbtc::to_hex(e.public_key);
            ej["timestamp"] = e.timestamp;
            entries.push_back(std::move(ej));
        }
        j["entries"] = std::move(entries);
        j["pow"] = hash_to_hex(b.pow_hash);
        out += j.dump() + "\n";
    }
    return out;
}

Chain Chain::from_jsonl(std::string_view text) {
    std::vector<nlohmann::json> lines;
    size_t start = 0;
    while (start < text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string_view::npos)
            end = text.size();
        const std::string_view line = text.substr(start, end - start);
        start = end + 1;
        if (line.empty())
            continue;
        lines.push_back(nlohmann::json::parse(line));
    }
    if (lines.empty())
        throw FormatError("empty chain dump");
    const nlohmann::json& header = lines.front();
    if (header.value("format", "") != "qbtc-chain-v1")
        throw FormatError("unknown chain dump format");
    ChainConfig config;
    config.hash_name = header.at("hash").get<std::string>();
    config.t_block = header.at("t_block").get<uint64_t>();
    config.retarget_interval = header.at("retarget_interval").get<uint32_t>();
    config.max_mine_trials = header.at("max_mine_trials").get<uint64_t>();
    config.initial_threshold = U256::from_hex(header.at("initial_threshold").get<std::string>());
    Chain chain(config);
    for (size_t i = 1; i < lines.size(); ++i) {
        const nlohmann::json& j = lines[i];
        Block b;
        b.height = j.at("height").get<uint64_t>();
        b.prev_hash = hash_from_hex(j.at("prev").get<std::string>());
        b.timestamp = j.at("timestamp").get<uint64_t>();
        b.nonce = j.at("nonce").get<uint64_t>();
        b.threshold = U256::from_hex(j.at("threshold").get<std::string>());
        for (const auto& ej : j.at("entries")) {
            LedgerEntry e;
            e.tag = ej.at("tag").get<std::string>() == "shard" ? Tag::Shard : Tag::Bitcoin;
            e.serial_key = from_hex(ej.at("serial").get<std::string>());
            e.public_key = from_hex(ej.at("public_key").get<std::string>());
            e.timestamp = ej.at("timestamp").get<uint64_t>();
            b.entries.push_back(std::move(e));
        }
        b.pow_hash = hash_from_hex(j.at("pow").get<std::string>());
        if (b.height == 0) {
            if (serialize_block(b) != serialize_block(chain.genesis()))
                throw FormatError("dumped genesis does not match chain config");
            continue;
        }
        if (chain.submit_block(b) == Submit::Rejected)
            throw FormatError("invalid block in chain dump at line " + std::to_string(i));
    }
    chain.now_ = header.at("now").get<uint64_t>();
    return chain;
}

} // namespace qbtc::ledger
