#include "qbtc/minischeme.hpp"

#include <cmath>

#include "qbtc/errors.hpp"

namespace qbtc::mini {

namespace {

constexpr std::string_view kSerialTag = "qbtc/serial";
constexpr std::string_view kSubspaceTag = "qbtc/subspace";

// A normalized state within loose tolerance; malformed inputs are a form
// rejection, not an exception.
bool plausibly_normalized(const qsim::QuantumState& rho) {
    return std::abs(rho.norm_squared() - 1.0) <= 1e-6;
}

} // namespace

Bytes Serial::canonical_bytes() const {
    Bytes out;
    put_u16be(out, static_cast<uint16_t>(bits));
    const int nbytes = (bits + 7) / 8;
    for (int i = nbytes - 1; i >= 0; --i)
        out.push_back(static_cast<uint8_t>(value >> (8 * i)));
    return out;
}

Serial Serial::from_canonical_bytes(std::span<const uint8_t> data) {
    ByteReader reader(data);
    Serial s;
    s.bits = reader.u16be();
    if (s.bits < 1 || s.bits > 60)
        throw FormatError("serial bit length out of range");
    const int nbytes = (s.bits + 7) / 8;
    for (const uint8_t b : reader.take(static_cast<size_t>(nbytes)))
        s.value = (s.value << 8) | b;
    if (!reader.done())
        throw FormatError("trailing bytes after serial");
    if (s.bits < 64 && (s.value >> s.bits) != 0)
        throw FormatError("serial value wider than declared bit length");
    return s;
}

std::string Serial::to_hex() const {
    const int nbytes = (bits + 7) / 8;
    Bytes raw;
    raw.reserve(static_cast<size_t>(nbytes));
    for (int i = nbytes - 1; i >= 0; --i)
        raw.push_back(static_cast<uint8_t>(value >> (8 * i)));
    return qbtc::to_hex(raw);
}

Serial Serial::from_hex(int bits, std::string_view hex) {
    Bytes raw = qbtc::from_hex(hex);
    if (static_cast<int>(raw.size()) != (bits + 7) / 8)
        throw FormatError("serial hex has wrong width");
    Serial s;
    s.bits = bits;
    for (uint8_t b : raw)
        s.value = (s.value << 8) | b;
    if (bits < 64 && (s.value >> bits) != 0)
        throw FormatError("serial value wider than declared bit length");
    return s;
}

const char* verify_stage_name(VerifyStage stage) {
    switch (stage) {
    case VerifyStage::Form:
        return "form";
    case VerifyStage::SerialCheck:
        return "serial";
    case VerifyStage::Quantum:
        return "quantum";
    case VerifyStage::Accepted:
        return "accepted";
    }
    return "unknown";
}

OracleRegistry::OracleRegistry(const Hash256& genesis_seed, int n) : seed_(genesis_seed), n_(n) {
    if (n < 4 || n > gf2::kMaxAmbientDim || n % 2 != 0)
        throw ConfigError("oracle security parameter must be even and within [4, 20]");
}

Serial OracleRegistry::derive_serial(uint32_t r) const {
    Sha256 h;
    h.update(std::span<const uint8_t>(seed_.data(), seed_.size()));
    h.update(kSerialTag);
    h.update_u32be(r);
    const Hash256 digest = h.finish();
    Serial s;
    s.bits = serial_bits();
    s.value = load_u64be(digest.data()) >> (64 - s.bits);
    return s;
}

gf2::Subspace OracleRegistry::derive_subspace(uint32_t r) const {
    Sha256 h;
    h.update(std::span<const uint8_t>(seed_.data(), seed_.size()));
    h.update(kSubspaceTag);
    h.update_u32be(r);
    const Hash256 digest = h.finish();
    Rng rng(load_u64be(digest.data()));
    return gf2::sample_subspace(n_, n_ / 2, rng);
}

std::optional<OracleRegistry::GenResult> OracleRegistry::generate_state(uint32_t r) {
    if (n_ < 32 && (r >> n_) != 0)
        throw DimensionError("mint key r must be an n-bit string");
    const Serial s = derive_serial(r);
    auto it = table_.find(s.value);
    if (it != table_.end()) {
        if (it->second.r.has_value() && *it->second.r == r)
            return GenResult{s, it->second.space};
        return std::nullopt; // serial collision with a different r: resample
    }
    gf2::Subspace space = derive_subspace(r);
    gf2::Subspace complement = space.orthogonal_complement();
    table_.emplace(s.value, Entry{r, space, std::move(complement)});
    return GenResult{s, std::move(space)};
}

bool OracleRegistry::verify_serial(const Serial& s) const {
    if (s.bits != serial_bits())
        throw FormatError("serial has wrong bit length for this oracle");
    queries_.fetch_add(1, std::memory_order_relaxed);
    return table_.find(s.value) != table_.end();
}

MintedShard OracleRegistry::mint_m(Rng& rng) {
    // Collisions only block an r whose serial is owned by another key, so a
    // handful of retries always finds a mintable r at desk scale.
    const int max_attempts = 1 << (n_ + 2);
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        const uint32_t r = rng.bits(n_);
        if (auto gen = generate_state(r))
            return MintedShard{gen->serial, qsim::build_subspace_state(gen->subspace)};
    }
    throw Error("mint_m failed to find a collision-free serial");
}

const OracleRegistry::Entry* OracleRegistry::find(const Serial& s) const {
    auto it = table_.find(s.value);
    return it == table_.end() ? nullptr : &it->second;
}

VerifyOutcome OracleRegistry::verify_m(const Serial& s, const qsim::QuantumState& rho,
                                       Rng& rng) const {
    if (s.bits != serial_bits() || rho.n != n_ || !plausibly_normalized(rho))
        return {false, VerifyStage::Form, 0.0, rho};
    if (!verify_serial(s))
        return {false, VerifyStage::SerialCheck, 0.0, rho};
    const Entry* entry = find(s);
    queries_.fetch_add(1, std::memory_order_relaxed);
    auto sampled = qsim::sample_verify(entry->space, entry->complement, rho, rng);
    return {sampled.accepted, sampled.accepted ? VerifyStage::Accepted : VerifyStage::Quantum,
            sampled.accept_probability, std::move(sampled.post_state)};
}

VerifyOutcome OracleRegistry::verify_m_analytic(const Serial& s,
                                                const qsim::QuantumState& rho) const {
    if (s.bits != serial_bits() || rho.n != n_ || !plausibly_normalized(rho))
        return {false, VerifyStage::Form, 0.0, rho};
    if (!verify_serial(s))
        return {false, VerifyStage::SerialCheck, 0.0, rho};
    const Entry* entry = find(s);
    queries_.fetch_add(1, std::memory_order_relaxed);
    auto outcome = qsim::verify_state(entry->space, entry->complement, rho);
    return {outcome.accepted, outcome.accepted ? VerifyStage::Accepted : VerifyStage::Quantum,
            outcome.probability, std::move(outcome.post_state)};
}

bool OracleRegistry::verify_2(const Serial& s, const qsim::QuantumState& rho1,
                              const qsim::QuantumState& rho2, Rng& rng) const {
    const VerifyOutcome first = verify_m(s, rho1, rng);
    const VerifyOutcome second = verify_m(s, rho2, rng);
    return first.accepted && second.accepted;
}

int OracleRegistry::count_accepting(const std::vector<Candidate>& candidates, Rng& rng) const {
    int count = 0;
    for (const Candidate& c : candidates)
        if (verify_m(c.serial, c.state, rng).accepted)
            ++count;
    return count;
}

const gf2::Subspace& lab_subspace_of(const OracleRegistry& reg, const Serial& s) {
    const OracleRegistry::Entry* entry = reg.find(s);
    if (entry == nullptr)
        throw Error("serial not registered");
    return entry->space;
}

std::vector<std::pair<Serial, const gf2::Subspace*>> lab_entries(const OracleRegistry& reg) {
    std::vector<std::pair<Serial, const gf2::Subspace*>> out;
    out.reserve(reg.table_.size());
    for (const auto& [value, entry] : reg.table_)
        out.emplace_back(Serial{value, reg.serial_bits()}, &entry.space);
    return out;
}

void lab_force_register(OracleRegistry& reg, const Serial& s, gf2::Subspace space) {
    if (s.bits != reg.serial_bits())
        throw FormatError("serial has wrong bit length for this oracle");
    gf2::Subspace complement = space.orthogonal_complement();
    reg.table_.insert_or_assign(s.value,
                                OracleRegistry::Entry{std::nullopt, std::move(space),
                                                      std::move(complement)});
}

namespace lab {

qsim::QuantumState prepare_state(const OracleRegistry& reg, const Serial& s) {
    return qsim::build_subspace_state(lab_subspace_of(reg, s));
}

const gf2::Subspace& subspace_of(const OracleRegistry& reg, const Serial& s) {
    return lab_subspace_of(reg, s);
}

std::string export_registry_jsonl(const OracleRegistry& reg) {
    std::string out;
    for (const auto& [serial, space] : lab_entries(reg)) {
        out += "{\"serial\":\"" + serial.to_hex() + "\",\"bits\":" + std::to_string(serial.bits) +
               ",\"basis\":[";
        const auto& rows = space->basis_rref();
        for (size_t i = 0; i < rows.size(); ++i) {
            if (i > 0)
                out += ',';
            out += '"' + rows[i].to_hex() + '"';
        }
        out += "]}\n";
    }
    return out;
}

OracleRegistry import_registry_jsonl(const Hash256& genesis_seed, int n, std::string_view text) {
    OracleRegistry reg(genesis_seed, n);
    size_t start = 0;
    while (start < text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string_view::npos)
            end = text.size();
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        if (line.empty())
            continue;
        // Minimal fixed-shape parse; the exporter above is the only writer.
        auto field = [&](std::string_view key) -> std::string_view {
            const std::string pattern = "\"" + std::string(key) + "\":";
            const size_t at = line.find(pattern);
            if (at == std::string_view::npos)
                throw FormatError("registry line missing field: " + std::string(key));
            return line.substr(at + pattern.size());
        };
        std::string_view serial_part = field("serial");
        if (serial_part.size() < 2 || serial_part[0] != '"')
            throw FormatError("malformed serial field");
        const size_t serial_close = serial_part.find('"', 1);
        const std::string serial_hex(serial_part.substr(1, serial_close - 1));
        std::string_view basis_part = field("basis");
        const size_t open = basis_part.find('[');
        const size_t close = basis_part.find(']');
        if (open == std::string_view::npos || close == std::string_view::npos || close < open)
            throw FormatError("malformed basis field");
        std::vector<gf2::BitVec> rows;
        size_t pos = open + 1;
        while (pos < close) {
            const size_t q1 = basis_part.find('"', pos);
            if (q1 == std::string_view::npos || q1 >= close)
                break;
            const size_t q2 = basis_part.find('"', q1 + 1);
            rows.push_back(gf2::BitVec::from_hex(n, basis_part.substr(q1 + 1, q2 - q1 - 1)));
            pos = q2 + 1;
        }
        lab_force_register(reg, Serial::from_hex(3 * n, serial_hex),
                           gf2::Subspace(n, std::move(rows)));
    }
    return reg;
}

void force_register(OracleRegistry& reg, const Serial& s, gf2::Subspace space) {
    lab_force_register(reg, s, std::move(space));
}

} // namespace lab

} // namespace qbtc::mini
