#include "qbtc/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "qbtc/analytics.hpp"
#include "qbtc/errors.hpp"
#include "qbtc/ledger.hpp"
#include "qbtc/minischeme.hpp"
#include "qbtc/protocol.hpp"
#include "qbtc/simnet.hpp"

namespace qbtc::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Collects output files and their hashes for the run manifest.
class OutputSink {
  public:
    explicit OutputSink(std::string dir) : dir_(std::move(dir)) {
        fs::create_directories(dir_);
    }

    std::string write(const std::string& name, const std::string& content) {
        const fs::path path = fs::path(dir_) / name;
        std::ofstream out(path, std::ios::binary);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out)
            throw Error("failed to write " + path.string());
        hashes_[name] = hash_to_hex(sha256(content));
        return path.string();
    }

    const std::string& dir() const { return dir_; }

    json outputs_json() const {
        json out = json::object();
        for (const auto& [name, hash] : hashes_)
            out[name] = hash;
        return out;
    }

  private:
    std::string dir_;
    std::map<std::string, std::string> hashes_;
};

void write_manifest(OutputSink& sink, const std::string& command, uint64_t seed,
                    const std::string& config_text, json params, uint64_t start_tick,
                    uint64_t end_tick) {
    json manifest;
    manifest["format"] = "qbtc-manifest-v1";
    manifest["command"] = command;
    manifest["seed"] = seed;
    manifest["config"] = config_text;
    manifest["config_hash"] = hash_to_hex(sha256(config_text));
    manifest["params"] = std::move(params);
    manifest["start_tick"] = start_tick;
    manifest["end_tick"] = end_tick;
    manifest["outputs"] = sink.outputs_json();
    sink.write("manifest.json", manifest.dump(2) + "\n");
}

std::string coin_file_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "coin_%03d.json", index);
    return buf;
}

json coin_to_json(const proto::QuantumBitcoin& coin, const proto::ProtocolConfig& config,
                  bool with_states) {
    json j;
    j["format"] = "qbtc-coin-v1";
    j["config"] = config.canonical_text();
    j["descriptor"] = to_hex(coin.descriptor_bytes());
    j["descriptor_signature"] = coin.descriptor_signature.to_hex();
    json shards = json::array();
    for (const proto::QuantumShard& s : coin.shards) {
        json sj;
        sj["serial"] = s.serial.to_hex();
        sj["serial_bits"] = s.serial.bits;
        sj["signature"] = s.signature.to_hex();
        sj["mint_time"] = s.mint_time;
        if (with_states) {
            json amps = json::array();
            for (size_t i = 0; i < s.state.amps.size(); ++i) {
                const auto& a = s.state.amps[i];
                if (std::abs(a.real()) <= 1e-15 && std::abs(a.imag()) <= 1e-15)
                    continue;
                amps.push_back(json::array({i, a.real(), a.imag()}));
            }
            sj["state"] = std::move(amps);
        }
        shards.push_back(std::move(sj));
    }
    j["shards"] = std::move(shards);
    return j;
}

struct LoadedCoin {
    proto::QuantumBitcoin coin;
    proto::ProtocolConfig config;
    bool has_states = false;
};

LoadedCoin coin_from_json(const json& j) {
    if (j.value("format", "") != "qbtc-coin-v1")
        throw FormatError("not a qbtc coin file");
    LoadedCoin loaded;
    loaded.config = proto::ProtocolConfig::from_kv_text(j.at("config").get<std::string>());
    loaded.has_states = true;
    for (const json& sj : j.at("shards")) {
        proto::QuantumShard shard;
        shard.serial = mini::Serial::from_hex(sj.at("serial_bits").get<int>(),
                                              sj.at("serial").get<std::string>());
        shard.signature = sigs::Signature::from_hex(sj.at("signature").get<std::string>());
        shard.mint_time = sj.at("mint_time").get<uint64_t>();
        if (sj.contains("state")) {
            shard.state = qsim::QuantumState::zero_sentinel(loaded.config.n);
            for (const json& amp : sj.at("state")) {
                const size_t index = amp.at(0).get<size_t>();
                if (index >= shard.state.amps.size())
                    throw FormatError("state index out of range in coin file");
                shard.state.amps[index] =
                    qsim::Amplitude(amp.at(1).get<double>(), amp.at(2).get<double>());
            }
        } else {
            loaded.has_states = false;
        }
        loaded.coin.shards.push_back(std::move(shard));
    }
    loaded.coin.descriptor_signature =
        sigs::Signature::from_hex(j.at("descriptor_signature").get<std::string>());
    return loaded;
}

// Mints shards until a coin can be assembled, then the coin itself.
proto::CoinMintResult mint_one_coin(ledger::Chain& chain, mini::OracleRegistry& registry,
                                    const proto::ProtocolConfig& config,
                                    proto::Marketplace& market, Rng& rng) {
    const int max_rounds = 8 * config.m + 64;
    for (int round = 0; round < max_rounds; ++round) {
        while (market.fresh_count(chain.now(), config.t_max) <
               static_cast<size_t>(config.m)) {
            auto shard = proto::mint_shard(chain, registry, config, market, rng);
            if (!shard.ok) {
                proto::CoinMintResult failed;
                failed.failure = shard.failure;
                return failed;
            }
        }
        auto coin = proto::mint_bitcoin(chain, registry, config, market, rng);
        if (coin.ok || coin.failure != proto::MintFailure::InsufficientFreshShards)
            return coin;
        // Shards aged out between publication and selection; mint more.
    }
    proto::CoinMintResult failed;
    failed.failure = proto::MintFailure::InsufficientFreshShards;
    return failed;
}

int exit_code_for(proto::MintFailure failure) {
    switch (failure) {
    case proto::MintFailure::SupplyCapReached:
    case proto::MintFailure::MiningStalled:
    case proto::MintFailure::SerialSpaceExhausted:
    case proto::MintFailure::InsufficientFreshShards:
        return kResource;
    case proto::MintFailure::DescriptorConflict:
        return kRejected;
    case proto::MintFailure::None:
        return kOk;
    }
    return kInternal;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ','))
        out.push_back(std::stoi(item));
    return out;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ','))
        out.push_back(std::stod(item));
    return out;
}

// ---------------------------------------------------------------------------
// Command runners. Each takes fully resolved parameters so `replay` can
// re-execute a manifest byte for byte.
// ---------------------------------------------------------------------------

int run_mint(const proto::ProtocolConfig& config, int count, bool with_states,
             const std::string& out_dir) {
    config.validate();
    OutputSink sink(out_dir);
    mini::OracleRegistry registry(config.registry_seed(), config.n);
    ledger::Chain chain(config.chain_config());
    proto::Marketplace market;
    Rng rng(config.seed);
    const uint64_t start_tick = chain.now();

    std::vector<std::string> descriptors;
    for (int i = 0; i < count; ++i) {
        auto minted = mint_one_coin(chain, registry, config, market, rng);
        if (!minted.ok) {
            std::cerr << "mint failed: " << proto::mint_failure_name(minted.failure) << "\n";
            return exit_code_for(minted.failure);
        }
        const proto::QuantumBitcoin& coin = minted.token.coin();
        sink.write(coin_file_name(i), coin_to_json(coin, config, with_states).dump(2) + "\n");
        descriptors.push_back(to_hex(coin.descriptor_bytes()));
    }

    std::ostringstream chain_bytes;
    chain.save(chain_bytes);
    sink.write("chain.qbc", chain_bytes.str());
    sink.write("registry.jsonl", mini::lab::export_registry_jsonl(registry));

    json params;
    params["count"] = count;
    params["with_states"] = with_states;
    write_manifest(sink, "mint", config.seed, config.canonical_text(), std::move(params),
                   start_tick, chain.now());
    for (size_t i = 0; i < descriptors.size(); ++i)
        std::cout << "coin " << i << " descriptor " << descriptors[i] << "\n";
    std::cout << "minted " << count << " coin(s), chain height " << chain.height() << ", outputs in "
              << sink.dir() << "\n";
    return kOk;
}

int run_verify(const std::string& chain_path, const std::string& registry_path,
               const std::string& coin_path, uint64_t seed) {
    std::ifstream chain_in(chain_path, std::ios::binary);
    if (!chain_in)
        throw FormatError("cannot open chain file: " + chain_path);
    ledger::Chain chain = ledger::Chain::load(chain_in);

    LoadedCoin loaded = coin_from_json(json::parse(read_file(coin_path)));
    if (!loaded.has_states)
        throw FormatError("coin file has no state dumps; re-export with states enabled");
    const proto::ProtocolConfig& config = loaded.config;
    config.validate();
    mini::OracleRegistry registry = mini::lab::import_registry_jsonl(
        config.registry_seed(), config.n, read_file(registry_path));

    proto::QuantumBitcoin coin = std::move(loaded.coin);
    Rng rng(seed);
    const proto::CoinVerifyReport report = verify_q(chain, registry, config, coin, rng);

    json out;
    out["accepted"] = report.accepted;
    out["stage"] = proto::reject_stage_name(report.stage);
    out["quantum_passes"] = report.quantum_passes;
    out["quantum_threshold"] = report.quantum_threshold;
    // Read-only command: the manifest rides inside the report.
    json manifest;
    manifest["command"] = "verify";
    manifest["seed"] = seed;
    manifest["chain"] = chain_path;
    manifest["registry"] = registry_path;
    manifest["coin"] = coin_path;
    manifest["config_hash"] = hash_to_hex(sha256(config.canonical_text()));
    out["manifest"] = std::move(manifest);
    json per_shard = json::array();
    for (size_t i = 0; i < report.shard_passed.size(); ++i)
        per_shard.push_back(json{{"passed", static_cast<bool>(report.shard_passed[i])},
                                 {"probability", report.shard_probability[i]}});
    out["shards"] = std::move(per_shard);
    std::cout << out.dump(2) << "\n";
    return report.accepted ? kOk : kRejected;
}

int run_simulate(const proto::ProtocolConfig& config, int miners, uint64_t duration, bool stress,
                 const std::string& out_dir) {
    config.validate();
    OutputSink sink(out_dir);
    simnet::NetworkConfig net;
    net.protocol = config;
    net.miners = miners;
    net.duration = duration;
    net.ledger_stress = stress;
    simnet::NetworkResult result = simnet::run_honest_network(net, config.seed);

    std::ostringstream chain_bytes;
    result.chain->save(chain_bytes);
    sink.write("chain.qbc", chain_bytes.str());
    sink.write("events.jsonl", result.log.to_jsonl());

    json stats;
    stats["blocks_found"] = result.blocks_found;
    stats["forks"] = result.forks;
    stats["shards_published"] = result.shards_published;
    stats["coins_minted"] = result.coins_minted;
    stats["chain_height"] = result.chain->height();
    stats["event_log_digest"] = hash_to_hex(result.log.digest());
    if (result.chain->height() >= 2)
        stats["mean_interblock_ticks"] = result.chain->mean_interblock_ticks(0);
    sink.write("stats.json", stats.dump(2) + "\n");

    json params;
    params["miners"] = miners;
    params["duration"] = duration;
    params["stress"] = stress;
    write_manifest(sink, "simulate", config.seed, config.canonical_text(), std::move(params), 0,
                   result.chain->now());
    std::cout << stats.dump(2) << "\n";
    return kOk;
}

int run_attack(const proto::ProtocolConfig& config, int k, int m, double p, int shard_exponent,
               uint64_t trials, int threads, uint64_t seed, const std::string& format,
               const std::string& out_dir) {
    analytics::ReuseBoundInput input;
    input.k = k;
    input.m = m;
    input.p = p;
    input.epsilon = config.epsilon;
    input.shard_exponent = shard_exponent;
    input.validate();

    OutputSink sink(out_dir);
    const simnet::AttackReport report =
        simnet::run_reuse_attack_trials(input, trials, seed, threads);
    sink.write("attack_report.json", report.to_json() + "\n");
    sink.write("attack_report.csv", simnet::AttackReport::csv_header() + report.csv_row());

    json params;
    params["k"] = k;
    params["m"] = m;
    params["p"] = p;
    params["shard_exponent"] = shard_exponent;
    params["trials"] = trials;
    params["threads"] = 0; // replay may pick its own worker count; counts are split-invariant
    params["attack_seed"] = seed;
    params["format"] = format;
    write_manifest(sink, "attack", seed, config.canonical_text(), std::move(params), 0, 0);

    if (format == "csv") {
        std::cout << simnet::AttackReport::csv_header() << report.csv_row();
    } else {
        std::cout << report.to_json() << "\n";
    }
    char line[256];
    std::snprintf(line, sizeof(line),
                  "measured %.3e vs bound %.3e (%s; p limit %.4f)\n", report.measured_rate,
                  report.bound, report.admissible ? "admissible" : "bound not applicable",
                  report.p_limit);
    std::cout << line;
    return kOk;
}

int run_bound(const std::vector<int>& k_list, const std::vector<double>& gamma_list,
              const std::vector<double>& p_list, double epsilon, const std::string& format,
              const std::string& out_dir) {
    const auto rows = analytics::bound_sweep(k_list, gamma_list, p_list, epsilon);
    OutputSink sink(out_dir);
    const std::string csv = analytics::sweep_csv(rows);
    sink.write("bound_sweep.csv", csv);

    json params;
    json k_json = json::array();
    for (int k : k_list)
        k_json.push_back(k);
    json gamma_json = json::array();
    for (double g : gamma_list)
        gamma_json.push_back(g);
    json p_json = json::array();
    for (double p : p_list)
        p_json.push_back(p);
    params["k_list"] = std::move(k_json);
    params["gamma_list"] = std::move(gamma_json);
    params["p_list"] = std::move(p_json);
    params["epsilon"] = epsilon;
    params["format"] = format;
    write_manifest(sink, "bound", 0, "", std::move(params), 0, 0);

    if (format == "csv")
        std::cout << csv;
    for (double gamma : gamma_list) {
        const double p_limit = gamma / (2.0 * std::exp(1.0) + gamma);
        char line[128];
        std::snprintf(line, sizeof(line), "gamma %.3f: admissible p < %.4f\n", gamma, p_limit);
        std::cout << line;
    }
    return kOk;
}

int run_longevity(const proto::ProtocolConfig& config, uint64_t rounds, double epsilon_perturb,
                  double threshold, const std::string& out_dir) {
    config.validate();
    if (epsilon_perturb < 0.0 || epsilon_perturb >= 1.0)
        throw ConfigError("perturbation epsilon must lie in [0, 1)");
    OutputSink sink(out_dir);
    mini::OracleRegistry registry(config.registry_seed(), config.n);
    ledger::Chain chain(config.chain_config());
    proto::Marketplace market;
    Rng rng(config.seed);

    auto minted = mint_one_coin(chain, registry, config, market, rng);
    if (!minted.ok) {
        std::cerr << "mint failed: " << proto::mint_failure_name(minted.failure) << "\n";
        return exit_code_for(minted.failure);
    }
    proto::QuantumBitcoin& coin = minted.token.coin();
    std::vector<qsim::QuantumState> states;
    states.reserve(coin.shards.size());
    for (const proto::QuantumShard& s : coin.shards)
        states.push_back(s.state);

    const double angle = std::asin(std::sqrt(epsilon_perturb));
    const auto verifier = [&](size_t index, const qsim::QuantumState& state) {
        const mini::VerifyOutcome outcome =
            registry.verify_m_analytic(coin.shards[index].serial, state);
        return qsim::MeasurementOutcome{outcome.accepted, outcome.probability,
                                        outcome.post_state};
    };
    const analytics::LongevityReport report =
        analytics::run_longevity(states, verifier, rounds, angle, threshold);
    sink.write("longevity.json", report.to_json() + "\n");

    json params;
    params["rounds"] = rounds;
    params["epsilon_perturb"] = epsilon_perturb;
    params["threshold"] = threshold;
    write_manifest(sink, "longevity", config.seed, config.canonical_text(), std::move(params), 0,
                   chain.now());
    std::cout << "longevity: " << report.survived_rounds << " round(s) survived, cumulative "
              << report.cumulative_distance << ", worn_out " << (report.worn_out ? "yes" : "no")
              << "\n";
    return kOk;
}

int run_inspect(const std::string& coin_path, const std::string& chain_path, int shard_index) {
    if (!coin_path.empty()) {
        const json j = json::parse(read_file(coin_path));
        const LoadedCoin loaded = coin_from_json(j);
        if (shard_index >= 0) {
            if (shard_index >= static_cast<int>(loaded.coin.shards.size()))
                throw FormatError("shard index out of range");
            const auto& shard = loaded.coin.shards[static_cast<size_t>(shard_index)];
            std::cout << qsim::dump_jsonl(shard.state);
            return kOk;
        }
        json out;
        out["descriptor"] = to_hex(loaded.coin.descriptor_bytes());
        out["shards"] = loaded.coin.shards.size();
        out["has_states"] = loaded.has_states;
        json serials = json::array();
        for (const auto& s : loaded.coin.shards)
            serials.push_back(s.serial.to_hex());
        out["serials"] = std::move(serials);
        std::cout << out.dump(2) << "\n";
        return kOk;
    }
    if (!chain_path.empty()) {
        std::ifstream in(chain_path, std::ios::binary);
        if (!in)
            throw FormatError("cannot open chain file: " + chain_path);
        const ledger::Chain chain = ledger::Chain::load(in);
        json out;
        out["height"] = chain.height();
        out["blocks_stored"] = chain.block_count();
        out["tip"] = hash_to_hex(chain.tip().pow_hash);
        out["shard_entries"] = chain.count_entries(ledger::Tag::Shard);
        out["bitcoin_entries"] = chain.count_entries(ledger::Tag::Bitcoin);
        out["now"] = chain.now();
        const auto audit = chain.audit();
        out["audit_ok"] = audit.ok;
        if (!audit.ok)
            out["audit_detail"] = audit.detail;
        std::cout << out.dump(2) << "\n";
        return kOk;
    }
    throw ConfigError("inspect needs --coin or --chain");
}

int run_dump_chain(const std::string& chain_path, const std::string& out_path,
                   const std::string& from_jsonl, const std::string& to_bin) {
    if (!chain_path.empty()) {
        std::ifstream in(chain_path, std::ios::binary);
        if (!in)
            throw FormatError("cannot open chain file: " + chain_path);
        const ledger::Chain chain = ledger::Chain::load(in);
        const std::string jsonl = chain.to_jsonl();
        if (out_path.empty()) {
            std::cout << jsonl;
        } else {
            std::ofstream out(out_path, std::ios::binary);
            out << jsonl;
            if (!out)
                throw Error("failed to write " + out_path);
        }
        return kOk;
    }
    if (!from_jsonl.empty()) {
        if (to_bin.empty())
            throw ConfigError("--from-jsonl needs --to for the binary output");
        const ledger::Chain chain = ledger::Chain::from_jsonl(read_file(from_jsonl));
        std::ofstream out(to_bin, std::ios::binary);
        chain.save(out);
        return kOk;
    }
    throw ConfigError("dump-chain needs --chain or --from-jsonl");
}

int run_replay(const std::string& manifest_path, const std::string& out_dir) {
    const json manifest = json::parse(read_file(manifest_path));
    if (manifest.value("format", "") != "qbtc-manifest-v1")
        throw FormatError("not a qbtc manifest");
    const std::string command = manifest.at("command").get<std::string>();
    const json& params = manifest.at("params");
    const std::string config_text = manifest.at("config").get<std::string>();
    if (command == "mint") {
        const auto config = proto::ProtocolConfig::from_kv_text(config_text);
        return run_mint(config, params.at("count").get<int>(),
                        params.at("with_states").get<bool>(), out_dir);
    }
    if (command == "simulate") {
        const auto config = proto::ProtocolConfig::from_kv_text(config_text);
        return run_simulate(config, params.at("miners").get<int>(),
                            params.at("duration").get<uint64_t>(),
                            params.at("stress").get<bool>(), out_dir);
    }
    if (command == "attack") {
        const auto config = proto::ProtocolConfig::from_kv_text(config_text);
        return run_attack(config, params.at("k").get<int>(), params.at("m").get<int>(),
                          params.at("p").get<double>(), params.at("shard_exponent").get<int>(),
                          params.at("trials").get<uint64_t>(), 0,
                          params.at("attack_seed").get<uint64_t>(),
                          params.at("format").get<std::string>(), out_dir);
    }
    if (command == "bound") {
        return run_bound(params.at("k_list").get<std::vector<int>>(),
                         params.at("gamma_list").get<std::vector<double>>(),
                         params.at("p_list").get<std::vector<double>>(),
                         params.at("epsilon").get<double>(),
                         params.at("format").get<std::string>(), out_dir);
    }
    if (command == "longevity") {
        const auto config = proto::ProtocolConfig::from_kv_text(config_text);
        return run_longevity(config, params.at("rounds").get<uint64_t>(),
                             params.at("epsilon_perturb").get<double>(),
                             params.at("threshold").get<double>(), out_dir);
    }
    throw ConfigError("manifest command cannot be replayed: " + command);
}

struct ConfigFlags {
    std::string config_path;
    std::optional<int> n, m;
    std::optional<uint64_t> t_max, t_block, supply_cap, seed;
    std::optional<double> lambda, epsilon;

    proto::ProtocolConfig resolve() const {
        proto::ProtocolConfig cfg;
        if (!config_path.empty())
            cfg = proto::ProtocolConfig::from_file(config_path);
        if (n)
            cfg.n = *n;
        if (m)
            cfg.m = *m;
        if (t_max)
            cfg.t_max = *t_max;
        if (t_block)
            cfg.t_block = *t_block;
        if (lambda)
            cfg.lambda = *lambda;
        if (epsilon)
            cfg.epsilon = *epsilon;
        if (supply_cap)
            cfg.supply_cap = *supply_cap;
        if (seed)
            cfg.seed = *seed;
        return cfg;
    }
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
    cmd->add_option("--config", flags.config_path, "flat key-value config file");
    cmd->add_option("--n", flags.n, "security parameter n (even, 4..20)");
    cmd->add_option("--m", flags.m, "shards per coin");
    cmd->add_option("--t-max", flags.t_max, "max shard age in ticks");
    cmd->add_option("--t-block", flags.t_block, "target inter-block ticks");
    cmd->add_option("--lambda", flags.lambda, "verification slack lambda");
    cmd->add_option("--epsilon", flags.epsilon, "completeness error epsilon");
    cmd->add_option("--supply-cap", flags.supply_cap, "maximum coins ever minted");
    cmd->add_option("--seed", flags.seed, "rng seed (recorded in the manifest)");
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"qbtc: desk-scale Quantum Bitcoin protocol simulator"};
    app.require_subcommand(1);

    // mint
    ConfigFlags mint_flags;
    int mint_count = 1;
    bool mint_no_states = false;
    std::string mint_out = "qbtc-out";
    auto* mint_cmd = app.add_subcommand("mint", "mine shards and assemble quantum bitcoins");
    add_config_flags(mint_cmd, mint_flags);
    mint_cmd->add_option("--count", mint_count, "coins to mint");
    mint_cmd->add_flag("--no-states", mint_no_states,
                       "omit amplitude dumps from coin exports (they verify classically only)");
    mint_cmd->add_option("--out-dir", mint_out, "output directory");

    // verify
    std::string verify_chain, verify_registry, verify_coin;
    uint64_t verify_seed = 1;
    auto* verify_cmd = app.add_subcommand("verify", "verify an exported coin against a chain");
    verify_cmd->add_option("--chain", verify_chain, "chain log (binary)")->required();
    verify_cmd->add_option("--registry", verify_registry, "oracle registry export")->required();
    verify_cmd->add_option("--coin", verify_coin, "coin JSON file")->required();
    verify_cmd->add_option("--seed", verify_seed, "rng seed for the sampled measurements");

    // simulate
    ConfigFlags sim_flags;
    int sim_miners = 2;
    uint64_t sim_duration = 10'000;
    bool sim_stress = false;
    std::string sim_out = "qbtc-out";
    auto* sim_cmd = app.add_subcommand("simulate", "run the honest mining network");
    add_config_flags(sim_cmd, sim_flags);
    sim_cmd->add_option("--miners", sim_miners, "number of miners");
    sim_cmd->add_option("--duration", sim_duration, "ticks to simulate");
    sim_cmd->add_flag("--stress", sim_stress, "synthetic ledger entries (PoW statistics mode)");
    sim_cmd->add_option("--out-dir", sim_out, "output directory");

    // attack
    ConfigFlags attack_flags;
    std::optional<int> attack_k;
    std::optional<int> attack_m;
    double attack_p = 0.1;
    int attack_exponent = -1;
    uint64_t attack_trials = 100'000;
    int attack_threads = 0;
    std::string attack_format = "json";
    std::string attack_out = "qbtc-out";
    auto* attack_cmd = app.add_subcommand("attack", "Monte Carlo of the reuse attack");
    add_config_flags(attack_cmd, attack_flags);
    attack_cmd->add_option("--k", attack_k, "blocks per attack window (default t_max/t_block)");
    attack_cmd->add_option("--attack-m", attack_m, "shards per coin for the attack model");
    attack_cmd->add_option("--p", attack_p, "attacker hash-power fraction")->required();
    attack_cmd->add_option("--shard-exponent", attack_exponent,
                           "override the worst-case m-2 shard win requirement");
    attack_cmd->add_option("--trials", attack_trials, "Monte Carlo trials");
    attack_cmd->add_option("--threads", attack_threads, "worker threads (0 = auto)");
    attack_cmd->add_option("--format", attack_format, "stdout format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    attack_cmd->add_option("--out-dir", attack_out, "output directory");

    // bound
    std::string bound_k = "10,20,40";
    std::string bound_gamma = "0.3,0.5,1.0";
    std::string bound_p = "0.05,0.10,0.15";
    double bound_epsilon = 0.0;
    std::string bound_format = "csv";
    std::string bound_out = "qbtc-out";
    auto* bound_cmd = app.add_subcommand("bound", "closed-form reuse-attack bound sweep");
    bound_cmd->add_option("--k-list", bound_k, "comma-separated k values");
    bound_cmd->add_option("--gamma-list", bound_gamma, "comma-separated gamma values");
    bound_cmd->add_option("--p-list", bound_p, "comma-separated p values");
    bound_cmd->add_option("--epsilon", bound_epsilon, "completeness error epsilon");
    bound_cmd->add_option("--format", bound_format, "stdout format: json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    bound_cmd->add_option("--out-dir", bound_out, "output directory");

    // longevity
    ConfigFlags longevity_flags;
    uint64_t longevity_rounds = 10'000;
    double longevity_epsilon = 0.0;
    double longevity_threshold = 1e18;
    std::string longevity_out = "qbtc-out";
    auto* longevity_cmd =
        app.add_subcommand("longevity", "verify/reconstruct wear-out experiment");
    add_config_flags(longevity_cmd, longevity_flags);
    longevity_cmd->add_option("--rounds", longevity_rounds, "verification rounds");
    longevity_cmd->add_option("--perturb-epsilon", longevity_epsilon,
                              "per-round acceptance becomes 1 - epsilon");
    longevity_cmd->add_option("--threshold", longevity_threshold, "wear-out cutoff");
    longevity_cmd->add_option("--out-dir", longevity_out, "output directory");

    // inspect
    std::string inspect_coin, inspect_chain;
    int inspect_shard = -1;
    auto* inspect_cmd = app.add_subcommand("inspect", "summarize a coin or chain file");
    inspect_cmd->add_option("--coin", inspect_coin, "coin JSON file");
    inspect_cmd->add_option("--chain", inspect_chain, "chain log (binary)");
    inspect_cmd->add_option("--shard", inspect_shard, "dump this shard's amplitudes");

    // dump-chain
    std::string dump_chain_path, dump_out, dump_from_jsonl, dump_to;
    auto* dump_cmd = app.add_subcommand("dump-chain", "chain log to JSON-lines and back");
    dump_cmd->add_option("--chain", dump_chain_path, "binary chain log to dump");
    dump_cmd->add_option("--out", dump_out, "JSON-lines output path (default stdout)");
    dump_cmd->add_option("--from-jsonl", dump_from_jsonl, "JSON-lines dump to re-ingest");
    dump_cmd->add_option("--to", dump_to, "binary chain output path");

    // replay
    std::string replay_manifest, replay_out = "qbtc-replay";
    auto* replay_cmd = app.add_subcommand("replay", "re-execute a run from its manifest");
    replay_cmd->add_option("--manifest", replay_manifest, "manifest.json of a prior run")
        ->required();
    replay_cmd->add_option("--out-dir", replay_out, "output directory");

    std::vector<const char*> argv;
    argv.push_back("qbtc");
    for (const std::string& a : args)
        argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfigError;
    }

    try {
        if (mint_cmd->parsed())
            return run_mint(mint_flags.resolve(), mint_count, !mint_no_states, mint_out);
        if (verify_cmd->parsed())
            return run_verify(verify_chain, verify_registry, verify_coin, verify_seed);
        if (sim_cmd->parsed())
            return run_simulate(sim_flags.resolve(), sim_miners, sim_duration, sim_stress,
                                sim_out);
        if (attack_cmd->parsed()) {
            const auto config = attack_flags.resolve();
            const int k = attack_k.value_or(static_cast<int>(config.k()));
            const int m = attack_m.value_or(config.m);
            return run_attack(config, k, m, attack_p, attack_exponent, attack_trials,
                              attack_threads, config.seed, attack_format, attack_out);
        }
        if (bound_cmd->parsed())
            return run_bound(parse_int_list(bound_k), parse_double_list(bound_gamma),
                             parse_double_list(bound_p), bound_epsilon, bound_format, bound_out);
        if (longevity_cmd->parsed())
            return run_longevity(longevity_flags.resolve(), longevity_rounds, longevity_epsilon,
                                 longevity_threshold, longevity_out);
        if (inspect_cmd->parsed())
            return run_inspect(inspect_coin, inspect_chain, inspect_shard);
        if (dump_cmd->parsed())
            return run_dump_chain(dump_chain_path, dump_out, dump_from_jsonl, dump_to);
        if (replay_cmd->parsed())
            return run_replay(replay_manifest, replay_out);
        return kConfigError;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const FormatError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kIoError;
    } catch (const json::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kIoError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInternal;
    }
}

} // namespace qbtc::cli
