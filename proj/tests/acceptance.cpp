// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// fails. Every tolerance is pinned in code; all randomness is seeded, so a
// run is reproducible bit for bit.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qbtc/analytics.hpp"
#include "qbtc/cli.hpp"
#include "qbtc/errors.hpp"
#include "qbtc/ledger.hpp"
#include "qbtc/minischeme.hpp"
#include "qbtc/protocol.hpp"
#include "qbtc/qsim.hpp"
#include "qbtc/simnet.hpp"

using namespace qbtc;
namespace fs = std::filesystem;

namespace {

struct Check {
    bool ok = true;
    std::string detail;

    void fail(std::string why) {
        if (ok) {
            ok = false;
            detail = std::move(why);
        }
    }
    void require(bool condition, const std::string& why) {
        if (!condition)
            fail(why);
    }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

Hash256 acceptance_seed(uint64_t v) {
    Sha256 h;
    h.update("acceptance");
    h.update_u64be(v);
    return h.finish();
}

// ---------------------------------------------------------------------- C1
// Verifier law: measured acceptance probability of V_A equals |<psi|A>|^2
// within 1e-9, 100 random (A, psi) pairs at each n in {4, 6, 8}.
Check criterion_1() {
    Check check;
    Rng rng(101);
    for (int n : {4, 6, 8}) {
        for (int trial = 0; trial < 100; ++trial) {
            const auto space = gf2::sample_subspace(n, n / 2, rng);
            const auto psi = oracles::random_state(n, rng);
            const double measured = qsim::verify_state(space, psi).probability;
            const double expected = oracles::overlap_with_subspace_state(space, psi);
            if (std::abs(measured - expected) > 1e-9) {
                check.fail("n=" + std::to_string(n) + ": |" + fmt(measured) + " - " +
                           fmt(expected) + "| > 1e-9");
                return check;
            }
        }
    }
    check.detail = "300 random (A,psi) pairs within 1e-9";
    return check;
}

// ---------------------------------------------------------------------- C2
// Perfect mini-scheme completeness: 1000 honest mints verify with analytic
// probability exactly 1 (difference below 1e-12).
Check criterion_2() {
    Check check;
    Rng rng(202);
    int mints = 0;
    double worst = 0.0;
    for (int n : {4, 6, 8}) {
        mini::OracleRegistry registry(acceptance_seed(static_cast<uint64_t>(n)), n);
        const int count = n == 4 ? 334 : 333;
        for (int i = 0; i < count; ++i) {
            const auto minted = registry.mint_m(rng);
            const auto outcome = registry.verify_m(minted.serial, minted.state, rng);
            const double deviation = std::abs(outcome.probability - 1.0);
            worst = std::max(worst, deviation);
            check.require(outcome.accepted, "honest mint rejected");
            check.require(deviation < 1e-12, "completeness deviation " + fmt(deviation));
            ++mints;
        }
    }
    if (check.ok)
        check.detail = std::to_string(mints) + " mints, worst |p-1| = " + fmt(worst);
    return check;
}

// ---------------------------------------------------------------------- C3
// Duality identity H|A> = |A-perp> exhaustively over all dim-2 subspaces of
// F_2^4, max amplitude error <= 1e-9.
Check criterion_3() {
    Check check;
    // Enumerate every dim-2 subspace by brute force over generator pairs.
    std::vector<gf2::Subspace> spaces;
    std::vector<std::string> seen;
    for (uint32_t a = 1; a < 16; ++a) {
        for (uint32_t b = 1; b < 16; ++b) {
            if (a == b)
                continue;
            try {
                gf2::Subspace space(4, {gf2::BitVec(4, a), gf2::BitVec(4, b)});
                const std::string key = space.to_hex_lines();
                bool fresh = true;
                for (const auto& k : seen)
                    if (k == key)
                        fresh = false;
                if (fresh) {
                    seen.push_back(key);
                    spaces.push_back(space);
                }
            } catch (const DimensionError&) {
            }
        }
    }
    check.require(spaces.size() == 35, "expected 35 dim-2 subspaces of F_2^4, found " +
                                           std::to_string(spaces.size()));
    double worst = 0.0;
    for (const auto& space : spaces) {
        const auto lhs = qsim::hadamard_all(qsim::build_subspace_state(space));
        const auto rhs = qsim::build_subspace_state(space.orthogonal_complement());
        for (size_t i = 0; i < lhs.amps.size(); ++i)
            worst = std::max(worst, std::abs(lhs.amps[i] - rhs.amps[i]));
    }
    check.require(worst <= 1e-9, "max amplitude error " + fmt(worst));
    if (check.ok)
        check.detail = "35 subspaces, max amplitude error " + fmt(worst);
    return check;
}

// ---------------------------------------------------------------------- C4
// Desk-scale soundness: measure-and-reprepare forgeries pass Verify_2 with
// frequency <= 2^(-n/2) + 3 sigma at n = 8 over 10^5 trials.
Check criterion_4() {
    Check check;
    const int n = 8;
    const int trials = 100'000;
    const double bound = std::pow(2.0, -n / 2.0);
    const double sigma = std::sqrt(bound * (1.0 - bound) / trials);
    for (auto strategy : {qsim::lab::CloneStrategy::measure_computational,
                          qsim::lab::CloneStrategy::measure_hadamard,
                          qsim::lab::CloneStrategy::identity_copy_of_classical_outcome}) {
        mini::OracleRegistry registry(
            acceptance_seed(400 + static_cast<uint64_t>(strategy)), n);
        Rng rng(404);
        int accepted = 0;
        for (int i = 0; i < trials; ++i) {
            const auto minted = registry.mint_m(rng);
            auto [c1, c2] = qsim::lab::clone_attempt(minted.state, strategy, rng);
            if (registry.verify_2(minted.serial, c1, c2, rng))
                ++accepted;
        }
        const double freq = static_cast<double>(accepted) / trials;
        check.require(freq <= bound + 3.0 * sigma,
                      "forgery acceptance " + fmt(freq) + " exceeds " +
                          fmt(bound + 3.0 * sigma));
        if (check.ok)
            check.detail += (check.detail.empty() ? "" : "; ") + fmt(freq) + " <= " +
                            fmt(bound + 3.0 * sigma);
    }
    return check;
}

// ---------------------------------------------------------------------- C5
// Reuse-attack bound: (a) eta_exact equals exhaustive win-pattern
// enumeration for k <= 12; (b) Monte Carlo rate <= eta_bound on admissible
// grid points and within 3 sigma of the exact two-window value everywhere;
// (c) the gamma = 1 admissible-p limit reproduces 1/(2e+1) to 4 decimals.
Check criterion_5() {
    Check check;

    // (a) exact rational enumeration, p = 1/2 compared exactly.
    for (int k = 3; k <= 12; ++k) {
        for (int m = 2; m <= k + 2; ++m) {
            const auto input = analytics::ReuseBoundInput::make(k, m, 0.5);
            const long double enumerated = oracles::two_window_rational(
                k, 1, 2, [&](int wins) { return wins == m - 2; },
                [](int wins) { return wins == 1; });
            if (static_cast<long double>(analytics::eta_exact(input).eta) != enumerated) {
                check.fail("eta_exact mismatch at k=" + std::to_string(k) +
                           " m=" + std::to_string(m));
                return check;
            }
        }
    }

    // (b) Monte Carlo against bound and exact rate, 10^6 trials per cell.
    const uint64_t trials = 1'000'000;
    int admissible_cells = 0;
    for (int k : {10, 20, 40}) {
        for (double gamma : {0.3, 0.5, 1.0}) {
            const int m = static_cast<int>(std::lround(gamma * k)) + 2;
            for (double p : {0.05, 0.10, 0.15}) {
                const auto input = analytics::ReuseBoundInput::make(k, m, p);
                const auto report = simnet::run_reuse_attack_trials(input, trials, 505);
                const double exact = report.exact_rate;
                const double sigma =
                    std::sqrt(exact * (1.0 - exact) / static_cast<double>(trials));
                if (std::abs(report.measured_rate - exact) > 3.0 * sigma) {
                    check.fail("3-sigma miss at k=" + std::to_string(k) + " m=" +
                               std::to_string(m) + " p=" + fmt(p) + ": measured " +
                               fmt(report.measured_rate) + " exact " + fmt(exact));
                    return check;
                }
                if (report.admissible) {
                    ++admissible_cells;
                    if (report.measured_rate > report.bound) {
                        check.fail("measured " + fmt(report.measured_rate) +
                                   " above bound " + fmt(report.bound));
                        return check;
                    }
                }
                // The k=10, m=7, p=0.10 cell sits outside the admissible-p
                // window, yet the bound formula still dominates there.
                if (k == 10 && m == 7 && p == 0.10 &&
                    report.measured_rate > report.bound) {
                    check.fail("example cell exceeded the bound");
                    return check;
                }
            }
        }
    }
    check.require(admissible_cells >= 9, "expected at least 9 admissible grid cells");

    // (c) the admissible-p limit at gamma = 1.
    const auto bound = analytics::eta_bound(analytics::ReuseBoundInput::make(10, 12, 0.1));
    const double reference = 1.0 / (2.0 * std::exp(1.0) + 1.0);
    check.require(std::abs(bound.p_limit - reference) < 5e-5,
                  "p limit " + fmt(bound.p_limit) + " vs 1/(2e+1) = " + fmt(reference));
    if (check.ok)
        check.detail = "27 grid cells (" + std::to_string(admissible_cells) +
                       " admissible), p limit " + fmt(bound.p_limit);
    return check;
}

// ---------------------------------------------------------------------- C6
// Longevity: an ideal coin survives 10^4 verify/reconstruct rounds with
// cumulative trace distance 0; perturbed coins with per-round acceptance
// 1 - eps keep every recovered distance <= sqrt(eps) for eps in {.01, .04}.
Check criterion_6() {
    Check check;
    proto::ProtocolConfig config;
    config.n = 8;
    config.m = 3;
    config.seed = 606;
    config.initial_threshold_hex = ledger::U256::max_value().to_hex();
    mini::OracleRegistry registry(config.registry_seed(), config.n);
    ledger::Chain chain(config.chain_config());
    proto::Marketplace market;
    Rng rng(config.seed);
    while (market.fresh_count(chain.now(), config.t_max) < static_cast<size_t>(config.m)) {
        if (!proto::mint_shard(chain, registry, config, market, rng).ok) {
            check.fail("shard mint failed");
            return check;
        }
    }
    auto minted = proto::mint_bitcoin(chain, registry, config, market, rng);
    if (!minted.ok) {
        check.fail("coin mint failed");
        return check;
    }
    proto::QuantumBitcoin& coin = minted.token.coin();
    const auto verifier = [&](size_t index, const qsim::QuantumState& state) {
        const auto outcome = registry.verify_m_analytic(coin.shards[index].serial, state);
        return qsim::MeasurementOutcome{outcome.accepted, outcome.probability,
                                        outcome.post_state};
    };

    {
        std::vector<qsim::QuantumState> states;
        for (const auto& s : coin.shards)
            states.push_back(s.state);
        const auto report = analytics::run_longevity(states, verifier, 10'000, 0.0, 1e18);
        check.require(report.verifications == 10'000, "ideal coin did not finish");
        check.require(report.rejected_round == -1, "ideal coin rejected");
        check.require(report.cumulative_distance == 0.0,
                      "ideal cumulative distance " + fmt(report.cumulative_distance));
    }
    for (double eps : {0.01, 0.04}) {
        std::vector<qsim::QuantumState> states;
        for (const auto& s : coin.shards)
            states.push_back(s.state);
        const double angle = std::asin(std::sqrt(eps));
        const auto report = analytics::run_longevity(states, verifier, 2'000, angle, 1e18);
        check.require(report.verifications == 2'000, "perturbed coin did not finish");
        const double limit = std::sqrt(eps) + 1e-12;
        for (double d : report.trace_distances)
            if (d > limit) {
                check.fail("distance " + fmt(d) + " above sqrt(eps) = " + fmt(std::sqrt(eps)));
                break;
            }
    }
    if (check.ok)
        check.detail = "ideal cumulative 0; perturbed bounded by 0.1 and 0.2";
    return check;
}

// ---------------------------------------------------------------------- C7
// Ledger integrity and PoW statistics over a 10^4-block simulated run, plus
// the duplicate-append rules.
Check criterion_7() {
    Check check;
    simnet::NetworkConfig net;
    net.protocol.n = 8;
    net.protocol.m = 3;
    net.protocol.t_block = 600;
    net.protocol.t_max = 3600;
    net.protocol.seed = 707;
    net.protocol.retarget_interval = 64;
    net.protocol.initial_threshold_hex = ledger::U256::max_div(600).to_hex();
    net.miners = 1;
    net.duration = 6'350'000; // about 10,500 blocks at one trial per tick
    net.ledger_stress = true;
    net.event_cap = 0; // statistics run; block events are not retained
    const auto result = simnet::run_honest_network(net, net.protocol.seed);

    check.require(result.chain->height() >= 10'000,
                  "only " + std::to_string(result.chain->height()) + " blocks");
    const auto audit = result.chain->audit();
    check.require(audit.ok, "audit failed: " + audit.detail);

    const uint64_t burn_in = 2 * net.protocol.retarget_interval;
    const double mean = result.chain->mean_interblock_ticks(burn_in);
    check.require(std::abs(mean - 600.0) <= 0.05 * 600.0,
                  "mean inter-block " + fmt(mean) + " outside 600 +- 5%");

    // Duplicate rules, checked directly on a fresh chain.
    ledger::ChainConfig cfg;
    cfg.initial_threshold = ledger::U256::max_value();
    ledger::Chain chain(cfg);
    Rng rng(708);
    const Bytes serial{0x00, 0x18, 0xaa, 0xbb, 0xcc};
    const Bytes other{0x00, 0x18, 0xaa, 0xbb, 0xcd};
    const Bytes pk{0x01};
    check.require(chain.append(ledger::Tag::Shard, serial, pk, rng).ok, "first append failed");
    const auto dup = chain.append(ledger::Tag::Shard, serial, pk, rng);
    check.require(!dup.ok && dup.error == ledger::AppendError::DuplicateSerial,
                  "duplicate serial accepted");
    Bytes descriptor_one = serial;
    Bytes descriptor_two = serial;
    descriptor_two.insert(descriptor_two.end(), other.begin(), other.end());
    check.require(chain.append(ledger::Tag::Bitcoin, descriptor_one, pk, rng).ok,
                  "descriptor append failed");
    const auto shared = chain.append(ledger::Tag::Bitcoin, descriptor_two, pk, rng);
    check.require(!shared.ok && shared.error == ledger::AppendError::DuplicateDescriptorShard,
                  "shared-shard descriptor accepted");

    if (check.ok)
        check.detail = std::to_string(result.chain->height()) + " blocks, mean inter-block " +
                       fmt(mean) + ", audit clean, duplicates rejected";
    return check;
}

// ---------------------------------------------------------------------- C8
// Reproducibility: CLI runs re-executed from their manifests yield
// byte-identical chain files and reports.
Check criterion_8() {
    Check check;
    const fs::path root = fs::temp_directory_path() / "qbtc-acceptance";
    fs::remove_all(root);
    fs::create_directories(root);

    auto slurp = [](const fs::path& path) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    auto run = [](std::initializer_list<std::string> args) {
        return cli::run(std::vector<std::string>(args));
    };

    {
        std::ofstream config(root / "config.txt");
        config << "n = 8\nm = 3\nt_max = 3600\nt_block = 600\nseed = 808\n";
    }
    check.require(run({"mint", "--config", (root / "config.txt").string(), "--count", "2",
                       "--out-dir", (root / "mint-a").string()}) == cli::kOk,
                  "mint run failed");
    check.require(run({"replay", "--manifest", (root / "mint-a/manifest.json").string(),
                       "--out-dir", (root / "mint-b").string()}) == cli::kOk,
                  "mint replay failed");
    for (const char* name :
         {"chain.qbc", "registry.jsonl", "coin_000.json", "coin_001.json", "manifest.json"})
        check.require(slurp(root / "mint-a" / name) == slurp(root / "mint-b" / name),
                      std::string("mint replay differs in ") + name);

    check.require(run({"attack", "--k", "10", "--attack-m", "7", "--p", "0.10", "--trials",
                       "200000", "--seed", "909", "--out-dir",
                       (root / "attack-a").string()}) == cli::kOk,
                  "attack run failed");
    check.require(run({"replay", "--manifest", (root / "attack-a/manifest.json").string(),
                       "--out-dir", (root / "attack-b").string()}) == cli::kOk,
                  "attack replay failed");
    for (const char* name : {"attack_report.json", "attack_report.csv", "manifest.json"})
        check.require(slurp(root / "attack-a" / name) == slurp(root / "attack-b" / name),
                      std::string("attack replay differs in ") + name);

    check.require(run({"simulate", "--config", (root / "config.txt").string(), "--miners", "2",
                       "--duration", "20000", "--stress", "--out-dir",
                       (root / "sim-a").string()}) == cli::kOk,
                  "simulate run failed");
    check.require(run({"replay", "--manifest", (root / "sim-a/manifest.json").string(),
                       "--out-dir", (root / "sim-b").string()}) == cli::kOk,
                  "simulate replay failed");
    for (const char* name : {"chain.qbc", "events.jsonl", "stats.json", "manifest.json"})
        check.require(slurp(root / "sim-a" / name) == slurp(root / "sim-b" / name),
                      std::string("simulate replay differs in ") + name);

    if (check.ok)
        check.detail = "mint, attack and simulate replays byte-identical";
    return check;
}

} // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Check()> run;
    };
    const std::vector<Criterion> criteria = {
        {"C1 verifier-law |<psi|A>|^2 within 1e-9", criterion_1},
        {"C2 mini-scheme completeness exactly 1", criterion_2},
        {"C3 duality H|A> = |A-perp> exhaustive at n=4", criterion_3},
        {"C4 soundness of measure-and-reprepare forgeries", criterion_4},
        {"C5 reuse-attack exact/bound/Monte-Carlo", criterion_5},
        {"C6 longevity ideal and perturbed", criterion_6},
        {"C7 ledger integrity and PoW statistics", criterion_7},
        {"C8 manifest reproducibility", criterion_8},
    };

    int failures = 0;
    for (const auto& criterion : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Check check;
        try {
            check = criterion.run();
        } catch (const std::exception& e) {
            check.ok = false;
            check.detail = std::string("exception: ") + e.what();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] %s (%.1fs)%s%s\n", check.ok ? "PASS" : "FAIL", criterion.name,
                    seconds, check.detail.empty() ? "" : " - ", check.detail.c_str());
        std::fflush(stdout);
        if (!check.ok)
            ++failures;
    }
    if (failures > 0)
        std::printf("%d criterion(s) FAILED\n", failures);
    else
        std::printf("all acceptance criteria passed\n");
    return failures;
}
