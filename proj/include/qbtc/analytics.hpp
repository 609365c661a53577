#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qbtc/qsim.hpp"

namespace qbtc::analytics {

// Parameters of the reuse-attack model: k block slots per window, m shards
// per coin, attacker hash-power fraction p, completeness error epsilon.
// gamma is derived as (m - 2) / k. shard_exponent overrides the worst-case
// m - 2 shard count for sensitivity runs.
struct ReuseBoundInput {
    int k = 0;
    int m = 0;
    double p = 0.0;
    double epsilon = 0.0;
    int shard_exponent = -1; // < 0 selects m - 2

    static ReuseBoundInput make(int k, int m, double p, double epsilon = 0.0);
    double gamma() const { return static_cast<double>(m - 2) / static_cast<double>(k); }
    int shard_wins_needed() const { return shard_exponent < 0 ? m - 2 : shard_exponent; }
    void validate() const; // throws ConfigError; m - 2 > k is a domain error
};

// Exact binomial coefficient as a long double; exact integers up to k = 64.
long double binomial_coefficient(int n, int k);

// The closed-form attack probabilities:
//   eta1 = C(k, m-2) p^(m-2) (1-p)^(k-m+2)
//   eta2 = k p (1-p)^(k-1)
//   eta  = eta1 * eta2
// evaluated in extended precision with a log2 companion against underflow.
struct EtaExact {
    double eta1 = 0.0;
    double eta2 = 0.0;
    double eta = 0.0;
    double log2_eta = 0.0; // -inf when eta is exactly zero
};
EtaExact eta_exact(const ReuseBoundInput& input);

// The strict upper bound (k / 2e) 2^(-gamma k), valid while
// p < gamma / (2e + gamma) (and, for epsilon > 0, while gamma stays below
// 1/(k epsilon) - 1/k). Outside that window the value is still reported but
// flagged not applicable rather than numerically lied about.
struct EtaBound {
    double bound = 0.0;
    double log2_bound = 0.0;
    double p_limit = 0.0; // gamma / (2e + gamma)
    bool admissible = false;
};
EtaBound eta_bound(const ReuseBoundInput& input);

// P[Bin(k, p) >= need] by direct summation.
double binomial_tail_at_least(int k, int need, double p);

// Exact success probability of the simulated two-window model:
// P[window-1 wins >= m-2] * P[window-2 wins >= 1]. This is what the Monte
// Carlo measures; eta_exact above is the point-mass counterpart.
double two_window_exact(const ReuseBoundInput& input);

struct SweepRow {
    int k = 0;
    int m = 0;
    double gamma = 0.0;
    double p = 0.0;
    double eta1 = 0.0;
    double eta2 = 0.0;
    double eta = 0.0;
    double bound = 0.0;
    bool admissible = false;
};
std::vector<SweepRow> bound_sweep(const std::vector<int>& k_values,
                                  const std::vector<double>& gamma_values,
                                  const std::vector<double>& p_values, double epsilon);
std::string sweep_csv(const std::vector<SweepRow>& rows);

// Longevity experiment: verify and reconstruct a coin's states for a number
// of rounds, recording the per-round trace distance between the state that
// entered verification and the recovered state. The verifier callback runs
// one shard's verification in analytic postselection form.
struct LongevityReport {
    uint64_t verifications = 0; // completed rounds
    std::vector<double> trace_distances;
    double cumulative_distance = 0.0;
    double threshold = 0.0;
    bool worn_out = false;
    int64_t rejected_round = -1; // 1-based round of a mid-experiment rejection
    uint64_t survived_rounds = 0;

    std::string to_json() const;
};

using ShardVerifier =
    std::function<qsim::MeasurementOutcome(size_t shard_index, const qsim::QuantumState& state)>;

// perturb_angle > 0 rotates each state toward a fixed orthogonal probe
// before every verification, realizing acceptance probability
// cos^2(angle) = 1 - eps with a recovered-state distance of exactly
// sqrt(eps) (the almost-as-good-as-new bound, met with equality here).
LongevityReport run_longevity(std::vector<qsim::QuantumState>& states,
                              const ShardVerifier& verifier, uint64_t rounds,
                              double perturb_angle, double wear_threshold);

} // namespace qbtc::analytics
