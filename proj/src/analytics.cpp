#include "qbtc/analytics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "qbtc/errors.hpp"

namespace qbtc::analytics {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

ReuseBoundInput ReuseBoundInput::make(int k, int m, double p, double epsilon) {
    ReuseBoundInput input;
    input.k = k;
    input.m = m;
    input.p = p;
    input.epsilon = epsilon;
    input.validate();
    return input;
}

void ReuseBoundInput::validate() const {
    if (k < 3)
        throw ConfigError("reuse model requires k >= 3 blocks per window");
    if (m < 2)
        throw ConfigError("reuse model requires m >= 2");
    if (shard_wins_needed() > k)
        throw ConfigError("m - 2 exceeds k: binomial undefined in the attack model");
    if (shard_wins_needed() < 0)
        throw ConfigError("shard win count must be non-negative");
    if (p < 0.0 || p >= 1.0)
        throw ConfigError("attacker fraction p must lie in [0, 1)");
    if (epsilon < 0.0 || epsilon >= 1.0)
        throw ConfigError("epsilon must lie in [0, 1)");
}

long double binomial_coefficient(int n, int k) {
    if (k < 0 || k > n)
        return 0.0L;
    if (k > n - k)
        k = n - k;
    long double result = 1.0L;
    for (int i = 1; i <= k; ++i)
        result = result * static_cast<long double>(n - k + i) / static_cast<long double>(i);
    return std::round(result);
}

EtaExact eta_exact(const ReuseBoundInput& input) {
    input.validate();
    const int j = input.shard_wins_needed();
    const long double p = input.p;
    const long double q = 1.0L - p;
    const long double eta1 =
        binomial_coefficient(input.k, j) * std::pow(p, j) * std::pow(q, input.k - j);
    const long double eta2 =
        static_cast<long double>(input.k) * p * std::pow(q, input.k - 1);
    const long double eta = eta1 * eta2;
    EtaExact out;
    out.eta1 = static_cast<double>(eta1);
    out.eta2 = static_cast<double>(eta2);
    out.eta = static_cast<double>(eta);
    if (input.p == 0.0 || eta == 0.0L) {
        out.log2_eta = -std::numeric_limits<double>::infinity();
    } else {
        // Log-domain companion survives where the direct product underflows.
        const long double log2_c1 =
            (std::lgamma(input.k + 1.0L) - std::lgamma(j + 1.0L) -
             std::lgamma(input.k - j + 1.0L)) /
            std::log(2.0L);
        const long double log2_eta1 =
            log2_c1 + j * std::log2(p) + (input.k - j) * std::log2(q);
        const long double log2_eta2 =
            std::log2(static_cast<long double>(input.k)) + std::log2(p) +
            (input.k - 1) * std::log2(q);
        out.log2_eta = static_cast<double>(log2_eta1 + log2_eta2);
    }
    return out;
}

EtaBound eta_bound(const ReuseBoundInput& input) {
    input.validate();
    const double gamma = input.gamma();
    const double two_e = 2.0 * std::exp(1.0);
    EtaBound out;
    out.p_limit = gamma / (two_e + gamma);
    out.log2_bound = std::log2(static_cast<double>(input.k) / two_e) -
                     gamma * static_cast<double>(input.k);
    out.bound = (static_cast<double>(input.k) / two_e) * std::exp2(-gamma * input.k);
    // The derivation needs 1/k < gamma <= 1, p below the gamma-determined
    // limit, and for epsilon > 0 the window gamma < 1/(k eps) - 1/k.
    bool gamma_ok = gamma * input.k > 1.0 && gamma <= 1.0 + 1e-12;
    if (input.epsilon > 0.0) {
        const double gamma_cap =
            1.0 / (static_cast<double>(input.k) * input.epsilon) - 1.0 / input.k;
        gamma_ok = gamma_ok && gamma < gamma_cap;
    }
    out.admissible = gamma_ok && input.p < out.p_limit;
    return out;
}

double binomial_tail_at_least(int k, int need, double p) {
    if (need <= 0)
        return 1.0;
    if (need > k)
        return 0.0;
    long double total = 0.0L;
    const long double lp = p;
    const long double lq = 1.0L - lp;
    for (int j = need; j <= k; ++j)
        total += binomial_coefficient(k, j) * std::pow(lp, j) * std::pow(lq, k - j);
    return static_cast<double>(total);
}

double two_window_exact(const ReuseBoundInput& input) {
    input.validate();
    const double window1 = binomial_tail_at_least(input.k, input.shard_wins_needed(), input.p);
    const double window2 = 1.0 - std::pow(1.0 - input.p, input.k);
    return window1 * window2;
}

std::vector<SweepRow> bound_sweep(const std::vector<int>& k_values,
                                  const std::vector<double>& gamma_values,
                                  const std::vector<double>& p_values, double epsilon) {
    std::vector<SweepRow> rows;
    for (int k : k_values) {
        for (double gamma : gamma_values) {
            const int m = static_cast<int>(std::lround(gamma * k)) + 2;
            for (double p : p_values) {
                const auto input = ReuseBoundInput::make(k, m, p, epsilon);
                const EtaExact exact = eta_exact(input);
                const EtaBound bound = eta_bound(input);
                rows.push_back(SweepRow{k, m, input.gamma(), p, exact.eta1, exact.eta2, exact.eta,
                                        bound.bound, bound.admissible});
            }
        }
    }
    return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "k,m,gamma,p,eta1,eta2,eta,bound,admissible\n";
    for (const SweepRow& r : rows) {
        out += std::to_string(r.k) + "," + std::to_string(r.m) + "," + format_double(r.gamma) +
               "," + format_double(r.p) + "," + format_double(r.eta1) + "," +
               format_double(r.eta2) + "," + format_double(r.eta) + "," +
               format_double(r.bound) + "," + (r.admissible ? "1" : "0") + "\n";
    }
    return out;
}

std::string LongevityReport::to_json() const {
    std::string out = "{\"verifications\":" + std::to_string(verifications) +
                      ",\"survived_rounds\":" + std::to_string(survived_rounds) +
                      ",\"cumulative_distance\":" + format_double(cumulative_distance) +
                      ",\"threshold\":" + format_double(threshold) +
                      ",\"worn_out\":" + (worn_out ? std::string("true") : std::string("false")) +
                      ",\"rejected_round\":" + std::to_string(rejected_round) +
                      ",\"trace_distances\":[";
    for (size_t i = 0; i < trace_distances.size(); ++i) {
        if (i > 0)
            out += ',';
        out += format_double(trace_distances[i]);
    }
    out += "]}";
    return out;
}

LongevityReport run_longevity(std::vector<qsim::QuantumState>& states,
                              const ShardVerifier& verifier, uint64_t rounds,
                              double perturb_angle, double wear_threshold) {
    if (rounds < 1)
        throw ConfigError("longevity experiment needs at least one round");
    LongevityReport report;
    report.threshold = wear_threshold;
    for (uint64_t round = 1; round <= rounds; ++round) {
        double round_distance = 0.0;
        for (size_t i = 0; i < states.size(); ++i) {
            qsim::QuantumState before = states[i];
            if (perturb_angle != 0.0) {
                const uint32_t probe = qsim::orthogonal_probe_index(before);
                before = qsim::rotate_toward(before, qsim::QuantumState::basis(before.n, probe),
                                             perturb_angle);
            }
            const qsim::MeasurementOutcome outcome = verifier(i, before);
            if (!outcome.accepted) {
                report.rejected_round = static_cast<int64_t>(round);
                return report;
            }
            round_distance = std::max(round_distance, qsim::trace_distance(before,
                                                                           outcome.post_state));
            states[i] = outcome.post_state;
        }
        report.trace_distances.push_back(round_distance);
        report.cumulative_distance += round_distance;
        report.verifications = round;
        if (report.cumulative_distance > wear_threshold) {
            report.worn_out = true;
            report.survived_rounds = round - 1;
            return report;
        }
        report.survived_rounds = round;
    }
    return report;
}

} // namespace qbtc::analytics
