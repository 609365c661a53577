#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "qbtc/analytics.hpp"
#include "qbtc/errors.hpp"
#include "qbtc/minischeme.hpp"

using namespace qbtc;
using analytics::ReuseBoundInput;

TEST_CASE("binomial coefficient is exact and the bounding lemma holds up to 64") {
    CHECK(analytics::binomial_coefficient(3, 1) == 3.0L);
    CHECK(analytics::binomial_coefficient(12, 6) == 924.0L);
    CHECK(analytics::binomial_coefficient(64, 32) == 1832624140942590534.0L);
    // C(n, k) < (n e / k)^k for 1 <= k <= n.
    for (int n = 1; n <= 64; ++n) {
        for (int k = 1; k <= n; ++k) {
            const long double lhs = analytics::binomial_coefficient(n, k);
            const long double rhs =
                std::pow(static_cast<long double>(n) * std::exp(1.0L) / k,
                         static_cast<long double>(k));
            CHECK(lhs < rhs);
        }
    }
}

TEST_CASE("eta_exact: hand-evaluated point and the p = 0 degenerate case") {
    // k = 3, m = 3, p = 0.5: eta1 = C(3,1) 0.5 (0.5)^2 = 0.375,
    // eta2 = 3 * 0.5 * 0.25 = 0.375, eta = 0.140625.
    const auto input = ReuseBoundInput::make(3, 3, 0.5);
    const auto exact = analytics::eta_exact(input);
    CHECK(exact.eta1 == 0.375);
    CHECK(exact.eta2 == 0.375);
    CHECK(exact.eta == 0.140625);
    CHECK(exact.log2_eta == doctest::Approx(std::log2(0.140625)).epsilon(1e-12));

    const auto zero = analytics::eta_exact(ReuseBoundInput::make(5, 4, 0.0));
    CHECK(zero.eta1 == 0.0);
    CHECK(zero.eta2 == 0.0);
    CHECK(zero.eta == 0.0);
    CHECK(std::isinf(zero.log2_eta));

    ReuseBoundInput bad;
    bad.k = 4;
    bad.m = 8; // m - 2 > k
    bad.p = 0.1;
    CHECK_THROWS_AS(analytics::eta_exact(bad), ConfigError);
}

TEST_CASE("eta_exact equals exhaustive win-pattern enumeration, exact rationals, k <= 12") {
    // p = 1/2: every quantity is dyadic, so the comparison is exact.
    for (int k : {3, 6, 9, 12}) {
        for (int m = 2; m <= k + 2; m += 2) {
            const auto input = ReuseBoundInput::make(k, m, 0.5);
            const auto exact = analytics::eta_exact(input);
            const long double enumerated = oracles::two_window_rational(
                k, 1, 2, [&](int wins) { return wins == m - 2; },
                [](int wins) { return wins == 1; });
            CHECK(static_cast<long double>(exact.eta) == enumerated);
        }
    }
    // p = 1/10: exact rational enumeration against long-double evaluation.
    for (int k : {4, 8, 12}) {
        for (int m : {3, 4, 5}) {
            const auto input = ReuseBoundInput::make(k, m, 0.1);
            const auto exact = analytics::eta_exact(input);
            const long double enumerated = oracles::two_window_rational(
                k, 1, 10, [&](int wins) { return wins == m - 2; },
                [](int wins) { return wins == 1; });
            CHECK(static_cast<double>(enumerated) ==
                  doctest::Approx(exact.eta).epsilon(1e-12));
        }
    }
}

TEST_CASE("eta_bound: admissibility limit and domination of eta_exact") {
    // gamma = 1: the admissible p limit is 1/(2e + 1), about 15.5 percent.
    const auto gamma_one = analytics::eta_bound(ReuseBoundInput::make(10, 12, 0.10));
    const double expected_limit = 1.0 / (2.0 * std::exp(1.0) + 1.0);
    CHECK(gamma_one.p_limit == doctest::Approx(expected_limit).epsilon(1e-12));
    CHECK(std::abs(gamma_one.p_limit - 0.155) < 5e-4); // about 15.5 percent
    CHECK(gamma_one.admissible);

    // k = 10, gamma = 0.5: bound = (10 / 2e) * 2^-5.
    const auto half = analytics::eta_bound(ReuseBoundInput::make(10, 7, 0.05));
    CHECK(half.bound ==
          doctest::Approx(10.0 / (2.0 * std::exp(1.0)) * std::pow(2.0, -5.0)).epsilon(1e-12));

    // p outside the admissible range is flagged, not lied about.
    const auto inadmissible = analytics::eta_bound(ReuseBoundInput::make(10, 7, 0.10));
    CHECK_FALSE(inadmissible.admissible);
    CHECK(inadmissible.bound == half.bound); // same formula value

    // The bound dominates the exact value on every admissible grid point.
    for (int k : {10, 20, 40}) {
        for (double gamma : {0.3, 0.5, 1.0}) {
            const int m = static_cast<int>(std::lround(gamma * k)) + 2;
            for (double p : {0.01, 0.03, 0.05, 0.10, 0.15}) {
                const auto input = ReuseBoundInput::make(k, m, p);
                const auto bound = analytics::eta_bound(input);
                if (!bound.admissible)
                    continue;
                CHECK(analytics::eta_exact(input).eta <= bound.bound);
            }
        }
    }
}

TEST_CASE("eta_exact is monotone in p over the admissible range") {
    for (int k : {5, 10, 20}) {
        for (int m : {4, 6}) {
            if (m - 2 > k)
                continue;
            const double limit =
                analytics::eta_bound(ReuseBoundInput::make(k, m, 0.0)).p_limit;
            double previous = 0.0;
            for (double p = 0.005; p < limit; p += 0.005) {
                const double eta = analytics::eta_exact(ReuseBoundInput::make(k, m, p)).eta;
                CHECK(eta >= previous);
                previous = eta;
            }
        }
    }
}

TEST_CASE("two_window_exact matches exhaustive at-least enumeration") {
    for (int k : {4, 8, 12}) {
        for (int m : {3, 4, 6}) {
            const auto input = ReuseBoundInput::make(k, m, 0.1);
            const long double enumerated = oracles::two_window_rational(
                k, 1, 10, [&](int wins) { return wins >= m - 2; },
                [](int wins) { return wins >= 1; });
            CHECK(analytics::two_window_exact(input) ==
                  doctest::Approx(static_cast<double>(enumerated)).epsilon(1e-12));
        }
    }
}

TEST_CASE("sweep CSV has the documented column layout") {
    const auto rows = analytics::bound_sweep({10}, {1.0}, {0.05}, 0.0);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].m == 12);
    const std::string csv = analytics::sweep_csv(rows);
    CHECK(csv.rfind("k,m,gamma,p,eta1,eta2,eta,bound,admissible\n", 0) == 0);
    CHECK(csv.find("\n10,12,1,") != std::string::npos);
}

TEST_CASE("longevity: ideal coins never drift, perturbed ones meet the sqrt(eps) bound") {
    Hash256 seed{};
    seed[0] = 9;
    mini::OracleRegistry registry(seed, 8);
    Rng rng(3);
    const auto minted = registry.mint_m(rng);
    const auto verifier = [&](size_t, const qsim::QuantumState& state) {
        const auto outcome = registry.verify_m_analytic(minted.serial, state);
        return qsim::MeasurementOutcome{outcome.accepted, outcome.probability,
                                        outcome.post_state};
    };

    SUBCASE("ideal: 1000 rounds, every distance exactly zero") {
        std::vector<qsim::QuantumState> states{minted.state};
        const auto report = analytics::run_longevity(states, verifier, 1000, 0.0, 1e18);
        CHECK(report.verifications == 1000);
        CHECK(report.cumulative_distance == 0.0);
        CHECK(report.rejected_round == -1);
        for (double d : report.trace_distances)
            CHECK(d == 0.0);
    }

    SUBCASE("perturbed: every recovered distance is at most sqrt(eps)") {
        for (double eps : {0.01, 0.04}) {
            std::vector<qsim::QuantumState> states{minted.state};
            const double angle = std::asin(std::sqrt(eps));
            const auto report = analytics::run_longevity(states, verifier, 200, angle, 1e18);
            CHECK(report.verifications == 200);
            for (double d : report.trace_distances) {
                CHECK(d <= std::sqrt(eps) + 1e-12);
                CHECK(d == doctest::Approx(std::sqrt(eps)).epsilon(1e-9)); // met tightly
            }
        }
    }

    SUBCASE("wear-out accounting follows triangle-inequality accumulation") {
        std::vector<qsim::QuantumState> states{minted.state};
        const double per_round = 0.00999; // just under 0.01 so 50 rounds fit under 0.5
        const double angle = std::asin(per_round);
        const auto report = analytics::run_longevity(states, verifier, 10'000, angle, 0.5);
        CHECK(report.worn_out);
        CHECK(report.survived_rounds >= 50);
        // Independent accumulation over the reported distances reproduces
        // the crossing round.
        double acc = 0.0;
        uint64_t crossing = 0;
        for (size_t i = 0; i < report.trace_distances.size(); ++i) {
            acc += report.trace_distances[i];
            if (acc > 0.5) {
                crossing = i + 1;
                break;
            }
        }
        CHECK(report.survived_rounds == crossing - 1);
        CHECK(report.verifications == crossing);
    }

    SUBCASE("a rejected coin truncates the report with the rejection round") {
        std::vector<qsim::QuantumState> states{minted.state};
        // Rotate all the way into the orthogonal probe: acceptance 0.
        const auto report =
            analytics::run_longevity(states, verifier, 10, std::asin(1.0), 1e18);
        CHECK(report.rejected_round == 1);
        CHECK(report.verifications == 0);
    }
}
