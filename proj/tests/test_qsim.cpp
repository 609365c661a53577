#include "doctest.h"

#include <cmath>
#include <map>

#include "oracles.hpp"
#include "qbtc/errors.hpp"
#include "qbtc/qsim.hpp"

using namespace qbtc;
using gf2::BitVec;
using gf2::Subspace;
using qsim::QuantumState;

namespace {

double max_amp_diff(const QuantumState& a, const QuantumState& b) {
    double worst = 0.0;
    for (size_t i = 0; i < a.amps.size(); ++i)
        worst = std::max(worst, std::abs(a.amps[i] - b.amps[i]));
    return worst;
}

// A pair of dim-n/2 subspaces intersecting only in zero.
std::pair<Subspace, Subspace> disjoint_pair(int n, Rng& rng) {
    while (true) {
        const Subspace a = gf2::sample_subspace(n, n / 2, rng);
        const Subspace b = gf2::sample_subspace(n, n / 2, rng);
        if (oracles::intersection_size(a, b) == 1)
            return {a, b};
    }
}

// All subspaces of the given dimension, by brute force over generator
// tuples, deduplicated through the canonical basis.
std::vector<Subspace> all_subspaces(int n, int dim) {
    std::map<std::string, Subspace> seen;
    std::vector<uint32_t> picks(static_cast<size_t>(dim), 0);
    const uint32_t limit = 1u << n;
    auto recurse = [&](auto&& self, int depth) -> void {
        if (depth == dim) {
            std::vector<BitVec> gens;
            for (uint32_t w : picks)
                gens.emplace_back(n, w);
            try {
                Subspace space(n, gens);
                seen.emplace(space.to_hex_lines(), space);
            } catch (const DimensionError&) {
            }
            return;
        }
        for (uint32_t w = 1; w < limit; ++w) {
            picks[static_cast<size_t>(depth)] = w;
            self(self, depth + 1);
        }
    };
    recurse(recurse, 0);
    std::vector<Subspace> out;
    for (auto& [key, space] : seen)
        out.push_back(space);
    return out;
}

} // namespace

TEST_CASE("build_subspace_state") {
    const Subspace line(2, {BitVec::from_string("10")});
    const QuantumState psi = qsim::build_subspace_state(line);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(psi.amps[0].real() == doctest::Approx(r));
    CHECK(psi.amps[2].real() == doctest::Approx(r));
    CHECK(std::abs(psi.amps[1]) == 0.0);
    CHECK(std::abs(psi.amps[3]) == 0.0);

    const QuantumState zero_state = qsim::build_subspace_state(Subspace::zero(4));
    CHECK(zero_state.amps[0] == qsim::Amplitude{1.0, 0.0});

    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const Subspace space = gf2::sample_subspace(8, 4, rng);
        CHECK(qsim::build_subspace_state(space).norm_squared() == doctest::Approx(1.0));
    }
}

TEST_CASE("membership oracle flips exactly the members and is an involution") {
    Rng rng(15);
    const Subspace space = gf2::sample_subspace(8, 4, rng);
    const QuantumState a_state = qsim::build_subspace_state(space);
    const QuantumState flipped = qsim::apply_membership_oracle(space, a_state);
    for (size_t i = 0; i < a_state.amps.size(); ++i)
        CHECK(flipped.amps[i] == -a_state.amps[i]);

    const uint32_t outside = qsim::orthogonal_probe_index(a_state);
    const QuantumState basis_out = QuantumState::basis(8, outside);
    CHECK(max_amp_diff(qsim::apply_membership_oracle(space, basis_out), basis_out) == 0.0);

    for (int trial = 0; trial < 10; ++trial) {
        const QuantumState psi = oracles::random_state(8, rng);
        const QuantumState twice =
            qsim::apply_membership_oracle(space, qsim::apply_membership_oracle(space, psi));
        CHECK(max_amp_diff(twice, psi) <= 1e-12);
        CHECK(qsim::apply_membership_oracle(space, psi).norm_squared() ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("projector onto a subspace with postselection semantics") {
    Rng rng(25);
    const Subspace space = gf2::sample_subspace(6, 3, rng);
    const QuantumState a_state = qsim::build_subspace_state(space);

    const auto on_member = qsim::project_onto_subspace(space, a_state);
    CHECK(on_member.accepted);
    CHECK(on_member.probability == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(max_amp_diff(on_member.post_state, a_state) <= 1e-12);

    const uint32_t outside = qsim::orthogonal_probe_index(a_state);
    const auto on_nonmember =
        qsim::project_onto_subspace(space, QuantumState::basis(6, outside));
    CHECK_FALSE(on_nonmember.accepted);
    CHECK(on_nonmember.probability == 0.0);
    CHECK(on_nonmember.post_state.is_zero_sentinel());
}

TEST_CASE("projector matches the literal five-step control-qubit circuit") {
    Rng rng(35);
    for (int trial = 0; trial < 20; ++trial) {
        const Subspace space = gf2::sample_subspace(6, static_cast<int>(rng.below(4)), rng);
        const QuantumState psi = oracles::random_state(6, rng);
        const auto direct = qsim::project_onto_subspace(space, psi);
        const auto circuit = oracles::circuit_projector(space, psi);
        CHECK(direct.probability == doctest::Approx(circuit.probability).epsilon(1e-9));
        if (direct.accepted)
            CHECK(max_amp_diff(direct.post_state, circuit.post_state) <= 1e-9);
    }
}

TEST_CASE("hadamard_all: uniform image of |0>, involution, duality with the complement") {
    const QuantumState zero = QuantumState::basis(6, 0);
    const QuantumState uniform = qsim::hadamard_all(zero);
    for (const auto& a : uniform.amps)
        CHECK(a.real() == doctest::Approx(std::pow(2.0, -3.0)));

    Rng rng(45);
    for (int trial = 0; trial < 10; ++trial) {
        const QuantumState psi = oracles::random_state(8, rng);
        CHECK(max_amp_diff(qsim::hadamard_all(qsim::hadamard_all(psi)), psi) <= 1e-12);
    }

    for (int trial = 0; trial < 10; ++trial) {
        const Subspace space = gf2::sample_subspace(8, 4, rng);
        const QuantumState lhs = qsim::hadamard_all(qsim::build_subspace_state(space));
        const QuantumState rhs = qsim::build_subspace_state(space.orthogonal_complement());
        CHECK(max_amp_diff(lhs, rhs) <= 1e-9);
        // And against the defining formula, independent of the butterfly.
        CHECK(max_amp_diff(lhs, oracles::hadamard_by_formula(
                                    qsim::build_subspace_state(space))) <= 1e-9);
    }
}

TEST_CASE("duality identity exhaustively over all dim-2 subspaces of F_2^4") {
    const auto spaces = all_subspaces(4, 2);
    CHECK(spaces.size() == 35); // the Gaussian binomial [4 choose 2]_2
    for (const Subspace& space : spaces) {
        const QuantumState lhs = qsim::hadamard_all(qsim::build_subspace_state(space));
        const QuantumState rhs = qsim::build_subspace_state(space.orthogonal_complement());
        CHECK(max_amp_diff(lhs, rhs) <= 1e-9);
    }
}

TEST_CASE("verify_state acceptance law") {
    Rng rng(55);

    // Honest state: probability exactly 1 and post state |A>.
    const Subspace space = gf2::sample_subspace(8, 4, rng);
    const QuantumState a_state = qsim::build_subspace_state(space);
    const auto honest = qsim::verify_state(space, a_state);
    CHECK(honest.accepted);
    CHECK(honest.probability == 1.0);
    CHECK(max_amp_diff(honest.post_state, a_state) == 0.0);

    // Disjoint subspace state at n=4: |<A|B>|^2 = 1/16.
    auto [a4, b4] = disjoint_pair(4, rng);
    const auto cross = qsim::verify_state(a4, qsim::build_subspace_state(b4));
    CHECK(cross.probability == doctest::Approx(1.0 / 16.0).epsilon(1e-12));

    // Basis state outside A: probability 0.
    const auto miss =
        qsim::verify_state(space, QuantumState::basis(8, qsim::orthogonal_probe_index(a_state)));
    CHECK_FALSE(miss.accepted);
    CHECK(miss.probability == 0.0);

    // The law itself: acceptance probability equals |<psi|A>|^2.
    for (int n : {4, 6, 8}) {
        for (int trial = 0; trial < 100; ++trial) {
            const Subspace random_space = gf2::sample_subspace(n, n / 2, rng);
            const QuantumState psi = oracles::random_state(n, rng);
            const auto outcome = qsim::verify_state(random_space, psi);
            const double expected = oracles::overlap_with_subspace_state(random_space, psi);
            CHECK(outcome.probability == doctest::Approx(expected).epsilon(1e-9));
        }
    }
}

TEST_CASE("verify_state is a projector: a second verification accepts with probability 1") {
    Rng rng(65);
    for (int trial = 0; trial < 20; ++trial) {
        const Subspace space = gf2::sample_subspace(6, 3, rng);
        const QuantumState psi = oracles::random_state(6, rng);
        const auto first = qsim::verify_state(space, psi);
        if (!first.accepted)
            continue;
        const auto second = qsim::verify_state(space, first.post_state);
        CHECK(second.probability == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("sampled verification agrees with the analytic law in frequency") {
    Rng rng(75);
    const Subspace space = gf2::sample_subspace(6, 3, rng);
    const Subspace complement = space.orthogonal_complement();
    const QuantumState psi = oracles::random_state(6, rng);
    const double expected = qsim::verify_state(space, psi).probability;
    const int trials = 20000;
    int accepted = 0;
    for (int i = 0; i < trials; ++i) {
        const auto sampled = qsim::sample_verify(space, complement, psi, rng);
        CHECK(sampled.accept_probability == doctest::Approx(expected).epsilon(1e-12));
        if (sampled.accepted)
            ++accepted;
    }
    const double freq = static_cast<double>(accepted) / trials;
    const double sigma = std::sqrt(expected * (1.0 - expected) / trials);
    CHECK(std::abs(freq - expected) <= 3.0 * sigma + 1.0 / trials);
}

TEST_CASE("verify_state requires matching dimensions and a dim-n/2 subspace") {
    Rng rng(85);
    const Subspace small = gf2::sample_subspace(4, 2, rng);
    CHECK_THROWS_AS(qsim::verify_state(small, QuantumState::basis(6, 0)), DimensionError);
    const Subspace wrong_dim = gf2::sample_subspace(6, 2, rng);
    CHECK_THROWS_AS(qsim::verify_state(wrong_dim, QuantumState::basis(6, 0)), DimensionError);
}

TEST_CASE("trace distance on pure states") {
    Rng rng(95);
    const QuantumState psi = oracles::random_state(6, rng);
    CHECK(qsim::trace_distance(psi, psi) == 0.0);

    CHECK(qsim::trace_distance(QuantumState::basis(4, 1), QuantumState::basis(4, 2)) == 1.0);

    // Acceptance probability 1 - eps implies recovery within sqrt(eps);
    // eps = 0.04 gives the bound 0.2, met with equality by the rotation.
    const Subspace space = gf2::sample_subspace(6, 3, rng);
    const QuantumState a_state = qsim::build_subspace_state(space);
    const double eps = 0.04;
    const double angle = std::asin(std::sqrt(eps));
    const QuantumState probe =
        QuantumState::basis(6, qsim::orthogonal_probe_index(a_state));
    const QuantumState tilted = qsim::rotate_toward(a_state, probe, angle);
    const auto outcome = qsim::verify_state(space, tilted);
    CHECK(outcome.probability == doctest::Approx(1.0 - eps).epsilon(1e-12));
    CHECK(qsim::trace_distance(tilted, outcome.post_state) <= std::sqrt(eps) + 1e-12);
}

TEST_CASE("clone strategies: shape contract and classical-outcome copying") {
    Rng rng(105);
    const Subspace space = gf2::sample_subspace(8, 4, rng);
    const QuantumState a_state = qsim::build_subspace_state(space);

    for (auto strategy : {qsim::lab::CloneStrategy::measure_computational,
                          qsim::lab::CloneStrategy::measure_hadamard,
                          qsim::lab::CloneStrategy::identity_copy_of_classical_outcome}) {
        const auto [first, second] = qsim::lab::clone_attempt(a_state, strategy, rng);
        CHECK(first.n == 8);
        CHECK(second.n == 8);
        CHECK(first.norm_squared() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(second.norm_squared() == doctest::Approx(1.0).epsilon(1e-9));
    }

    // Copying the classical outcome of a basis state yields identical twins.
    const auto members = space.enumerate();
    const QuantumState basis_in = QuantumState::basis(8, members[1].word());
    const auto [c1, c2] = qsim::lab::clone_attempt(
        basis_in, qsim::lab::CloneStrategy::identity_copy_of_classical_outcome, rng);
    CHECK(max_amp_diff(c1, basis_in) == 0.0);
    CHECK(max_amp_diff(c2, basis_in) == 0.0);

    // A computational measurement of |A> lands inside A.
    const auto [m1, m2] = qsim::lab::clone_attempt(
        a_state, qsim::lab::CloneStrategy::measure_computational, rng);
    bool inside = false;
    for (const BitVec& member : members)
        if (std::abs(m1.amps[member.word()]) > 0.5)
            inside = true;
    CHECK(inside);
    CHECK(max_amp_diff(m1, m2) == 0.0);
}

TEST_CASE("state dump lists only amplitudes above the floor") {
    const QuantumState psi = qsim::build_subspace_state(Subspace::zero(4));
    const std::string dump = qsim::dump_jsonl(psi);
    CHECK(dump == "{\"index\":0,\"re\":1,\"im\":0}\n");
}
