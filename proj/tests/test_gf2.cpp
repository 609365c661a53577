#include "doctest.h"

#include <set>

#include "oracles.hpp"
#include "qbtc/errors.hpp"
#include "qbtc/gf2.hpp"

using namespace qbtc;
using gf2::BitVec;
using gf2::Subspace;

TEST_CASE("dot is the parity of the component-wise AND") {
    CHECK(gf2::dot(BitVec::from_string("10"), BitVec::from_string("10")) == 1);
    CHECK(gf2::dot(BitVec::from_string("10"), BitVec::from_string("01")) == 0);
    CHECK(gf2::dot(BitVec::from_string("11"), BitVec::from_string("11")) == 0);
    CHECK_THROWS_AS(gf2::dot(BitVec::from_string("10"), BitVec::from_string("1001")),
                    DimensionError);
}

TEST_CASE("bit order: component 0 is the most significant index bit") {
    const BitVec v = BitVec::from_string("10");
    CHECK(v.bit(0) == 1);
    CHECK(v.bit(1) == 0);
    CHECK(v.word() == 2);
    CHECK(BitVec::from_string("0110").word() == 6);
}

TEST_CASE("sample_subspace: trivial, sized, deterministic") {
    Rng rng(11);
    const Subspace trivial = gf2::sample_subspace(2, 0, rng);
    CHECK(trivial.dim() == 0);
    CHECK(trivial.enumerate().size() == 1);
    CHECK(trivial.enumerate()[0] == BitVec::zero(2));

    const Subspace s = gf2::sample_subspace(4, 2, rng);
    CHECK(s.dim() == 2);
    CHECK(s.enumerate().size() == 4);

    Rng a(99), b(99);
    CHECK(gf2::sample_subspace(8, 4, a) == gf2::sample_subspace(8, 4, b));

    CHECK_THROWS_AS(gf2::sample_subspace(4, 5, rng), DimensionError);
}

TEST_CASE("membership basics and brute-force agreement") {
    Rng rng(21);
    const Subspace line(2, {BitVec::from_string("10")});
    CHECK(line.contains(BitVec::zero(2)));
    CHECK(line.contains(BitVec::from_string("10")));
    CHECK_FALSE(line.contains(BitVec::from_string("01")));

    for (int n : {4, 6, 8}) {
        for (int trial = 0; trial < 5; ++trial) {
            const Subspace space = gf2::sample_subspace(n, n / 2, rng);
            for (uint32_t w = 0; w < (1u << n); ++w) {
                const BitVec x(n, w);
                CHECK(space.contains(x) == oracles::membership_by_enumeration(space, x));
            }
        }
    }
}

TEST_CASE("orthogonal complement") {
    const Subspace line(2, {BitVec::from_string("10")});
    CHECK(line.orthogonal_complement() == Subspace(2, {BitVec::from_string("01")}));

    CHECK(Subspace::full(4).orthogonal_complement().dim() == 0);

    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const Subspace space = gf2::sample_subspace(8, rng.bits(2) + 2, rng);
        const Subspace complement = space.orthogonal_complement();
        CHECK(space.dim() + complement.dim() == 8);
        // Double complement recovers the subspace, checked pointwise over
        // all 2^8 vectors.
        const Subspace twice = complement.orthogonal_complement();
        for (uint32_t w = 0; w < 256; ++w) {
            const BitVec x(8, w);
            CHECK(space.contains(x) == twice.contains(x));
        }
        // Orthogonality holds exhaustively.
        for (const BitVec& a : space.enumerate())
            for (const BitVec& b : complement.enumerate())
                CHECK(gf2::dot(a, b) == 0);
    }
}

TEST_CASE("dim(A-perp) = n/2 for every sampled dim-n/2 subspace") {
    Rng rng(41);
    for (int n : {4, 6, 8, 10}) {
        for (int trial = 0; trial < 20; ++trial) {
            const Subspace space = gf2::sample_subspace(n, n / 2, rng);
            CHECK(space.orthogonal_complement().dim() == n / 2);
        }
    }
}

TEST_CASE("enumerate: sorted, duplicate-free, complete") {
    CHECK(Subspace::zero(4).enumerate() == std::vector<BitVec>{BitVec::zero(4)});

    const Subspace full2(2, {BitVec::from_string("10"), BitVec::from_string("01")});
    const auto members = full2.enumerate();
    REQUIRE(members.size() == 4);
    CHECK(members[0] == BitVec::from_string("00"));
    CHECK(members[1] == BitVec::from_string("01"));
    CHECK(members[2] == BitVec::from_string("10"));
    CHECK(members[3] == BitVec::from_string("11"));

    Rng rng(51);
    for (int trial = 0; trial < 10; ++trial) {
        const int dim = static_cast<int>(rng.below(5));
        const Subspace space = gf2::sample_subspace(8, dim, rng);
        const auto all = space.enumerate();
        CHECK(all.size() == (size_t{1} << dim));
        CHECK(std::set<BitVec>(all.begin(), all.end()).size() == all.size());
    }
}

TEST_CASE("canonical basis is idempotent and equality is basis comparison") {
    Rng rng(61);
    for (int trial = 0; trial < 20; ++trial) {
        const Subspace space = gf2::sample_subspace(8, 4, rng);
        const Subspace canonical(8, space.basis_rref());
        CHECK(canonical.basis_rref() == space.basis_rref());
        CHECK(canonical == space);
        // A different generating set of the same space compares equal.
        std::vector<BitVec> generators;
        for (const BitVec& g : space.basis_rref())
            generators.push_back(g ^ space.basis_rref()[0]);
        generators[0] = space.basis_rref()[0];
        CHECK(Subspace(8, generators) == space);
    }
}

TEST_CASE("dependent generators are rejected") {
    CHECK_THROWS_AS(Subspace(4, {BitVec::from_string("1010"), BitVec::from_string("1010")}),
                    DimensionError);
    CHECK_THROWS_AS(Subspace(4, {BitVec::from_string("1000"), BitVec::from_string("0100"),
                                 BitVec::from_string("1100")}),
                    DimensionError);
}

TEST_CASE("hex serialization round-trips the canonical basis") {
    Rng rng(71);
    for (int n : {2, 4, 8, 12, 20}) {
        const Subspace space = gf2::sample_subspace(n, n / 2, rng);
        const Subspace back = Subspace::from_hex_lines(n, space.to_hex_lines());
        CHECK(back == space);
    }
    CHECK_THROWS_AS(BitVec::from_hex(8, "xz"), FormatError);
}

TEST_CASE("ambient dimension is capped at 20 and must be even") {
    CHECK_THROWS_AS(BitVec(22, 0), DimensionError);
    CHECK_THROWS_AS(BitVec(3, 0), DimensionError);
    Rng rng(81);
    CHECK_THROWS_AS(gf2::sample_subspace(24, 2, rng), DimensionError);
}
