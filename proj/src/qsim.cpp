#include "qbtc/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "qbtc/errors.hpp"

namespace qbtc::qsim {

namespace {

void check_qubits(int n) {
    if (n < 1 || n > gf2::kMaxAmbientDim)
        throw CapacityError("qubit count must lie in [1, 20], got " + std::to_string(n));
}

void check_same_dims(const gf2::Subspace& A, const QuantumState& psi) {
    if (A.ambient_dim() != psi.n)
        throw DimensionError("subspace and state have different dimensions");
}

std::vector<uint32_t> member_indices(const gf2::Subspace& A) {
    auto members = A.enumerate();
    std::vector<uint32_t> out;
    out.reserve(members.size());
    for (const auto& m : members)
        out.push_back(m.word());
    return out;
}

// Split psi into the A branch and its complement. Renormalization divides
// by exactly 1.0 when the branch probability is exactly 1, so fixed points
// of the projector stay bit-identical.
struct Split {
    double probability = 0.0;
    QuantumState inside;
    QuantumState outside;
};

Split split_on(const gf2::Subspace& A, const QuantumState& psi) {
    check_same_dims(A, psi);
    Split s;
    s.inside = QuantumState::zero_sentinel(psi.n);
    s.outside = psi;
    double prob = 0.0;
    for (uint32_t idx : member_indices(A)) {
        prob += std::norm(psi.amps[idx]);
        s.inside.amps[idx] = psi.amps[idx];
        s.outside.amps[idx] = 0.0;
    }
    s.probability = prob;
    if (prob < kZeroProbability) {
        s.inside = QuantumState::zero_sentinel(psi.n);
    } else {
        const double scale = 1.0 / std::sqrt(prob);
        for (auto& a : s.inside.amps)
            a *= scale;
    }
    const double out_prob = 1.0 - prob;
    if (out_prob < kZeroProbability) {
        s.outside = QuantumState::zero_sentinel(psi.n);
    } else {
        const double scale = 1.0 / std::sqrt(out_prob);
        for (auto& a : s.outside.amps)
            a *= scale;
    }
    return s;
}

} // namespace

QuantumState QuantumState::zero_sentinel(int n) {
    check_qubits(n);
    QuantumState s;
    s.n = n;
    s.amps.assign(size_t{1} << n, Amplitude{0.0, 0.0});
    return s;
}

QuantumState QuantumState::basis(int n, uint32_t index) {
    QuantumState s = zero_sentinel(n);
    if (index >= s.amps.size())
        throw DimensionError("basis index out of range");
    s.amps[index] = 1.0;
    return s;
}

double QuantumState::norm_squared() const {
    double total = 0.0;
    for (const auto& a : amps)
        total += std::norm(a);
    return total;
}

bool QuantumState::is_zero_sentinel() const { return norm_squared() < kZeroProbability; }

QuantumState build_subspace_state(const gf2::Subspace& A) {
    check_qubits(A.ambient_dim());
    QuantumState s = QuantumState::zero_sentinel(A.ambient_dim());
    const auto indices = member_indices(A);
    const double amp = 1.0 / std::sqrt(static_cast<double>(indices.size()));
    for (uint32_t idx : indices)
        s.amps[idx] = amp;
    return s;
}

QuantumState apply_membership_oracle(const gf2::Subspace& A, const QuantumState& psi) {
    check_same_dims(A, psi);
    QuantumState out = psi;
    for (uint32_t idx : member_indices(A))
        out.amps[idx] = -out.amps[idx];
    return out;
}

MeasurementOutcome project_onto_subspace(const gf2::Subspace& A, const QuantumState& psi) {
    Split s = split_on(A, psi);
    MeasurementOutcome out;
    out.probability = s.probability;
    out.accepted = s.probability >= kZeroProbability;
    out.post_state = std::move(s.inside);
    return out;
}

QuantumState hadamard_all(const QuantumState& psi) {
    QuantumState out = psi;
    const size_t size = out.amps.size();
    for (size_t len = 1; len < size; len <<= 1) {
        for (size_t block = 0; block < size; block += len << 1) {
            for (size_t j = block; j < block + len; ++j) {
                const Amplitude a = out.amps[j];
                const Amplitude b = out.amps[j + len];
                out.amps[j] = a + b;
                out.amps[j + len] = a - b;
            }
        }
    }
    // Single trailing scale: exact for even n, where 2^(-n/2) is a power of
    // two, instead of a rounding 1/sqrt(2) per stage.
    const double scale =
        out.n % 2 == 0 ? std::ldexp(1.0, -out.n / 2) : 1.0 / std::sqrt(std::ldexp(1.0, out.n));
    for (auto& a : out.amps)
        a *= scale;
    return out;
}

MeasurementOutcome verify_state(const gf2::Subspace& A, const QuantumState& psi) {
    return verify_state(A, A.orthogonal_complement(), psi);
}

MeasurementOutcome verify_state(const gf2::Subspace& A, const gf2::Subspace& A_perp,
                                const QuantumState& psi) {
    check_same_dims(A, psi);
    if (A.dim() * 2 != A.ambient_dim())
        throw DimensionError("verifier requires a subspace of dimension n/2");
    MeasurementOutcome first = project_onto_subspace(A, psi);
    if (!first.accepted)
        return {false, 0.0, QuantumState::zero_sentinel(psi.n)};
    MeasurementOutcome second = project_onto_subspace(A_perp, hadamard_all(first.post_state));
    if (!second.accepted)
        return {false, 0.0, QuantumState::zero_sentinel(psi.n)};
    return {true, first.probability * second.probability, hadamard_all(second.post_state)};
}

SampledVerification sample_verify(const gf2::Subspace& A, const gf2::Subspace& A_perp,
                                  const QuantumState& psi, Rng& rng) {
    check_same_dims(A, psi);
    if (A.dim() * 2 != A.ambient_dim())
        throw DimensionError("verifier requires a subspace of dimension n/2");
    Split first = split_on(A, psi);
    double joint = 0.0;
    Split second;
    if (first.probability >= kZeroProbability) {
        second = split_on(A_perp, hadamard_all(first.inside));
        joint = first.probability * second.probability;
    }
    if (!rng.bernoulli(first.probability))
        return {false, joint, std::move(first.outside)};
    if (!rng.bernoulli(second.probability))
        return {false, joint, std::move(second.outside)};
    return {true, joint, hadamard_all(second.inside)};
}

std::complex<double> inner_product(const QuantumState& a, const QuantumState& b) {
    if (a.n != b.n)
        throw DimensionError("inner product across different qubit counts");
    std::complex<double> acc{0.0, 0.0};
    for (size_t i = 0; i < a.amps.size(); ++i)
        acc += std::conj(a.amps[i]) * b.amps[i];
    return acc;
}

double trace_distance(const QuantumState& a, const QuantumState& b) {
    const double na = a.norm_squared();
    const double nb = b.norm_squared();
    if (na < kZeroProbability || nb < kZeroProbability)
        throw Error("trace distance of a zero sentinel is undefined");
    // Normalizing by the squared norms keeps the self-distance exactly zero
    // even when the inputs carry one-ulp normalization error.
    const double overlap = std::norm(inner_product(a, b)) / (na * nb);
    return std::sqrt(std::max(0.0, 1.0 - overlap));
}

uint32_t sample_measurement(const QuantumState& psi, Rng& rng) {
    const double total = psi.norm_squared();
    if (total < kZeroProbability)
        throw Error("cannot measure the zero sentinel");
    const double target = rng.uniform01() * total;
    double acc = 0.0;
    uint32_t last_nonzero = 0;
    for (size_t i = 0; i < psi.amps.size(); ++i) {
        const double w = std::norm(psi.amps[i]);
        if (w == 0.0)
            continue;
        last_nonzero = static_cast<uint32_t>(i);
        acc += w;
        if (target < acc)
            return last_nonzero;
    }
    return last_nonzero;
}

QuantumState rotate_toward(const QuantumState& psi, const QuantumState& phi, double angle) {
    if (psi.n != phi.n)
        throw DimensionError("rotation across different qubit counts");
    QuantumState out = psi;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    for (size_t i = 0; i < out.amps.size(); ++i)
        out.amps[i] = c * psi.amps[i] + s * phi.amps[i];
    return out;
}

uint32_t orthogonal_probe_index(const QuantumState& psi) {
    for (size_t i = 0; i < psi.amps.size(); ++i)
        if (std::norm(psi.amps[i]) < kZeroProbability * kZeroProbability)
            return static_cast<uint32_t>(i);
    throw Error("state has full support; no basis probe is orthogonal");
}

std::string dump_jsonl(const QuantumState& psi, double floor) {
    std::string out;
    char line[96];
    for (size_t i = 0; i < psi.amps.size(); ++i) {
        const auto& a = psi.amps[i];
        if (std::abs(a.real()) <= floor && std::abs(a.imag()) <= floor)
            continue;
        std::snprintf(line, sizeof(line), "{\"index\":%zu,\"re\":%.17g,\"im\":%.17g}\n", i,
                      a.real(), a.imag());
        out += line;
    }
    return out;
}

namespace lab {

std::pair<QuantumState, QuantumState> clone_attempt(const QuantumState& psi,
                                                    CloneStrategy strategy, Rng& rng) {
    switch (strategy) {
    case CloneStrategy::measure_computational:
    case CloneStrategy::identity_copy_of_classical_outcome: {
        // Measure in the computational basis and hand out the observed label
        // twice. For a basis-state outcome the post-measurement state and a
        // fresh preparation coincide, so both strategies land here.
        const uint32_t idx = sample_measurement(psi, rng);
        return {QuantumState::basis(psi.n, idx), QuantumState::basis(psi.n, idx)};
    }
    case CloneStrategy::measure_hadamard: {
        const QuantumState rotated = hadamard_all(psi);
        const uint32_t idx = sample_measurement(rotated, rng);
        QuantumState observed = hadamard_all(QuantumState::basis(psi.n, idx));
        return {observed, observed};
    }
    }
    throw Error("unknown clone strategy");
}

} // namespace lab

} // namespace qbtc::qsim
