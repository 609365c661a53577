#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qbtc/gf2.hpp"
#include "qbtc/rng.hpp"

namespace qbtc::qsim {

using Amplitude = std::complex<double>;

// Probabilities below this count as an impossible branch; the conditional
// state is then the explicit zero sentinel rather than a NaN renormalization.
inline constexpr double kZeroProbability = 1e-12;

// Exact state vector over n qubits. The all-zero amplitude vector is the
// designated sentinel for a postselection branch of probability zero; every
// other state is normalized to 1 within 1e-9.
struct QuantumState {
    int n = 0;
    std::vector<Amplitude> amps;

    static QuantumState zero_sentinel(int n);
    static QuantumState basis(int n, uint32_t index);

    size_t dimension() const { return amps.size(); }
    double norm_squared() const;
    bool is_zero_sentinel() const;
};

// Outcome of a projective step with postselection semantics: the branch
// probability is reported analytically and post_state is the renormalized
// conditional state (zero sentinel when the branch is impossible).
struct MeasurementOutcome {
    bool accepted = false;
    double probability = 0.0;
    QuantumState post_state;
};

// |A> = |A|^(-1/2) sum_{x in A} |x>.
QuantumState build_subspace_state(const gf2::Subspace& A);

// U_A: sign flip on exactly the basis states inside A; an involution.
QuantumState apply_membership_oracle(const gf2::Subspace& A, const QuantumState& psi);

// P_A: zero the amplitudes outside A, report the branch probability, and
// renormalize the surviving branch.
MeasurementOutcome project_onto_subspace(const gf2::Subspace& A, const QuantumState& psi);

// Walsh-Hadamard transform H^(x)n with 2^(-n/2) overall normalization. For
// even n the scale factor is an exact power of two, so equal-amplitude
// inputs transform without rounding; this keeps ideal verification exact.
QuantumState hadamard_all(const QuantumState& psi);

// V_A = H P_{A_perp} H P_A for dim(A) = n/2. Analytic postselection form:
// probability is the joint accept-branch probability, which equals
// |<psi|A>|^2, and post_state is |A> whenever the branch is possible.
MeasurementOutcome verify_state(const gf2::Subspace& A, const QuantumState& psi);
MeasurementOutcome verify_state(const gf2::Subspace& A, const gf2::Subspace& A_perp,
                                const QuantumState& psi);

// Same verifier with the two projective outcomes actually sampled. On
// rejection post_state is the complement branch at the projector that
// failed (the procedure aborts there); accept_probability stays analytic.
struct SampledVerification {
    bool accepted = false;
    double accept_probability = 0.0;
    QuantumState post_state;
};
SampledVerification sample_verify(const gf2::Subspace& A, const gf2::Subspace& A_perp,
                                  const QuantumState& psi, Rng& rng);

std::complex<double> inner_product(const QuantumState& a, const QuantumState& b); // <a|b>

// For pure states: sqrt(1 - |<a|b>|^2).
double trace_distance(const QuantumState& a, const QuantumState& b);

// Computational-basis measurement; returns the observed index.
uint32_t sample_measurement(const QuantumState& psi, Rng& rng);

// cos(angle) * psi + sin(angle) * phi. phi must be orthonormal to psi for
// the result to stay normalized; used by the longevity perturbation model.
QuantumState rotate_toward(const QuantumState& psi, const QuantumState& phi, double angle);

// Smallest basis index carrying no amplitude; a deterministic orthogonal
// direction that needs no knowledge of the hidden subspace.
uint32_t orthogonal_probe_index(const QuantumState& psi);

// JSON-lines debug dump: one {"index","re","im"} object per amplitude above
// the floor.
std::string dump_jsonl(const QuantumState& psi, double floor = 1e-12);

namespace lab {

// Baseline counterfeiting strategies for the soundness experiments. These
// live in the lab namespace: the custody layer never exposes raw states,
// and nothing here is reachable from protocol code.
enum class CloneStrategy {
    measure_computational,
    measure_hadamard,
    identity_copy_of_classical_outcome,
};

std::pair<QuantumState, QuantumState> clone_attempt(const QuantumState& psi,
                                                    CloneStrategy strategy, Rng& rng);

} // namespace lab

} // namespace qbtc::qsim
