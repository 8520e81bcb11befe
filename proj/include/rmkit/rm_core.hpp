#pragma once

#include <iosfwd>
#include <vector>

#include "rmkit/state.hpp"
#include "rmkit/unitary.hpp"

namespace rmkit {

// Computational-basis outcome probabilities after the local rotation:
// probs[s] = <s| u rho u^dag |s>. Tiny negative entries are clamped to zero.
struct OutcomeDistribution {
    int n_qubits = 0;
    std::vector<double> probs;
};

// One sampled unitary plus its observed bitstrings.
struct MeasurementBatch {
    UnitaryAngles angles;
    std::vector<Bitstring> outcomes;

    int n_shots() const { return static_cast<int>(outcomes.size()); }
};

OutcomeDistribution outcome_distribution(const DenseState& state, const UnitaryAngles& angles);

// X(u) = 2^N sum_{s,s'} (-2)^{-D[s,s']} P(s) P(s'), evaluated with the
// per-qubit factorized kernel transform in O(N 2^N).
double x_exact(const DenseState& state, const UnitaryAngles& angles);
double x_from_distribution(const OutcomeDistribution& dist);

// Reference O(4^N) double loop, kept as an oracle for small N.
double x_exact_naive(const DenseState& state, const UnitaryAngles& angles);

// Pauli-string form X(u) = 2^{-N} sum_A 3^{|A|} <sigma^z_A>^2 via the fast
// Walsh-Hadamard transform of the outcome distribution.
double x_pauli(const DenseState& state, const UnitaryAngles& angles);

MeasurementBatch sample_bitstrings(const DenseState& state, const UnitaryAngles& angles,
                                   int n_shots, Rng& rng);

// Unbiased shot-noise estimator
// X_e = 2^N / (N_M (N_M - 1)) sum_{m != m'} (-2)^{-D[s_m, s_m']}.
// Two routes: the direct pairwise sum, and the counts-based form evaluated
// with the factorized transform (O(N 2^N + N_M)); x_estimate picks the
// cheaper one and the two must agree to 1e-9.
double x_estimate(const MeasurementBatch& batch);
double x_estimate_pairwise(const MeasurementBatch& batch);
double x_estimate_counts(const MeasurementBatch& batch);

// In-place per-qubit application of the pair kernel [[1,-1/2],[-1/2,1]].
void apply_pair_kernel(std::vector<double>& v);
// In-place unnormalized fast Walsh-Hadamard transform.
void walsh_hadamard(std::vector<double>& v);

// JSON-lines: one {"angles": [...], "outcomes": [...], "n_shots": n} per line.
void write_batches_jsonl(const std::vector<MeasurementBatch>& batches, std::ostream& out);
std::vector<MeasurementBatch> read_batches_jsonl(std::istream& in);

}  // namespace rmkit
