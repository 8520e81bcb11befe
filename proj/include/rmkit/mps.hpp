#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "rmkit/sampler.hpp"

namespace rmkit {

// Matrix-product state: per site two bond matrices A[s] (left x right),
// boundary bonds of size 1, every bond <= max_bond. Left-canonical by
// construction (the compression sweep runs left to right); normalized to 1.
struct MPSState {
    int n_qubits = 0;
    int max_bond = 1;
    std::vector<std::array<Eigen::MatrixXcd, 2>> sites;
    std::vector<double> discarded_weights;  // truncated Schmidt weight per cut

    std::vector<int> bond_dims() const;
    void check_consistent() const;
};

struct CompressionResult {
    MPSState mps;
    double fidelity = 0.0;  // |<psi_D|psi>|^2 after renormalization
};

// Sequential SVDs left to right, keeping the D largest singular values per
// cut. Pure input states only.
CompressionResult compress(const DenseState& state, int max_bond);

Eigen::VectorXcd mps_to_statevector(const MPSState& mps);

// |<s| (x) u_i |psi_D>|^2 by chain contraction.
double mps_probability(const MPSState& mps, const UnitaryAngles& angles, Bitstring bitstring);

// All 2^N outcomes at desk scale (depth-first over the chain).
OutcomeDistribution mps_distribution(const MPSState& mps, const UnitaryAngles& angles);

// Kernel statistic of the MPS-implied state, same transform as rm_core.
double mps_x(const MPSState& mps, const UnitaryAngles& angles);

// Purity of Tr_B(|psi_D><psi_D|) on the kept qubits.
double mps_reduced_purity(const MPSState& mps, const std::vector<int>& keep,
                          int max_qubits = kDefaultMaxQubits);

nlohmann::json mps_to_json(const MPSState& mps);
MPSState mps_from_json(const nlohmann::json& j);
void save_mps(const MPSState& mps, const std::string& path);
MPSState load_mps(const std::string& path);

// Sampler backend: X_IS from the MPS wavefunction (pure target, Z = 1), or
// from the reduced state Tr_B(|psi_D><psi_D|) when a keep set is given
// (Z = its purity).
class MpsSampler final : public SamplerModel {
public:
    explicit MpsSampler(MPSState mps);
    MpsSampler(const MPSState& mps, const std::vector<int>& keep);
    int n_qubits() const override;
    double evaluate_raw(const UnitaryAngles& angles) const override;
    std::string name() const override { return "mps"; }

private:
    MPSState mps_;                       // pure-target mode
    std::optional<DenseState> reduced_;  // reduced-target mode
};

}  // namespace rmkit
