#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rmkit/rng.hpp"

namespace rmkit {

using Bitstring = std::uint32_t;  // bit i = outcome of qubit i

inline constexpr int kDefaultMaxQubits = 12;

// Exact desk-scale quantum state: a pure state held as a 2^N statevector, or
// a mixed state held as a 2^N x 2^N Hermitian density matrix. Immutable after
// construction; all operations return new states.
class DenseState {
public:
    static DenseState pure(Eigen::VectorXcd psi);
    static DenseState mixed(Eigen::MatrixXcd rho);

    int n_qubits() const { return n_qubits_; }
    std::size_t dim() const { return std::size_t{1} << n_qubits_; }
    bool is_pure() const { return pure_; }

    const Eigen::VectorXcd& statevector() const;  // pure states only
    Eigen::MatrixXcd density_matrix() const;      // materializes |psi><psi| if pure

    // trace-1, Hermitian, eigenvalues >= -1e-10
    void check_invariants(double tol = 1e-10) const;

private:
    DenseState() = default;
    int n_qubits_ = 0;
    bool pure_ = true;
    Eigen::VectorXcd psi_;
    Eigen::MatrixXcd rho_;
};

// |0...0>
DenseState make_product(int n, int max_qubits = kDefaultMaxQubits);
// (|0...0> + |1...1>)/sqrt(2)
DenseState make_ghz(int n, int max_qubits = kDefaultMaxQubits);
// Haar-random pure state on the full 2^N-dimensional space.
DenseState make_haar_random_pure(int n, Rng& rng, int max_qubits = kDefaultMaxQubits);
// Neel state |0101...> evolved under the long-range XY Hamiltonian
// H = sum_{i<j} J/|i-j|^alpha (sp_i sm_j + h.c.), open boundary, via exact
// Hermitian eigendecomposition.
DenseState make_xy_quench(int n, double alpha, double coupling, double time,
                          int max_qubits = kDefaultMaxQubits);
DenseState make_maximally_mixed(int n, int max_qubits = kDefaultMaxQubits);

// Reduced state on the (sorted, deduplicated) kept qubits.
DenseState partial_trace(const DenseState& state, const std::vector<int>& keep);

double purity(const DenseState& state);

// <psi|rho|psi> when either argument is pure; Uhlmann fidelity otherwise.
double fidelity(const DenseState& a, const DenseState& b);

void save_state(const DenseState& state, const std::string& path);
DenseState load_state(const std::string& path);

}  // namespace rmkit
