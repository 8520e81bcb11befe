#pragma once

#include <complex>
#include <vector>

#include <json.hpp>

#include "rmkit/rng.hpp"

namespace rmkit {

using complex = std::complex<double>;

// 2x2 complex matrix in row-major order: m[0]=u00, m[1]=u01, m[2]=u10, m[3]=u11.
struct SingleQubitUnitary {
    complex m[4];

    complex operator()(int row, int col) const { return m[2 * row + col]; }
};

// Per-qubit (xi, phi) parametrization of a product of single-qubit unitaries
// u_i = R_y(theta_i) R_z(phi_i), theta_i = 2*asin(sqrt(xi_i)). The pair
// (xi, phi) is canonical because the Haar measure is uniform in xi and phi;
// theta is derived on demand. phi is reduced modulo 2*pi into [0, 2*pi).
struct UnitaryAngles {
    std::vector<double> xi;
    std::vector<double> phi;

    UnitaryAngles() = default;
    UnitaryAngles(std::vector<double> xi_in, std::vector<double> phi_in);

    int n_qubits() const { return static_cast<int>(xi.size()); }
};

// i.i.d. uniform draws: xi on [0,1], phi on [0,2*pi). Haar measure on the
// product of single-qubit unitary groups.
UnitaryAngles sample_haar_angles(int n_qubits, Rng& rng);

SingleQubitUnitary build_unitary(double xi, double phi);
std::vector<SingleQubitUnitary> build_unitaries(const UnitaryAngles& angles);

// Max absolute entry of u^dag u - 1.
double unitarity_defect(const SingleQubitUnitary& u);

// Flat JSON array [xi_1, phi_1, ..., xi_N, phi_N] -- the same 2N-vector that
// feeds the learned sampler models.
nlohmann::json angles_to_json(const UnitaryAngles& angles);
UnitaryAngles angles_from_json(const nlohmann::json& j);

// Flattened [xi_1, phi_1/(2*pi), ...] with every entry in [0,1].
std::vector<double> angles_to_unit_vector(const UnitaryAngles& angles);

}  // namespace rmkit
