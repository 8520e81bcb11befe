#include "rmkit/unitary.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rmkit {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_phi(double phi) {
    double p = std::fmod(phi, kTwoPi);
    if (p < 0.0) p += kTwoPi;
    if (p >= kTwoPi) p = 0.0;  // fmod rounding at the boundary
    return p;
}
}  // namespace

UnitaryAngles::UnitaryAngles(std::vector<double> xi_in, std::vector<double> phi_in)
    : xi(std::move(xi_in)), phi(std::move(phi_in)) {
    if (xi.empty() || xi.size() != phi.size())
        throw std::invalid_argument("UnitaryAngles: xi and phi must be nonempty and equal length");
    for (double x : xi)
        if (!(x >= 0.0 && x <= 1.0))
            throw std::invalid_argument("UnitaryAngles: xi outside [0,1]");
    for (double& p : phi) {
        if (!std::isfinite(p)) throw std::invalid_argument("UnitaryAngles: non-finite phi");
        p = wrap_phi(p);
    }
}

UnitaryAngles sample_haar_angles(int n_qubits, Rng& rng) {
    if (n_qubits < 1) throw std::invalid_argument("sample_haar_angles: n_qubits must be >= 1");
    std::vector<double> xi(n_qubits), phi(n_qubits);
    for (int i = 0; i < n_qubits; ++i) {
        xi[i] = rng.uniform();
        phi[i] = rng.uniform(0.0, kTwoPi);
    }
    return UnitaryAngles(std::move(xi), std::move(phi));
}

SingleQubitUnitary build_unitary(double xi, double phi) {
    // R_y(theta) R_z(phi) with theta = 2*asin(sqrt(xi)),
    // R_b(t) = exp(-i sigma_b t / 2).
    const double half = std::asin(std::sqrt(std::min(1.0, std::max(0.0, xi))));
    const double c = std::cos(half);
    const double s = std::sin(half);
    const complex em(std::cos(phi / 2.0), -std::sin(phi / 2.0));  // e^{-i phi/2}
    const complex ep = std::conj(em);
    SingleQubitUnitary u;
    u.m[0] = c * em;
    u.m[1] = -s * ep;
    u.m[2] = s * em;
    u.m[3] = c * ep;
    return u;
}

std::vector<SingleQubitUnitary> build_unitaries(const UnitaryAngles& angles) {
    std::vector<SingleQubitUnitary> out;
    out.reserve(angles.xi.size());
    for (size_t i = 0; i < angles.xi.size(); ++i)
        out.push_back(build_unitary(angles.xi[i], angles.phi[i]));
    return out;
}

double unitarity_defect(const SingleQubitUnitary& u) {
    // u^dag u entries
    complex g00 = std::conj(u.m[0]) * u.m[0] + std::conj(u.m[2]) * u.m[2];
    complex g01 = std::conj(u.m[0]) * u.m[1] + std::conj(u.m[2]) * u.m[3];
    complex g10 = std::conj(u.m[1]) * u.m[0] + std::conj(u.m[3]) * u.m[2];
    complex g11 = std::conj(u.m[1]) * u.m[1] + std::conj(u.m[3]) * u.m[3];
    double d = std::abs(g00 - 1.0);
    d = std::max(d, std::abs(g01));
    d = std::max(d, std::abs(g10));
    d = std::max(d, std::abs(g11 - 1.0));
    return d;
}

nlohmann::json angles_to_json(const UnitaryAngles& angles) {
    nlohmann::json arr = nlohmann::json::array();
    for (size_t i = 0; i < angles.xi.size(); ++i) {
        arr.push_back(angles.xi[i]);
        arr.push_back(angles.phi[i]);
    }
    return arr;
}

UnitaryAngles angles_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty() || j.size() % 2 != 0)
        throw std::invalid_argument("angles_from_json: expected flat array [xi_1, phi_1, ...]");
    std::vector<double> xi, phi;
    xi.reserve(j.size() / 2);
    phi.reserve(j.size() / 2);
    for (size_t i = 0; i < j.size(); i += 2) {
        xi.push_back(j[i].get<double>());
        phi.push_back(j[i + 1].get<double>());
    }
    return UnitaryAngles(std::move(xi), std::move(phi));
}

std::vector<double> angles_to_unit_vector(const UnitaryAngles& angles) {
    std::vector<double> v;
    v.reserve(2 * angles.xi.size());
    for (size_t i = 0; i < angles.xi.size(); ++i) {
        v.push_back(angles.xi[i]);
        v.push_back(angles.phi[i] / kTwoPi);
    }
    return v;
}

}  // namespace rmkit
