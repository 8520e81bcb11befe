#include "rmkit/state.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "rmkit/errors.hpp"

namespace rmkit {

namespace {

int qubits_for_dim(Eigen::Index dim) {
    if (dim < 2) throw std::invalid_argument("DenseState: dimension must be >= 2");
    int n = 0;
    Eigen::Index d = dim;
    while (d > 1) {
        if (d % 2 != 0) throw std::invalid_argument("DenseState: dimension must be a power of 2");
        d /= 2;
        ++n;
    }
    return n;
}

void check_qubit_budget(int n, int max_qubits) {
    if (n < 1) throw std::invalid_argument("state factory: n must be >= 1");
    if (n > max_qubits)
        throw resource_limit_error("state factory: n = " + std::to_string(n) +
                                   " exceeds configured dense limit " + std::to_string(max_qubits));
}

}  // namespace

DenseState DenseState::pure(Eigen::VectorXcd psi) {
    DenseState s;
    s.n_qubits_ = qubits_for_dim(psi.size());
    s.pure_ = true;
    s.psi_ = std::move(psi);
    const double norm = s.psi_.norm();
    if (std::abs(norm - 1.0) > 1e-8)
        throw std::invalid_argument("DenseState::pure: statevector not normalized");
    return s;
}

DenseState DenseState::mixed(Eigen::MatrixXcd rho) {
    DenseState s;
    if (rho.rows() != rho.cols()) throw std::invalid_argument("DenseState::mixed: matrix not square");
    s.n_qubits_ = qubits_for_dim(rho.rows());
    s.pure_ = false;
    s.rho_ = std::move(rho);
    s.check_invariants();
    return s;
}

const Eigen::VectorXcd& DenseState::statevector() const {
    if (!pure_) throw std::invalid_argument("DenseState: mixed state has no statevector");
    return psi_;
}

Eigen::MatrixXcd DenseState::density_matrix() const {
    if (pure_) return psi_ * psi_.adjoint();
    return rho_;
}

void DenseState::check_invariants(double tol) const {
    if (pure_) {
        if (std::abs(psi_.squaredNorm() - 1.0) > tol)
            throw std::invalid_argument("DenseState: statevector norm violates trace-1");
        return;
    }
    const double trace_err = std::abs(rho_.trace() - std::complex<double>(1.0, 0.0));
    if (trace_err > tol) throw std::invalid_argument("DenseState: trace(rho) != 1");
    const double herm_err = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
    if (herm_err > tol) throw std::invalid_argument("DenseState: rho not Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol)
        throw std::invalid_argument("DenseState: rho has negative eigenvalues");
}

DenseState make_product(int n, int max_qubits) {
    check_qubit_budget(n, max_qubits);
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(std::int64_t{1} << n);
    psi(0) = 1.0;
    return DenseState::pure(std::move(psi));
}

DenseState make_ghz(int n, int max_qubits) {
    check_qubit_budget(n, max_qubits);
    const std::int64_t dim = std::int64_t{1} << n;
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
    psi(0) = 1.0 / std::sqrt(2.0);
    psi(dim - 1) = 1.0 / std::sqrt(2.0);
    return DenseState::pure(std::move(psi));
}

DenseState make_haar_random_pure(int n, Rng& rng, int max_qubits) {
    check_qubit_budget(n, max_qubits);
    const std::int64_t dim = std::int64_t{1} << n;
    Eigen::VectorXcd psi(dim);
    for (std::int64_t i = 0; i < dim; ++i) psi(i) = std::complex<double>(rng.normal(), rng.normal());
    psi /= psi.norm();
    return DenseState::pure(std::move(psi));
}

DenseState make_maximally_mixed(int n, int max_qubits) {
    check_qubit_budget(n, max_qubits);
    const std::int64_t dim = std::int64_t{1} << n;
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim);
    return DenseState::mixed(std::move(rho));
}

DenseState make_xy_quench(int n, double alpha, double coupling, double time, int max_qubits) {
    check_qubit_budget(n, max_qubits);
    if (n < 2) throw std::invalid_argument("make_xy_quench: needs n >= 2");
    const std::int64_t dim = std::int64_t{1} << n;

    // Flip-flop H is real symmetric in the computational basis; the initial
    // Neel state |0101...> carries the excitations the quench spreads.
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (std::int64_t s = 0; s < dim; ++s) {
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const int bi = (s >> i) & 1;
                const int bj = (s >> j) & 1;
                if (bi == bj) continue;
                const std::int64_t t = s ^ ((std::int64_t{1} << i) | (std::int64_t{1} << j));
                h(t, s) += coupling / std::pow(static_cast<double>(j - i), alpha);
            }
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    Bitstring neel = 0;
    for (int i = 1; i < n; i += 2) neel |= (Bitstring{1} << i);

    const Eigen::VectorXd overlaps = es.eigenvectors().row(neel);
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
    for (std::int64_t k = 0; k < dim; ++k) {
        const double e = es.eigenvalues()(k);
        const std::complex<double> phase(std::cos(e * time), -std::sin(e * time));
        psi += (overlaps(k) * phase) * es.eigenvectors().col(k);
    }
    psi /= psi.norm();
    return DenseState::pure(std::move(psi));
}

namespace {

std::vector<int> canonical_keep(const DenseState& state, const std::vector<int>& keep) {
    if (keep.empty()) throw std::invalid_argument("partial_trace: keep set must be nonempty");
    std::vector<int> k = keep;
    std::sort(k.begin(), k.end());
    k.erase(std::unique(k.begin(), k.end()), k.end());
    if (k.front() < 0 || k.back() >= state.n_qubits())
        throw std::invalid_argument("partial_trace: qubit index out of range");
    return k;
}

}  // namespace

DenseState partial_trace(const DenseState& state, const std::vector<int>& keep) {
    const std::vector<int> kept = canonical_keep(state, keep);
    const int n = state.n_qubits();
    const int nk = static_cast<int>(kept.size());
    if (nk == n) return state;

    std::vector<int> env;
    env.reserve(n - nk);
    for (int q = 0; q < n; ++q)
        if (!std::binary_search(kept.begin(), kept.end(), q)) env.push_back(q);

    const std::size_t dk = std::size_t{1} << nk;
    const std::size_t de = std::size_t{1} << env.size();

    auto scatter = [](const std::vector<int>& positions, std::size_t bits) {
        std::size_t out = 0;
        for (std::size_t b = 0; b < positions.size(); ++b)
            if ((bits >> b) & 1) out |= (std::size_t{1} << positions[b]);
        return out;
    };

    std::vector<std::size_t> keep_index(dk), env_index(de);
    for (std::size_t a = 0; a < dk; ++a) keep_index[a] = scatter(kept, a);
    for (std::size_t e = 0; e < de; ++e) env_index[e] = scatter(env, e);

    Eigen::MatrixXcd red = Eigen::MatrixXcd::Zero(dk, dk);
    if (state.is_pure()) {
        const Eigen::VectorXcd& psi = state.statevector();
        for (std::size_t e = 0; e < de; ++e) {
            const std::size_t base = env_index[e];
            for (std::size_t a = 0; a < dk; ++a) {
                const std::complex<double> va = psi(keep_index[a] | base);
                if (va == std::complex<double>(0.0, 0.0)) continue;
                for (std::size_t b = 0; b < dk; ++b)
                    red(a, b) += va * std::conj(psi(keep_index[b] | base));
            }
        }
    } else {
        const Eigen::MatrixXcd rho = state.density_matrix();
        for (std::size_t e = 0; e < de; ++e) {
            const std::size_t base = env_index[e];
            for (std::size_t a = 0; a < dk; ++a)
                for (std::size_t b = 0; b < dk; ++b)
                    red(a, b) += rho(keep_index[a] | base, keep_index[b] | base);
        }
    }
    // keep exact Hermiticity despite accumulation order
    red = 0.5 * (red + red.adjoint()).eval();
    return DenseState::mixed(std::move(red));
}

double purity(const DenseState& state) {
    if (state.is_pure()) {
        const double n2 = state.statevector().squaredNorm();
        return n2 * n2;
    }
    return state.density_matrix().squaredNorm();  // sum |rho_ij|^2 = Tr(rho^2)
}

double fidelity(const DenseState& a, const DenseState& b) {
    if (a.n_qubits() != b.n_qubits())
        throw std::invalid_argument("fidelity: qubit counts differ");
    if (a.is_pure() && b.is_pure()) {
        const std::complex<double> ov = a.statevector().dot(b.statevector());
        return std::norm(ov);
    }
    if (a.is_pure() || b.is_pure()) {
        const DenseState& p = a.is_pure() ? a : b;
        const DenseState& m = a.is_pure() ? b : a;
        const Eigen::VectorXcd& psi = p.statevector();
        const std::complex<double> val = psi.dot(m.density_matrix() * psi);
        return std::max(0.0, std::min(1.0, val.real()));
    }
    // Uhlmann: (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> esa(a.density_matrix());
    Eigen::VectorXd ev = esa.eigenvalues().cwiseMax(0.0);
    Eigen::MatrixXcd sqrt_a =
        esa.eigenvectors() * ev.cwiseSqrt().asDiagonal() * esa.eigenvectors().adjoint();
    Eigen::MatrixXcd inner = sqrt_a * b.density_matrix() * sqrt_a;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> esi(inner, Eigen::EigenvaluesOnly);
    double tr = 0.0;
    for (Eigen::Index i = 0; i < esi.eigenvalues().size(); ++i)
        tr += std::sqrt(std::max(0.0, esi.eigenvalues()(i)));
    return std::max(0.0, std::min(1.0, tr * tr));
}

namespace {
constexpr char kMagic[8] = {'R', 'M', 'K', 'S', 'T', 'A', 'T', 'E'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_state(const DenseState& state, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_state: cannot open " + path);
    out.write(kMagic, sizeof(kMagic));
    const std::uint32_t version = kVersion;
    const std::uint32_t n = static_cast<std::uint32_t>(state.n_qubits());
    const std::uint8_t pure = state.is_pure() ? 1 : 0;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    out.write(reinterpret_cast<const char*>(&pure), sizeof(pure));
    if (state.is_pure()) {
        const Eigen::VectorXcd& psi = state.statevector();
        out.write(reinterpret_cast<const char*>(psi.data()),
                  static_cast<std::streamsize>(sizeof(std::complex<double>) * psi.size()));
    } else {
        // row-major on disk
        const Eigen::MatrixXcd rho = state.density_matrix();
        for (Eigen::Index r = 0; r < rho.rows(); ++r)
            for (Eigen::Index c = 0; c < rho.cols(); ++c) {
                const std::complex<double> v = rho(r, c);
                out.write(reinterpret_cast<const char*>(&v), sizeof(v));
            }
    }
    if (!out) throw std::runtime_error("save_state: write failed for " + path);
}

DenseState load_state(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_state: cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("load_state: bad magic in " + path);
    std::uint32_t version = 0, n = 0;
    std::uint8_t pure = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    in.read(reinterpret_cast<char*>(&pure), sizeof(pure));
    if (!in || version != kVersion) throw std::runtime_error("load_state: unsupported version");
    const std::int64_t dim = std::int64_t{1} << n;
    if (pure) {
        Eigen::VectorXcd psi(dim);
        in.read(reinterpret_cast<char*>(psi.data()),
                static_cast<std::streamsize>(sizeof(std::complex<double>) * dim));
        if (!in) throw std::runtime_error("load_state: truncated file " + path);
        return DenseState::pure(std::move(psi));
    }
    Eigen::MatrixXcd rho(dim, dim);
    for (std::int64_t r = 0; r < dim; ++r)
        for (std::int64_t c = 0; c < dim; ++c) {
            std::complex<double> v;
            in.read(reinterpret_cast<char*>(&v), sizeof(v));
            rho(r, c) = v;
        }
    if (!in) throw std::runtime_error("load_state: truncated file " + path);
    return DenseState::mixed(std::move(rho));
}

}  // namespace rmkit
