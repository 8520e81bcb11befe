#include "rmkit/mps.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <Eigen/SVD>

#include "rmkit/errors.hpp"

namespace rmkit {

std::vector<int> MPSState::bond_dims() const {
    std::vector<int> dims;
    for (std::size_t i = 0; i + 1 < sites.size(); ++i)
        dims.push_back(static_cast<int>(sites[i][0].cols()));
    return dims;
}

void MPSState::check_consistent() const {
    if (n_qubits < 1 || static_cast<int>(sites.size()) != n_qubits)
        throw std::invalid_argument("MPSState: site count mismatch");
    int left = 1;
    for (int i = 0; i < n_qubits; ++i) {
        for (int s = 0; s < 2; ++s) {
            if (sites[i][s].rows() != left || sites[i][s].cols() != sites[i][0].cols())
                throw std::invalid_argument("MPSState: inconsistent bond dimensions");
        }
        const int right = static_cast<int>(sites[i][0].cols());
        if (right > max_bond && i + 1 < n_qubits)
            throw std::invalid_argument("MPSState: bond exceeds max_bond");
        left = right;
    }
    if (left != 1) throw std::invalid_argument("MPSState: right boundary bond must be 1");
}

CompressionResult compress(const DenseState& state, int max_bond) {
    if (!state.is_pure()) throw std::invalid_argument("compress: input state must be pure");
    if (max_bond < 1) throw std::invalid_argument("compress: max_bond must be >= 1");
    const int n = state.n_qubits();
    const Eigen::VectorXcd& psi = state.statevector();

    MPSState mps;
    mps.n_qubits = n;
    mps.max_bond = max_bond;
    mps.sites.resize(n);

    // carry[(l, tail bits)] ; row index l + chi * s after folding in a site
    Eigen::MatrixXcd carry(1, psi.size());
    for (Eigen::Index s = 0; s < psi.size(); ++s) carry(0, s) = psi(s);

    int chi = 1;
    for (int site = 0; site + 1 < n; ++site) {
        const Eigen::Index tail = carry.cols() / 2;
        Eigen::MatrixXcd m(2 * chi, tail);
        // split the site bit (fastest-varying) off the tail index
        for (int s = 0; s < 2; ++s)
            for (int l = 0; l < chi; ++l)
                for (Eigen::Index t = 0; t < tail; ++t) m(l + chi * s, t) = carry(l, s + 2 * t);

        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const Eigen::VectorXd& sv = svd.singularValues();
        int keep = std::min<int>(max_bond, static_cast<int>(sv.size()));
        while (keep > 1 && sv(keep - 1) <= 0.0) --keep;

        double discarded = 0.0;
        for (Eigen::Index k = keep; k < sv.size(); ++k) discarded += sv(k) * sv(k);
        mps.discarded_weights.push_back(discarded);

        for (int s = 0; s < 2; ++s)
            mps.sites[site][s] = svd.matrixU().block(chi * s, 0, chi, keep);
        carry = sv.head(keep).asDiagonal() * svd.matrixV().leftCols(keep).adjoint();
        chi = keep;
    }
    for (int s = 0; s < 2; ++s) mps.sites[n - 1][s] = carry.col(s);

    // renormalize (truncation shrinks the norm); only the last tensor scales,
    // so the left isometries survive
    const double norm = std::sqrt(mps.sites[n - 1][0].squaredNorm() + mps.sites[n - 1][1].squaredNorm());
    if (!(norm > 0.0)) throw std::runtime_error("compress: zero-norm truncation");
    for (int s = 0; s < 2; ++s) mps.sites[n - 1][s] /= norm;

    CompressionResult result;
    const Eigen::VectorXcd approx = mps_to_statevector(mps);
    result.fidelity = std::norm(approx.dot(psi));
    result.mps = std::move(mps);
    return result;
}

Eigen::VectorXcd mps_to_statevector(const MPSState& mps) {
    mps.check_consistent();
    const std::size_t dim = std::size_t{1} << mps.n_qubits;
    Eigen::VectorXcd psi(dim);
    // depth-first over sites, carrying the partial left vector
    std::vector<Eigen::RowVectorXcd> stack(mps.n_qubits + 1);
    stack[0] = Eigen::RowVectorXcd::Ones(1);
    std::vector<int> choice(mps.n_qubits, 0);
    std::size_t index = 0;
    int depth = 0;
    while (true) {
        if (depth == mps.n_qubits) {
            psi(index) = stack[depth](0);
            --depth;
            while (depth >= 0 && choice[depth] == 1) {
                index &= ~(std::size_t{1} << depth);
                choice[depth] = 0;
                --depth;
            }
            if (depth < 0) break;
            choice[depth] = 1;
            index |= (std::size_t{1} << depth);
        }
        stack[depth + 1] = stack[depth] * mps.sites[depth][choice[depth]];
        ++depth;
    }
    return psi;
}

namespace {

// site tensors with the local rotation folded in: B[s] = sum_s' u(s,s') A[s']
std::vector<std::array<Eigen::MatrixXcd, 2>> rotated_sites(const MPSState& mps,
                                                           const UnitaryAngles& angles) {
    if (angles.n_qubits() != mps.n_qubits)
        throw std::invalid_argument("mps: angles qubit count mismatch");
    const auto us = build_unitaries(angles);
    std::vector<std::array<Eigen::MatrixXcd, 2>> rotated(mps.n_qubits);
    for (int i = 0; i < mps.n_qubits; ++i)
        for (int s = 0; s < 2; ++s)
            rotated[i][s] = us[i](s, 0) * mps.sites[i][0] + us[i](s, 1) * mps.sites[i][1];
    return rotated;
}

}  // namespace

double mps_probability(const MPSState& mps, const UnitaryAngles& angles, Bitstring bitstring) {
    mps.check_consistent();
    if (bitstring >= (Bitstring{1} << mps.n_qubits))
        throw std::invalid_argument("mps_probability: bitstring out of range");
    const auto rotated = rotated_sites(mps, angles);
    Eigen::RowVectorXcd v = Eigen::RowVectorXcd::Ones(1);
    for (int i = 0; i < mps.n_qubits; ++i) v = v * rotated[i][(bitstring >> i) & 1];
    return std::norm(v(0));
}

OutcomeDistribution mps_distribution(const MPSState& mps, const UnitaryAngles& angles) {
    mps.check_consistent();
    const auto rotated = rotated_sites(mps, angles);
    OutcomeDistribution dist;
    dist.n_qubits = mps.n_qubits;
    dist.probs.assign(std::size_t{1} << mps.n_qubits, 0.0);

    std::vector<Eigen::RowVectorXcd> stack(mps.n_qubits + 1);
    stack[0] = Eigen::RowVectorXcd::Ones(1);
    std::vector<int> choice(mps.n_qubits, 0);
    std::size_t index = 0;
    int depth = 0;
    while (true) {
        if (depth == mps.n_qubits) {
            dist.probs[index] = std::norm(stack[depth](0));
            --depth;
            while (depth >= 0 && choice[depth] == 1) {
                index &= ~(std::size_t{1} << depth);
                choice[depth] = 0;
                --depth;
            }
            if (depth < 0) break;
            choice[depth] = 1;
            index |= (std::size_t{1} << depth);
        }
        stack[depth + 1] = stack[depth] * rotated[depth][choice[depth]];
        ++depth;
    }

    double sum = 0.0;
    for (double p : dist.probs) sum += p;
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::runtime_error("mps_distribution: probabilities do not sum to 1");
    return dist;
}

double mps_x(const MPSState& mps, const UnitaryAngles& angles) {
    return x_from_distribution(mps_distribution(mps, angles));
}

double mps_reduced_purity(const MPSState& mps, const std::vector<int>& keep, int max_qubits) {
    if (static_cast<int>(keep.size()) > max_qubits)
        throw resource_limit_error("mps_reduced_purity: subsystem exceeds dense limit");
    const DenseState full = DenseState::pure(mps_to_statevector(mps));
    if (static_cast<int>(keep.size()) == mps.n_qubits) return purity(full);
    return purity(partial_trace(full, keep));
}

nlohmann::json mps_to_json(const MPSState& mps) {
    mps.check_consistent();
    nlohmann::json j;
    j["n_qubits"] = mps.n_qubits;
    j["max_bond"] = mps.max_bond;
    j["bond_dims"] = mps.bond_dims();
    j["discarded_weights"] = mps.discarded_weights;
    j["sites"] = nlohmann::json::array();
    for (const auto& site : mps.sites) {
        nlohmann::json js;
        js["left"] = static_cast<int>(site[0].rows());
        js["right"] = static_cast<int>(site[0].cols());
        nlohmann::json tensor = nlohmann::json::array();
        for (int s = 0; s < 2; ++s)
            for (Eigen::Index r = 0; r < site[s].rows(); ++r)
                for (Eigen::Index c = 0; c < site[s].cols(); ++c)
                    tensor.push_back({site[s](r, c).real(), site[s](r, c).imag()});
        js["tensor"] = std::move(tensor);
        j["sites"].push_back(std::move(js));
    }
    return j;
}

MPSState mps_from_json(const nlohmann::json& j) {
    MPSState mps;
    mps.n_qubits = j.at("n_qubits").get<int>();
    mps.max_bond = j.at("max_bond").get<int>();
    mps.discarded_weights = j.value("discarded_weights", std::vector<double>{});
    mps.sites.resize(mps.n_qubits);
    const auto& sites = j.at("sites");
    if (static_cast<int>(sites.size()) != mps.n_qubits)
        throw std::invalid_argument("mps_from_json: site count mismatch");
    for (int i = 0; i < mps.n_qubits; ++i) {
        const int left = sites[i].at("left").get<int>();
        const int right = sites[i].at("right").get<int>();
        const auto& tensor = sites[i].at("tensor");
        if (static_cast<int>(tensor.size()) != 2 * left * right)
            throw std::invalid_argument("mps_from_json: tensor size mismatch");
        std::size_t k = 0;
        for (int s = 0; s < 2; ++s) {
            mps.sites[i][s].resize(left, right);
            for (int r = 0; r < left; ++r)
                for (int c = 0; c < right; ++c) {
                    mps.sites[i][s](r, c) =
                        complex(tensor[k][0].get<double>(), tensor[k][1].get<double>());
                    ++k;
                }
        }
    }
    mps.check_consistent();
    return mps;
}

void save_mps(const MPSState& mps, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_mps: cannot open " + path);
    out << mps_to_json(mps).dump() << '\n';
}

MPSState load_mps(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_mps: cannot open " + path);
    nlohmann::json j;
    in >> j;
    return mps_from_json(j);
}

MpsSampler::MpsSampler(MPSState mps) : mps_(std::move(mps)) {
    mps_.check_consistent();
    norm_ = {1.0, 0.0};  // normalized pure MPS: integral of X_IS is its purity
}

MpsSampler::MpsSampler(const MPSState& mps, const std::vector<int>& keep) : mps_(mps) {
    mps_.check_consistent();
    reduced_ = partial_trace(DenseState::pure(mps_to_statevector(mps_)), keep);
    norm_ = {purity(*reduced_), 0.0};
}

int MpsSampler::n_qubits() const {
    return reduced_ ? reduced_->n_qubits() : mps_.n_qubits;
}

double MpsSampler::evaluate_raw(const UnitaryAngles& angles) const {
    if (reduced_) return x_exact(*reduced_, angles);
    return mps_x(mps_, angles);
}

}  // namespace rmkit
