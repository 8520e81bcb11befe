#include "rmkit/rm_core.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace rmkit {

namespace {

void apply_gate_to_vector(Eigen::VectorXcd& psi, const SingleQubitUnitary& u, int qubit) {
    const std::size_t dim = static_cast<std::size_t>(psi.size());
    const std::size_t bit = std::size_t{1} << qubit;
    for (std::size_t i = 0; i < dim; ++i) {
        if (i & bit) continue;
        const complex a = psi(i);
        const complex b = psi(i | bit);
        psi(i) = u.m[0] * a + u.m[1] * b;
        psi(i | bit) = u.m[2] * a + u.m[3] * b;
    }
}

void apply_gate_to_matrix(Eigen::MatrixXcd& rho, const SingleQubitUnitary& u, int qubit) {
    const std::size_t dim = static_cast<std::size_t>(rho.rows());
    const std::size_t bit = std::size_t{1} << qubit;
    // rows: rho <- U rho
    for (std::size_t c = 0; c < dim; ++c) {
        for (std::size_t r = 0; r < dim; ++r) {
            if (r & bit) continue;
            const complex a = rho(r, c);
            const complex b = rho(r | bit, c);
            rho(r, c) = u.m[0] * a + u.m[1] * b;
            rho(r | bit, c) = u.m[2] * a + u.m[3] * b;
        }
    }
    // columns: rho <- rho U^dag
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t c = 0; c < dim; ++c) {
            if (c & bit) continue;
            const complex a = rho(r, c);
            const complex b = rho(r, c | bit);
            rho(r, c) = a * std::conj(u.m[0]) + b * std::conj(u.m[1]);
            rho(r, c | bit) = a * std::conj(u.m[2]) + b * std::conj(u.m[3]);
        }
    }
}

void check_match(const DenseState& state, const UnitaryAngles& angles) {
    if (state.n_qubits() != angles.n_qubits())
        throw std::invalid_argument("rm_core: state and angles qubit counts differ");
}

}  // namespace

OutcomeDistribution outcome_distribution(const DenseState& state, const UnitaryAngles& angles) {
    check_match(state, angles);
    const auto us = build_unitaries(angles);
    OutcomeDistribution dist;
    dist.n_qubits = state.n_qubits();
    dist.probs.resize(state.dim());
    if (state.is_pure()) {
        Eigen::VectorXcd psi = state.statevector();
        for (int q = 0; q < state.n_qubits(); ++q) apply_gate_to_vector(psi, us[q], q);
        for (std::size_t s = 0; s < state.dim(); ++s) dist.probs[s] = std::norm(psi(s));
    } else {
        Eigen::MatrixXcd rho = state.density_matrix();
        for (int q = 0; q < state.n_qubits(); ++q) apply_gate_to_matrix(rho, us[q], q);
        for (std::size_t s = 0; s < state.dim(); ++s) dist.probs[s] = rho(s, s).real();
    }
    double sum = 0.0;
    for (double& p : dist.probs) {
        if (p < 0.0) {
            if (p < -1e-12) throw std::runtime_error("outcome_distribution: negative probability");
            p = 0.0;
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-10)
        throw std::runtime_error("outcome_distribution: probabilities do not sum to 1");
    return dist;
}

void apply_pair_kernel(std::vector<double>& v) {
    const std::size_t dim = v.size();
    for (std::size_t bit = 1; bit < dim; bit <<= 1) {
        for (std::size_t i = 0; i < dim; ++i) {
            if (i & bit) continue;
            const double a = v[i];
            const double b = v[i | bit];
            v[i] = a - 0.5 * b;
            v[i | bit] = b - 0.5 * a;
        }
    }
}

void walsh_hadamard(std::vector<double>& v) {
    const std::size_t dim = v.size();
    for (std::size_t bit = 1; bit < dim; bit <<= 1) {
        for (std::size_t i = 0; i < dim; ++i) {
            if (i & bit) continue;
            const double a = v[i];
            const double b = v[i | bit];
            v[i] = a + b;
            v[i | bit] = a - b;
        }
    }
}

double x_from_distribution(const OutcomeDistribution& dist) {
    std::vector<double> q = dist.probs;
    apply_pair_kernel(q);
    double acc = 0.0;
    for (std::size_t s = 0; s < q.size(); ++s) acc += dist.probs[s] * q[s];
    return std::ldexp(acc, dist.n_qubits);  // 2^N * P^T K P
}

double x_exact(const DenseState& state, const UnitaryAngles& angles) {
    return x_from_distribution(outcome_distribution(state, angles));
}

double x_exact_naive(const DenseState& state, const UnitaryAngles& angles) {
    if (state.n_qubits() > 6)
        throw std::invalid_argument("x_exact_naive: reference path is limited to N <= 6");
    const OutcomeDistribution dist = outcome_distribution(state, angles);
    const std::size_t dim = dist.probs.size();
    double acc = 0.0;
    for (std::size_t s = 0; s < dim; ++s)
        for (std::size_t t = 0; t < dim; ++t) {
            const int d = std::popcount(s ^ t);
            acc += dist.probs[s] * dist.probs[t] * std::pow(-2.0, -d);
        }
    return std::ldexp(acc, dist.n_qubits);
}

double x_pauli(const DenseState& state, const UnitaryAngles& angles) {
    const OutcomeDistribution dist = outcome_distribution(state, angles);
    std::vector<double> w = dist.probs;
    walsh_hadamard(w);  // w[A] = <sigma^z_A>
    double acc = 0.0;
    for (std::size_t a = 0; a < w.size(); ++a)
        acc += std::pow(3.0, std::popcount(a)) * w[a] * w[a];
    return std::ldexp(acc, -dist.n_qubits);
}

MeasurementBatch sample_bitstrings(const DenseState& state, const UnitaryAngles& angles,
                                   int n_shots, Rng& rng) {
    if (n_shots < 1) throw std::invalid_argument("sample_bitstrings: n_shots must be >= 1");
    const OutcomeDistribution dist = outcome_distribution(state, angles);
    std::vector<double> cdf(dist.probs.size());
    double acc = 0.0;
    for (std::size_t s = 0; s < dist.probs.size(); ++s) {
        acc += dist.probs[s];
        cdf[s] = acc;
    }
    cdf.back() = 1.0;
    MeasurementBatch batch;
    batch.angles = angles;
    batch.outcomes.resize(n_shots);
    for (int m = 0; m < n_shots; ++m) {
        const double r = rng.uniform();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
        batch.outcomes[m] = static_cast<Bitstring>(it - cdf.begin());
    }
    return batch;
}

namespace {

void check_estimable(const MeasurementBatch& batch) {
    if (batch.n_shots() < 2)
        throw std::invalid_argument("x_estimate: needs at least 2 shots per unitary");
}

}  // namespace

double x_estimate_pairwise(const MeasurementBatch& batch) {
    check_estimable(batch);
    const int nm = batch.n_shots();
    double acc = 0.0;
    for (int m = 0; m < nm; ++m)
        for (int mp = m + 1; mp < nm; ++mp) {
            const int d = std::popcount(batch.outcomes[m] ^ batch.outcomes[mp]);
            acc += std::pow(-2.0, -d);
        }
    const double pairs = static_cast<double>(nm) * (nm - 1);
    return std::ldexp(2.0 * acc / pairs, batch.angles.n_qubits());
}

double x_estimate_counts(const MeasurementBatch& batch) {
    check_estimable(batch);
    const int n = batch.angles.n_qubits();
    const int nm = batch.n_shots();
    std::vector<double> counts(std::size_t{1} << n, 0.0);
    for (Bitstring s : batch.outcomes) counts[s] += 1.0;
    std::vector<double> q = counts;
    apply_pair_kernel(q);
    double acc = 0.0;
    for (std::size_t s = 0; s < counts.size(); ++s) acc += counts[s] * q[s];
    acc -= nm;  // remove the m = m' diagonal
    const double pairs = static_cast<double>(nm) * (nm - 1);
    return std::ldexp(acc / pairs, n);
}

double x_estimate(const MeasurementBatch& batch) {
    check_estimable(batch);
    const int n = batch.angles.n_qubits();
    const double pairwise_cost = static_cast<double>(batch.n_shots()) * batch.n_shots();
    const double counts_cost = static_cast<double>(n) * std::ldexp(1.0, n);
    return pairwise_cost <= counts_cost ? x_estimate_pairwise(batch) : x_estimate_counts(batch);
}

void write_batches_jsonl(const std::vector<MeasurementBatch>& batches, std::ostream& out) {
    for (const auto& b : batches) {
        nlohmann::json rec;
        rec["angles"] = angles_to_json(b.angles);
        rec["outcomes"] = b.outcomes;
        rec["n_shots"] = b.n_shots();
        out << rec.dump() << '\n';
    }
}

std::vector<MeasurementBatch> read_batches_jsonl(std::istream& in) {
    std::vector<MeasurementBatch> batches;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const nlohmann::json rec = nlohmann::json::parse(line);
        MeasurementBatch b;
        b.angles = angles_from_json(rec.at("angles"));
        b.outcomes = rec.at("outcomes").get<std::vector<Bitstring>>();
        if (rec.contains("n_shots") && rec["n_shots"].get<int>() != b.n_shots())
            throw std::invalid_argument("read_batches_jsonl: n_shots mismatch");
        batches.push_back(std::move(b));
    }
    return batches;
}

}  // namespace rmkit
