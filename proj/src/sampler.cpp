#include "rmkit/sampler.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rmkit {

double SamplerModel::evaluate(const UnitaryAngles& angles) const {
    check_angles(angles);
    return std::max(evaluate_raw(angles), kWeightFloor);
}

void SamplerModel::check_angles(const UnitaryAngles& angles) const {
    if (angles.n_qubits() != n_qubits())
        throw std::invalid_argument("SamplerModel: angles qubit count mismatch");
}

UniformSampler::UniformSampler(int n_qubits) : n_(n_qubits) {
    if (n_qubits < 1) throw std::invalid_argument("UniformSampler: n_qubits must be >= 1");
    norm_ = {1.0, 0.0};
}

double UniformSampler::evaluate_raw(const UnitaryAngles&) const { return 1.0; }

ExactSampler::ExactSampler(DenseState state) : state_(std::move(state)) {
    // integral of X(u) over the Haar measure is the purity, exactly
    norm_ = {purity(state_), 0.0};
}

double ExactSampler::evaluate_raw(const UnitaryAngles& angles) const {
    return x_exact(state_, angles);
}

ScaledSampler::ScaledSampler(std::shared_ptr<const SamplerModel> inner, double factor)
    : inner_(std::move(inner)), factor_(factor) {
    if (!inner_) throw std::invalid_argument("ScaledSampler: null inner model");
    if (!(factor > 0.0)) throw std::invalid_argument("ScaledSampler: factor must be positive");
    norm_ = {factor_ * inner_->normalization().z, factor_ * inner_->normalization().stderr_z};
}

double ScaledSampler::evaluate_raw(const UnitaryAngles& angles) const {
    return factor_ * inner_->evaluate_raw(angles);
}

Normalization estimate_normalization(const SamplerModel& model, int n_samples, Rng& rng) {
    if (const auto c = model.constant_weight()) return {*c, 0.0};
    if (n_samples < 100)
        throw std::invalid_argument("estimate_normalization: needs at least 100 samples");
    double sum = 0.0, sum_sq = 0.0;
    for (int k = 0; k < n_samples; ++k) {
        const double w = model.evaluate(sample_haar_angles(model.n_qubits(), rng));
        sum += w;
        sum_sq += w * w;
    }
    const double mean = sum / n_samples;
    const double var = std::max(0.0, (sum_sq - n_samples * mean * mean) / (n_samples - 1));
    return {mean, std::sqrt(var / n_samples)};
}

namespace {

struct ChainBuilder {
    MetropolisChain chain;

    void retain(const UnitaryAngles& angles, bool fresh_state) {
        if (fresh_state || chain.angles.empty()) {
            chain.angles.push_back(angles);
            chain.occurrences.push_back(1);
        } else {
            ++chain.occurrences.back();
        }
        ++chain.total_retained;
    }
};

UnitaryAngles propose(const UnitaryAngles& current, Rng& rng, MetropolisOptions::Proposal mode) {
    if (mode == MetropolisOptions::Proposal::full_redraw)
        return sample_haar_angles(current.n_qubits(), rng);
    UnitaryAngles next = current;
    const int q = static_cast<int>(rng.bounded(current.n_qubits()));
    next.xi[q] = rng.uniform();
    next.phi[q] = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return next;
}

}  // namespace

MetropolisChain metropolis_sample(const SamplerModel& model, long long n_total, int burn_in,
                                  Rng& rng, const MetropolisOptions& options) {
    if (n_total < 1) throw std::invalid_argument("metropolis_sample: n_total must be >= 1");
    if (burn_in < 0 || burn_in >= n_total)
        throw std::invalid_argument("metropolis_sample: burn_in must lie in [0, n_total)");

    UnitaryAngles current = sample_haar_angles(model.n_qubits(), rng);
    double w_current = model.evaluate(current);
    long long accepted = 0;
    ChainBuilder builder;
    // the state after burn-in enters as a fresh distinct sample
    bool fresh = true;

    for (long long step = 0; step < n_total; ++step) {
        const UnitaryAngles candidate = propose(current, rng, options.proposal);
        const double w_candidate = model.evaluate(candidate);
        const bool accept = rng.uniform() < w_candidate / w_current;
        if (accept) {
            current = candidate;
            w_current = w_candidate;
            ++accepted;
        }
        if (step >= burn_in) {
            builder.retain(current, fresh || accept);
            fresh = false;
        }
    }
    builder.chain.burn_in = burn_in;
    builder.chain.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(n_total);
    return builder.chain;
}

MetropolisChain metropolis_sample_distinct(const SamplerModel& model, int n_distinct, int burn_in,
                                           Rng& rng, const MetropolisOptions& options) {
    if (n_distinct < 1)
        throw std::invalid_argument("metropolis_sample_distinct: n_distinct must be >= 1");
    if (burn_in < 0) throw std::invalid_argument("metropolis_sample_distinct: burn_in must be >= 0");

    UnitaryAngles current = sample_haar_angles(model.n_qubits(), rng);
    double w_current = model.evaluate(current);
    long long accepted = 0, steps = 0;
    ChainBuilder builder;
    bool fresh = true;

    // An accepted proposal that would open block n_distinct + 1 ends the run;
    // the final block keeps every rejection it accumulated.
    while (true) {
        const UnitaryAngles candidate = propose(current, rng, options.proposal);
        const double w_candidate = model.evaluate(candidate);
        const bool accept = rng.uniform() < w_candidate / w_current;
        ++steps;
        if (steps > burn_in && (fresh || accept) && builder.chain.n_distinct() == n_distinct) break;
        if (accept) {
            current = candidate;
            w_current = w_candidate;
            ++accepted;
        }
        if (steps > burn_in) {
            builder.retain(current, fresh || accept);
            fresh = false;
        }
    }
    builder.chain.burn_in = burn_in;
    builder.chain.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(steps);
    return builder.chain;
}

nlohmann::json chain_to_json(const MetropolisChain& chain) {
    nlohmann::json j;
    j["angles"] = nlohmann::json::array();
    for (const auto& a : chain.angles) j["angles"].push_back(angles_to_json(a));
    j["occurrences"] = chain.occurrences;
    j["burn_in"] = chain.burn_in;
    j["acceptance_rate"] = chain.acceptance_rate;
    return j;
}

MetropolisChain chain_from_json(const nlohmann::json& j) {
    MetropolisChain chain;
    for (const auto& a : j.at("angles")) chain.angles.push_back(angles_from_json(a));
    chain.occurrences = j.at("occurrences").get<std::vector<int>>();
    if (chain.occurrences.size() != chain.angles.size())
        throw std::invalid_argument("chain_from_json: angles/occurrences length mismatch");
    chain.burn_in = j.value("burn_in", 0);
    chain.acceptance_rate = j.value("acceptance_rate", 0.0);
    for (int n : chain.occurrences) {
        if (n < 1) throw std::invalid_argument("chain_from_json: occurrence < 1");
        chain.total_retained += n;
    }
    return chain;
}

MeasurementSource make_shot_source(const DenseState& state, int n_m) {
    if (n_m < 2) throw std::invalid_argument("make_shot_source: n_m must be >= 2");
    MeasurementSource src;
    src.n_m = n_m;
    src.x_estimator = [state, n_m](const UnitaryAngles& angles, Rng& rng) {
        return x_estimate(sample_bitstrings(state, angles, n_m, rng));
    };
    return src;
}

MeasurementSource make_infinite_source(const DenseState& state) {
    MeasurementSource src;
    src.n_m = 0;
    src.x_estimator = [state](const UnitaryAngles& angles, Rng&) { return x_exact(state, angles); };
    return src;
}

PurityEstimate estimate_purity_is(const SamplerModel& model, const MetropolisChain& chain,
                                  const MeasurementSource& source, Rng& rng, bool renyi_log2) {
    if (chain.n_distinct() == 0) throw std::invalid_argument("estimate_purity_is: empty chain");
    const Normalization norm = model.normalization();

    std::vector<double> ratios(chain.n_distinct());
    for (int r = 0; r < chain.n_distinct(); ++r) {
        const double xe = source.x_estimator(chain.angles[r], rng);
        ratios[r] = xe * norm.z / model.evaluate(chain.angles[r]);
    }

    const double n_s = static_cast<double>(chain.total_retained);
    double mean = 0.0;
    for (int r = 0; r < chain.n_distinct(); ++r) mean += chain.occurrences[r] * ratios[r];
    mean /= n_s;

    double stderr_est = 0.0;
    if (chain.total_retained > 1) {
        double ss = 0.0;
        for (int r = 0; r < chain.n_distinct(); ++r) {
            const double d = ratios[r] - mean;
            ss += chain.occurrences[r] * d * d;
        }
        stderr_est = std::sqrt(ss / (n_s - 1.0) / n_s);
    }
    if (norm.stderr_z > 0.0 && norm.z > 0.0) {
        const double z_term = mean * norm.stderr_z / norm.z;
        stderr_est = std::sqrt(stderr_est * stderr_est + z_term * z_term);
    }

    PurityEstimate est;
    est.p2_hat = mean;
    est.stderr_p2 = stderr_est;
    est.n_u = chain.n_distinct();
    est.n_m = source.n_m;
    est.n_s = chain.total_retained;
    if (mean > 0.0) est.renyi2 = renyi_log2 ? -std::log2(mean) : -std::log(mean);
    return est;
}

}  // namespace rmkit
