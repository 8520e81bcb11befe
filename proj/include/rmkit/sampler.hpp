#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmkit/rm_core.hpp"

namespace rmkit {

struct Normalization {
    double z = 1.0;
    double stderr_z = 0.0;
};

inline constexpr double kWeightFloor = 1e-12;

// Evaluatable non-negative weight over unitary angles, with a normalization
// estimate Z ~ integral of the raw weight over the Haar measure. Backends
// with an analytically known integral (uniform, exact, MPS) carry it exactly;
// learned models get a Monte Carlo estimate.
class SamplerModel {
public:
    virtual ~SamplerModel() = default;

    virtual int n_qubits() const = 0;
    virtual double evaluate_raw(const UnitaryAngles& angles) const = 0;
    virtual std::string name() const = 0;

    // Constant-weight models short-circuit normalization and Metropolis.
    virtual std::optional<double> constant_weight() const { return std::nullopt; }

    // Raw weight clamped from below so p_IS stays a valid density.
    double evaluate(const UnitaryAngles& angles) const;

    const Normalization& normalization() const { return norm_; }
    void set_normalization(Normalization n) { norm_ = n; }

protected:
    void check_angles(const UnitaryAngles& angles) const;
    Normalization norm_;
};

class UniformSampler final : public SamplerModel {
public:
    explicit UniformSampler(int n_qubits);
    int n_qubits() const override { return n_; }
    double evaluate_raw(const UnitaryAngles& angles) const override;
    std::optional<double> constant_weight() const override { return 1.0; }
    std::string name() const override { return "uniform"; }

private:
    int n_;
};

// X_IS(u) = X(u) of the given state; Z = Tr(rho^2) exactly.
class ExactSampler final : public SamplerModel {
public:
    explicit ExactSampler(DenseState state);
    int n_qubits() const override { return state_.n_qubits(); }
    double evaluate_raw(const UnitaryAngles& angles) const override;
    std::string name() const override { return "exact"; }
    const DenseState& state() const { return state_; }

private:
    DenseState state_;
};

// Weight multiplied by a positive constant; the estimator must be invariant.
class ScaledSampler final : public SamplerModel {
public:
    ScaledSampler(std::shared_ptr<const SamplerModel> inner, double factor);
    int n_qubits() const override { return inner_->n_qubits(); }
    double evaluate_raw(const UnitaryAngles& angles) const override;
    std::string name() const override { return "scaled:" + inner_->name(); }

private:
    std::shared_ptr<const SamplerModel> inner_;
    double factor_;
};

// Uniform Monte Carlo estimate of Z = E_Haar[evaluate(u)] with its standard
// error. Constant-weight backends return the exact value without sampling.
Normalization estimate_normalization(const SamplerModel& model, int n_samples, Rng& rng);

struct MetropolisOptions {
    enum class Proposal { full_redraw, single_qubit };
    Proposal proposal = Proposal::full_redraw;
};

// Chain of distinct retained states with occurrence counts.
struct MetropolisChain {
    std::vector<UnitaryAngles> angles;  // distinct samples, in order
    std::vector<int> occurrences;       // n^{(r)} >= 1
    long long total_retained = 0;       // N_s = sum of occurrence counts
    int burn_in = 0;
    double acceptance_rate = 0.0;

    int n_distinct() const { return static_cast<int>(angles.size()); }
};

// Independence-style Metropolis chain targeting evaluate(.) against the Haar
// measure: propose fresh uniform angles (all 2N, or one qubit's pair with the
// single_qubit option), accept with min(1, w'/w). Runs n_total steps; the
// first burn_in steps are discarded, so N_s = n_total - burn_in.
MetropolisChain metropolis_sample(const SamplerModel& model, long long n_total, int burn_in,
                                  Rng& rng, const MetropolisOptions& options = {});

// Runs until the chain holds n_distinct complete occupancy blocks (paper
// semantics: the measurement budget counts distinct unitaries).
MetropolisChain metropolis_sample_distinct(const SamplerModel& model, int n_distinct, int burn_in,
                                           Rng& rng, const MetropolisOptions& options = {});

nlohmann::json chain_to_json(const MetropolisChain& chain);
MetropolisChain chain_from_json(const nlohmann::json& j);

// Produces X_e for one unitary: either a simulated finite-shot batch from the
// true state, or x_exact directly (the N_M -> infinity mode).
struct MeasurementSource {
    std::function<double(const UnitaryAngles&, Rng&)> x_estimator;
    int n_m = 0;  // 0 means the infinite-shot mode
};

MeasurementSource make_shot_source(const DenseState& state, int n_m);
MeasurementSource make_infinite_source(const DenseState& state);

struct PurityEstimate {
    double p2_hat = 0.0;
    std::optional<double> renyi2;  // empty when p2_hat <= 0
    double stderr_p2 = 0.0;
    int n_u = 0;        // distinct unitaries
    int n_m = 0;        // shots per unitary (0 = infinite mode)
    long long n_s = 0;  // total chain samples
};

// Occurrence-weighted importance-sampled purity:
// [p2]_IS = (1/N_s) sum_r n^{(r)} X_e(u^{(r)}) / p_IS(u^{(r)}),
// p_IS = evaluate / Z. Each distinct unitary is measured once; repeats reuse
// its X_e. stderr folds the Z uncertainty in quadrature.
PurityEstimate estimate_purity_is(const SamplerModel& model, const MetropolisChain& chain,
                                  const MeasurementSource& source, Rng& rng,
                                  bool renyi_log2 = false);

}  // namespace rmkit
