#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmkit/analytics.hpp"
#include "rmkit/mlp.hpp"
#include "rmkit/mps.hpp"

namespace rmkit {

enum class StateKind { product, ghz, haar, quench, maximally_mixed, file };

struct StateSpec {
    StateKind kind = StateKind::product;
    int n = 1;
    double alpha = 1.0;     // quench interaction exponent
    double coupling = 1.0;  // quench J
    double time = 1.0;      // quench evolution time
    std::uint64_t seed = 0; // haar factory
    std::vector<int> keep;  // optional partial trace after construction
    std::string path;       // kind == file
    int max_qubits = kDefaultMaxQubits;
};

DenseState build_state(const StateSpec& spec);
StateSpec state_spec_from_json(const nlohmann::json& j);
nlohmann::json state_spec_to_json(const StateSpec& spec);

enum class BackendKind { uniform, exact, mlp, mps };

struct MlpTrainSpec {
    std::vector<int> hidden_widths = {64, 32, 8};
    int n_samples = 20000;
    int epochs = 500;
    double learning_rate = 0.001;
    int batch_size = 256;
    double split_fraction = 0.8;
    std::optional<int> shot_noise;  // quantum-data targets when set
};

struct SamplerSpec {
    BackendKind backend = BackendKind::uniform;
    std::optional<StateSpec> model_state;  // defaults to the truth state spec
    // mlp
    std::string mlp_path;  // pretrained model; empty = train now
    MlpTrainSpec train;
    int n_normalization = 100000;
    // mps
    int bond_dim = 2;
    std::vector<int> mps_keep;  // reduced-target mode
};

SamplerSpec sampler_spec_from_json(const nlohmann::json& j);
nlohmann::json sampler_spec_to_json(const SamplerSpec& spec);

// Builds the backend. MLP training and normalization draw from seeds derived
// from build_seed; exact/uniform/mps backends are deterministic.
std::shared_ptr<const SamplerModel> build_sampler(const SamplerSpec& spec,
                                                  const StateSpec& truth_spec,
                                                  std::uint64_t build_seed);

struct ExperimentConfig {
    StateSpec state;
    SamplerSpec sampler;
    int n_u = 100;
    int n_m = 1000;
    bool nm_infinity = false;
    int n_repetitions = 100;
    std::uint64_t master_seed = 1;
    int burn_in = 50;
    int threads = 0;  // 0 = hardware concurrency
    bool renyi_log2 = false;
    std::string experiment_id = "experiment";
    std::uint64_t budget_cap = 20000000;  // per-estimate N_u * N_M cap in scaling runs
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

// One full pipeline pass: Metropolis chain with n_u distinct unitaries,
// one measured batch per distinct unitary, occurrence-weighted estimate.
PurityEstimate run_pipeline_once(const DenseState& truth, const SamplerModel& model, int n_u,
                                 int n_m, bool nm_infinity, int burn_in, Rng& rng,
                                 bool renyi_log2 = false);

enum class SweepVariable { n_u, n_m, bond_dim };

struct ErrorCurvePoint {
    double value = 0.0;
    double error = 0.0;     // E = mean |p2 - p2_hat| over repetitions
    double stderr_e = 0.0;
};

struct ErrorCurve {
    SweepVariable variable = SweepVariable::n_u;
    double p2_true = 0.0;
    std::vector<ErrorCurvePoint> points;
};

ErrorCurve run_error_curve(const ExperimentConfig& config, SweepVariable variable,
                           const std::vector<double>& values);

struct BudgetPoint {
    int n = 0;
    std::uint64_t budget = 0;
    long long n_u = 0;
    long long n_m = 0;
    bool censored = false;
};

struct BudgetScalingResult {
    std::vector<BudgetPoint> points;
    std::optional<ScalingFit> fit;  // over non-censored points
};

// For each system size, the smallest empirical N_u * N_M whose mean absolute
// error crosses epsilon (N_u = 1 for the exact backend, joint grid
// otherwise). Bisection resolves budgets to ~5% with common random numbers.
BudgetScalingResult run_budget_scaling(const ExperimentConfig& config,
                                       const std::vector<int>& n_values, double epsilon);

struct ComparisonRow {
    std::string name;
    double error = 0.0;
    double stderr_e = 0.0;
};

// Per-sampler E at the config's (N_u, N_M), paired seeds across samplers.
std::vector<ComparisonRow> run_sampler_comparison(const ExperimentConfig& config,
                                                  const std::vector<SamplerSpec>& samplers);

void write_error_curve_csv(const ErrorCurve& curve, const std::string& path);
void write_budget_csv(const BudgetScalingResult& result, const std::string& path);
void write_comparison_csv(const std::vector<ComparisonRow>& rows, const std::string& path);

// Deterministic task fan-out; results must depend only on the task index.
void parallel_for(int n_tasks, int threads, const std::function<void(int)>& body);

}  // namespace rmkit
