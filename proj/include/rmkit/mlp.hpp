#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "rmkit/sampler.hpp"

namespace rmkit {

// Fully connected regressor: rectified hidden layers, identity output.
// Inputs are the 2N angles (xi_i, phi_i/2pi), one output.
struct MLPModel {
    std::vector<int> layer_widths;         // input, hidden..., 1
    std::vector<Eigen::MatrixXd> weights;  // weights[l]: widths[l+1] x widths[l]
    std::vector<Eigen::VectorXd> biases;

    int input_width() const { return layer_widths.empty() ? 0 : layer_widths.front(); }
    void check_consistent() const;
};

struct TrainingSet {
    Eigen::MatrixXd inputs;  // 2N x n_samples, every entry in [0,1]
    Eigen::VectorXd targets;

    int n_samples() const { return static_cast<int>(targets.size()); }
};

// Uniform Haar angle draws with targets X(u) (classical data) or the
// shot-noise estimate X_e from a simulated batch of n_m_shot_noise shots
// (quantum data).
TrainingSet generate_training_set(const DenseState& state, int n_samples,
                                  std::optional<int> n_m_shot_noise, Rng& rng);

struct TrainOptions {
    std::vector<int> hidden_widths = {200, 100, 10};
    int epochs = 500;
    double learning_rate = 0.001;
    int batch_size = 256;
    double split_fraction = 0.8;  // train share
};

struct EpochRecord {
    double train_mae = 0.0;
    double test_mae = 0.0;
};

struct TrainResult {
    MLPModel model;
    std::vector<EpochRecord> history;
};

// Adam on the mean absolute error, deterministic for a fixed seed. Throws
// training_error naming the epoch if the loss turns non-finite.
TrainResult train_mlp(const TrainingSet& set, const TrainOptions& options, Rng& rng);

double mlp_forward(const MLPModel& model, const Eigen::VectorXd& input);
double predict(const MLPModel& model, const UnitaryAngles& angles);

// MAE over a set and parameter gradients via backpropagation; the gradient
// layout matches flatten_parameters. Used by training and the
// finite-difference checks.
double mlp_mae_and_gradients(const MLPModel& model, const Eigen::MatrixXd& inputs,
                             const Eigen::VectorXd& targets, std::vector<Eigen::MatrixXd>& grad_w,
                             std::vector<Eigen::VectorXd>& grad_b);
double mlp_mae(const MLPModel& model, const Eigen::MatrixXd& inputs,
               const Eigen::VectorXd& targets);

nlohmann::json mlp_to_json(const MLPModel& model);
MLPModel mlp_from_json(const nlohmann::json& j);
void save_mlp(const MLPModel& model, const std::string& path);
MLPModel load_mlp(const std::string& path);

// CSV: epoch,train_mae,test_mae
void write_history_csv(const std::vector<EpochRecord>& history, const std::string& path);

// Sampler backend wrapping a trained model; Z from uniform Monte Carlo.
class MlpSampler final : public SamplerModel {
public:
    MlpSampler(MLPModel model, Rng& rng, int n_normalization_samples = 100000);
    int n_qubits() const override { return n_; }
    double evaluate_raw(const UnitaryAngles& angles) const override;
    std::string name() const override { return "mlp"; }
    const MLPModel& model() const { return model_; }

private:
    MLPModel model_;
    int n_;
};

}  // namespace rmkit
