#include "rmkit/mlp.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "rmkit/errors.hpp"

namespace rmkit {

void MLPModel::check_consistent() const {
    if (layer_widths.size() < 2 || layer_widths.back() != 1)
        throw std::invalid_argument("MLPModel: need widths [input, ..., 1]");
    if (weights.size() != layer_widths.size() - 1 || biases.size() != weights.size())
        throw std::invalid_argument("MLPModel: parameter count mismatch");
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (weights[l].rows() != layer_widths[l + 1] || weights[l].cols() != layer_widths[l] ||
            biases[l].size() != layer_widths[l + 1])
            throw std::invalid_argument("MLPModel: inconsistent layer shapes");
        if (!weights[l].allFinite() || !biases[l].allFinite())
            throw std::invalid_argument("MLPModel: non-finite parameters");
    }
}

TrainingSet generate_training_set(const DenseState& state, int n_samples,
                                  std::optional<int> n_m_shot_noise, Rng& rng) {
    if (n_samples < 1) throw std::invalid_argument("generate_training_set: n_samples must be >= 1");
    const int n = state.n_qubits();
    TrainingSet set;
    set.inputs.resize(2 * n, n_samples);
    set.targets.resize(n_samples);
    for (int k = 0; k < n_samples; ++k) {
        const UnitaryAngles angles = sample_haar_angles(n, rng);
        const std::vector<double> v = angles_to_unit_vector(angles);
        for (int i = 0; i < 2 * n; ++i) set.inputs(i, k) = v[i];
        if (n_m_shot_noise) {
            set.targets(k) = x_estimate(sample_bitstrings(state, angles, *n_m_shot_noise, rng));
        } else {
            set.targets(k) = x_exact(state, angles);
        }
    }
    return set;
}

namespace {

// forward pass keeping pre-activations; returns outputs (1 x batch)
Eigen::RowVectorXd forward_batch(const MLPModel& m, const Eigen::MatrixXd& x,
                                 std::vector<Eigen::MatrixXd>* pre,
                                 std::vector<Eigen::MatrixXd>* act) {
    Eigen::MatrixXd a = x;
    if (act) act->push_back(a);
    const std::size_t n_layers = m.weights.size();
    for (std::size_t l = 0; l < n_layers; ++l) {
        Eigen::MatrixXd z = (m.weights[l] * a).colwise() + m.biases[l];
        if (pre) pre->push_back(z);
        if (l + 1 < n_layers)
            a = z.cwiseMax(0.0);
        else
            a = z;
        if (act) act->push_back(a);
    }
    return a.row(0);
}

MLPModel init_model(int input_width, const std::vector<int>& hidden, Rng& rng) {
    MLPModel m;
    m.layer_widths.push_back(input_width);
    for (int h : hidden) {
        if (h < 1) throw std::invalid_argument("train_mlp: layer widths must be positive");
        m.layer_widths.push_back(h);
    }
    m.layer_widths.push_back(1);
    for (std::size_t l = 0; l + 1 < m.layer_widths.size(); ++l) {
        const int fan_in = m.layer_widths[l];
        const int fan_out = m.layer_widths[l + 1];
        const double scale = std::sqrt(2.0 / fan_in);
        Eigen::MatrixXd w(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c) w(r, c) = scale * rng.normal();
        m.weights.push_back(std::move(w));
        m.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return m;
}

}  // namespace

double mlp_mae_and_gradients(const MLPModel& model, const Eigen::MatrixXd& inputs,
                             const Eigen::VectorXd& targets, std::vector<Eigen::MatrixXd>& grad_w,
                             std::vector<Eigen::VectorXd>& grad_b) {
    const int batch = static_cast<int>(targets.size());
    std::vector<Eigen::MatrixXd> pre, act;
    const Eigen::RowVectorXd out = forward_batch(model, inputs, &pre, &act);

    const Eigen::RowVectorXd resid = out - targets.transpose();
    const double mae = resid.cwiseAbs().mean();

    // subgradient of mean |resid|: sign(resid)/batch, sign(0) = 0
    Eigen::MatrixXd delta(1, batch);
    for (int k = 0; k < batch; ++k) {
        const double r = resid(k);
        delta(0, k) = r > 0.0 ? 1.0 / batch : (r < 0.0 ? -1.0 / batch : 0.0);
    }

    const std::size_t n_layers = model.weights.size();
    grad_w.assign(n_layers, Eigen::MatrixXd());
    grad_b.assign(n_layers, Eigen::VectorXd());
    for (std::size_t l = n_layers; l-- > 0;) {
        grad_w[l] = delta * act[l].transpose();
        grad_b[l] = delta.rowwise().sum();
        if (l > 0) {
            Eigen::MatrixXd back = model.weights[l].transpose() * delta;
            delta = back.cwiseProduct((pre[l - 1].array() > 0.0).cast<double>().matrix());
        }
    }
    return mae;
}

double mlp_mae(const MLPModel& model, const Eigen::MatrixXd& inputs,
               const Eigen::VectorXd& targets) {
    const Eigen::RowVectorXd out = forward_batch(model, inputs, nullptr, nullptr);
    return (out - targets.transpose()).cwiseAbs().mean();
}

TrainResult train_mlp(const TrainingSet& set, const TrainOptions& options, Rng& rng) {
    if (set.n_samples() < 2) throw std::invalid_argument("train_mlp: needs at least 2 samples");
    if (!(options.split_fraction > 0.0 && options.split_fraction < 1.0))
        throw std::invalid_argument("train_mlp: split_fraction must lie in (0,1)");
    if (options.epochs < 1 || options.batch_size < 1)
        throw std::invalid_argument("train_mlp: epochs and batch_size must be >= 1");

    const int n = set.n_samples();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int i = n - 1; i > 0; --i)
        std::swap(order[i], order[rng.bounded(static_cast<std::uint64_t>(i) + 1)]);

    const int n_train = std::max(1, std::min(n - 1, static_cast<int>(std::lround(
                                                        options.split_fraction * n))));
    const int n_test = n - n_train;

    Eigen::MatrixXd train_x(set.inputs.rows(), n_train), test_x(set.inputs.rows(), n_test);
    Eigen::VectorXd train_y(n_train), test_y(n_test);
    for (int i = 0; i < n_train; ++i) {
        train_x.col(i) = set.inputs.col(order[i]);
        train_y(i) = set.targets(order[i]);
    }
    for (int i = 0; i < n_test; ++i) {
        test_x.col(i) = set.inputs.col(order[n_train + i]);
        test_y(i) = set.targets(order[n_train + i]);
    }

    MLPModel model = init_model(static_cast<int>(set.inputs.rows()), options.hidden_widths, rng);

    // Adam state
    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    std::vector<Eigen::MatrixXd> m_w, v_w;
    std::vector<Eigen::VectorXd> m_b, v_b;
    for (const auto& w : model.weights) {
        m_w.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
        v_w.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    }
    for (const auto& b : model.biases) {
        m_b.push_back(Eigen::VectorXd::Zero(b.size()));
        v_b.push_back(Eigen::VectorXd::Zero(b.size()));
    }

    TrainResult result;
    result.history.reserve(options.epochs);
    std::vector<int> batch_order(n_train);
    std::iota(batch_order.begin(), batch_order.end(), 0);
    long long step = 0;

    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        for (int i = n_train - 1; i > 0; --i)
            std::swap(batch_order[i], batch_order[rng.bounded(static_cast<std::uint64_t>(i) + 1)]);

        double epoch_loss = 0.0;
        int seen = 0;
        for (int start = 0; start < n_train; start += options.batch_size) {
            const int bs = std::min(options.batch_size, n_train - start);
            Eigen::MatrixXd bx(set.inputs.rows(), bs);
            Eigen::VectorXd by(bs);
            for (int i = 0; i < bs; ++i) {
                bx.col(i) = train_x.col(batch_order[start + i]);
                by(i) = train_y(batch_order[start + i]);
            }
            std::vector<Eigen::MatrixXd> gw;
            std::vector<Eigen::VectorXd> gb;
            const double loss = mlp_mae_and_gradients(model, bx, by, gw, gb);
            if (!std::isfinite(loss)) throw training_error("train_mlp: loss diverged", epoch + 1);
            epoch_loss += loss * bs;
            seen += bs;

            ++step;
            const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            for (std::size_t l = 0; l < model.weights.size(); ++l) {
                m_w[l] = beta1 * m_w[l] + (1.0 - beta1) * gw[l];
                v_w[l] = beta2 * v_w[l] + (1.0 - beta2) * gw[l].cwiseProduct(gw[l]);
                model.weights[l] -=
                    options.learning_rate *
                    (m_w[l] / bc1)
                        .cwiseQuotient(((v_w[l] / bc2).cwiseSqrt().array() + adam_eps).matrix());
                m_b[l] = beta1 * m_b[l] + (1.0 - beta1) * gb[l];
                v_b[l] = beta2 * v_b[l] + (1.0 - beta2) * gb[l].cwiseProduct(gb[l]);
                model.biases[l] -=
                    options.learning_rate *
                    (m_b[l] / bc1)
                        .cwiseQuotient(((v_b[l] / bc2).cwiseSqrt().array() + adam_eps).matrix());
            }
        }

        EpochRecord rec;
        rec.train_mae = epoch_loss / seen;
        rec.test_mae = n_test > 0 ? mlp_mae(model, test_x, test_y) : rec.train_mae;
        if (!std::isfinite(rec.test_mae))
            throw training_error("train_mlp: test loss diverged", epoch + 1);
        result.history.push_back(rec);
    }

    result.model = std::move(model);
    return result;
}

double mlp_forward(const MLPModel& model, const Eigen::VectorXd& input) {
    if (input.size() != model.input_width())
        throw std::invalid_argument("mlp_forward: input width mismatch");
    return forward_batch(model, input, nullptr, nullptr)(0);
}

double predict(const MLPModel& model, const UnitaryAngles& angles) {
    const std::vector<double> v = angles_to_unit_vector(angles);
    if (static_cast<int>(v.size()) != model.input_width())
        throw std::invalid_argument("predict: angles do not match model input width");
    Eigen::VectorXd x(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) x(i) = v[i];
    return mlp_forward(model, x);
}

nlohmann::json mlp_to_json(const MLPModel& model) {
    model.check_consistent();
    nlohmann::json j;
    j["layer_widths"] = model.layer_widths;
    j["activation"] = "relu";
    j["input_scaling"] = "xi_phi_unit";
    j["weights"] = nlohmann::json::array();
    j["biases"] = nlohmann::json::array();
    for (const auto& w : model.weights) {
        std::vector<double> flat(w.size());
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) flat[r * w.cols() + c] = w(r, c);
        j["weights"].push_back(flat);
    }
    for (const auto& b : model.biases)
        j["biases"].push_back(std::vector<double>(b.data(), b.data() + b.size()));
    return j;
}

MLPModel mlp_from_json(const nlohmann::json& j) {
    MLPModel m;
    m.layer_widths = j.at("layer_widths").get<std::vector<int>>();
    if (j.value("activation", "relu") != std::string("relu"))
        throw std::invalid_argument("mlp_from_json: unsupported activation");
    const auto& ws = j.at("weights");
    const auto& bs = j.at("biases");
    for (std::size_t l = 0; l + 1 < m.layer_widths.size(); ++l) {
        const int rows = m.layer_widths[l + 1];
        const int cols = m.layer_widths[l];
        const std::vector<double> flat = ws.at(l).get<std::vector<double>>();
        if (static_cast<int>(flat.size()) != rows * cols)
            throw std::invalid_argument("mlp_from_json: weight size mismatch");
        Eigen::MatrixXd w(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) w(r, c) = flat[r * cols + c];
        m.weights.push_back(std::move(w));
        const std::vector<double> bias = bs.at(l).get<std::vector<double>>();
        if (static_cast<int>(bias.size()) != rows)
            throw std::invalid_argument("mlp_from_json: bias size mismatch");
        m.biases.push_back(Eigen::Map<const Eigen::VectorXd>(bias.data(), rows));
    }
    m.check_consistent();
    return m;
}

void save_mlp(const MLPModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_mlp: cannot open " + path);
    out << mlp_to_json(model).dump(2) << '\n';
}

MLPModel load_mlp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_mlp: cannot open " + path);
    nlohmann::json j;
    in >> j;
    return mlp_from_json(j);
}

void write_history_csv(const std::vector<EpochRecord>& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_history_csv: cannot open " + path);
    out << "epoch,train_mae,test_mae\n";
    for (std::size_t e = 0; e < history.size(); ++e)
        out << (e + 1) << ',' << history[e].train_mae << ',' << history[e].test_mae << '\n';
}

MlpSampler::MlpSampler(MLPModel model, Rng& rng, int n_normalization_samples)
    : model_(std::move(model)) {
    model_.check_consistent();
    if (model_.input_width() % 2 != 0)
        throw std::invalid_argument("MlpSampler: input width must be 2N");
    n_ = model_.input_width() / 2;
    norm_ = estimate_normalization(*this, n_normalization_samples, rng);
    if (!(norm_.z > 0.0)) throw std::invalid_argument("MlpSampler: normalization must be positive");
}

double MlpSampler::evaluate_raw(const UnitaryAngles& angles) const {
    return predict(model_, angles);
}

}  // namespace rmkit
