#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rmkit/errors.hpp"
#include "rmkit/harness.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitConfigError = 2;
constexpr int kExitResourceLimit = 3;

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: invalid JSON in ") + path + ": " +
                                    e.what());
    }
    return j;
}

rmkit::ExperimentConfig load_config(const std::string& path) {
    return rmkit::config_from_json(load_json_file(path));
}

void write_metadata(const std::string& path, const std::string& command,
                    const nlohmann::json& config_echo, std::uint64_t seed, double runtime_s,
                    const nlohmann::json& extra = nlohmann::json::object()) {
    if (path.empty()) return;
    nlohmann::json meta;
    meta["command"] = command;
    meta["config"] = config_echo;
    meta["master_seed"] = seed;
    meta["rmkit_version"] = kVersion;
    meta["runtime_seconds"] = runtime_s;
    for (auto it = extra.begin(); it != extra.end(); ++it) meta[it.key()] = it.value();
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open metadata path " + path);
    out << meta.dump(2) << '\n';
}

// "2,3,5" or "2:7" (inclusive range)
std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> values;
    if (const auto colon = text.find(':'); colon != std::string::npos) {
        const int lo = std::stoi(text.substr(0, colon));
        const int hi = std::stoi(text.substr(colon + 1));
        for (int v = lo; v <= hi; ++v) values.push_back(v);
        return values;
    }
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string tok = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
        if (!tok.empty()) values.push_back(std::stoi(tok));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return values;
}

rmkit::DenseState load_state_arg(const std::string& state_file, const std::string& state_spec) {
    if (!state_file.empty() && !state_spec.empty())
        throw std::invalid_argument("config: give either a state file or a state spec, not both");
    if (!state_file.empty()) return rmkit::load_state(state_file);
    if (!state_spec.empty())
        return rmkit::build_state(rmkit::state_spec_from_json(nlohmann::json::parse(state_spec)));
    throw std::invalid_argument("config: a state file or inline state spec is required");
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"randomized-measurement purity estimation with importance sampling"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    std::string config_path, output_csv, output_meta;
    std::optional<std::uint64_t> seed_override;
    std::optional<int> nu_override, nm_override, reps_override, threads_override;
    bool nm_infinity = false;

    auto add_common = [&](CLI::App* cmd, bool needs_config = true) {
        auto* opt = cmd->add_option("--config", config_path, "experiment config (JSON)");
        if (needs_config) opt->required();
        cmd->add_option("--output", output_csv, "output CSV path");
        cmd->add_option("--meta", output_meta, "metadata JSON path");
        cmd->add_option("--seed", seed_override, "master seed override");
        cmd->add_option("--nu", nu_override, "N_u override");
        cmd->add_option("--nm", nm_override, "N_M override");
        cmd->add_option("--repetitions", reps_override, "repetition count override");
        cmd->add_option("--threads", threads_override, "worker thread count");
        cmd->add_flag("--nm-infinity", nm_infinity, "use exact X(u) instead of finite shots");
    };

    auto apply_overrides = [&](rmkit::ExperimentConfig& config) {
        if (seed_override) config.master_seed = *seed_override;
        if (nu_override) config.n_u = *nu_override;
        if (nm_override) config.n_m = *nm_override;
        if (reps_override) config.n_repetitions = *reps_override;
        if (threads_override) config.threads = *threads_override;
        if (nm_infinity) config.nm_infinity = true;
    };

    // estimate
    auto* estimate = app.add_subcommand("estimate", "single importance-sampled purity estimate");
    add_common(estimate);
    std::string save_state_path;
    estimate->add_option("--save-state", save_state_path,
                         "also write the true state as a binary state file");

    // error-curve
    auto* curve = app.add_subcommand("error-curve", "error vs N_u, N_M or bond dimension");
    add_common(curve);
    std::string sweep_name = "nu";
    std::string sweep_values;
    curve->add_option("--sweep", sweep_name, "sweep variable: nu | nm | bond-dim");
    curve->add_option("--values", sweep_values, "sweep values, e.g. 10,20,40 or 2:6")->required();

    // scaling
    auto* scaling = app.add_subcommand("scaling", "measurement-budget scaling vs system size");
    add_common(scaling);
    std::string n_values_text = "2:7";
    double epsilon = 0.1;
    scaling->add_option("--n-values", n_values_text, "system sizes, e.g. 2:7");
    scaling->add_option("--epsilon", epsilon, "target mean absolute error");

    // compare
    auto* compare = app.add_subcommand("compare", "error comparison across sampler backends");
    add_common(compare);

    // train
    auto* train = app.add_subcommand("train", "train an MLP sampler model");
    add_common(train);
    std::string model_out = "model.json", history_out;
    train->add_option("--model-out", model_out, "trained model path (JSON)");
    train->add_option("--history-out", history_out, "per-epoch MAE history CSV");

    // compress
    auto* compress_cmd = app.add_subcommand("compress", "compress a state into an MPS file");
    std::string state_file, state_spec_text, mps_out = "mps.json";
    int bond_dim = 2;
    compress_cmd->add_option("--state", state_file, "binary state file");
    compress_cmd->add_option("--state-spec", state_spec_text, "inline state spec (JSON)");
    compress_cmd->add_option("--bond-dim", bond_dim, "maximum bond dimension")->required();
    compress_cmd->add_option("--output", mps_out, "MPS output path (JSON)");
    compress_cmd->add_option("--meta", output_meta, "metadata JSON path");

    // analytics
    auto* analytics = app.add_subcommand("analytics", "closed-form Gamma/variance/budget tables");
    std::string kind_name = "uniform";
    int n_max = 10, local_dim = 2;
    long long nm_for_variance = 100;
    double eps_budget = 0.1;
    std::string analytics_out, analytics_meta;
    analytics->add_option("--kind", kind_name, "sampler kind: uniform | perfect");
    analytics->add_option("--n-max", n_max, "largest system size");
    analytics->add_option("--d", local_dim, "local dimension (uniform kind only)");
    analytics->add_option("--nm", nm_for_variance, "N_M used for the variance column");
    analytics->add_option("--epsilon", eps_budget, "error target for the budget column");
    analytics->add_option("--output", analytics_out, "output CSV path");
    analytics->add_option("--meta", analytics_meta, "metadata JSON path");

    CLI11_PARSE(app, argc, argv);

    try {
        Timer timer;
        if (estimate->parsed()) {
            rmkit::ExperimentConfig config = load_config(config_path);
            apply_overrides(config);
            const rmkit::DenseState truth = rmkit::build_state(config.state);
            if (!save_state_path.empty()) rmkit::save_state(truth, save_state_path);
            const auto model = rmkit::build_sampler(
                config.sampler, config.state,
                rmkit::derive_seed(config.master_seed, config.experiment_id, 0));
            rmkit::Rng rng(rmkit::derive_seed(config.master_seed, config.experiment_id + ":est", 0));
            const rmkit::PurityEstimate est =
                rmkit::run_pipeline_once(truth, *model, config.n_u, config.n_m,
                                         config.nm_infinity, config.burn_in, rng,
                                         config.renyi_log2);
            nlohmann::json out;
            out["p2_hat"] = est.p2_hat;
            out["stderr"] = est.stderr_p2;
            if (est.renyi2)
                out["renyi2"] = *est.renyi2;
            else
                out["renyi2_valid"] = false;
            out["p2_true"] = rmkit::purity(truth);
            out["n_u"] = est.n_u;
            out["n_m"] = est.n_m;
            out["n_s"] = est.n_s;
            std::cout << out.dump(2) << std::endl;
            write_metadata(output_meta, "estimate", rmkit::config_to_json(config),
                           config.master_seed, timer.seconds(), {{"result", out}});
        } else if (curve->parsed()) {
            rmkit::ExperimentConfig config = load_config(config_path);
            apply_overrides(config);
            rmkit::SweepVariable variable;
            if (sweep_name == "nu")
                variable = rmkit::SweepVariable::n_u;
            else if (sweep_name == "nm")
                variable = rmkit::SweepVariable::n_m;
            else if (sweep_name == "bond-dim")
                variable = rmkit::SweepVariable::bond_dim;
            else
                throw std::invalid_argument("config: unknown sweep variable '" + sweep_name + "'");
            std::vector<double> values;
            for (int v : parse_int_list(sweep_values)) values.push_back(v);
            const rmkit::ErrorCurve result = rmkit::run_error_curve(config, variable, values);
            if (output_csv.empty()) output_csv = "error_curve.csv";
            rmkit::write_error_curve_csv(result, output_csv);
            std::cout << "wrote " << output_csv << std::endl;
            write_metadata(output_meta, "error-curve", rmkit::config_to_json(config),
                           config.master_seed, timer.seconds(),
                           {{"p2_true", result.p2_true}, {"output", output_csv}});
        } else if (scaling->parsed()) {
            rmkit::ExperimentConfig config = load_config(config_path);
            apply_overrides(config);
            const std::vector<int> n_values = parse_int_list(n_values_text);
            const rmkit::BudgetScalingResult result =
                rmkit::run_budget_scaling(config, n_values, epsilon);
            if (output_csv.empty()) output_csv = "scaling.csv";
            rmkit::write_budget_csv(result, output_csv);
            nlohmann::json extra{{"epsilon", epsilon}, {"output", output_csv}};
            if (result.fit) {
                extra["fit_a"] = result.fit->a;
                extra["fit_b"] = result.fit->b;
                std::cout << "fit: a=" << result.fit->a << " b=" << result.fit->b << std::endl;
            }
            std::cout << "wrote " << output_csv << std::endl;
            write_metadata(output_meta, "scaling", rmkit::config_to_json(config),
                           config.master_seed, timer.seconds(), extra);
        } else if (compare->parsed()) {
            const nlohmann::json raw = load_json_file(config_path);
            rmkit::ExperimentConfig config = rmkit::config_from_json(raw);
            apply_overrides(config);
            if (!raw.contains("samplers") || !raw["samplers"].is_array() ||
                raw["samplers"].empty())
                throw std::invalid_argument("config: compare needs a nonempty 'samplers' array");
            std::vector<rmkit::SamplerSpec> samplers;
            for (const auto& js : raw["samplers"])
                samplers.push_back(rmkit::sampler_spec_from_json(js));
            const auto rows = rmkit::run_sampler_comparison(config, samplers);
            if (output_csv.empty()) output_csv = "comparison.csv";
            rmkit::write_comparison_csv(rows, output_csv);
            std::cout << "wrote " << output_csv << std::endl;
            write_metadata(output_meta, "compare", rmkit::config_to_json(config),
                           config.master_seed, timer.seconds(), {{"output", output_csv}});
        } else if (train->parsed()) {
            rmkit::ExperimentConfig config = load_config(config_path);
            apply_overrides(config);
            if (config.sampler.backend != rmkit::BackendKind::mlp)
                throw std::invalid_argument("config: train requires sampler backend 'mlp'");
            const rmkit::StateSpec source_spec =
                config.sampler.model_state.value_or(config.state);
            const rmkit::DenseState source = rmkit::build_state(source_spec);
            rmkit::Rng data_rng(
                rmkit::derive_seed(config.master_seed, config.experiment_id + ":mlp-data", 0));
            const rmkit::TrainingSet set = rmkit::generate_training_set(
                source, config.sampler.train.n_samples, config.sampler.train.shot_noise,
                data_rng);
            rmkit::TrainOptions opts;
            opts.hidden_widths = config.sampler.train.hidden_widths;
            opts.epochs = config.sampler.train.epochs;
            opts.learning_rate = config.sampler.train.learning_rate;
            opts.batch_size = config.sampler.train.batch_size;
            opts.split_fraction = config.sampler.train.split_fraction;
            rmkit::Rng train_rng(
                rmkit::derive_seed(config.master_seed, config.experiment_id + ":mlp-train", 0));
            const rmkit::TrainResult result = rmkit::train_mlp(set, opts, train_rng);
            rmkit::save_mlp(result.model, model_out);
            if (!history_out.empty()) rmkit::write_history_csv(result.history, history_out);
            std::cout << "wrote " << model_out << " (final test MAE "
                      << result.history.back().test_mae << ")" << std::endl;
            write_metadata(output_meta, "train", rmkit::config_to_json(config),
                           config.master_seed, timer.seconds(),
                           {{"model", model_out},
                            {"final_train_mae", result.history.back().train_mae},
                            {"final_test_mae", result.history.back().test_mae}});
        } else if (compress_cmd->parsed()) {
            const rmkit::DenseState state = load_state_arg(state_file, state_spec_text);
            const rmkit::CompressionResult result = rmkit::compress(state, bond_dim);
            rmkit::save_mps(result.mps, mps_out);
            std::cout << "wrote " << mps_out << " (fidelity " << result.fidelity << ")"
                      << std::endl;
            write_metadata(output_meta, "compress", nlohmann::json{{"bond_dim", bond_dim}}, 0,
                           timer.seconds(),
                           {{"fidelity", result.fidelity}, {"output", mps_out}});
        } else if (analytics->parsed()) {
            rmkit::SamplerKind kind;
            if (kind_name == "uniform")
                kind = rmkit::SamplerKind::uniform;
            else if (kind_name == "perfect")
                kind = rmkit::SamplerKind::perfect;
            else
                throw std::invalid_argument("config: unknown kind '" + kind_name + "'");
            if (n_max < 1) throw std::invalid_argument("config: n-max must be >= 1");
            std::ostringstream csv;
            csv << "n,gamma2,gamma3,gamma4,variance,budget,budget_n_u,budget_n_m\n";
            for (int n = 1; n <= n_max; ++n) {
                const rmkit::GammaTriple g = rmkit::gamma_closed_form(kind, n, local_dim);
                const double var = rmkit::estimator_variance(g, 1.0, 1, nm_for_variance);
                const rmkit::BudgetPlan plan = rmkit::required_budget(eps_budget, g, 1.0);
                csv << n << ',' << g.gamma2 << ',' << g.gamma3 << ',' << g.gamma4 << ',' << var
                    << ',' << plan.total << ',' << plan.n_u << ',' << plan.n_m << '\n';
            }
            if (analytics_out.empty()) {
                std::cout << csv.str();
            } else {
                std::ofstream out(analytics_out);
                if (!out) throw std::runtime_error("cannot open " + analytics_out);
                out << csv.str();
                std::cout << "wrote " << analytics_out << std::endl;
            }
            write_metadata(analytics_meta, "analytics",
                           nlohmann::json{{"kind", kind_name},
                                          {"n_max", n_max},
                                          {"d", local_dim},
                                          {"nm", nm_for_variance},
                                          {"epsilon", eps_budget}},
                           0, timer.seconds());
        }
        return 0;
    } catch (const rmkit::resource_limit_error& e) {
        std::cerr << "resource limit: " << e.what() << std::endl;
        return kExitResourceLimit;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
}
