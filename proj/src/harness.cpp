#include "rmkit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "rmkit/errors.hpp"

namespace rmkit {

namespace {

[[noreturn]] void config_error(const std::string& message) {
    throw std::invalid_argument("config: " + message);
}

template <typename T>
T require_field(const nlohmann::json& j, const std::string& key, const std::string& context) {
    if (!j.contains(key)) config_error(context + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        config_error(context + ": field '" + key + "' has the wrong type");
    }
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

}  // namespace

DenseState build_state(const StateSpec& spec) {
    DenseState state = [&] {
        switch (spec.kind) {
            case StateKind::product:
                return make_product(spec.n, spec.max_qubits);
            case StateKind::ghz:
                return make_ghz(spec.n, spec.max_qubits);
            case StateKind::haar: {
                Rng rng(derive_seed(spec.seed, "haar-state", 0));
                return make_haar_random_pure(spec.n, rng, spec.max_qubits);
            }
            case StateKind::quench:
                return make_xy_quench(spec.n, spec.alpha, spec.coupling, spec.time,
                                      spec.max_qubits);
            case StateKind::maximally_mixed:
                return make_maximally_mixed(spec.n, spec.max_qubits);
            case StateKind::file:
                return load_state(spec.path);
        }
        throw std::invalid_argument("build_state: unknown state kind");
    }();
    if (!spec.keep.empty()) return partial_trace(state, spec.keep);
    return state;
}

StateSpec state_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) config_error("state spec must be an object");
    StateSpec spec;
    const std::string type = require_field<std::string>(j, "type", "state");
    if (type == "product")
        spec.kind = StateKind::product;
    else if (type == "ghz")
        spec.kind = StateKind::ghz;
    else if (type == "haar")
        spec.kind = StateKind::haar;
    else if (type == "quench")
        spec.kind = StateKind::quench;
    else if (type == "maximally_mixed")
        spec.kind = StateKind::maximally_mixed;
    else if (type == "file")
        spec.kind = StateKind::file;
    else
        config_error("state: unknown type '" + type + "'");

    if (spec.kind == StateKind::file) {
        spec.path = require_field<std::string>(j, "path", "state");
    } else {
        spec.n = require_field<int>(j, "n", "state");
        if (spec.n < 1) config_error("state: n must be >= 1");
    }
    if (spec.kind == StateKind::quench) {
        spec.alpha = require_field<double>(j, "alpha", "state");
        spec.coupling = require_field<double>(j, "coupling", "state");
        spec.time = require_field<double>(j, "time", "state");
    }
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("keep")) {
        spec.keep = j.at("keep").get<std::vector<int>>();
        if (spec.keep.empty()) config_error("state: keep must be nonempty when present");
    }
    if (j.contains("max_qubits")) spec.max_qubits = j.at("max_qubits").get<int>();
    return spec;
}

nlohmann::json state_spec_to_json(const StateSpec& spec) {
    nlohmann::json j;
    switch (spec.kind) {
        case StateKind::product: j["type"] = "product"; break;
        case StateKind::ghz: j["type"] = "ghz"; break;
        case StateKind::haar: j["type"] = "haar"; break;
        case StateKind::quench: j["type"] = "quench"; break;
        case StateKind::maximally_mixed: j["type"] = "maximally_mixed"; break;
        case StateKind::file: j["type"] = "file"; break;
    }
    if (spec.kind == StateKind::file)
        j["path"] = spec.path;
    else
        j["n"] = spec.n;
    if (spec.kind == StateKind::quench) {
        j["alpha"] = spec.alpha;
        j["coupling"] = spec.coupling;
        j["time"] = spec.time;
    }
    if (spec.kind == StateKind::haar) j["seed"] = spec.seed;
    if (!spec.keep.empty()) j["keep"] = spec.keep;
    if (spec.max_qubits != kDefaultMaxQubits) j["max_qubits"] = spec.max_qubits;
    return j;
}

SamplerSpec sampler_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) config_error("sampler spec must be an object");
    SamplerSpec spec;
    const std::string backend = require_field<std::string>(j, "backend", "sampler");
    if (backend == "uniform")
        spec.backend = BackendKind::uniform;
    else if (backend == "exact")
        spec.backend = BackendKind::exact;
    else if (backend == "mlp")
        spec.backend = BackendKind::mlp;
    else if (backend == "mps")
        spec.backend = BackendKind::mps;
    else
        config_error("sampler: unknown backend '" + backend + "'");

    if (j.contains("state")) spec.model_state = state_spec_from_json(j.at("state"));
    if (spec.backend == BackendKind::mlp) {
        if (j.contains("model_path")) spec.mlp_path = j.at("model_path").get<std::string>();
        if (j.contains("train")) {
            const auto& t = j.at("train");
            if (t.contains("hidden_widths"))
                spec.train.hidden_widths = t.at("hidden_widths").get<std::vector<int>>();
            if (t.contains("n_samples")) spec.train.n_samples = t.at("n_samples").get<int>();
            if (t.contains("epochs")) spec.train.epochs = t.at("epochs").get<int>();
            if (t.contains("learning_rate"))
                spec.train.learning_rate = t.at("learning_rate").get<double>();
            if (t.contains("batch_size")) spec.train.batch_size = t.at("batch_size").get<int>();
            if (t.contains("split_fraction"))
                spec.train.split_fraction = t.at("split_fraction").get<double>();
            if (t.contains("shot_noise")) spec.train.shot_noise = t.at("shot_noise").get<int>();
        }
        if (j.contains("n_normalization"))
            spec.n_normalization = j.at("n_normalization").get<int>();
    }
    if (spec.backend == BackendKind::mps) {
        spec.bond_dim = require_field<int>(j, "bond_dim", "sampler");
        if (spec.bond_dim < 1) config_error("sampler: bond_dim must be >= 1");
        if (j.contains("keep")) spec.mps_keep = j.at("keep").get<std::vector<int>>();
    }
    return spec;
}

nlohmann::json sampler_spec_to_json(const SamplerSpec& spec) {
    nlohmann::json j;
    switch (spec.backend) {
        case BackendKind::uniform: j["backend"] = "uniform"; break;
        case BackendKind::exact: j["backend"] = "exact"; break;
        case BackendKind::mlp: j["backend"] = "mlp"; break;
        case BackendKind::mps: j["backend"] = "mps"; break;
    }
    if (spec.model_state) j["state"] = state_spec_to_json(*spec.model_state);
    if (spec.backend == BackendKind::mlp) {
        if (!spec.mlp_path.empty()) j["model_path"] = spec.mlp_path;
        nlohmann::json t;
        t["hidden_widths"] = spec.train.hidden_widths;
        t["n_samples"] = spec.train.n_samples;
        t["epochs"] = spec.train.epochs;
        t["learning_rate"] = spec.train.learning_rate;
        t["batch_size"] = spec.train.batch_size;
        t["split_fraction"] = spec.train.split_fraction;
        if (spec.train.shot_noise) t["shot_noise"] = *spec.train.shot_noise;
        j["train"] = t;
        j["n_normalization"] = spec.n_normalization;
    }
    if (spec.backend == BackendKind::mps) {
        j["bond_dim"] = spec.bond_dim;
        if (!spec.mps_keep.empty()) j["keep"] = spec.mps_keep;
    }
    return j;
}

std::shared_ptr<const SamplerModel> build_sampler(const SamplerSpec& spec,
                                                  const StateSpec& truth_spec,
                                                  std::uint64_t build_seed) {
    const StateSpec model_spec = spec.model_state.value_or(truth_spec);
    switch (spec.backend) {
        case BackendKind::uniform: {
            const DenseState truth = build_state(truth_spec);
            return std::make_shared<UniformSampler>(truth.n_qubits());
        }
        case BackendKind::exact:
            return std::make_shared<ExactSampler>(build_state(model_spec));
        case BackendKind::mlp: {
            MLPModel model;
            if (!spec.mlp_path.empty()) {
                model = load_mlp(spec.mlp_path);
            } else {
                const DenseState source = build_state(model_spec);
                Rng data_rng(derive_seed(build_seed, "mlp-data", 0));
                const TrainingSet set = generate_training_set(
                    source, spec.train.n_samples, spec.train.shot_noise, data_rng);
                TrainOptions opts;
                opts.hidden_widths = spec.train.hidden_widths;
                opts.epochs = spec.train.epochs;
                opts.learning_rate = spec.train.learning_rate;
                opts.batch_size = spec.train.batch_size;
                opts.split_fraction = spec.train.split_fraction;
                Rng train_rng(derive_seed(build_seed, "mlp-train", 0));
                model = train_mlp(set, opts, train_rng).model;
            }
            Rng norm_rng(derive_seed(build_seed, "mlp-norm", 0));
            return std::make_shared<MlpSampler>(std::move(model), norm_rng, spec.n_normalization);
        }
        case BackendKind::mps: {
            StateSpec pure_spec = model_spec;
            pure_spec.keep.clear();  // compress the pure global state, then trace
            const DenseState source = build_state(pure_spec);
            CompressionResult comp = compress(source, spec.bond_dim);
            std::vector<int> keep = spec.mps_keep;
            if (keep.empty() && !model_spec.keep.empty()) keep = model_spec.keep;
            if (keep.empty() && !truth_spec.keep.empty() && !spec.model_state)
                keep = truth_spec.keep;
            if (!keep.empty()) return std::make_shared<MpsSampler>(comp.mps, keep);
            return std::make_shared<MpsSampler>(std::move(comp.mps));
        }
    }
    throw std::invalid_argument("build_sampler: unknown backend");
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) config_error("top-level config must be an object");
    ExperimentConfig config;
    if (!j.contains("state")) config_error("missing field 'state'");
    config.state = state_spec_from_json(j.at("state"));
    if (!j.contains("sampler")) config_error("missing field 'sampler'");
    config.sampler = sampler_spec_from_json(j.at("sampler"));
    if (j.contains("n_u")) config.n_u = j.at("n_u").get<int>();
    if (j.contains("n_m")) config.n_m = j.at("n_m").get<int>();
    if (j.contains("nm_infinity")) config.nm_infinity = j.at("nm_infinity").get<bool>();
    if (j.contains("n_repetitions")) config.n_repetitions = j.at("n_repetitions").get<int>();
    if (j.contains("seed")) config.master_seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("burn_in")) config.burn_in = j.at("burn_in").get<int>();
    if (j.contains("threads")) config.threads = j.at("threads").get<int>();
    if (j.contains("renyi_log2")) config.renyi_log2 = j.at("renyi_log2").get<bool>();
    if (j.contains("experiment_id"))
        config.experiment_id = j.at("experiment_id").get<std::string>();
    if (j.contains("budget_cap")) config.budget_cap = j.at("budget_cap").get<std::uint64_t>();

    if (config.n_u < 1) config_error("n_u must be >= 1");
    if (!config.nm_infinity && config.n_m < 2) config_error("n_m must be >= 2");
    if (config.n_repetitions < 1) config_error("n_repetitions must be >= 1");
    if (config.burn_in < 0) config_error("burn_in must be >= 0");
    return config;
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
    nlohmann::json j;
    j["state"] = state_spec_to_json(config.state);
    j["sampler"] = sampler_spec_to_json(config.sampler);
    j["n_u"] = config.n_u;
    j["n_m"] = config.n_m;
    j["nm_infinity"] = config.nm_infinity;
    j["n_repetitions"] = config.n_repetitions;
    j["seed"] = config.master_seed;
    j["burn_in"] = config.burn_in;
    j["threads"] = config.threads;
    j["renyi_log2"] = config.renyi_log2;
    j["experiment_id"] = config.experiment_id;
    j["budget_cap"] = config.budget_cap;
    return j;
}

void parallel_for(int n_tasks, int threads, const std::function<void(int)>& body) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::max(1, std::min(threads, n_tasks));
    if (threads == 1) {
        for (int i = 0; i < n_tasks; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= n_tasks) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

PurityEstimate run_pipeline_once(const DenseState& truth, const SamplerModel& model, int n_u,
                                 int n_m, bool nm_infinity, int burn_in, Rng& rng,
                                 bool renyi_log2) {
    const int effective_burn_in = model.constant_weight() ? 0 : burn_in;
    const MetropolisChain chain = metropolis_sample_distinct(model, n_u, effective_burn_in, rng);
    const MeasurementSource source =
        nm_infinity ? make_infinite_source(truth) : make_shot_source(truth, n_m);
    return estimate_purity_is(model, chain, source, rng, renyi_log2);
}

namespace {

struct ErrorStats {
    double mean = 0.0;
    double stderr_e = 0.0;
};

ErrorStats error_stats(const std::vector<double>& abs_errors) {
    ErrorStats stats;
    const double n = static_cast<double>(abs_errors.size());
    for (double e : abs_errors) stats.mean += e;
    stats.mean /= n;
    if (abs_errors.size() > 1) {
        double ss = 0.0;
        for (double e : abs_errors) ss += (e - stats.mean) * (e - stats.mean);
        stats.stderr_e = std::sqrt(ss / (n - 1.0) / n);
    }
    return stats;
}

}  // namespace

ErrorCurve run_error_curve(const ExperimentConfig& config, SweepVariable variable,
                           const std::vector<double>& values) {
    if (values.empty()) config_error("error curve needs at least one sweep value");
    const DenseState truth = build_state(config.state);
    const double p2_true = purity(truth);

    std::shared_ptr<const SamplerModel> fixed_model;
    if (variable != SweepVariable::bond_dim) {
        fixed_model = build_sampler(config.sampler, config.state,
                                    derive_seed(config.master_seed, config.experiment_id, 0));
    } else if (config.sampler.backend != BackendKind::mps) {
        config_error("bond_dim sweep requires the mps sampler backend");
    }

    ErrorCurve curve;
    curve.variable = variable;
    curve.p2_true = p2_true;
    curve.points.resize(values.size());

    for (std::size_t vi = 0; vi < values.size(); ++vi) {
        const double value = values[vi];
        int n_u = config.n_u;
        int n_m = config.n_m;
        std::shared_ptr<const SamplerModel> model = fixed_model;
        switch (variable) {
            case SweepVariable::n_u:
                n_u = static_cast<int>(value);
                if (n_u < 1) config_error("swept n_u must be >= 1");
                break;
            case SweepVariable::n_m:
                n_m = static_cast<int>(value);
                if (n_m < 2) config_error("swept n_m must be >= 2");
                break;
            case SweepVariable::bond_dim: {
                SamplerSpec spec = config.sampler;
                spec.bond_dim = static_cast<int>(value);
                model = build_sampler(spec, config.state,
                                      derive_seed(config.master_seed, config.experiment_id, vi));
                break;
            }
        }

        std::vector<double> errors(config.n_repetitions);
        const std::string task_id =
            config.experiment_id + ":curve:" + std::to_string(vi);
        parallel_for(config.n_repetitions, config.threads, [&](int rep) {
            Rng rng(derive_seed(config.master_seed, task_id, rep));
            const PurityEstimate est = run_pipeline_once(truth, *model, n_u, n_m,
                                                         config.nm_infinity, config.burn_in, rng,
                                                         config.renyi_log2);
            errors[rep] = std::abs(p2_true - est.p2_hat);
        });
        const ErrorStats stats = error_stats(errors);
        curve.points[vi] = {value, stats.mean, stats.stderr_e};
    }
    return curve;
}

namespace {

// Mean absolute error at (n_u, n_m) with common random numbers across probes.
class ErrorProbe {
public:
    ErrorProbe(const DenseState& truth, const SamplerModel& model, const ExperimentConfig& config,
               int n_index)
        : truth_(truth), model_(model), config_(config),
          task_id_(config.experiment_id + ":scaling:" + std::to_string(n_index)),
          p2_true_(purity(truth)) {}

    double operator()(long long n_u, long long n_m) {
        const auto key = std::make_pair(n_u, n_m);
        if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
        std::vector<double> errors(config_.n_repetitions);
        parallel_for(config_.n_repetitions, config_.threads, [&](int rep) {
            Rng rng(derive_seed(config_.master_seed, task_id_, rep));
            const PurityEstimate est =
                run_pipeline_once(truth_, model_, static_cast<int>(n_u), static_cast<int>(n_m),
                                  config_.nm_infinity, config_.burn_in, rng, config_.renyi_log2);
            errors[rep] = std::abs(p2_true_ - est.p2_hat);
        });
        const double e = error_stats(errors).mean;
        cache_[key] = e;
        return e;
    }

private:
    const DenseState& truth_;
    const SamplerModel& model_;
    const ExperimentConfig& config_;
    std::string task_id_;
    double p2_true_;
    std::map<std::pair<long long, long long>, double> cache_;
};

}  // namespace

BudgetScalingResult run_budget_scaling(const ExperimentConfig& config,
                                       const std::vector<int>& n_values, double epsilon) {
    if (!(epsilon > 0.0)) config_error("scaling: epsilon must be > 0");
    if (n_values.empty()) config_error("scaling: need at least one system size");

    BudgetScalingResult result;
    for (std::size_t ni = 0; ni < n_values.size(); ++ni) {
        const int n = n_values[ni];
        ExperimentConfig local = config;
        local.state.n = n;
        if (local.sampler.model_state) local.sampler.model_state->n = n;
        const DenseState truth = build_state(local.state);
        const double p2_true = purity(truth);
        const auto model =
            build_sampler(local.sampler, local.state,
                          derive_seed(config.master_seed, config.experiment_id + ":build", ni));

        ErrorProbe probe(truth, *model, local, n);
        BudgetPoint point;
        point.n = n;

        // analytic warm start from Monte Carlo gammas and the variance formula
        Rng gamma_rng(derive_seed(config.master_seed, config.experiment_id + ":gamma", ni));
        const GammaEstimate gam = gamma_monte_carlo(truth, *model, 3000, gamma_rng);
        BudgetPlan plan = required_budget(epsilon, gam.value, p2_true,
                                          static_cast<long long>(config.budget_cap));

        const bool perfect_mode = config.sampler.backend == BackendKind::exact;
        const double target = epsilon;

        auto bisect_n_u = [&](long long n_m, std::uint64_t cap) -> std::optional<long long> {
            long long lo = 0, hi = std::max<long long>(1, plan.n_u);
            // expand until the probe passes
            while (probe(hi, n_m) > target) {
                lo = hi;
                hi *= 2;
                if (static_cast<std::uint64_t>(hi) * n_m > cap) return std::nullopt;
            }
            while (lo + 1 < hi && static_cast<double>(hi) > 1.05 * static_cast<double>(lo)) {
                const long long mid = lo + (hi - lo) / 2;
                if (mid == 0) break;
                if (probe(mid, n_m) <= target)
                    hi = mid;
                else
                    lo = mid;
            }
            return hi;
        };

        if (perfect_mode) {
            // paper: statistical error is minimized at N_u = 1
            long long lo = 1, hi = std::max<long long>(2, plan.n_m);
            bool capped = false;
            while (probe(1, hi) > target) {
                lo = hi;
                hi *= 2;
                if (static_cast<std::uint64_t>(hi) > config.budget_cap) {
                    capped = true;
                    break;
                }
            }
            if (capped) {
                point.censored = true;
                point.budget = config.budget_cap;
            } else {
                while (lo + 1 < hi && static_cast<double>(hi) > 1.05 * static_cast<double>(lo)) {
                    const long long mid = lo + (hi - lo) / 2;
                    if (probe(1, mid) <= target)
                        hi = mid;
                    else
                        lo = mid;
                }
                point.n_u = 1;
                point.n_m = std::max<long long>(2, hi);
                point.budget = static_cast<std::uint64_t>(point.n_m);
            }
        } else {
            std::set<long long> candidates;
            for (double f : {0.5, 0.75, 1.0, 1.5, 2.0})
                candidates.insert(std::max<long long>(2, std::llround(f * plan.n_m)));
            std::uint64_t best = 0;
            for (long long n_m : candidates) {
                const std::uint64_t cap = best == 0 ? config.budget_cap : best;
                const auto n_u = bisect_n_u(n_m, cap);
                if (!n_u) continue;
                const std::uint64_t total = static_cast<std::uint64_t>(*n_u) * n_m;
                if (best == 0 || total < best) {
                    best = total;
                    point.n_u = *n_u;
                    point.n_m = n_m;
                }
            }
            if (best == 0) {
                point.censored = true;
                point.budget = config.budget_cap;
            } else {
                point.budget = best;
            }
        }
        result.points.push_back(point);
    }

    std::vector<std::pair<double, double>> fit_points;
    for (const auto& p : result.points)
        if (!p.censored) fit_points.emplace_back(p.n, static_cast<double>(p.budget));
    if (fit_points.size() >= 2) result.fit = fit_scaling(fit_points);
    return result;
}

std::vector<ComparisonRow> run_sampler_comparison(const ExperimentConfig& config,
                                                  const std::vector<SamplerSpec>& samplers) {
    if (samplers.empty()) config_error("comparison: need at least one sampler");
    const DenseState truth = build_state(config.state);
    const double p2_true = purity(truth);

    std::vector<ComparisonRow> rows;
    for (std::size_t si = 0; si < samplers.size(); ++si) {
        const auto model =
            build_sampler(samplers[si], config.state,
                          derive_seed(config.master_seed, config.experiment_id + ":cmpbuild",
                                      si));
        std::vector<double> errors(config.n_repetitions);
        // paired seeds: the same per-repetition stream for every sampler
        parallel_for(config.n_repetitions, config.threads, [&](int rep) {
            Rng rng(derive_seed(config.master_seed, config.experiment_id + ":cmp", rep));
            const PurityEstimate est = run_pipeline_once(truth, *model, config.n_u, config.n_m,
                                                         config.nm_infinity, config.burn_in, rng,
                                                         config.renyi_log2);
            errors[rep] = std::abs(p2_true - est.p2_hat);
        });
        const ErrorStats stats = error_stats(errors);
        ComparisonRow row;
        row.name = model->name();
        if (samplers[si].backend == BackendKind::mps)
            row.name += ":D=" + std::to_string(samplers[si].bond_dim);
        row.error = stats.mean;
        row.stderr_e = stats.stderr_e;
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_error_curve_csv(const ErrorCurve& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_error_curve_csv: cannot open " + path);
    const char* name = curve.variable == SweepVariable::n_u
                           ? "n_u"
                           : (curve.variable == SweepVariable::n_m ? "n_m" : "bond_dim");
    out << name << ",error,stderr\n";
    for (const auto& p : curve.points)
        out << format_double(p.value) << ',' << format_double(p.error) << ','
            << format_double(p.stderr_e) << '\n';
}

void write_budget_csv(const BudgetScalingResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_budget_csv: cannot open " + path);
    out << "n,budget,n_u,n_m,censored\n";
    for (const auto& p : result.points)
        out << p.n << ',' << p.budget << ',' << p.n_u << ',' << p.n_m << ','
            << (p.censored ? 1 : 0) << '\n';
    if (result.fit)
        out << "# fit a=" << format_double(result.fit->a) << " b=" << format_double(result.fit->b)
            << " residual=" << format_double(result.fit->residual) << '\n';
}

void write_comparison_csv(const std::vector<ComparisonRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_comparison_csv: cannot open " + path);
    out << "sampler,error,stderr\n";
    for (const auto& row : rows)
        out << row.name << ',' << format_double(row.error) << ',' << format_double(row.stderr_e)
            << '\n';
}

}  // namespace rmkit
