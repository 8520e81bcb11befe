#include "rmkit/analytics.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

#include "rmkit/errors.hpp"

namespace rmkit {

namespace {

// adaptive Simpson with absolute tolerance
double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fb,
               double fm, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) < 15.0 * tol) return left + right + delta / 15.0;
    return simpson(f, a, m, fa, fm, flm, 0.5 * tol, depth - 1) +
           simpson(f, m, b, fm, fb, frm, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13) {
    const double m = 0.5 * (a + b);
    return simpson(f, a, b, f(a), f(b), f(m), tol, 40);
}

void check_gamma_args(SamplerKind kind, int n_qubits, int local_dim) {
    if (n_qubits < 1) throw std::invalid_argument("gamma: n_qubits must be >= 1");
    if (local_dim < 2) throw std::invalid_argument("gamma: local dimension must be >= 2");
    if (kind == SamplerKind::perfect && local_dim != 2)
        throw std::invalid_argument("gamma: perfect-sampler form is only available for d = 2");
}

double pow_n(double base, int n) { return std::pow(base, static_cast<double>(n)); }

}  // namespace

GammaTriple gamma_closed_form(SamplerKind kind, int n_qubits, int local_dim) {
    check_gamma_args(kind, n_qubits, local_dim);
    GammaTriple g;
    if (kind == SamplerKind::uniform) {
        const double d = static_cast<double>(local_dim);
        g.gamma2 = pow_n(2.0 * d - 1.0, n_qubits);
        g.gamma3 = pow_n(3.0 * d / (2.0 + d), n_qubits);
        g.gamma4 = pow_n((d * d + 9.0 * d + 2.0) / (d * d + 5.0 * d + 6.0), n_qubits);
    } else {
        const double alpha = 2.5 - 2.0 * std::numbers::pi / (3.0 * std::sqrt(3.0));
        const double beta = 1.0 + 4.0 * std::numbers::pi / (3.0 * std::sqrt(3.0));
        g.gamma2 = pow_n(beta, n_qubits);
        g.gamma3 = pow_n(alpha, n_qubits);
        g.gamma4 = 1.0;
    }
    return g;
}

GammaTriple gamma_quadrature(SamplerKind kind, int n_qubits) {
    check_gamma_args(kind, n_qubits, 2);
    GammaTriple g;
    if (kind == SamplerKind::uniform) {
        const double i2 = integrate([](double z) { return 10.0 + 6.0 * z * z; }, -1.0, 1.0) / 8.0;
        const double i3 = integrate([](double z) { return 1.0 + 15.0 * z * z; }, -1.0, 1.0) / 8.0;
        const double i4 = integrate(
            [](double z) {
                const double w = 1.0 + 3.0 * z * z;
                return w * w;
            },
            -1.0, 1.0) / 8.0;
        g.gamma2 = pow_n(i2, n_qubits);
        g.gamma3 = pow_n(i3, n_qubits);
        g.gamma4 = pow_n(i4, n_qubits);
    } else {
        const double i2 =
            integrate([](double z) { return (10.0 + 6.0 * z * z) / (1.0 + 3.0 * z * z); }, -1.0, 1.0) /
            4.0;
        const double i3 =
            integrate([](double z) { return (1.0 + 15.0 * z * z) / (1.0 + 3.0 * z * z); }, -1.0, 1.0) /
            4.0;
        const double i4 = integrate([](double z) { return 1.0 + 3.0 * z * z; }, -1.0, 1.0) / 4.0;
        g.gamma2 = pow_n(i2, n_qubits);
        g.gamma3 = pow_n(i3, n_qubits);
        g.gamma4 = pow_n(i4, n_qubits);
    }
    return g;
}

GammaTriple gamma_traces_of_distribution(const OutcomeDistribution& dist) {
    const int n = dist.n_qubits;
    const std::size_t dim = dist.probs.size();

    // (K P)(s) with K = 2^N kernel: pair transform then scale
    std::vector<double> kp = dist.probs;
    apply_pair_kernel(kp);
    for (double& v : kp) v = std::ldexp(v, n);

    // squared kernel K^2(s,s') = 4^N 4^{-D}: per-qubit [[1,1/4],[1/4,1]]
    std::vector<double> k2p = dist.probs;
    for (std::size_t bit = 1; bit < dim; bit <<= 1) {
        for (std::size_t i = 0; i < dim; ++i) {
            if (i & bit) continue;
            const double a = k2p[i];
            const double b = k2p[i | bit];
            k2p[i] = a + 0.25 * b;
            k2p[i | bit] = b + 0.25 * a;
        }
    }
    for (double& v : k2p) v = std::ldexp(v, 2 * n);

    double x = 0.0, g3 = 0.0, g2 = 0.0;
    for (std::size_t s = 0; s < dim; ++s) {
        x += dist.probs[s] * kp[s];  // X(u) = P^T (K P)
        g3 += dist.probs[s] * kp[s] * kp[s];
        g2 += dist.probs[s] * k2p[s];
    }
    GammaTriple g;
    g.gamma4 = x * x;
    g.gamma3 = g3;
    g.gamma2 = g2;
    return g;
}

GammaTriple gamma_traces_enumerated(const OutcomeDistribution& dist) {
    const int n = dist.n_qubits;
    if (n > 3) throw std::invalid_argument("gamma_traces_enumerated: oracle path limited to N <= 3");
    const std::size_t dim = dist.probs.size();
    auto kernel = [n](std::size_t s, std::size_t t) {
        return std::ldexp(std::pow(-2.0, -std::popcount(s ^ t)), n);
    };
    GammaTriple g;
    for (std::size_t s1 = 0; s1 < dim; ++s1)
        for (std::size_t s2 = 0; s2 < dim; ++s2) {
            const double p12 = dist.probs[s1] * dist.probs[s2];
            const double k12 = kernel(s1, s2);
            g.gamma2 += k12 * k12 * p12;
            for (std::size_t s3 = 0; s3 < dim; ++s3) {
                const double p123 = p12 * dist.probs[s3];
                g.gamma3 += k12 * kernel(s2, s3) * p123;
                for (std::size_t s4 = 0; s4 < dim; ++s4)
                    g.gamma4 += k12 * kernel(s3, s4) * p123 * dist.probs[s4];
            }
        }
    return g;
}

GammaEstimate gamma_monte_carlo(const DenseState& state, const SamplerModel& model, int n_samples,
                                Rng& rng, const GammaMcOptions& options) {
    if (n_samples < 2) throw std::invalid_argument("gamma_monte_carlo: needs n_samples >= 2");
    if (state.n_qubits() != model.n_qubits())
        throw std::invalid_argument("gamma_monte_carlo: state/model qubit mismatch");
    if (state.n_qubits() > options.max_qubits)
        throw resource_limit_error("gamma_monte_carlo: exceeds configured qubit limit");

    const double z = model.normalization().z;
    const bool constant = model.constant_weight().has_value();

    std::vector<UnitaryAngles> samples;
    std::vector<double> weights;  // occurrence counts
    if (constant) {
        samples.reserve(n_samples);
        for (int k = 0; k < n_samples; ++k)
            samples.push_back(sample_haar_angles(model.n_qubits(), rng));
        weights.assign(n_samples, 1.0);
    } else {
        const MetropolisChain chain =
            metropolis_sample(model, static_cast<long long>(n_samples) + options.burn_in,
                              options.burn_in, rng);
        samples = chain.angles;
        weights.assign(chain.occurrences.begin(), chain.occurrences.end());
    }

    double n_total = 0.0;
    for (double w : weights) n_total += w;

    std::vector<std::array<double, 3>> vals(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const OutcomeDistribution dist = outcome_distribution(state, samples[k]);
        const GammaTriple t = gamma_traces_of_distribution(dist);
        const double w = model.evaluate(samples[k]);
        const double corr = (z / w) * (z / w);
        vals[k] = {t.gamma2 * corr, t.gamma3 * corr, t.gamma4 * corr};
    }

    GammaEstimate est;
    double mean[3] = {0.0, 0.0, 0.0};
    for (std::size_t k = 0; k < vals.size(); ++k)
        for (int c = 0; c < 3; ++c) mean[c] += weights[k] * vals[k][c];
    for (double& m : mean) m /= n_total;
    double var[3] = {0.0, 0.0, 0.0};
    for (std::size_t k = 0; k < vals.size(); ++k)
        for (int c = 0; c < 3; ++c) {
            const double d = vals[k][c] - mean[c];
            var[c] += weights[k] * d * d;
        }
    for (double& v : var) v = n_total > 1.0 ? v / (n_total - 1.0) / n_total : 0.0;

    est.value = {mean[0], mean[1], mean[2]};
    est.stderr_ = {std::sqrt(var[0]), std::sqrt(var[1]), std::sqrt(var[2])};
    return est;
}

double estimator_variance(const GammaTriple& gammas, double p2, long long n_u, long long n_m) {
    if (n_m < 2) throw std::invalid_argument("estimator_variance: n_m must be >= 2");
    if (n_u < 1) throw std::invalid_argument("estimator_variance: n_u must be >= 1");
    const double nm = static_cast<double>(n_m);
    const double denom = nm * (nm - 1.0);
    const double c4 = (nm - 3.0) * (nm - 2.0) / denom;
    const double c3 = 4.0 * (nm - 2.0) / denom;
    const double c2 = 2.0 / denom;
    return (c4 * gammas.gamma4 + c3 * gammas.gamma3 + c2 * gammas.gamma2 - p2 * p2) /
           static_cast<double>(n_u);
}

VarianceReport make_variance_report(const GammaTriple& gammas, double p2, long long n_u,
                                    long long n_m) {
    VarianceReport rep;
    rep.gammas = gammas;
    rep.p2 = p2;
    rep.n_u = n_u;
    rep.n_m = n_m;
    rep.variance = estimator_variance(gammas, p2, n_u, n_m);
    return rep;
}

namespace {

// bracketed variance factor: the estimator variance at n_u = 1
double budget_factor(const GammaTriple& g, double p2, long long n_m) {
    return estimator_variance(g, p2, 1, n_m);
}

}  // namespace

BudgetPlan required_budget(double epsilon, const GammaTriple& gammas, double p2,
                           long long n_m_max) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("required_budget: epsilon must be > 0");
    if (n_m_max < 2) throw std::invalid_argument("required_budget: n_m_max must be >= 2");
    const double v = 0.5 * std::numbers::pi * epsilon * epsilon;  // Std = sqrt(pi/2) E

    auto units_for = [&](long long n_m) -> long long {
        const double f = budget_factor(gammas, p2, n_m);
        if (f <= 0.0) return 1;
        return static_cast<long long>(std::ceil(f / v - 1e-12));
    };

    BudgetPlan best;
    best.epsilon = epsilon;
    best.total = 0;
    auto consider = [&](long long n_m) {
        const long long n_u = std::max<long long>(1, units_for(n_m));
        const std::uint64_t total =
            static_cast<std::uint64_t>(n_u) * static_cast<std::uint64_t>(n_m);
        if (best.total == 0 || total < best.total ||
            (total == best.total && n_m < best.n_m)) {
            best.n_u = n_u;
            best.n_m = n_m;
            best.total = total;
        }
    };

    const long long exhaustive_max = std::min<long long>(n_m_max, 1LL << 21);
    for (long long n_m = 2; n_m <= exhaustive_max; ++n_m) consider(n_m);

    if (n_m_max > exhaustive_max) {
        // f(n_m) is monotone decreasing for Gamma2 >= Gamma3 >= Gamma4, so in
        // the tail the best n_m at each n_u level k is the first one with
        // f <= k v; bisect for it.
        const long long tail_units = units_for(exhaustive_max);
        for (long long k = 1; k <= tail_units; ++k) {
            if (best.total != 0 && static_cast<std::uint64_t>(k) *
                                           static_cast<std::uint64_t>(exhaustive_max) >=
                                       best.total)
                break;  // tail totals only grow from here
            if (budget_factor(gammas, p2, n_m_max) > static_cast<double>(k) * v) continue;
            long long lo = exhaustive_max, hi = n_m_max;  // f(lo) > kv >= f(hi)
            while (lo + 1 < hi) {
                const long long mid = lo + (hi - lo) / 2;
                if (budget_factor(gammas, p2, mid) <= static_cast<double>(k) * v)
                    hi = mid;
                else
                    lo = mid;
            }
            consider(hi);
        }
    }
    return best;
}

ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 2) throw std::invalid_argument("fit_scaling: needs at least 2 points");
    {
        bool distinct = false;
        for (std::size_t i = 1; i < points.size(); ++i)
            if (points[i].first != points[0].first) distinct = true;
        if (!distinct) throw std::invalid_argument("fit_scaling: needs at least 2 distinct N");
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(points.size());
    std::vector<double> ys(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double x = points[i].first;
        if (!(points[i].second > 0.0))
            throw std::invalid_argument("fit_scaling: budgets must be positive");
        const double y = std::log2(points[i].second);
        ys[i] = y;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    ScalingFit fit;
    fit.a = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.b = (sy - fit.a * sx) / n;
    double ss = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double r = ys[i] - (fit.b + fit.a * points[i].first);
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

}  // namespace rmkit
