#include <doctest.h>

#include <cmath>
#include <iostream>
#include <numbers>

#include "rmkit/analytics.hpp"
#include "test_util.hpp"

using namespace rmkit;

TEST_CASE("closed forms at N = 1") {
    const GammaTriple uniform = gamma_closed_form(SamplerKind::uniform, 1);
    CHECK(uniform.gamma2 == 3.0);
    CHECK(uniform.gamma3 == 1.5);
    CHECK(uniform.gamma4 == doctest::Approx(1.2).epsilon(1e-15));

    const double alpha = 2.5 - 2.0 * std::numbers::pi / (3.0 * std::sqrt(3.0));
    const double beta = 1.0 + 4.0 * std::numbers::pi / (3.0 * std::sqrt(3.0));
    const GammaTriple perfect = gamma_closed_form(SamplerKind::perfect, 1);
    CHECK(perfect.gamma2 == beta);
    CHECK(perfect.gamma3 == alpha);
    CHECK(perfect.gamma4 == 1.0);
    CHECK(perfect.gamma2 == doctest::Approx(3.4184).epsilon(1e-4));
    CHECK(perfect.gamma3 == doctest::Approx(1.2908).epsilon(1e-4));
}

TEST_CASE("qudit forms reduce to the qubit case and match d = 3 by substitution") {
    const GammaTriple d2 = gamma_closed_form(SamplerKind::uniform, 1, 2);
    CHECK(d2.gamma2 == 3.0);
    CHECK(d2.gamma3 == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(d2.gamma4 == doctest::Approx(1.2).epsilon(1e-15));

    const GammaTriple d3 = gamma_closed_form(SamplerKind::uniform, 1, 3);
    CHECK(d3.gamma2 == 5.0);
    CHECK(d3.gamma3 == doctest::Approx(9.0 / 5.0).epsilon(1e-15));
    CHECK(d3.gamma4 == doctest::Approx(38.0 / 30.0).epsilon(1e-15));

    CHECK_THROWS_AS(gamma_closed_form(SamplerKind::perfect, 2, 3), std::invalid_argument);
    CHECK_THROWS_AS(gamma_closed_form(SamplerKind::uniform, 0, 2), std::invalid_argument);
}

TEST_CASE("quadrature reproduces the closed forms to 1e-10 relative") {
    for (int n = 1; n <= 10; ++n) {
        const GammaTriple cu = gamma_closed_form(SamplerKind::uniform, n);
        const GammaTriple qu = gamma_quadrature(SamplerKind::uniform, n);
        CHECK(std::abs(qu.gamma2 / cu.gamma2 - 1.0) < 1e-10);
        CHECK(std::abs(qu.gamma3 / cu.gamma3 - 1.0) < 1e-10);
        CHECK(std::abs(qu.gamma4 / cu.gamma4 - 1.0) < 1e-10);

        const GammaTriple cp = gamma_closed_form(SamplerKind::perfect, n);
        const GammaTriple qp = gamma_quadrature(SamplerKind::perfect, n);
        CHECK(std::abs(qp.gamma2 / cp.gamma2 - 1.0) < 1e-10);
        CHECK(std::abs(qp.gamma3 / cp.gamma3 - 1.0) < 1e-10);
        CHECK(std::abs(qp.gamma4 / cp.gamma4 - 1.0) < 1e-10);
    }
    // spot values by per-qubit arithmetic
    const GammaTriple q3 = gamma_quadrature(SamplerKind::uniform, 3);
    CHECK(q3.gamma2 == doctest::Approx(27.0).epsilon(1e-12));
    CHECK(q3.gamma3 == doctest::Approx(3.375).epsilon(1e-12));
    CHECK(q3.gamma4 == doctest::Approx(1.728).epsilon(1e-12));
}

TEST_CASE("k-copy traces: factorized transforms match literal enumeration") {
    Rng rng(1);
    for (int k = 0; k < 12; ++k) {
        const int n = 1 + static_cast<int>(rng.bounded(3));
        DenseState state = make_haar_random_pure(n, rng);
        if (k % 3 == 2 && n >= 2) state = partial_trace(state, {0});
        const UnitaryAngles angles = sample_haar_angles(state.n_qubits(), rng);
        const OutcomeDistribution dist = outcome_distribution(state, angles);
        const GammaTriple fast = gamma_traces_of_distribution(dist);
        const GammaTriple slow = gamma_traces_enumerated(dist);
        CHECK(fast.gamma2 == doctest::Approx(slow.gamma2).epsilon(1e-10));
        CHECK(fast.gamma3 == doctest::Approx(slow.gamma3).epsilon(1e-10));
        CHECK(fast.gamma4 == doctest::Approx(slow.gamma4).epsilon(1e-10));
    }
}

TEST_CASE("k-copy traces: product-state closed forms per unitary") {
    Rng rng(2);
    for (int k = 0; k < 10; ++k) {
        const int n = 1 + static_cast<int>(rng.bounded(4));
        const UnitaryAngles angles = sample_haar_angles(n, rng);
        const OutcomeDistribution dist = outcome_distribution(make_product(n), angles);
        const GammaTriple traces = gamma_traces_of_distribution(dist);
        double g2 = 1.0, g3 = 1.0, g4 = 1.0;
        for (int i = 0; i < n; ++i) {
            const double z2 = (1.0 - 2.0 * angles.xi[i]) * (1.0 - 2.0 * angles.xi[i]);
            g2 *= (10.0 + 6.0 * z2) / 4.0;
            g3 *= (1.0 + 15.0 * z2) / 4.0;
            g4 *= (1.0 + 3.0 * z2) * (1.0 + 3.0 * z2) / 4.0;
        }
        CHECK(traces.gamma2 == doctest::Approx(g2).epsilon(1e-10));
        CHECK(traces.gamma3 == doctest::Approx(g3).epsilon(1e-10));
        CHECK(traces.gamma4 == doctest::Approx(g4).epsilon(1e-10));
    }
}

TEST_CASE("monte carlo gammas: uniform model on a product state") {
    const DenseState prod = make_product(2);
    const UniformSampler uniform(2);
    Rng rng(3);
    const GammaEstimate est = gamma_monte_carlo(prod, uniform, 10000, rng);
    const GammaTriple expect = gamma_closed_form(SamplerKind::uniform, 2);
    CHECK(std::abs(est.value.gamma2 - expect.gamma2) < 3.0 * est.stderr_.gamma2);
    CHECK(std::abs(est.value.gamma3 - expect.gamma3) < 3.0 * est.stderr_.gamma3);
    CHECK(std::abs(est.value.gamma4 - expect.gamma4) < 3.0 * est.stderr_.gamma4);
}

TEST_CASE("monte carlo gammas: perfect model on a product state") {
    const DenseState prod = make_product(2);
    const ExactSampler exact(prod);
    Rng rng(4);
    const GammaEstimate est = gamma_monte_carlo(prod, exact, 10000, rng);
    const GammaTriple expect = gamma_closed_form(SamplerKind::perfect, 2);
    CHECK(std::abs(est.value.gamma2 - expect.gamma2) < 3.0 * est.stderr_.gamma2);
    CHECK(std::abs(est.value.gamma3 - expect.gamma3) < 3.0 * est.stderr_.gamma3);
    // every perfect-sampler sample contributes exactly X^2 p2^2 / X^2 = 1
    CHECK(est.value.gamma4 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(est.stderr_.gamma4 < 1e-12);
}

TEST_CASE("monte carlo gammas: constant X on the maximally mixed state") {
    const DenseState mixed = make_maximally_mixed(1);
    const UniformSampler uniform(1);
    Rng rng(5);
    const GammaEstimate est = gamma_monte_carlo(mixed, uniform, 300, rng);
    // X(u) = 1/2 for every u, so Gamma4 = 1/4 with no spread
    CHECK(est.value.gamma4 == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(est.stderr_.gamma4 < 1e-12);
}

TEST_CASE("finite-shot variance coefficients") {
    const GammaTriple g{27.0, 3.375, 1.728};
    // n_m = 2: only Gamma2 survives
    CHECK(estimator_variance(g, 1.0, 5, 2) == doctest::Approx((27.0 - 1.0) / 5.0).epsilon(1e-14));
    // n_m -> infinity: only Gamma4 survives
    CHECK(estimator_variance(g, 1.0, 1, 100000000) ==
          doctest::Approx(1.728 - 1.0).epsilon(1e-6));
    CHECK_THROWS_AS(estimator_variance(g, 1.0, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(estimator_variance(g, 1.0, 0, 5), std::invalid_argument);

    // coefficient identity: the three weights sum to one for every n_m
    for (long long n_m = 2; n_m <= 1000; ++n_m) {
        const double denom = static_cast<double>(n_m) * (n_m - 1);
        const double sum = (n_m - 3.0) * (n_m - 2.0) / denom + 4.0 * (n_m - 2.0) / denom +
                           2.0 / denom;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }

    // spot value used by the acceptance suite
    CHECK(estimator_variance(gamma_closed_form(SamplerKind::uniform, 3), 1.0, 100, 5) ==
          doctest::Approx(0.042434).epsilon(1e-4));
}

TEST_CASE("required budget: exhaustive-scan oracle at N = 1") {
    const GammaTriple g = gamma_closed_form(SamplerKind::uniform, 1);
    const BudgetPlan plan = required_budget(0.1, g, 1.0);

    // independent in-test scan of n_u = ceil(f(n_m)/V) minimizing n_u * n_m
    const double v = 0.5 * std::numbers::pi * 0.01;
    std::uint64_t best_total = 0;
    long long best_nm = 0, best_nu = 0;
    for (long long n_m = 2; n_m <= 1000; ++n_m) {
        const double f = estimator_variance(g, 1.0, 1, n_m);
        const long long n_u = std::max<long long>(1, static_cast<long long>(std::ceil(f / v - 1e-12)));
        const std::uint64_t total = static_cast<std::uint64_t>(n_u) * n_m;
        if (best_total == 0 || total < best_total) {
            best_total = total;
            best_nm = n_m;
            best_nu = n_u;
        }
    }
    CHECK(plan.total == best_total);
    CHECK(plan.n_m == best_nm);
    CHECK(plan.n_u == best_nu);
    // frozen oracle values (tie at 180 broken toward the smaller n_m)
    CHECK(plan.total == 180);
    CHECK(plan.n_m == 4);
    CHECK(plan.n_u == 45);
}

TEST_CASE("required budget: perfect sampler runs at a single unitary") {
    for (double eps : {0.2, 0.1, 0.05}) {
        for (int n : {1, 3, 5}) {
            const GammaTriple g = gamma_closed_form(SamplerKind::perfect, n);
            const BudgetPlan plan = required_budget(eps, g, 1.0);
            CHECK(plan.n_u == 1);
        }
    }
}

TEST_CASE("required budget: halving epsilon quadruples n_u at fixed n_m") {
    const GammaTriple g = gamma_closed_form(SamplerKind::uniform, 2);
    const double v1 = 0.5 * std::numbers::pi * 0.01;
    const double v2 = v1 / 4.0;
    for (long long n_m : {3, 5, 10, 40}) {
        const double f = estimator_variance(g, 1.0, 1, n_m);
        const long long nu1 = static_cast<long long>(std::ceil(f / v1 - 1e-12));
        const long long nu2 = static_cast<long long>(std::ceil(f / v2 - 1e-12));
        CHECK(nu2 <= 4 * nu1);
        CHECK(nu2 >= 4 * nu1 - 3);
    }
}

TEST_CASE("scaling fit on exact points") {
    std::vector<std::pair<double, double>> points;
    for (int n = 1; n <= 6; ++n) points.emplace_back(n, std::exp2(1.0 + 0.5 * n));
    const ScalingFit fit = fit_scaling(points);
    CHECK(fit.a == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fit.b == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fit.residual < 1e-12);

    CHECK_THROWS_AS(fit_scaling({{2.0, 8.0}}), std::invalid_argument);
    CHECK_THROWS_AS(fit_scaling({{2.0, 8.0}, {2.0, 16.0}}), std::invalid_argument);
}

TEST_CASE("analytic budgets reproduce the asymptotic uniform exponent") {
    // fitted over N = 4..10 at epsilon = 0.1 where the asymptotic analytic
    // slope (log2 3 + log2 1.2)/2 = 0.924 has set in
    std::vector<std::pair<double, double>> points;
    for (int n = 4; n <= 10; ++n) {
        const BudgetPlan plan =
            required_budget(0.1, gamma_closed_form(SamplerKind::uniform, n), 1.0);
        points.emplace_back(n, static_cast<double>(plan.total));
    }
    const ScalingFit fit = fit_scaling(points);
    std::cout << "uniform analytic exponent (N=4..10, eps=0.1): a = " << fit.a << "\n";
    CHECK(std::abs(fit.a - 0.92) < 0.05);
}

TEST_CASE("analytic budgets reproduce the favorable small-N perfect exponent") {
    // high-accuracy regime below the crossover: eps = 1e-3, N = 12..18
    std::vector<std::pair<double, double>> points;
    for (int n = 12; n <= 18; ++n) {
        const BudgetPlan plan = required_budget(
            0.001, gamma_closed_form(SamplerKind::perfect, n), 1.0, 4000000000LL);
        CHECK(plan.n_u == 1);
        points.emplace_back(n, static_cast<double>(plan.total));
    }
    const ScalingFit fit = fit_scaling(points);
    std::cout << "perfect analytic exponent (N=12..18, eps=1e-3): a = " << fit.a << "\n";
    CHECK(std::abs(fit.a - 0.37) < 0.05);
}

TEST_CASE("analytic budgets reproduce the large-N perfect exponent") {
    // above the crossover the slope approaches log2(beta)/2 = 0.887
    std::vector<std::pair<double, double>> points;
    for (int n = 20; n <= 30; n += 2) {
        const BudgetPlan plan = required_budget(
            0.1, gamma_closed_form(SamplerKind::perfect, n), 1.0, 4000000000LL);
        points.emplace_back(n, static_cast<double>(plan.total));
    }
    const ScalingFit fit = fit_scaling(points);
    std::cout << "perfect analytic exponent (N=20..30, eps=0.1): a = " << fit.a << "\n";
    CHECK(std::abs(fit.a - 0.88) < 0.06);
}

TEST_CASE("closed-form variance matches a small simulation") {
    // desk-size version of the acceptance check: product N = 2, n_m = 4
    const DenseState prod = make_product(2);
    const GammaTriple g = gamma_closed_form(SamplerKind::uniform, 2);
    const long long n_u = 30, n_m = 4;
    const double predicted = estimator_variance(g, 1.0, n_u, n_m);

    std::vector<double> estimates;
    for (int run = 0; run < 2000; ++run) {
        Rng rng(derive_seed(99, "prop1-sim", run));
        double mean = 0.0;
        for (int r = 0; r < n_u; ++r) {
            const UnitaryAngles angles = sample_haar_angles(2, rng);
            mean += x_estimate(sample_bitstrings(prod, angles, n_m, rng));
        }
        estimates.push_back(mean / n_u);
    }
    const double empirical = test_util::sample_variance(estimates);
    CHECK(std::abs(empirical / predicted - 1.0) < 0.10);
}
