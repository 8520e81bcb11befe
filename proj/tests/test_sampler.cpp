#include <doctest.h>

#include <cmath>
#include <memory>

#include "rmkit/sampler.hpp"
#include "test_util.hpp"

using namespace rmkit;

namespace {

UnitaryAngles identity_angles(int n) {
    return UnitaryAngles(std::vector<double>(n, 0.0), std::vector<double>(n, 0.0));
}

}  // namespace

TEST_CASE("backend weights at the spec corners") {
    const UniformSampler uniform(3);
    Rng rng(1);
    CHECK(uniform.evaluate(sample_haar_angles(3, rng)) == 1.0);
    CHECK(uniform.normalization().z == 1.0);
    CHECK(uniform.normalization().stderr_z == 0.0);

    const ExactSampler exact(make_product(3));
    CHECK(exact.evaluate(identity_angles(3)) == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(exact.normalization().z == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(uniform.evaluate(identity_angles(2)), std::invalid_argument);
}

TEST_CASE("weights are clamped from below") {
    // scale an exact model far down so raw weights sit under the floor
    auto inner = std::make_shared<ExactSampler>(make_maximally_mixed(2));
    const ScaledSampler tiny(inner, 1e-15);
    Rng rng(2);
    const UnitaryAngles angles = sample_haar_angles(2, rng);
    CHECK(tiny.evaluate_raw(angles) < kWeightFloor);
    CHECK(tiny.evaluate(angles) == kWeightFloor);
}

TEST_CASE("normalization estimates") {
    Rng rng(3);
    const UniformSampler uniform(2);
    const Normalization nu = estimate_normalization(uniform, 1000, rng);
    CHECK(nu.z == 1.0);
    CHECK(nu.stderr_z == 0.0);

    const ExactSampler product(make_product(2));
    const Normalization np = estimate_normalization(product, 20000, rng);
    CHECK(np.stderr_z > 0.0);
    CHECK(std::abs(np.z - 1.0) < 3.0 * np.stderr_z);

    // X is the constant 2^-N for the maximally mixed state
    const ExactSampler mixed(make_maximally_mixed(3));
    const Normalization nm = estimate_normalization(mixed, 500, rng);
    CHECK(nm.z == doctest::Approx(1.0 / 8.0).epsilon(1e-10));

    CHECK_THROWS_AS(estimate_normalization(product, 50, rng), std::invalid_argument);

    // two independent seeds agree within combined errors
    Rng rng_a(4), rng_b(5);
    const Normalization za = estimate_normalization(product, 20000, rng_a);
    const Normalization zb = estimate_normalization(product, 20000, rng_b);
    const double combined = std::hypot(za.stderr_z, zb.stderr_z);
    CHECK(std::abs(za.z - zb.z) < 3.0 * combined);
}

TEST_CASE("uniform chains are plain i.i.d. draws") {
    const UniformSampler uniform(2);
    Rng rng(6);
    const MetropolisChain chain = metropolis_sample(uniform, 500, 50, rng);
    CHECK(chain.acceptance_rate == 1.0);
    CHECK(chain.total_retained == 450);
    CHECK(chain.n_distinct() == 450);
    for (int n : chain.occurrences) CHECK(n == 1);
}

TEST_CASE("chain bookkeeping and determinism") {
    const ExactSampler exact(make_ghz(3));
    Rng rng_a(7), rng_b(7);
    const MetropolisChain a = metropolis_sample(exact, 400, 50, rng_a);
    const MetropolisChain b = metropolis_sample(exact, 400, 50, rng_b);
    CHECK(a.total_retained == 350);
    long long occ = 0;
    for (int n : a.occurrences) {
        CHECK(n >= 1);
        occ += n;
    }
    CHECK(occ == a.total_retained);
    CHECK(a.n_distinct() == b.n_distinct());
    for (int r = 0; r < a.n_distinct(); ++r) {
        CHECK(a.occurrences[r] == b.occurrences[r]);
        CHECK(a.angles[r].xi == b.angles[r].xi);
    }
    CHECK(a.acceptance_rate > 0.2);
    CHECK(a.acceptance_rate < 1.0);

    CHECK_THROWS_AS(metropolis_sample(exact, 0, 0, rng_a), std::invalid_argument);
    CHECK_THROWS_AS(metropolis_sample(exact, 10, 10, rng_a), std::invalid_argument);
}

TEST_CASE("N = 1 exact-model chain matches the analytic density") {
    // stationary density of xi for the single-qubit product state:
    // (1 + 3 (1 - 2 xi)^2) / 2, normalized on [0, 1]
    const ExactSampler exact(make_product(1));
    Rng rng(8);
    const int n_samples = 100000;
    const MetropolisChain chain = metropolis_sample(exact, n_samples + 50, 50, rng);

    std::vector<double> samples;
    samples.reserve(n_samples);
    for (int r = 0; r < chain.n_distinct(); ++r)
        for (int k = 0; k < chain.occurrences[r]; ++k) samples.push_back(chain.angles[r].xi[0]);

    auto cdf = [](double xi) {
        const double z = 1.0 - 2.0 * xi;
        return 0.5 * xi + 0.25 * (1.0 - z * z * z);
    };

    // chi-square on 20 equal-width bins
    std::vector<long long> counts(20, 0);
    for (double x : samples) ++counts[std::min<std::size_t>(19, static_cast<std::size_t>(x * 20))];
    std::vector<double> expected(20);
    for (int b = 0; b < 20; ++b) expected[b] = cdf((b + 1) / 20.0) - cdf(b / 20.0);
    const double p = test_util::chi2_pvalue(counts, expected, n_samples);
    CHECK(p > 0.01);

    CHECK(test_util::ks_distance(samples, cdf) < 0.01);
}

TEST_CASE("single-qubit partial updates target the same density") {
    const ExactSampler exact(make_product(2));
    MetropolisOptions options;
    options.proposal = MetropolisOptions::Proposal::single_qubit;
    Rng rng(9);
    const MetropolisChain chain = metropolis_sample(exact, 60050, 50, rng);
    const MetropolisChain chain_single = metropolis_sample(exact, 60050, 50, rng, options);
    // the xi marginal is symmetric about 1/2 under both proposals
    auto mean_xi = [](const MetropolisChain& c) {
        double sum = 0.0;
        long long n = 0;
        for (int r = 0; r < c.n_distinct(); ++r) {
            sum += static_cast<double>(c.occurrences[r]) * (c.angles[r].xi[0] + c.angles[r].xi[1]);
            n += 2 * c.occurrences[r];
        }
        return sum / static_cast<double>(n);
    };
    CHECK(std::abs(mean_xi(chain) - 0.5) < 0.01);
    CHECK(std::abs(mean_xi(chain_single) - 0.5) < 0.01);
}

TEST_CASE("estimate with the uniform backend is the plain mean of X_e") {
    const DenseState ghz = make_ghz(2);
    const UniformSampler uniform(2);
    Rng rng(10);
    const MetropolisChain chain = metropolis_sample(uniform, 40, 0, rng);
    Rng meas_a(11), meas_b(11);
    const PurityEstimate est =
        estimate_purity_is(uniform, chain, make_shot_source(ghz, 30), meas_a);
    double mean = 0.0;
    for (const auto& angles : chain.angles)
        mean += x_estimate(sample_bitstrings(ghz, angles, 30, meas_b));
    mean /= chain.n_distinct();
    CHECK(est.p2_hat == doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("perfect sampler in the infinite-shot mode has zero variance") {
    for (int n = 1; n <= 4; ++n) {
        const DenseState prod = make_product(n);
        const ExactSampler exact(prod);
        Rng rng(20 + n);
        const MetropolisChain chain = metropolis_sample(exact, 120, 20, rng);
        const PurityEstimate est =
            estimate_purity_is(exact, chain, make_infinite_source(prod), rng);
        CHECK(est.p2_hat == 1.0);
        CHECK(est.stderr_p2 == 0.0);
        REQUIRE(est.renyi2.has_value());
        CHECK(*est.renyi2 == 0.0);
    }
}

TEST_CASE("GHZ purity estimate lands within three standard errors") {
    const DenseState ghz = make_ghz(3);
    const ExactSampler exact(ghz);
    Rng rng(33);
    const MetropolisChain chain = metropolis_sample_distinct(exact, 50, 50, rng);
    CHECK(chain.n_distinct() == 50);
    const PurityEstimate est = estimate_purity_is(exact, chain, make_shot_source(ghz, 200), rng);
    CHECK(std::abs(est.p2_hat - 1.0) < 3.0 * est.stderr_p2);
    CHECK(est.n_u == 50);
    CHECK(est.n_m == 200);
}

TEST_CASE("negative estimates flag the entropy instead of throwing") {
    const UniformSampler uniform(1);
    MetropolisChain chain;
    chain.angles = {identity_angles(1)};
    chain.occurrences = {1};
    chain.total_retained = 1;
    MeasurementSource source;
    source.n_m = 2;
    source.x_estimator = [](const UnitaryAngles&, Rng&) { return -1.0; };
    Rng rng(31);
    const PurityEstimate est = estimate_purity_is(uniform, chain, source, rng);
    CHECK(est.p2_hat == doctest::Approx(-1.0));
    CHECK(!est.renyi2.has_value());
}

TEST_CASE("renyi entropy log conventions") {
    const DenseState mixed = make_maximally_mixed(2);
    const ExactSampler exact(mixed);
    Rng rng(32);
    const MetropolisChain chain = metropolis_sample(exact, 60, 10, rng);
    const PurityEstimate nat =
        estimate_purity_is(exact, chain, make_infinite_source(mixed), rng, false);
    const PurityEstimate log2v =
        estimate_purity_is(exact, chain, make_infinite_source(mixed), rng, true);
    REQUIRE(nat.renyi2.has_value());
    REQUIRE(log2v.renyi2.has_value());
    CHECK(*nat.renyi2 == doctest::Approx(std::log(4.0)).epsilon(1e-12));
    CHECK(*log2v.renyi2 == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("scaling the weights leaves estimates invariant") {
    const DenseState ghz = make_ghz(2);
    auto exact = std::make_shared<ExactSampler>(ghz);
    const ScaledSampler scaled(exact, 7.25);

    Rng chain_rng_a(40), chain_rng_b(40);
    const MetropolisChain chain_a = metropolis_sample(*exact, 200, 20, chain_rng_a);
    const MetropolisChain chain_b = metropolis_sample(scaled, 200, 20, chain_rng_b);
    REQUIRE(chain_a.n_distinct() == chain_b.n_distinct());

    Rng meas_a(41), meas_b(41);
    const PurityEstimate est_a =
        estimate_purity_is(*exact, chain_a, make_shot_source(ghz, 50), meas_a);
    const PurityEstimate est_b =
        estimate_purity_is(scaled, chain_b, make_shot_source(ghz, 50), meas_b);
    CHECK(est_a.p2_hat == doctest::Approx(est_b.p2_hat).epsilon(1e-12));
    CHECK(est_a.stderr_p2 == doctest::Approx(est_b.stderr_p2).epsilon(1e-10));
}

TEST_CASE("full pipeline is unbiased (uniform and exact backends)") {
    const DenseState state = partial_trace(make_ghz(3), {0, 1});  // purity 1/2
    const double p2 = purity(state);
    const UniformSampler uniform(2);
    const ExactSampler exact(state);

    for (const SamplerModel* model : {static_cast<const SamplerModel*>(&uniform),
                                      static_cast<const SamplerModel*>(&exact)}) {
        std::vector<double> estimates;
        for (int run = 0; run < 500; ++run) {
            Rng rng(derive_seed(123, "sampler-unbiased", run));
            const MetropolisChain chain = metropolis_sample(*model, 140, 40, rng);
            estimates.push_back(
                estimate_purity_is(*model, chain, make_shot_source(state, 40), rng).p2_hat);
        }
        const auto stats = test_util::mean_stderr(estimates);
        CHECK(std::abs(stats.mean - p2) < 3.0 * stats.stderr_m);
    }
}

TEST_CASE("distinct-count chains deliver the requested block count") {
    const ExactSampler exact(make_ghz(3));
    for (int target : {1, 7, 40}) {
        Rng rng(60 + target);
        const MetropolisChain chain = metropolis_sample_distinct(exact, target, 30, rng);
        CHECK(chain.n_distinct() == target);
        long long total = 0;
        for (int n : chain.occurrences) total += n;
        CHECK(total == chain.total_retained);
        CHECK(chain.total_retained >= target);
    }
}

TEST_CASE("chain json round trip") {
    const ExactSampler exact(make_ghz(2));
    Rng rng(50);
    const MetropolisChain chain = metropolis_sample(exact, 120, 20, rng);
    const nlohmann::json j = chain_to_json(chain);
    const MetropolisChain back = chain_from_json(j);
    CHECK(back.n_distinct() == chain.n_distinct());
    CHECK(back.total_retained == chain.total_retained);
    CHECK(back.acceptance_rate == chain.acceptance_rate);
    for (int r = 0; r < chain.n_distinct(); ++r) {
        CHECK(back.occurrences[r] == chain.occurrences[r]);
        CHECK(back.angles[r].xi == chain.angles[r].xi);
    }
}
