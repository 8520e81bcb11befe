#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rmkit/unitary.hpp"
#include "test_util.hpp"

using namespace rmkit;

TEST_CASE("haar angles stay in range and repeat for a fixed seed") {
    Rng rng_a(42), rng_b(42);
    const UnitaryAngles a = sample_haar_angles(5, rng_a);
    const UnitaryAngles b = sample_haar_angles(5, rng_b);
    REQUIRE(a.n_qubits() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(a.xi[i] >= 0.0);
        CHECK(a.xi[i] <= 1.0);
        CHECK(a.phi[i] >= 0.0);
        CHECK(a.phi[i] < 2.0 * std::numbers::pi);
        CHECK(a.xi[i] == b.xi[i]);
        CHECK(a.phi[i] == b.phi[i]);
    }
    CHECK_THROWS_AS(sample_haar_angles(0, rng_a), std::invalid_argument);
}

TEST_CASE("haar moments of xi") {
    Rng rng(7);
    const int n = 100000;
    double sum_xi = 0.0, sum_z2 = 0.0, sum_z4 = 0.0;
    for (int k = 0; k < n; ++k) {
        const double xi = sample_haar_angles(1, rng).xi[0];
        const double z = 1.0 - 2.0 * xi;
        sum_xi += xi;
        sum_z2 += z * z;
        sum_z4 += z * z * z * z;
    }
    CHECK(std::abs(sum_xi / n - 0.5) < 0.005);
    // E[z^2] = 1/3, E[z^4] = 1/5; allow 3 standard errors
    const double se_z2 = std::sqrt((1.0 / 5.0 - 1.0 / 9.0) / n);
    const double se_z4 = std::sqrt((1.0 / 9.0 - 1.0 / 25.0) / n);
    CHECK(std::abs(sum_z2 / n - 1.0 / 3.0) < std::max(0.005, 3.0 * se_z2));
    CHECK(std::abs(sum_z4 / n - 1.0 / 5.0) < 3.0 * se_z4);
}

TEST_CASE("closed-form matrices at the corners") {
    const SingleQubitUnitary id = build_unitary(0.0, 0.0);
    CHECK(std::abs(id.m[0] - complex(1, 0)) < 1e-15);
    CHECK(std::abs(id.m[1]) < 1e-15);
    CHECK(std::abs(id.m[2]) < 1e-15);
    CHECK(std::abs(id.m[3] - complex(1, 0)) < 1e-15);

    // xi = 1 -> R_y(pi) = [[0,-1],[1,0]]
    const SingleQubitUnitary flip = build_unitary(1.0, 0.0);
    CHECK(std::abs(flip.m[0]) < 1e-15);
    CHECK(std::abs(flip.m[1] + 1.0) < 1e-15);
    CHECK(std::abs(flip.m[2] - 1.0) < 1e-15);
    CHECK(std::abs(flip.m[3]) < 1e-15);
}

TEST_CASE("unitarity and the Z(u) = 1 - 2 xi identity") {
    Rng rng(3);
    for (int k = 0; k < 200; ++k) {
        const UnitaryAngles angles = sample_haar_angles(1, rng);
        const SingleQubitUnitary u = build_unitary(angles.xi[0], angles.phi[0]);
        CHECK(unitarity_defect(u) < 1e-12);
        // <0| u^dag sigma_z u |0> = |u00|^2 - |u10|^2
        const double z = std::norm(u.m[0]) - std::norm(u.m[2]);
        CHECK(std::abs(z - (1.0 - 2.0 * angles.xi[0])) < 1e-12);
    }
}

TEST_CASE("angle json round trip is the flat 2N array") {
    Rng rng(11);
    const UnitaryAngles angles = sample_haar_angles(3, rng);
    const nlohmann::json j = angles_to_json(angles);
    REQUIRE(j.is_array());
    REQUIRE(j.size() == 6);
    CHECK(j[0].get<double>() == angles.xi[0]);
    CHECK(j[1].get<double>() == angles.phi[0]);
    const UnitaryAngles back = angles_from_json(j);
    for (int i = 0; i < 3; ++i) {
        CHECK(back.xi[i] == angles.xi[i]);
        CHECK(back.phi[i] == angles.phi[i]);
    }
    CHECK_THROWS_AS(angles_from_json(nlohmann::json::array({0.1, 0.2, 0.3})),
                    std::invalid_argument);
}

TEST_CASE("angle validation") {
    CHECK_THROWS_AS(UnitaryAngles({0.5, 1.2}, {0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(UnitaryAngles({0.5}, {0.0, 0.0}), std::invalid_argument);
    // phi wraps into [0, 2 pi)
    const UnitaryAngles wrapped({0.5}, {2.5 * std::numbers::pi});
    CHECK(wrapped.phi[0] == doctest::Approx(0.5 * std::numbers::pi));
    const UnitaryAngles negative({0.5}, {-0.5});
    CHECK(negative.phi[0] == doctest::Approx(2.0 * std::numbers::pi - 0.5));
}

TEST_CASE("unit-vector normalization divides phi by 2 pi") {
    const UnitaryAngles angles({0.25, 0.75}, {std::numbers::pi, 3.0});
    const std::vector<double> v = angles_to_unit_vector(angles);
    REQUIRE(v.size() == 4);
    CHECK(v[0] == 0.25);
    CHECK(v[1] == doctest::Approx(0.5));
    CHECK(v[2] == 0.75);
    CHECK(v[3] == doctest::Approx(3.0 / (2.0 * std::numbers::pi)));
}
