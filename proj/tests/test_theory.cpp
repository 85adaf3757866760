#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "fblab/rng.hpp"
#include "fblab/theory.hpp"
#include "oracles.hpp"

using namespace fblab::theory;

TEST_SUITE("theory") {

TEST_CASE("snr conversion roundtrip") {
    for (double db : {-10.0, 0.0, 3.0, 10.0, 17.5, 20.0}) {
        const auto p = SnrPoint::from_db(db);
        CHECK(p.gamma > 0.0);
        const auto q = SnrPoint::from_linear(p.gamma);
        CHECK(std::fabs(q.snr_db - db) < 1e-12);
    }
    CHECK_THROWS_AS(SnrPoint::from_linear(0.0), std::domain_error);
    CHECK_THROWS_AS(SnrPoint::from_linear(-1.0), std::domain_error);
}

TEST_CASE("capacity spot values") {
    CHECK(capacity(1.0) == 1.0);
    CHECK(capacity(3.0) == 2.0);
    CHECK(capacity(10.0) == doctest::Approx(3.4594316186372973).epsilon(1e-12));
    CHECK_THROWS_AS(capacity(0.0), std::domain_error);
    CHECK_THROWS_AS(capacity(-2.0), std::domain_error);
}

TEST_CASE("dispersion spot values and limits") {
    const double log2e2 = std::pow(std::log2(std::exp(1.0)), 2);
    CHECK(dispersion(0.0) == 0.0);
    CHECK(dispersion(1.0) == doctest::Approx(1.5610267357542058).epsilon(1e-12));
    CHECK(std::fabs(dispersion(1e12) - log2e2) < 1e-6);
    CHECK_THROWS_AS(dispersion(-0.1), std::domain_error);
}

TEST_CASE("dispersion is increasing and bounded") {
    const double bound = std::pow(std::log2(std::exp(1.0)), 2);
    double prev = 0.0;
    for (int i = 1; i <= 200; ++i) {
        const double gamma = std::pow(10.0, -3.0 + 6.0 * i / 200.0);
        const double v = dispersion(gamma);
        CHECK(v > prev);
        CHECK(v < bound);
        prev = v;
    }
}

TEST_CASE("q_inv spot values") {
    CHECK(q_inv(0.5) == 0.0);
    CHECK(q_inv(0.01) == doctest::Approx(2.3263478740408411).epsilon(1e-10));
    CHECK(std::fabs(q_inv(q_func(1.5)) - 1.5) < 1e-9);
    CHECK_THROWS_AS(q_inv(0.0), std::domain_error);
    CHECK_THROWS_AS(q_inv(1.0), std::domain_error);
    CHECK_THROWS_AS(q_inv(-0.3), std::domain_error);
}

TEST_CASE("q_inv matches the bisection oracle on 1000 log-spaced points") {
    for (int i = 0; i < 1000; ++i) {
        const double p =
            std::pow(10.0, -6.0 + (std::log10(0.5) + 6.0) * (i + 0.5) / 1000.0);
        const double mine = q_inv(p);
        const double ref = static_cast<double>(oracle::q_inv_bisect(p));
        CHECK(std::fabs(mine - ref) <= 1e-9 * std::max(1.0, std::fabs(ref)));
    }
}

TEST_CASE("q roundtrip contract") {
    for (double p : {1e-6, 1e-4, 1e-2, 0.1, 0.3, 0.499, 0.7, 0.999}) {
        CHECK(std::fabs(q_func(q_inv(p)) - p) <= 1e-10 * std::max(1.0, p));
    }
}

TEST_CASE("erfc agrees with quadrature spot checks") {
    for (double x : {0.1, 0.5, 1.0, 2.0, 2.4, 2.6, 3.5, 5.0}) {
        const double ref = static_cast<double>(2.0L * oracle::q_quadrature(
                               static_cast<long double>(x) * 1.4142135623730951L));
        CHECK(fblab::theory::erfc(x) == doctest::Approx(ref).epsilon(1e-11));
    }
}

TEST_CASE("max_rate_fbl examples") {
    SUBCASE("n to infinity approaches capacity") {
        FblParams p{1'000'000'000'000LL, 1e-2};
        CHECK(std::fabs(max_rate_fbl(p, 5.0) - capacity(5.0)) < 1e-4);
    }
    SUBCASE("epsilon = 0.5 leaves only the log term") {
        // Q^{-1}(0.5) vanishes but 0.5 is outside the validity range
        FblParams p{128, 0.49999999};
        const double r = max_rate_fbl(p, 5.0);
        CHECK(r == doctest::Approx(capacity(5.0) + std::log2(128.0) / 256.0)
                       .epsilon(1e-7));
    }
    SUBCASE("desk value at n=128, eps=1e-2, 10 dB") {
        FblParams p{128, 1e-2};
        const double gamma = SnrPoint::from_db(10.0).gamma;
        CHECK(max_rate_fbl(p, gamma) ==
              doctest::Approx(3.1913538338038697).epsilon(1e-9));
        CHECK(std::fabs(max_rate_fbl(p, gamma) - 3.191) < 1e-3);
        // drop the log term
        CHECK(max_rate_fbl(p, gamma, false) ==
              doctest::Approx(3.1913538338038697 - 7.0 / 256.0).epsilon(1e-9));
    }
    SUBCASE("parameter validation") {
        CHECK_THROWS_AS(max_rate_fbl({0, 1e-2}, 1.0), std::domain_error);
        CHECK_THROWS_AS(max_rate_fbl({128, 0.6}, 1.0), std::domain_error);
        CHECK_THROWS_AS(max_rate_fbl({128, 1e-2}, 0.0), std::domain_error);
    }
}

TEST_CASE("max_rate_fbl monotone in SNR and below capacity plus log term") {
    FblParams p{128, 1e-2};
    double prev = -1e9;
    for (int db = 0; db <= 20; ++db) {
        const double gamma = SnrPoint::from_db(db).gamma;
        const double r = max_rate_fbl(p, gamma);
        CHECK(r > prev);
        CHECK(r < capacity(gamma) + std::log2(128.0) / 256.0);
        prev = r;
    }
}

TEST_CASE("library functions match long double oracles on random triples") {
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
        const double u1 = fblab::rng::uniform(42, 1, i);
        const double u2 = fblab::rng::uniform(42, 2, i);
        const double u3 = fblab::rng::uniform(42, 3, i);
        const long long n = 32 + static_cast<long long>(u1 * 4096);
        const double eps = 1e-5 + u2 * (0.49 - 1e-5);
        const double gamma = std::pow(10.0, -1.0 + 2.5 * u3);

        const double c_ref = static_cast<double>(oracle::capacity_ld(gamma));
        const double v_ref = static_cast<double>(oracle::dispersion_ld(gamma));
        const double r_ref = static_cast<double>(oracle::max_rate_ld(n, eps, gamma));
        CHECK(std::fabs(capacity(gamma) - c_ref) <= 1e-9 * std::max(1.0, c_ref));
        CHECK(std::fabs(dispersion(gamma) - v_ref) <= 1e-9 * std::max(1.0, v_ref));
        const double r = max_rate_fbl({n, eps}, gamma);
        CHECK(std::fabs(r - r_ref) <= 1e-9 * std::max(1.0, std::fabs(r_ref)));
        ++checked;
    }
    CHECK(checked == 1000);
}

}  // TEST_SUITE
