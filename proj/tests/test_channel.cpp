#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "fblab/channel.hpp"
#include "fblab/rng.hpp"

using namespace fblab;
using channel::Codeword;
using channel::NoiseSpec;

TEST_SUITE("channel") {

TEST_CASE("normalize_power basics") {
    SUBCASE("unit-norm scaling of a single symbol") {
        Codeword raw(1, {3.0, 4.0});
        const auto out = channel::normalize_power(raw);
        CHECK(out.iq[0] == doctest::Approx(0.6).epsilon(1e-15));
        CHECK(out.iq[1] == doctest::Approx(0.8).epsilon(1e-15));
    }
    SUBCASE("idempotent on unit-average-power input") {
        Codeword raw(2, {1.0, 0.0, 0.0, -1.0});
        REQUIRE(raw.power() == doctest::Approx(1.0));
        const auto out = channel::normalize_power(raw);
        for (std::size_t i = 0; i < raw.iq.size(); ++i)
            CHECK(std::fabs(out.iq[i] - raw.iq[i]) < 1e-12);
    }
    SUBCASE("random 128x2 lands on unit power") {
        std::vector<double> iq(256);
        for (int i = 0; i < 256; ++i) iq[i] = rng::gaussian(9, 1, i) * 3.7 + 0.2;
        const auto out = channel::normalize_power(Codeword(128, std::move(iq)));
        CHECK(std::fabs(out.power() - 1.0) < 1e-9);
    }
    SUBCASE("all-zero input is rejected") {
        Codeword raw(4, std::vector<double>(8, 0.0));
        CHECK_THROWS_AS(channel::normalize_power(raw), std::domain_error);
    }
}

TEST_CASE("transmit preconditions and vanishing noise") {
    Codeword x(2, {1.0, 0.0, -1.0, 0.0});
    CHECK_THROWS_AS(channel::transmit(x, {0.0, 1, 0}), std::domain_error);
    CHECK_THROWS_AS(channel::transmit(x, {-1.0, 1, 0}), std::domain_error);
    const auto y = channel::transmit(x, {1e-12, 1, 0});
    for (int i = 0; i < 4; ++i) CHECK(std::fabs(y[i] - x.iq[i]) < 1e-5);
}

TEST_CASE("noise is reproducible and streams are distinct") {
    Codeword x(64, std::vector<double>(128, 0.25));
    const NoiseSpec spec{0.5, 1234, 7};
    const auto y1 = channel::transmit(x, spec);
    const auto y2 = channel::transmit(x, spec);
    CHECK(y1 == y2);  // bit-exact

    const auto y3 = channel::transmit(x, {0.5, 1234, 8});
    bool any_diff = false;
    for (std::size_t i = 0; i < y1.size(); ++i) any_diff |= y1[i] != y3[i];
    CHECK(any_diff);
}

TEST_CASE("distinct stream ids differ over the first 1e4 samples") {
    int diff = 0;
    for (int i = 0; i < 10'000; ++i)
        diff += rng::gaussian(5, 100, i) != rng::gaussian(5, 101, i);
    CHECK(diff > 9'000);
}

TEST_CASE("noise statistics over 1e6 draws") {
    const int n = 1'000'000;
    // per-component variance n0/2 with n0 = 2 -> variance 1
    const double sigma = std::sqrt(2.0 / 2.0);
    double sum_re = 0.0, sum_im = 0.0, ss_re = 0.0, ss_im = 0.0, cross = 0.0;
    for (int i = 0; i < n; ++i) {
        const double re = sigma * rng::gaussian(77, 3, 2 * i);
        const double im = sigma * rng::gaussian(77, 3, 2 * i + 1);
        sum_re += re;
        sum_im += im;
        ss_re += re * re;
        ss_im += im * im;
        cross += re * im;
    }
    const double mean_re = sum_re / n;
    const double mean_im = sum_im / n;
    const double var_re = ss_re / n - mean_re * mean_re;
    const double var_im = ss_im / n - mean_im * mean_im;
    // empirical mean within 4 sigma of zero
    CHECK(std::fabs(mean_re) < 4.0 * sigma / std::sqrt(double(n)));
    CHECK(std::fabs(mean_im) < 4.0 * sigma / std::sqrt(double(n)));
    // per-component variance within 1%
    CHECK(std::fabs(var_re - 1.0) < 0.01);
    CHECK(std::fabs(var_im - 1.0) < 0.01);
    // real/imaginary correlation below 0.01
    const double corr = (cross / n - mean_re * mean_im) / std::sqrt(var_re * var_im);
    CHECK(std::fabs(corr) < 0.01);
}

TEST_CASE("empirical variance of transmit noise at n0 = 2") {
    const int frames = 4'000;
    const int n = 128;  // 512k complex components total
    Codeword x(n, std::vector<double>(2 * n, 0.0));
    // all-zero codeword is invalid for normalize but fine for transmit noise stats
    double ss = 0.0;
    long count = 0;
    for (int f = 0; f < frames; ++f) {
        const auto y = channel::transmit(x, {2.0, 42, static_cast<std::uint64_t>(f)});
        for (double v : y) {
            ss += v * v;
            ++count;
        }
    }
    CHECK(std::fabs(ss / count - 1.0) < 0.01);
}

}  // TEST_SUITE
