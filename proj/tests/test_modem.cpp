#include <cmath>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "fblab/channel.hpp"
#include "fblab/modem.hpp"
#include "fblab/rng.hpp"
#include "fblab/theory.hpp"

using namespace fblab;
using modem::QamSpec;

namespace {

std::vector<std::uint8_t> random_bits(int count, std::uint64_t seed,
                                      std::uint64_t stream) {
    std::vector<std::uint8_t> bits(count);
    for (int i = 0; i < count; ++i)
        bits[i] = static_cast<std::uint8_t>(rng::bit(seed, stream, i));
    return bits;
}

}  // namespace

TEST_SUITE("modem") {

TEST_CASE("constellation invariants") {
    for (int k : {1, 2, 3, 4, 5, 6, 8}) {
        const auto spec = QamSpec::make(k);
        REQUIRE(static_cast<int>(spec.points.size()) == 2 * spec.order());
        double energy = 0.0;
        std::set<std::pair<double, double>> distinct;
        for (int v = 0; v < spec.order(); ++v) {
            energy += spec.re(v) * spec.re(v) + spec.im(v) * spec.im(v);
            distinct.insert({spec.re(v), spec.im(v)});
        }
        CHECK(std::fabs(energy / spec.order() - 1.0) < 1e-12);
        CHECK(static_cast<int>(distinct.size()) == spec.order());
    }
    CHECK_THROWS_AS(QamSpec::make(0), std::domain_error);
    CHECK_THROWS_AS(QamSpec::make(9), std::domain_error);
}

TEST_CASE("qpsk corner labeling") {
    const auto spec = QamSpec::make(2);
    const auto cw = modem::qam_modulate({0, 0}, spec);
    CHECK(cw.iq[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(cw.iq[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("modulate validates divisibility") {
    const auto spec = QamSpec::make(4);
    CHECK_THROWS_AS(modem::qam_modulate({1, 0, 1}, spec), std::invalid_argument);
}

TEST_CASE("gray property: axis neighbors differ in exactly one bit") {
    for (int k : {2, 4, 6}) {
        const auto spec = QamSpec::make(k);
        const int order = spec.order();
        // collect distinct axis levels
        std::set<double> res, ims;
        for (int v = 0; v < order; ++v) {
            res.insert(spec.re(v));
            ims.insert(spec.im(v));
        }
        auto popcount = [](int x) {
            int c = 0;
            while (x) {
                c += x & 1;
                x >>= 1;
            }
            return c;
        };
        std::vector<double> re_levels(res.begin(), res.end());
        std::vector<double> im_levels(ims.begin(), ims.end());
        auto label_at = [&](double re, double im) {
            for (int v = 0; v < order; ++v)
                if (spec.re(v) == re && spec.im(v) == im) return v;
            return -1;
        };
        for (std::size_t a = 0; a + 1 < re_levels.size(); ++a)
            for (double im : im_levels) {
                const int l1 = label_at(re_levels[a], im);
                const int l2 = label_at(re_levels[a + 1], im);
                CHECK(popcount(l1 ^ l2) == 1);
            }
        for (std::size_t a = 0; a + 1 < im_levels.size(); ++a)
            for (double re : re_levels) {
                const int l1 = label_at(re, im_levels[a]);
                const int l2 = label_at(re, im_levels[a + 1]);
                CHECK(popcount(l1 ^ l2) == 1);
            }
    }
}

TEST_CASE("noiseless roundtrip for all supported orders") {
    for (int k : {1, 2, 3, 4, 5, 6, 8}) {
        const auto spec = QamSpec::make(k);
        for (int f = 0; f < (k <= 4 ? 200 : 50); ++f) {
            const auto bits = random_bits(64 * k, 17, 1000 + f);
            const auto cw = modem::qam_modulate(bits, spec);
            const auto back = modem::qam_demodulate_hard(cw.iq, spec);
            CHECK(back == bits);
        }
    }
}

TEST_CASE("midway tie goes to the smaller label") {
    const auto spec = QamSpec::make(2);
    // midpoint between labels 0 (+d,+d) and 2 (-d,+d) lies on the Q axis
    const double d = 1.0 / std::sqrt(2.0);
    const auto bits = modem::qam_demodulate_hard({0.0, d}, spec);
    CHECK(bits == std::vector<std::uint8_t>{0, 0});
    // midpoint of the whole constellation
    const auto bits2 = modem::qam_demodulate_hard({0.0, 0.0}, spec);
    CHECK(bits2 == std::vector<std::uint8_t>{0, 0});
}

TEST_CASE("qpsk bit error rate matches Q(sqrt(gamma))") {
    const auto spec = QamSpec::make(2);
    const double gamma = 10.0;
    const double n0 = 1.0 / gamma;
    const int frame_symbols = 500;
    const int frames = 4'000;  // 4e6 bits
    long errors = 0;
    long total = 0;
    for (int f = 0; f < frames; ++f) {
        const auto bits = random_bits(2 * frame_symbols, 23, 2 * f);
        const auto x = channel::normalize_power(modem::qam_modulate(bits, spec));
        const auto y = channel::transmit(
            x, {n0, 23, rng::stream_id(rng::StreamKind::noise, f)});
        const auto hard = modem::qam_demodulate_hard(y, spec);
        for (std::size_t i = 0; i < bits.size(); ++i) errors += hard[i] != bits[i];
        total += static_cast<long>(bits.size());
    }
    const double ber = static_cast<double>(errors) / total;
    const double ref = theory::q_func(std::sqrt(gamma));
    CHECK(std::fabs(ber - ref) / ref < 0.05);
}

}  // TEST_SUITE
