#include "fblab/modem.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fblab::modem {

namespace {

// Inverse of g = x ^ (x >> 1).
int gray_decode(int g) {
    int x = g;
    x ^= x >> 1;
    x ^= x >> 2;
    x ^= x >> 4;
    return x;
}

// Amplitude of Gray level l on an axis with 2^bits levels; level 0 is the
// most positive.  A 0-bit axis collapses to amplitude 0.
double level_amplitude(int level, int bits) {
    const int m = 1 << bits;
    return static_cast<double>(m - 1 - 2 * level);
}

}  // namespace

QamSpec QamSpec::make(int k_mod) {
    if (k_mod < 1 || k_mod > 8)
        throw std::domain_error("QamSpec: k_mod must be in 1..8");
    const int i_bits = (k_mod + 1) / 2;
    const int q_bits = k_mod / 2;
    const int order = 1 << k_mod;

    QamSpec spec;
    spec.k_mod = k_mod;
    spec.points.resize(2 * order);
    double energy = 0.0;
    for (int label = 0; label < order; ++label) {
        const int i_gray = label >> q_bits;
        const int q_gray = label & ((1 << q_bits) - 1);
        const double re = level_amplitude(gray_decode(i_gray), i_bits);
        const double im = level_amplitude(gray_decode(q_gray), q_bits);
        spec.points[2 * label] = re;
        spec.points[2 * label + 1] = im;
        energy += re * re + im * im;
    }
    const double scale = 1.0 / std::sqrt(energy / order);
    for (double& v : spec.points) v *= scale;
    return spec;
}

channel::Codeword qam_modulate(const std::vector<std::uint8_t>& bits,
                               const QamSpec& spec) {
    const int k = spec.k_mod;
    if (bits.size() % k != 0)
        throw std::invalid_argument("qam_modulate: bit count not divisible by k_mod");
    const int n = static_cast<int>(bits.size()) / k;
    std::vector<double> iq(2 * n);
    for (int s = 0; s < n; ++s) {
        int label = 0;
        for (int j = 0; j < k; ++j)
            label = (label << 1) | (bits[s * k + j] & 1);
        iq[2 * s] = spec.re(label);
        iq[2 * s + 1] = spec.im(label);
    }
    return channel::Codeword(n, std::move(iq));
}

std::vector<std::uint8_t> qam_demodulate_hard(const std::vector<double>& iq,
                                              const QamSpec& spec) {
    if (iq.size() % 2 != 0)
        throw std::invalid_argument("qam_demodulate_hard: iq must hold (re, im) pairs");
    const int n = static_cast<int>(iq.size()) / 2;
    const int k = spec.k_mod;
    const int order = spec.order();
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(n) * k);
    for (int s = 0; s < n; ++s) {
        const double re = iq[2 * s];
        const double im = iq[2 * s + 1];
        int best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (int label = 0; label < order; ++label) {
            const double dr = re - spec.re(label);
            const double di = im - spec.im(label);
            const double d2 = dr * dr + di * di;
            if (d2 < best_d2) {
                best_d2 = d2;
                best = label;
            }
        }
        for (int j = 0; j < k; ++j)
            bits[s * k + j] = static_cast<std::uint8_t>((best >> (k - 1 - j)) & 1);
    }
    return bits;
}

}  // namespace fblab::modem
