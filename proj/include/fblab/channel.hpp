// Complex AWGN channel with seeded, counter-based noise, and the per-frame
// average-power normalization shared by the learned and conventional
// transmitters.  Complex vectors are stored as n x 2 reals (re, im).

#pragma once

#include <cstdint>
#include <vector>

namespace fblab::channel {

// n complex symbols as an n x 2 real matrix, row-major layout
// [re0, im0, re1, im1, ...].
struct Codeword {
    int n = 0;
    std::vector<double> iq;

    Codeword() = default;
    Codeword(int n_symbols, std::vector<double> data);

    double power() const;  // (1/n) sum |x_i|^2
};

// Total complex noise variance per symbol plus the stream coordinates that
// make the noise reproducible: identical (seed, stream_id) give bit-exact
// identical noise.
struct NoiseSpec {
    double n0;
    std::uint64_t seed;
    std::uint64_t stream_id;
};

// Scales to unit average power: out = raw / sqrt((1/n) sum |raw_i|^2).
// Throws std::domain_error on an all-zero input.
Codeword normalize_power(const Codeword& raw);

// y = x + w with w ~ CN(0, n0) i.i.d. per symbol (variance n0/2 per real
// component).  With P = 1 the SNR is gamma = 1/n0.  Throws if n0 <= 0.
std::vector<double> transmit(const Codeword& x, const NoiseSpec& noise);

}  // namespace fblab::channel
