// Gray-mapped square/rectangular M-QAM with hard nearest-point detection.
//
// Labeling convention: the k_mod bits of a symbol are split MSB-first, the
// top ceil(k/2) bits selecting the in-phase level and the rest the
// quadrature level; each axis is Gray coded independently and level 0 sits
// at the most positive amplitude.  Odd k_mod gives a rectangular grid.

#pragma once

#include <cstdint>
#include <vector>

#include "fblab/channel.hpp"

namespace fblab::modem {

struct QamSpec {
    int k_mod = 0;                 // bits per symbol, 1..8
    std::vector<double> points;    // 2^k_mod (re, im) pairs, unit average energy

    static QamSpec make(int k_mod);

    int order() const { return 1 << k_mod; }
    double re(int label) const { return points[2 * label]; }
    double im(int label) const { return points[2 * label + 1]; }
};

// Maps bits (consecutive k_mod-bit groups, MSB first) onto symbols.
// Requires bits.size() divisible by k_mod.
channel::Codeword qam_modulate(const std::vector<std::uint8_t>& bits,
                               const QamSpec& spec);

// Nearest constellation point per symbol (Euclidean), ties broken toward
// the smaller label index.  iq holds n (re, im) pairs.
std::vector<std::uint8_t> qam_demodulate_hard(const std::vector<double>& iq,
                                              const QamSpec& spec);

}  // namespace fblab::modem
