// Polar codes for the hard-detection baseline: Bhattacharyya construction
// on the induced BSC, the Arikan transform in natural (bit-reversal-free)
// order with the row-vector convention x = u F^{tensor m}, and
// successive-cancellation decoding with the min-sum check update.

#pragma once

#include <cstdint>
#include <vector>

namespace fblab::polar {

struct PolarCode {
    int n_code = 0;                    // N_c, power of two
    int k_info = 0;                    // K_c
    std::vector<int> info_set;         // sorted indices of information bits
    std::vector<std::uint8_t> is_info; // mask over [0, N_c)

    // Bhattacharyya construction for a BSC with crossover p: the K_c most
    // reliable synthetic channels become the information set (ties broken
    // toward the lower index).
    static PolarCode construct_bsc(int n_code, int k_info, double p);
};

// Final Bhattacharyya parameters of the N synthetic channels for base
// Z0 = 2 sqrt(p (1-p)), recursion Z- = 2Z - Z^2, Z+ = Z^2.  Computed in the
// log domain; the returned values are exp(log Z) and may underflow to zero
// for very reliable channels.
std::vector<double> bhattacharyya_z(int n_code, double p);

// Channel indices sorted from most to least reliable (ascending Z).
std::vector<int> reliability_order(int n_code, double p);

// x = u F^{tensor m} over GF(2), natural order; msg fills info_set, frozen
// positions are zero.
std::vector<std::uint8_t> polar_encode(const std::vector<std::uint8_t>& msg,
                                       const PolarCode& code);

// Successive cancellation with f(a,b) = sign(a) sign(b) min(|a|, |b|) and
// g(a,b,u) = b + (1-2u) a.  LLR > 0 means bit 0; an exact LLR tie decides 0.
// Returns the K_c message bits.
std::vector<std::uint8_t> sc_decode(const std::vector<double>& llr,
                                    const PolarCode& code);

// LLR magnitude for hard bits received through a BSC with crossover p,
// clipped at 30.
double bsc_llr_magnitude(double p);

}  // namespace fblab::polar
