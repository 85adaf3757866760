// Finite-blocklength AWGN theory: capacity, channel dispersion, Gaussian
// tail functions, and the normal-approximation maximum achievable rate.
// All rates are in bits per complex-valued transmission.

#pragma once

#include <cstdint>

namespace fblab::theory {

// Linear SNR paired with its dB representation.  gamma = P / N0.
struct SnrPoint {
    double gamma;
    double snr_db;

    static SnrPoint from_db(double snr_db);
    static SnrPoint from_linear(double gamma);
};

// Blocklength / target frame-error-probability pair.  The normal
// approximation is stated for 0 < epsilon < 0.5.
struct FblParams {
    std::int64_t n;
    double epsilon;

    void validate() const;
};

// C = log2(1 + gamma).  Requires gamma > 0.
double capacity(double gamma);

// V = gamma (gamma + 2) / (gamma + 1)^2 * (log2 e)^2.  Requires gamma >= 0.
// Strictly increasing on (0, inf), bounded above by (log2 e)^2.
double dispersion(double gamma);

// Complementary error function, series/continued-fraction implementation.
double erfc(double x);

// Upper tail of the standard normal, Q(x) = 0.5 erfc(x / sqrt(2)).
double q_func(double x);

// Inverse of Q on (0, 1): rational initial guess refined by two Newton
// steps on erfc.  Q(q_inv(p)) = p to within 1e-10.
double q_inv(double p);

// R = C - sqrt(V/n) Q^{-1}(eps) + log2(n)/(2n).  The log term is the upper
// bound for the O(log n) bracket; pass include_log_term = false to drop it
// for sensitivity studies.  May be negative at very low SNR.
double max_rate_fbl(const FblParams& params, double gamma,
                    bool include_log_term = true);

}  // namespace fblab::theory
