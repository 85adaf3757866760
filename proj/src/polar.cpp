#include "fblab/polar.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fblab::polar {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

// log Z after applying the recursion along the bit path of channel index i,
// most significant bit first: 0 -> Z- (degraded), 1 -> Z+ (upgraded).
double log_z_for_channel(int n_code, int index, double log_z0) {
    int levels = 0;
    while ((1 << levels) < n_code) ++levels;
    double lz = log_z0;
    for (int b = levels - 1; b >= 0; --b) {
        if ((index >> b) & 1) {
            lz = 2.0 * lz;                            // Z+ = Z^2
        } else {
            lz = lz + std::log(2.0 - std::exp(lz));   // Z- = 2Z - Z^2
        }
    }
    return lz;
}

std::vector<double> log_z_all(int n_code, double p) {
    if (!is_power_of_two(n_code))
        throw std::domain_error("polar: N_c must be a power of two");
    if (!(p > 0.0 && p < 0.5))
        throw std::domain_error("polar: BSC crossover must lie in (0, 0.5)");
    const double log_z0 = std::log(2.0) + 0.5 * std::log(p) + 0.5 * std::log1p(-p);
    std::vector<double> lz(n_code);
    for (int i = 0; i < n_code; ++i) lz[i] = log_z_for_channel(n_code, i, log_z0);
    return lz;
}

}  // namespace

std::vector<double> bhattacharyya_z(int n_code, double p) {
    const auto lz = log_z_all(n_code, p);
    std::vector<double> z(lz.size());
    for (std::size_t i = 0; i < lz.size(); ++i) z[i] = std::exp(lz[i]);
    return z;
}

std::vector<int> reliability_order(int n_code, double p) {
    const auto lz = log_z_all(n_code, p);
    std::vector<int> order(n_code);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return lz[a] < lz[b]; });
    return order;
}

PolarCode PolarCode::construct_bsc(int n_code, int k_info, double p) {
    if (k_info < 0 || k_info > n_code)
        throw std::domain_error("polar: K_c must lie in [0, N_c]");
    const auto order = reliability_order(n_code, p);
    PolarCode code;
    code.n_code = n_code;
    code.k_info = k_info;
    code.info_set.assign(order.begin(), order.begin() + k_info);
    std::sort(code.info_set.begin(), code.info_set.end());
    code.is_info.assign(n_code, 0);
    for (int i : code.info_set) code.is_info[i] = 1;
    return code;
}

std::vector<std::uint8_t> polar_encode(const std::vector<std::uint8_t>& msg,
                                       const PolarCode& code) {
    if (msg.size() != static_cast<std::size_t>(code.k_info))
        throw std::invalid_argument("polar_encode: message length != K_c");
    std::vector<std::uint8_t> x(code.n_code, 0);
    for (int i = 0; i < code.k_info; ++i) x[code.info_set[i]] = msg[i] & 1;
    for (int len = 1; len < code.n_code; len <<= 1)
        for (int i = 0; i < code.n_code; i += 2 * len)
            for (int j = 0; j < len; ++j)
                x[i + j] ^= x[i + j + len];
    return x;
}

double bsc_llr_magnitude(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("bsc_llr_magnitude: p must lie in (0, 1)");
    return std::min(std::log((1.0 - p) / p), 30.0);
}

namespace {

// Full SC recursion: decodes u over llr (length len), returns partial
// codeword (length len) for the caller's g step.
std::vector<std::uint8_t> sc_run(const std::vector<double>& llr,
                                 const std::uint8_t* is_info,
                                 std::uint8_t* u) {
    const int len = static_cast<int>(llr.size());
    if (len == 1) {
        const std::uint8_t bit =
            is_info[0] ? static_cast<std::uint8_t>(llr[0] < 0.0) : std::uint8_t{0};
        u[0] = bit;
        return {bit};
    }
    const int half = len / 2;
    std::vector<double> l1(half);
    for (int j = 0; j < half; ++j) {
        const double a = llr[j];
        const double b = llr[half + j];
        const double s = (a < 0.0) == (b < 0.0) ? 1.0 : -1.0;
        l1[j] = s * std::min(std::fabs(a), std::fabs(b));
    }
    const auto x_left = sc_run(l1, is_info, u);
    std::vector<double> l2(half);
    for (int j = 0; j < half; ++j)
        l2[j] = llr[half + j] + (1.0 - 2.0 * x_left[j]) * llr[j];
    const auto x_right = sc_run(l2, is_info + half, u + half);
    std::vector<std::uint8_t> x(len);
    for (int j = 0; j < half; ++j) {
        x[j] = x_left[j] ^ x_right[j];
        x[half + j] = x_right[j];
    }
    return x;
}

}  // namespace

std::vector<std::uint8_t> sc_decode(const std::vector<double>& llr,
                                    const PolarCode& code) {
    if (llr.size() != static_cast<std::size_t>(code.n_code))
        throw std::invalid_argument("sc_decode: LLR length != N_c");
    std::vector<std::uint8_t> u(code.n_code, 0);
    sc_run(llr, code.is_info.data(), u.data());
    std::vector<std::uint8_t> msg(code.k_info);
    for (int i = 0; i < code.k_info; ++i) msg[i] = u[code.info_set[i]];
    return msg;
}

}  // namespace fblab::polar
