#include "fblab/theory.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace fblab::theory {

namespace {

constexpr double kLog2E = std::numbers::log2e;
constexpr double kSqrtPi = 1.7724538509055160273;
constexpr double kSqrt2 = std::numbers::sqrt2;

// erf on [0, 2.5] via the all-positive-term series
//   erf(x) = 2x e^{-x^2}/sqrt(pi) * sum_n (2x^2)^n / (2n+1)!!
double erf_series(double x) {
    const double tx = 2.0 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int n = 1; n < 200; ++n) {
        term *= tx / (2 * n + 1);
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return 2.0 * x * std::exp(-x * x) / kSqrtPi * sum;
}

// erfc for x > 2.5 via the Laplace continued fraction
//   erfc(x) = e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
// evaluated with the modified Lentz scheme.
double erfc_cf(double x) {
    const double tiny = 1e-300;
    double f = x;
    double c = f;
    double d = 0.0;
    for (int n = 1; n < 300; ++n) {
        const double a = 0.5 * n;
        d = x + a * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = x + a / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::fabs(delta - 1.0) < 1e-17) break;
    }
    return std::exp(-x * x) / (kSqrtPi * f);
}

// Lower quantile of the standard normal (Acklam's rational approximation,
// |relative error| < 1.15e-9), used as the seed for Newton refinement.
double norm_ppf_approx(double p) {
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

SnrPoint SnrPoint::from_db(double snr_db) {
    return {std::pow(10.0, snr_db / 10.0), snr_db};
}

SnrPoint SnrPoint::from_linear(double gamma) {
    if (!(gamma > 0.0))
        throw std::domain_error("SnrPoint: gamma must be positive");
    return {gamma, 10.0 * std::log10(gamma)};
}

void FblParams::validate() const {
    if (n < 1)
        throw std::domain_error("FblParams: blocklength n must be >= 1");
    if (!(epsilon > 0.0 && epsilon < 0.5))
        throw std::domain_error("FblParams: epsilon must lie in (0, 0.5)");
}

double capacity(double gamma) {
    if (!(gamma > 0.0))
        throw std::domain_error("capacity: gamma must be positive");
    return std::log2(1.0 + gamma);
}

double dispersion(double gamma) {
    if (!(gamma >= 0.0))
        throw std::domain_error("dispersion: gamma must be non-negative");
    const double g1 = gamma + 1.0;
    return gamma * (gamma + 2.0) / (g1 * g1) * kLog2E * kLog2E;
}

double erfc(double x) {
    if (std::isnan(x)) return x;
    if (x < 0.0) return 2.0 - erfc(-x);
    if (x <= 2.5) return 1.0 - erf_series(x);
    if (x > 27.0) return 0.0;  // below double underflow for e^{-x^2}
    return erfc_cf(x);
}

double q_func(double x) { return 0.5 * erfc(x / kSqrt2); }

double q_inv(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("q_inv: p must lie in (0, 1)");
    // Q^{-1}(p) = -Phi^{-1}(p)
    double x = -norm_ppf_approx(p);
    for (int i = 0; i < 2; ++i) {
        const double pdf = normal_pdf(x);
        if (pdf < 1e-280) break;
        x += (q_func(x) - p) / pdf;
    }
    return x;
}

double max_rate_fbl(const FblParams& params, double gamma,
                    bool include_log_term) {
    params.validate();
    const double c = capacity(gamma);
    const double v = dispersion(gamma);
    const double n = static_cast<double>(params.n);
    double rate = c - std::sqrt(v / n) * q_inv(params.epsilon);
    if (include_log_term) rate += std::log2(n) / (2.0 * n);
    return rate;
}

}  // namespace fblab::theory
