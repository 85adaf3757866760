#include "oracles.hpp"

#include <cmath>

#include "fblab/rng.hpp"

namespace oracle {

namespace {

constexpr long double kSqrtPi = 1.772453850905516027298L;
constexpr long double kSqrt2 = 1.414213562373095048802L;
constexpr long double kLog2E = 1.442695040888963407360L;

long double erf_maclaurin(long double x) {
    // alternating series sum (-1)^n x^{2n+1} / (n! (2n+1))
    long double term = x;
    long double sum = x;
    const long double x2 = x * x;
    for (int n = 1; n < 400; ++n) {
        term *= -x2 / n;
        const long double add = term / (2 * n + 1);
        sum += add;
        if (std::fabs(add) < 1e-25L * std::fabs(sum)) break;
    }
    return 2.0L / kSqrtPi * sum;
}

long double erfc_lentz(long double x) {
    const long double tiny = 1e-4000L;
    long double f = x, c = f, d = 0.0L;
    for (int n = 1; n < 500; ++n) {
        const long double a = 0.5L * n;
        d = x + a * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = x + a / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0L / d;
        const long double delta = c * d;
        f *= delta;
        if (std::fabs(delta - 1.0L) < 1e-21L) break;
    }
    return std::exp(-x * x) / (kSqrtPi * f);
}

}  // namespace

long double erf_ld(long double x) {
    if (x < 0.0L) return -erf_ld(-x);
    if (x <= 3.0L) return erf_maclaurin(x);
    return 1.0L - erfc_lentz(x);
}

long double erfc_ld(long double x) {
    if (x < 0.0L) return 2.0L - erfc_ld(-x);
    if (x <= 3.0L) return 1.0L - erf_maclaurin(x);
    return erfc_lentz(x);
}

long double q_ld(long double x) { return 0.5L * erfc_ld(x / kSqrt2); }

namespace {

long double gauss_pdf(long double t) {
    return std::exp(-0.5L * t * t) / std::sqrt(2.0L * 3.141592653589793238463L);
}

long double simpson(const std::function<long double(long double)>& f,
                    long double a, long double b, int depth, long double fa,
                    long double fm, long double fb, long double whole,
                    long double tol) {
    const long double m = 0.5L * (a + b);
    const long double lm = 0.5L * (a + m);
    const long double rm = 0.5L * (m + b);
    const long double flm = f(lm);
    const long double frm = f(rm);
    const long double left = (m - a) / 6.0L * (fa + 4.0L * flm + fm);
    const long double right = (b - m) / 6.0L * (fm + 4.0L * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) < 15.0L * tol)
        return left + right + (left + right - whole) / 15.0L;
    return simpson(f, a, m, depth - 1, fa, flm, fm, left, tol / 2.0L) +
           simpson(f, m, b, depth - 1, fm, frm, fb, right, tol / 2.0L);
}

long double integrate(const std::function<long double(long double)>& f,
                      long double a, long double b, long double tol) {
    const long double m = 0.5L * (a + b);
    const long double fa = f(a), fm = f(m), fb = f(b);
    const long double whole = (b - a) / 6.0L * (fa + 4.0L * fm + fb);
    return simpson(f, a, b, 28, fa, fm, fb, whole, tol);
}

}  // namespace

long double q_quadrature(long double x) {
    if (x < 0.0L) return 1.0L - q_quadrature(-x);
    // 12 more standard deviations push the remainder far below the
    // quadrature tolerance for the x range the tests probe
    const long double hi = x + 12.0L;
    return integrate(gauss_pdf, x, hi, 1e-19L);
}

long double q_inv_bisect(long double p) {
    long double lo = -45.0L, hi = 45.0L;
    for (int i = 0; i < 220; ++i) {
        const long double mid = 0.5L * (lo + hi);
        if (q_ld(mid) > p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5L * (lo + hi);
}

long double capacity_ld(long double gamma) {
    return std::log2(1.0L + gamma);
}

long double dispersion_ld(long double gamma) {
    const long double g1 = gamma + 1.0L;
    return gamma * (gamma + 2.0L) / (g1 * g1) * kLog2E * kLog2E;
}

long double max_rate_ld(long long n, long double eps, long double gamma) {
    const long double c = capacity_ld(gamma);
    const long double v = dispersion_ld(gamma);
    const long double nn = static_cast<long double>(n);
    return c - std::sqrt(v / nn) * q_inv_bisect(eps) +
           std::log2(nn) / (2.0L * nn);
}

long double beta_quantile(long double a, long double b, long double p) {
    const long double ln_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    auto pdf = [&](long double t) -> long double {
        if (t <= 0.0L || t >= 1.0L) return 0.0L;
        return std::exp(ln_norm + (a - 1.0L) * std::log(t) +
                        (b - 1.0L) * std::log1p(-t));
    };
    // composite quadrature over uniform panels so a sharply concentrated
    // density cannot slip between the initial sample points
    auto cdf = [&](long double x) -> long double {
        if (x <= 0.0L) return 0.0L;
        if (x > 1.0L) x = 1.0L;
        const long double mean = a / (a + b);
        const long double sd = std::sqrt(a * b / ((a + b) * (a + b) * (a + b + 1.0L)));
        const long double upper = std::min(x, std::min(1.0L, mean + 80.0L * sd));
        const int panels = 256;
        long double total = 0.0L;
        for (int i = 0; i < panels; ++i) {
            const long double t0 = upper * i / panels;
            const long double t1 = upper * (i + 1) / panels;
            total += integrate(pdf, t0, t1, 1e-17L);
        }
        return total;
    };
    long double lo = 0.0L, hi = 1.0L;
    for (int i = 0; i < 90; ++i) {
        const long double mid = 0.5L * (lo + hi);
        if (cdf(mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5L * (lo + hi);
}

GradCheckResult grad_check(const std::function<double()>& loss_with_backward,
                           const std::function<double()>& loss_only,
                           const std::vector<fblab::nn::ParamView>& params,
                           double h, std::size_t max_entries_per_param,
                           std::uint64_t subsample_seed) {
    loss_with_backward();
    // snapshot analytic gradients before any perturbation
    std::vector<std::vector<double>> analytic;
    for (const auto& p : params)
        analytic.push_back(p.grad ? *p.grad : std::vector<double>{});

    GradCheckResult result;
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        const auto& p = params[pi];
        if (!p.grad || !p.trainable) continue;
        const std::size_t count = p.count();
        const std::size_t step =
            count <= max_entries_per_param ? 1 : count / max_entries_per_param;
        for (std::size_t j0 = 0; j0 < count; j0 += step) {
            // jitter the probed index so strides do not hide structure
            const std::size_t j =
                step == 1 ? j0
                          : std::min<std::size_t>(
                                count - 1,
                                j0 + fblab::rng::hash3(subsample_seed, pi, j0) % step);
            double& w = (*p.value)[j];
            const double saved = w;
            w = saved + h;
            const double fp = loss_only();
            w = saved - h;
            const double fm = loss_only();
            w = saved;
            const double fd = (fp - fm) / (2.0 * h);
            const double g = analytic[pi][j];
            const double err =
                std::fabs(fd - g) / std::max({1.0, std::fabs(fd), std::fabs(g)});
            if (err > result.worst) {
                result.worst = err;
                result.worst_name = p.name;
                result.worst_index = j;
            }
        }
    }
    return result;
}

}  // namespace oracle
