#include "fblab/fep.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "fblab/channel.hpp"
#include "fblab/rng.hpp"
#include "fblab/theory.hpp"

namespace fblab::harness {

// ------------------------------------------------- incomplete beta / CP

namespace {

// Continued fraction for the regularized incomplete beta (Lentz scheme).
double betacf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return h;
}

}  // namespace

double reg_inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double inv_reg_inc_beta(double a, double b, double p) {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return 1.0;
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (reg_inc_beta(a, b, mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

FepReport make_fep_report(long frames, long errors, std::uint64_t seed,
                          double confidence) {
    if (frames < 1) throw std::invalid_argument("fep: frames must be >= 1");
    if (errors < 0 || errors > frames)
        throw std::invalid_argument("fep: errors out of range");
    const double alpha = 1.0 - confidence;
    FepReport r;
    r.frames = frames;
    r.errors = errors;
    r.fep = static_cast<double>(errors) / frames;
    r.seed = seed;
    const double k = static_cast<double>(errors);
    const double n = static_cast<double>(frames);
    r.ci_low = errors == 0 ? 0.0
                           : inv_reg_inc_beta(k, n - k + 1.0, alpha / 2.0);
    r.ci_high = errors == frames
                    ? 1.0
                    : inv_reg_inc_beta(k + 1.0, n - k, 1.0 - alpha / 2.0);
    return r;
}

// ---------------------------------------------------------- estimate_fep

namespace {

constexpr long kFrameBlock = 256;

}  // namespace

FepReport estimate_fep(const CodedSystem& system, long frames,
                       std::uint64_t seed, int workers) {
    if (frames < 1) throw std::invalid_argument("estimate_fep: frames must be >= 1");
    if (workers < 1) workers = 1;
    const long blocks = (frames + kFrameBlock - 1) / kFrameBlock;
    workers = static_cast<int>(std::min<long>(workers, blocks));

    std::atomic<long> next{0};
    std::atomic<long> total_errors{0};
    auto run = [&] {
        for (long blk = next.fetch_add(1); blk < blocks; blk = next.fetch_add(1)) {
            const long begin = blk * kFrameBlock;
            const long end = std::min(frames, begin + kFrameBlock);
            total_errors.fetch_add(system.simulate(seed, begin, end));
        }
    };
    if (workers == 1) {
        run();
    } else {
        // The model's batch-internal threading would oversubscribe the
        // frame-parallel workers; frame blocks already use every core.
        const int saved = nn::threads();
        nn::set_threads(1);
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(run);
        for (auto& t : pool) t.join();
        nn::set_threads(saved);
    }
    return make_fep_report(frames, total_errors.load(), seed);
}

// --------------------------------------------------- QAM BSC calibration

double estimate_qam_bit_error_rate(int k_mod, double snr_db, long min_bits,
                                   std::uint64_t seed) {
    const auto spec = modem::QamSpec::make(k_mod);
    const double n0 = 1.0 / theory::SnrPoint::from_db(snr_db).gamma;
    const int frame_symbols = 128;
    const long bits_per_frame = static_cast<long>(frame_symbols) * k_mod;
    const long frames = (min_bits + bits_per_frame - 1) / bits_per_frame;
    long bit_errors = 0;
    std::vector<std::uint8_t> bits(bits_per_frame);
    for (long f = 0; f < frames; ++f) {
        const std::uint64_t msg_stream =
            rng::stream_id(rng::StreamKind::construction, 2 * f);
        for (long i = 0; i < bits_per_frame; ++i)
            bits[i] = static_cast<std::uint8_t>(rng::bit(seed, msg_stream, i));
        const auto x = channel::normalize_power(modem::qam_modulate(bits, spec));
        const channel::NoiseSpec ns{
            n0, seed, rng::stream_id(rng::StreamKind::construction, 2 * f + 1)};
        const auto y = channel::transmit(x, ns);
        const auto hard = modem::qam_demodulate_hard(y, spec);
        for (long i = 0; i < bits_per_frame; ++i)
            bit_errors += hard[i] != bits[i];
    }
    return static_cast<double>(bit_errors) /
           (static_cast<double>(frames) * bits_per_frame);
}

// ------------------------------------------------------- PolarQamSystem

namespace {

bool power_of_two(long v) { return v > 0 && (v & (v - 1)) == 0; }

}  // namespace

PolarQamSystem::PolarQamSystem(int n_symbols, ae::Rational rcod, int k_mod,
                               double snr_db, std::uint64_t seed)
    : n_symbols_(n_symbols), qam_(modem::QamSpec::make(k_mod)) {
    const long n_code = static_cast<long>(n_symbols) * k_mod;
    if (!power_of_two(n_code))
        throw std::domain_error("polar_qam: N_c = n k_mod must be a power of two");
    if ((n_code * rcod.num) % rcod.den != 0)
        throw std::domain_error("polar_qam: K_c = R_cod N_c must be integral");
    const long k_info = n_code * rcod.num / rcod.den;
    n0_ = 1.0 / theory::SnrPoint::from_db(snr_db).gamma;
    // Construction on the induced BSC: measured hard-detection bit error
    // rate at this operating point, clamped into the recursion's domain.
    const double p_raw = estimate_qam_bit_error_rate(k_mod, snr_db, 1'000'000,
                                                     rng::mix64(seed));
    p_bsc_ = std::min(std::max(p_raw, 1e-7), 0.499);
    code_ = polar::PolarCode::construct_bsc(static_cast<int>(n_code),
                                            static_cast<int>(k_info), p_bsc_);
    llr_mag_ = polar::bsc_llr_magnitude(p_bsc_);
}

long PolarQamSystem::simulate(std::uint64_t seed, long begin, long end) const {
    long errors = 0;
    std::vector<std::uint8_t> msg(code_.k_info);
    std::vector<double> llr(code_.n_code);
    for (long f = begin; f < end; ++f) {
        const std::uint64_t msg_stream =
            rng::stream_id(rng::StreamKind::message, static_cast<std::uint64_t>(f));
        for (int i = 0; i < code_.k_info; ++i)
            msg[i] = static_cast<std::uint8_t>(rng::bit(seed, msg_stream, i));
        const auto coded = polar::polar_encode(msg, code_);
        const auto x = channel::normalize_power(modem::qam_modulate(coded, qam_));
        const channel::NoiseSpec ns{
            n0_, seed, rng::stream_id(rng::StreamKind::noise,
                                      static_cast<std::uint64_t>(f))};
        const auto y = channel::transmit(x, ns);
        const auto hard = modem::qam_demodulate_hard(y, qam_);
        for (int i = 0; i < code_.n_code; ++i)
            llr[i] = hard[i] ? -llr_mag_ : llr_mag_;
        const auto decoded = polar::sc_decode(llr, code_);
        errors += decoded != msg;
    }
    return errors;
}

// --------------------------------------------------------- RmQamSystem

RmQamSystem::RmQamSystem(int n_symbols, ae::Rational rcod, int k_mod,
                         double snr_db)
    : n_symbols_(n_symbols), qam_(modem::QamSpec::make(k_mod)) {
    const long n_code = static_cast<long>(n_symbols) * k_mod;
    if (!power_of_two(n_code))
        throw std::domain_error("rm_qam: N_c = n k_mod must be a power of two");
    int m = 0;
    while ((1L << m) < n_code) ++m;
    // Largest RM order whose rate does not exceed the requested R_cod
    // (exact comparison: K_c / N_c <= num / den).
    int best_r = -1;
    long k_cum = 0;
    long binom = 1;  // C(m, d)
    for (int r = 0; r < m; ++r) {
        k_cum += binom;
        binom = binom * (m - r) / (r + 1);
        if (k_cum * rcod.den <= rcod.num * n_code)
            best_r = r;
        else
            break;
    }
    if (best_r < 0)
        throw std::domain_error("rm_qam: no RM(r, m) at or below the requested rate");
    code_ = rm::RmCode::make(best_r, m);
    n0_ = 1.0 / theory::SnrPoint::from_db(snr_db).gamma;
}

long RmQamSystem::simulate(std::uint64_t seed, long begin, long end) const {
    long errors = 0;
    std::vector<std::uint8_t> msg(code_.k_info);
    for (long f = begin; f < end; ++f) {
        const std::uint64_t msg_stream =
            rng::stream_id(rng::StreamKind::message, static_cast<std::uint64_t>(f));
        for (int i = 0; i < code_.k_info; ++i)
            msg[i] = static_cast<std::uint8_t>(rng::bit(seed, msg_stream, i));
        const auto coded = rm::rm_encode(msg, code_);
        const auto x = channel::normalize_power(modem::qam_modulate(coded, qam_));
        const channel::NoiseSpec ns{
            n0_, seed, rng::stream_id(rng::StreamKind::noise,
                                      static_cast<std::uint64_t>(f))};
        const auto y = channel::transmit(x, ns);
        const auto hard = modem::qam_demodulate_hard(y, qam_);
        const auto decoded = rm::rm_decode_reed(hard, code_);
        errors += decoded != msg;
    }
    return errors;
}

// ----------------------------------------------------------- AeSystem

AeSystem::AeSystem(const ae::AeModel& model, double snr_db)
    : model_(model), n0_(1.0 / theory::SnrPoint::from_db(snr_db).gamma) {}

long AeSystem::simulate(std::uint64_t seed, long begin, long end) const {
    const long k_bits = model_.config().k_bits;
    long errors = 0;
    const std::uint64_t msg_base = rng::stream_id(rng::StreamKind::message, 0);
    for (long f0 = begin; f0 < end;) {
        const int batch = static_cast<int>(std::min<long>(end - f0, 64));
        const nn::Tensor msg = ae::message_tensor(
            seed, msg_base, static_cast<std::uint64_t>(f0), batch, k_bits);
        nn::NoiseCtx ctx{n0_, seed, static_cast<std::uint64_t>(f0)};
        const nn::Tensor soft = model_.infer_soft(msg, ctx);
        for (int b = 0; b < batch; ++b) {
            bool frame_error = false;
            for (long i = 0; i < k_bits && !frame_error; ++i) {
                const bool bit = soft.at(b, static_cast<int>(i), 0) >= 0.5;
                frame_error = bit != (msg.at(b, static_cast<int>(i), 0) != 0.0);
            }
            errors += frame_error;
        }
        f0 += batch;
    }
    return errors;
}

}  // namespace fblab::harness
