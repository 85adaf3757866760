// Monte-Carlo frame-error-probability estimation with exact binomial
// (Clopper-Pearson) confidence intervals.  Frames are partitioned into
// fixed blocks whose error counts are integers, so the estimate is
// bit-identical for any worker count.

#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "fblab/cnn_ae.hpp"
#include "fblab/modem.hpp"
#include "fblab/polar.hpp"
#include "fblab/reed_muller.hpp"

namespace fblab::harness {

struct FepReport {
    long frames = 0;
    long errors = 0;
    double fep = 0.0;
    double ci_low = 0.0;
    double ci_high = 1.0;
    std::uint64_t seed = 0;
};

// 95% Clopper-Pearson interval via beta quantiles.
FepReport make_fep_report(long frames, long errors, std::uint64_t seed,
                          double confidence = 0.95);

// Regularized incomplete beta function I_x(a, b) (continued fraction) and
// its inverse in x; used for the exact binomial interval.
double reg_inc_beta(double a, double b, double x);
double inv_reg_inc_beta(double a, double b, double p);

// One coded transmission system at a fixed operating point.  simulate()
// must be const and reentrant: message and noise streams are derived from
// (seed, frame index) only.
class CodedSystem {
public:
    virtual ~CodedSystem() = default;
    virtual long message_bits() const = 0;
    virtual double rate() const = 0;  // bits per complex transmission
    // Simulates frames [begin, end); returns the number of frame errors.
    virtual long simulate(std::uint64_t seed, long begin, long end) const = 0;
};

// Frame-parallel estimation; a frame error is any bit mismatch.
FepReport estimate_fep(const CodedSystem& system, long frames,
                       std::uint64_t seed, int workers);

// Monte-Carlo estimate of the hard-detection bit error probability of
// Gray QAM at the given SNR (P = 1, unit-energy constellation, per-frame
// power normalization), used to set up the induced BSC.
double estimate_qam_bit_error_rate(int k_mod, double snr_db, long min_bits,
                                   std::uint64_t seed);

// --- concrete systems -------------------------------------------------

// Polar-coded QAM with hard detection: the demapped bits feed the SC
// decoder as +/- log((1-p)/p) LLRs where p is the measured QAM bit error
// rate (also used for the Bhattacharyya construction).
class PolarQamSystem final : public CodedSystem {
public:
    PolarQamSystem(int n_symbols, ae::Rational rcod, int k_mod, double snr_db,
                   std::uint64_t seed);

    long message_bits() const override { return code_.k_info; }
    double rate() const override {
        return static_cast<double>(code_.k_info) / n_symbols_;
    }
    long simulate(std::uint64_t seed, long begin, long end) const override;

    const polar::PolarCode& code() const { return code_; }
    double crossover() const { return p_bsc_; }

private:
    int n_symbols_;
    modem::QamSpec qam_;
    polar::PolarCode code_;
    double n0_;
    double p_bsc_;
    double llr_mag_;
};

// Reed-Muller coded QAM with hard detection and Reed majority-logic
// decoding.  The realized code is the largest RM(r, m) with rate <= rcod.
class RmQamSystem final : public CodedSystem {
public:
    RmQamSystem(int n_symbols, ae::Rational rcod, int k_mod, double snr_db);

    long message_bits() const override { return code_.k_info; }
    double rate() const override {
        return static_cast<double>(code_.k_info) / n_symbols_;
    }
    long simulate(std::uint64_t seed, long begin, long end) const override;

    const rm::RmCode& code() const { return code_; }

private:
    int n_symbols_;
    modem::QamSpec qam_;
    rm::RmCode code_;
    double n0_;
};

// Trained autoencoder at a fixed evaluation SNR.
class AeSystem final : public CodedSystem {
public:
    AeSystem(const ae::AeModel& model, double snr_db);

    long message_bits() const override { return model_.config().k_bits; }
    double rate() const override { return model_.config().rate.value(); }
    long simulate(std::uint64_t seed, long begin, long end) const override;

private:
    const ae::AeModel& model_;
    double n0_;
};

}  // namespace fblab::harness
