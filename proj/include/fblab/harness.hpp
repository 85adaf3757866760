// Rate-search and sweep orchestration: walk a ladder of (R_cod, k_mod)
// candidates from high rate to low at each SNR, accept the first whose
// frame-error-probability upper confidence bound meets the target, and
// emit Fig.-3-style CSV rows with the theory curve always included.

#pragma once

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fblab/cnn_ae.hpp"
#include "fblab/fep.hpp"

namespace fblab::harness {

enum class Scheme { theory, cnn_ae, polar_qam, rm_qam };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct Candidate {
    ae::Rational rcod;
    int k_mod = 0;

    double rate() const { return rcod.value() * k_mod; }
};

struct RatePoint {
    Scheme scheme = Scheme::theory;
    double snr_db = 0.0;
    double rate = 0.0;  // bits per complex transmission (realized)
    std::optional<ae::Rational> rcod;
    std::optional<int> k_mod;
    std::optional<FepReport> fep;  // empty for the theory scheme
    bool meets_target = false;
};

// Default candidate ladder: k_mod in {1,2,4,6,8} x R_cod in
// {1/4, 1/3, 1/2, 2/3, 3/4, 5/6}, filtered for integral K = n k_mod R_cod,
// sorted by rate descending.
std::vector<Candidate> default_ladder(int n);

struct SearchConfig {
    long frames = 1'000'000;  // per FEP evaluation; raised to >= 100/epsilon
    std::uint64_t seed = 1;
    int workers = 1;
    // Autoencoder knobs used when the scheme is cnn_ae.
    int m1 = 200;
    int m2 = 100;
    int kernel = 5;
    ae::TrainConfig train{};
    // Candidates whose rate exceeds this cap are skipped (runtime control).
    double max_rate = std::numeric_limits<double>::infinity();
    std::ostream* log = nullptr;  // progress lines, optional
};

// Walks the ladder from the highest realized rate down and returns the
// first candidate whose FEP upper confidence bound is <= epsilon
// (conservative acceptance).  The theory scheme bypasses the search.  If
// nothing meets the target the result has rate 0 and meets_target false.
RatePoint rate_search(Scheme scheme, int n, double epsilon, double snr_db,
                      const std::vector<Candidate>& ladder,
                      const SearchConfig& cfg);

struct SweepResult {
    std::vector<RatePoint> points;
    bool ordering_ok = true;  // cnn_ae rate >= each baseline rate per SNR
    std::vector<std::string> ordering_diagnostics;
};

// One RatePoint per (scheme, snr); the theory curve is always included.
// Throws if any simulated rate exceeds the theory rate at its SNR.
SweepResult sweep(const std::vector<Scheme>& schemes,
                  const std::vector<double>& snr_grid_db, int n, double epsilon,
                  const std::vector<Candidate>& ladder, const SearchConfig& cfg);

// CSV schema:
// scheme,snr_db,n,epsilon,rate,rcod,kmod,fep,ci_low,ci_high,frames,meets_target,seed
void write_csv(std::ostream& os, const std::vector<RatePoint>& points, int n,
               double epsilon);
std::vector<RatePoint> read_csv(std::istream& is, int* n_out = nullptr,
                                double* epsilon_out = nullptr);

}  // namespace fblab::harness
