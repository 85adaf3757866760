// Experiment configuration files: JSON with strict key checking (unknown
// keys are rejected), documented defaults, and a stable 64-bit hash of the
// canonical form recorded in every output manifest.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fblab/cnn_ae.hpp"
#include "fblab/harness.hpp"

namespace fblab::experiment {

struct ExperimentConfig {
    std::uint64_t seed = 1;
    int n = 128;
    double epsilon = 1e-2;
    double snr_db = 10.0;  // operating point for train/eval/rate-search
    int workers = 0;       // 0 = hardware concurrency

    struct AeSection {
        ae::Rational rcod{1, 2};
        int k_mod = 2;
        int m1 = 200;
        int m2 = 100;
        int kernel = 5;
    } ae;

    struct TrainSection {
        long frames = 1'000'000;
        int batch = 500;
        int epochs = 100;
        double lr = 1e-3;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double eps_opt = 1e-7;
        double snr_offset_db = 0.0;
    } train;

    struct EvalSection {
        long frames = 1'000'000;
    } eval;

    struct SweepSection {
        std::vector<double> snr_db{0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20};
        std::vector<std::string> schemes{"theory", "cnn_ae", "polar_qam", "rm_qam"};
        std::vector<ae::Rational> rcod;  // empty = default ladder set
        std::vector<int> k_mod;          // empty = default ladder set
        double max_rate = 1e9;
    } sweep;

    static ExperimentConfig load(const std::string& path);
    static ExperimentConfig from_json_text(const std::string& text);

    std::string canonical_json() const;
    std::uint64_t config_hash() const;  // FNV-1a 64 over canonical_json()

    ae::TrainConfig train_config() const;
    harness::SearchConfig search_config() const;
    std::vector<harness::Candidate> ladder() const;
    ae::AeConfig ae_config() const;  // at (snr_db, ae section)
};

// FNV-1a 64-bit over a byte string.
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace fblab::experiment
