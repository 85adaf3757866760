// The convolutional autoencoder: configuration bookkeeping (gcd
// factorization of the K -> N encoding), model assembly, end-to-end
// training through the in-graph channel, thresholded inference, and
// checkpoint serialization.

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fblab/nn.hpp"

namespace fblab::ae {

// Exact rational, used for code rates so configs stay integral.
struct Rational {
    long num = 0;
    long den = 1;

    Rational() = default;
    Rational(long n, long d);
    static Rational parse(const std::string& text);  // "1/2", "3/4", "2"

    double value() const { return static_cast<double>(num) / den; }
    std::string str() const;
    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
};

Rational operator*(const Rational& a, int k);

// All architecture and rate bookkeeping.  Invariants: K = K' L, N = N' L,
// N = n k_mod, R = K / n = R_cod k_mod.
struct AeConfig {
    int n = 0;              // blocklength in complex symbols
    Rational rate;          // R, bits per complex transmission
    Rational rcod;          // R_cod = K / N
    int k_mod = 0;          // coded bits per symbol
    long k_bits = 0;        // K
    long n_coded = 0;       // N
    long sub_count = 0;     // L = gcd(K, N)
    long k_sub = 0;         // K'
    long n_sub = 0;         // N'
    int m1 = 0;             // encoder/decoder filter count
    int m2 = 0;             // modulator/demodulator filter count
    int kernel = 5;         // convolution width
    double train_snr_db = 10.0;
    std::uint64_t seed = 1;
};

// Computes K, N, L, K', N' from (n, R, R_cod, k_mod).  Throws on
// R_cod * k_mod != R or non-integral K.
AeConfig derive_config(int n, Rational rate, Rational rcod, int k_mod,
                       int m1, int m2, int kernel);

// One named stage of the transmit/receive chain with its output size.
struct StageShape {
    std::string stage;
    int pos = 0;
    int ch = 0;
};

class AeModel {
public:
    explicit AeModel(const AeConfig& cfg);

    const AeConfig& config() const { return cfg_; }

    // Seeds every convolution (uniform Glorot, zero biases); batch-norm
    // starts at gamma=1, beta=0, running stats (0, 1).
    void init_params(std::uint64_t seed);

    // Train-mode forward through the whole graph; `noise_frame_base` indexes
    // the per-sample training-noise streams.  Returns sigmoid outputs of
    // shape (batch, K, 1).
    nn::Tensor forward_train(const nn::Tensor& msg, double train_n0,
                             std::uint64_t seed, std::uint64_t noise_frame_base);

    // Backpropagates dLoss/dOutput, accumulating parameter gradients.
    void backward(const nn::Tensor& dout);

    // Eval-mode full pipeline (batch-norm running stats, channel noise from
    // ctx).  Thread-safe over frozen weights.
    nn::Tensor infer_soft(const nn::Tensor& msg, const nn::NoiseCtx& ctx) const;

    // Eval-mode transmitter only: (batch, K, 1) -> (batch, n, 2), power
    // normalized per frame.
    nn::Tensor encode(const nn::Tensor& msg) const;

    // Train-mode transmitter only (uses batch statistics; caches nothing
    // usable for backward -- intended for power-constraint checks).
    nn::Tensor encode_train(const nn::Tensor& msg);

    std::vector<nn::ParamView> state();
    std::size_t trainable_params() const;
    void zero_grads();

    // Output sizes of every stage, matching the architecture table:
    // input, 3 encoder convs, reshape, 2 modulator convs, normalization,
    // channel, 2 demodulator convs, reshape, 3 decoder convs (the last
    // flattened to (L K', 1)).
    std::vector<StageShape> shape_chain() const;

    std::string describe() const;

private:
    AeConfig cfg_;
    std::vector<std::unique_ptr<nn::Layer>> layers_;
    int norm_index_ = -1;     // PowerNorm position in layers_
    nn::GaussianChannel* channel_ = nullptr;
};

struct TrainConfig {
    long frames = 1'000'000;   // training vectors per epoch
    int batch = 500;
    int epochs = 100;
    nn::AdamConfig adam{};     // lr 1e-3, beta1 0.9, beta2 0.999, eps 1e-7
    double snr_offset_db = 0.0;  // train at test SNR + offset (e.g. -1)
};

struct TrainResult {
    std::vector<double> loss_trace;  // one entry per optimizer step
    long steps = 0;
    double final_loss = 0.0;
};

// End-to-end training with BCE loss and Adam.  Messages and channel noise
// are drawn from counter-based streams of cfg.seed, so a rerun with the
// same config is bit-identical.  Throws std::runtime_error if the loss
// turns non-finite.
TrainResult train(AeModel& model, const TrainConfig& tc);

// Thresholded decoding: bit = 1 iff sigmoid output >= 0.5.
std::vector<std::uint8_t> threshold_bits(const nn::Tensor& soft);

// Message helpers: frame f of `kind` holds k_bits i.i.d. uniform bits.
nn::Tensor message_tensor(std::uint64_t seed, std::uint64_t kind_stream_base,
                          std::uint64_t frame_base, int batch, long k_bits);

// --- checkpoint io (format FBLAE1: magic line, JSON manifest line, then all
// state arrays as little-endian float32 in manifest order) ---

void save_checkpoint(AeModel& model, const std::string& path);
std::unique_ptr<AeModel> load_checkpoint(const std::string& path);

}  // namespace fblab::ae
