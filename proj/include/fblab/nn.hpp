// Minimal reverse-mode training engine with exactly the layer set the
// convolutional autoencoder needs: 1-D convolution (same padding, stride 1),
// batch normalization, ELU/linear/sigmoid activations, reshape, per-frame
// power normalization, an in-graph Gaussian channel, binary cross entropy,
// and Adam.
//
// Values and gradients are double precision.  Persistent state (weights,
// biases, batch-norm parameters and running statistics) is quantized to the
// nearest float32 on every write, so checkpoints serialize losslessly.
//
// Training is single-owner: forward()/backward() cache activations inside
// the layers.  infer() is const, cache-free, and safe to fan out across
// threads over frozen weights.  Batch-internal parallelism uses fixed-size
// sample chunks reduced in chunk order, so results are bit-identical for
// any thread count.

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace fblab::nn {

// Global cap on worker threads used inside batch operations.
void set_threads(int t);
int threads();

// Rounds to the nearest float32; applied to every persistent-state write.
inline double quantize_f32(double x) { return static_cast<double>(static_cast<float>(x)); }

struct Tensor {
    int batch = 0, pos = 0, ch = 0;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int b, int p, int c)
        : batch(b), pos(p), ch(c),
          v(static_cast<std::size_t>(b) * p * c, 0.0) {}

    double& at(int b, int p, int c) {
        return v[(static_cast<std::size_t>(b) * pos + p) * ch + c];
    }
    double at(int b, int p, int c) const {
        return v[(static_cast<std::size_t>(b) * pos + p) * ch + c];
    }
    double* row(int b, int p) {
        return v.data() + (static_cast<std::size_t>(b) * pos + p) * ch;
    }
    const double* row(int b, int p) const {
        return v.data() + (static_cast<std::size_t>(b) * pos + p) * ch;
    }
    std::size_t size() const { return v.size(); }
    bool same_shape(const Tensor& o) const {
        return batch == o.batch && pos == o.pos && ch == o.ch;
    }
};

// Named view over one state array of a layer.  `grad` is null for
// non-trainable buffers (batch-norm running statistics).
struct ParamView {
    std::string name;
    std::vector<double>* value = nullptr;
    std::vector<double>* grad = nullptr;
    std::vector<int> shape;
    bool trainable = false;

    std::size_t count() const { return value->size(); }
};

// Noise context threaded through infer(): only the Gaussian channel layer
// reads it.  n0 == 0 turns the channel into a pass-through.
struct NoiseCtx {
    double n0 = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t frame_base = 0;  // global index of the first frame in the batch
};

class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor forward(const Tensor& x) = 0;   // train mode, caches
    virtual Tensor backward(const Tensor& dy) = 0;
    virtual Tensor infer(const Tensor& x, const NoiseCtx& ctx) const = 0;
    virtual void collect_state(std::vector<ParamView>&) {}
    virtual std::pair<int, int> output_shape(std::pair<int, int> in) const = 0;
    virtual std::string describe() const = 0;
};

class Conv1d final : public Layer {
public:
    // Cross-correlation along the position axis, zero-padded "same", stride 1.
    Conv1d(std::string name, int in_ch, int out_ch, int kernel);

    void init_glorot(std::uint64_t seed, std::uint64_t stream);

    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;
    Tensor infer(const Tensor& x, const NoiseCtx&) const override;
    void collect_state(std::vector<ParamView>& out) override;
    std::pair<int, int> output_shape(std::pair<int, int> in) const override {
        return {in.first, out_ch_};
    }
    std::string describe() const override;

    std::size_t param_count() const {
        return w_.size() + b_.size();
    }
    int in_channels() const { return in_ch_; }
    int out_channels() const { return out_ch_; }
    int kernel() const { return kernel_; }

private:
    std::string name_;
    int in_ch_, out_ch_, kernel_, pad_left_;
    std::vector<double> w_, b_, dw_, db_;  // w layout [k][in][out]
    Tensor x_cache_;
};

class BatchNorm final : public Layer {
public:
    explicit BatchNorm(std::string name, int channels, double eps = 1e-3,
                       double momentum = 0.99);

    Tensor forward(const Tensor& x) override;  // throws on batch < 2
    Tensor backward(const Tensor& dy) override;
    Tensor infer(const Tensor& x, const NoiseCtx&) const override;
    void collect_state(std::vector<ParamView>& out) override;
    std::pair<int, int> output_shape(std::pair<int, int> in) const override {
        return in;
    }
    std::string describe() const override;

private:
    std::string name_;
    int ch_;
    double eps_, momentum_;
    std::vector<double> gamma_, beta_, dgamma_, dbeta_;
    std::vector<double> run_mean_, run_var_;
    // caches
    Tensor xhat_;
    std::vector<double> inv_std_;
    std::size_t count_ = 0;  // batch * pos
};

enum class Act { linear, elu, sigmoid };

class Activation final : public Layer {
public:
    explicit Activation(Act kind) : kind_(kind) {}

    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;
    Tensor infer(const Tensor& x, const NoiseCtx&) const override;
    std::pair<int, int> output_shape(std::pair<int, int> in) const override {
        return in;
    }
    std::string describe() const override;

private:
    Act kind_;
    Tensor y_cache_;
};

// Row-major (positions, channels) reinterpretation; element order is
// preserved within each frame.
class Reshape final : public Layer {
public:
    Reshape(int out_pos, int out_ch) : out_pos_(out_pos), out_ch_(out_ch) {}

    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;
    Tensor infer(const Tensor& x, const NoiseCtx&) const override;
    std::pair<int, int> output_shape(std::pair<int, int> in) const override;
    std::string describe() const override;

private:
    int out_pos_, out_ch_;
    int in_pos_ = 0, in_ch_ = 0;
};

// Non-trainable per-frame scaling to unit average power over the frame's
// positions: y = x / sqrt(mean_p |x_p|^2).  Gradients flow through the
// scale factor.
class PowerNorm final : public Layer {
public:
    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;
    Tensor infer(const Tensor& x, const NoiseCtx&) const override;
    std::pair<int, int> output_shape(std::pair<int, int> in) const override {
        return in;
    }
    std::string describe() const override { return "power_norm"; }

private:
    Tensor x_cache_;
    std::vector<double> scale_;  // per frame
};

// In-graph AWGN layer.  In the backward pass the noise is an additive
// constant, so gradients pass through unchanged.  Noise for frame b at
// position p, component c is drawn from the stream of global frame
// (frame_base + b), making draws independent of batch partitioning.
class GaussianChannel final : public Layer {
public:
    void set_train_noise(double n0, std::uint64_t seed, std::uint64_t frame_base);

    Tensor forward(const Tensor& x) override;
    Tensor backward(const Tensor& dy) override;
    Tensor infer(const Tensor& x, const NoiseCtx& ctx) const override;
    std::pair<int, int> output_shape(std::pair<int, int> in) const override {
        return in;
    }
    std::string describe() const override { return "gaussian_channel"; }

private:
    double n0_ = 0.0;
    std::uint64_t seed_ = 0;
    std::uint64_t frame_base_ = 0;
};

// Mean binary cross entropy with natural logs; predictions are clamped to
// [1e-7, 1 - 1e-7] (gradient zero where the clamp is active).  If dpred is
// non-null it receives dLoss/dpred.
double bce_loss(const Tensor& pred, const Tensor& target, Tensor* dpred);

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-7;
};

// Standard bias-corrected Adam over the trainable entries of a ParamView
// list.  Moment buffers are zero-initialized on first use; updated values
// are float32-quantized.
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    void step(const std::vector<ParamView>& params);
    long step_count() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    std::vector<std::vector<double>> m_, v_;
    long t_ = 0;
};

void zero_grads(const std::vector<ParamView>& params);

}  // namespace fblab::nn
