#include "fblab/nn.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

#include "fblab/rng.hpp"

namespace fblab::nn {

namespace {

int g_threads = 1;

// Fixed sample-chunk size for batch-internal parallelism.  Chunk boundaries
// depend only on the batch size, and cross-sample reductions combine chunk
// partials in chunk order, so results are independent of the thread count.
constexpr int kChunk = 32;

int chunk_count(int items) { return (items + kChunk - 1) / kChunk; }

void parallel_chunks(int items, const std::function<void(int, int, int)>& fn) {
    const int chunks = chunk_count(items);
    const int workers = std::min(g_threads, chunks);
    if (workers <= 1) {
        for (int c = 0; c < chunks; ++c)
            fn(c, c * kChunk, std::min(items, (c + 1) * kChunk));
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int c = next.fetch_add(1); c < chunks; c = next.fetch_add(1))
                fn(c, c * kChunk, std::min(items, (c + 1) * kChunk));
        });
    for (auto& t : pool) t.join();
}

}  // namespace

void set_threads(int t) { g_threads = t < 1 ? 1 : t; }
int threads() { return g_threads; }

// ---------------------------------------------------------------- Conv1d

Conv1d::Conv1d(std::string name, int in_ch, int out_ch, int kernel)
    : name_(std::move(name)), in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel),
      pad_left_((kernel - 1) / 2) {
    if (in_ch < 1 || out_ch < 1 || kernel < 1)
        throw std::domain_error("Conv1d: channels and kernel must be >= 1");
    w_.assign(static_cast<std::size_t>(kernel) * in_ch * out_ch, 0.0);
    b_.assign(out_ch, 0.0);
    dw_.assign(w_.size(), 0.0);
    db_.assign(b_.size(), 0.0);
}

void Conv1d::init_glorot(std::uint64_t seed, std::uint64_t stream) {
    const double fan_in = static_cast<double>(kernel_) * in_ch_;
    const double fan_out = static_cast<double>(kernel_) * out_ch_;
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    for (std::size_t i = 0; i < w_.size(); ++i)
        w_[i] = quantize_f32((2.0 * rng::uniform(seed, stream, i) - 1.0) * a);
    for (double& b : b_) b = 0.0;
}

namespace {

void conv1d_run(const Tensor& x, Tensor& y, const std::vector<double>& w,
                const std::vector<double>& b, int in_ch, int out_ch,
                int kernel, int pad_left) {
    const int P = x.pos;
    parallel_chunks(x.batch, [&](int, int b0, int b1) {
        for (int bi = b0; bi < b1; ++bi) {
            for (int p = 0; p < P; ++p) {
                double* orow = y.row(bi, p);
                for (int oc = 0; oc < out_ch; ++oc) orow[oc] = b[oc];
                for (int dk = 0; dk < kernel; ++dk) {
                    const int q = p + dk - pad_left;
                    if (q < 0 || q >= P) continue;
                    const double* xq = x.row(bi, q);
                    const double* wk = w.data() +
                        static_cast<std::size_t>(dk) * in_ch * out_ch;
                    for (int ic = 0; ic < in_ch; ++ic) {
                        const double xv = xq[ic];
                        const double* wrow = wk + static_cast<std::size_t>(ic) * out_ch;
                        for (int oc = 0; oc < out_ch; ++oc)
                            orow[oc] += xv * wrow[oc];
                    }
                }
            }
        }
    });
}

}  // namespace

Tensor Conv1d::forward(const Tensor& x) {
    if (x.ch != in_ch_)
        throw std::invalid_argument(name_ + ": input channel mismatch");
    x_cache_ = x;
    Tensor y(x.batch, x.pos, out_ch_);
    conv1d_run(x, y, w_, b_, in_ch_, out_ch_, kernel_, pad_left_);
    return y;
}

Tensor Conv1d::infer(const Tensor& x, const NoiseCtx&) const {
    if (x.ch != in_ch_)
        throw std::invalid_argument(name_ + ": input channel mismatch");
    Tensor y(x.batch, x.pos, out_ch_);
    conv1d_run(x, y, w_, b_, in_ch_, out_ch_, kernel_, pad_left_);
    return y;
}

Tensor Conv1d::backward(const Tensor& dy) {
    const Tensor& x = x_cache_;
    const int P = x.pos;
    Tensor dx(x.batch, x.pos, in_ch_);

    parallel_chunks(x.batch, [&](int, int b0, int b1) {
        for (int bi = b0; bi < b1; ++bi) {
            for (int q = 0; q < P; ++q) {
                double* dxrow = dx.row(bi, q);
                for (int dk = 0; dk < kernel_; ++dk) {
                    const int p = q - dk + pad_left_;
                    if (p < 0 || p >= P) continue;
                    const double* dyrow = dy.row(bi, p);
                    const double* wk = w_.data() +
                        static_cast<std::size_t>(dk) * in_ch_ * out_ch_;
                    for (int ic = 0; ic < in_ch_; ++ic) {
                        const double* wrow = wk + static_cast<std::size_t>(ic) * out_ch_;
                        double acc = 0.0;
                        for (int oc = 0; oc < out_ch_; ++oc)
                            acc += dyrow[oc] * wrow[oc];
                        dxrow[ic] += acc;
                    }
                }
            }
        }
    });

    // Weight/bias gradients: per-chunk partials combined in chunk order.
    const int chunks = chunk_count(x.batch);
    const std::size_t wsz = w_.size();
    std::vector<std::vector<double>> part(chunks);
    parallel_chunks(x.batch, [&](int c, int b0, int b1) {
        auto& buf = part[c];
        buf.assign(wsz + b_.size(), 0.0);
        double* pw = buf.data();
        double* pb = buf.data() + wsz;
        for (int bi = b0; bi < b1; ++bi) {
            for (int p = 0; p < P; ++p) {
                const double* dyrow = dy.row(bi, p);
                for (int oc = 0; oc < out_ch_; ++oc) pb[oc] += dyrow[oc];
                for (int dk = 0; dk < kernel_; ++dk) {
                    const int q = p + dk - pad_left_;
                    if (q < 0 || q >= P) continue;
                    const double* xq = x.row(bi, q);
                    double* dwk = pw + static_cast<std::size_t>(dk) * in_ch_ * out_ch_;
                    for (int ic = 0; ic < in_ch_; ++ic) {
                        const double xv = xq[ic];
                        double* dwrow = dwk + static_cast<std::size_t>(ic) * out_ch_;
                        for (int oc = 0; oc < out_ch_; ++oc)
                            dwrow[oc] += xv * dyrow[oc];
                    }
                }
            }
        }
    });
    for (int c = 0; c < chunks; ++c) {
        const double* pw = part[c].data();
        const double* pb = part[c].data() + wsz;
        for (std::size_t i = 0; i < wsz; ++i) dw_[i] += pw[i];
        for (std::size_t i = 0; i < b_.size(); ++i) db_[i] += pb[i];
    }
    return dx;
}

void Conv1d::collect_state(std::vector<ParamView>& out) {
    out.push_back({name_ + ".w", &w_, &dw_, {kernel_, in_ch_, out_ch_}, true});
    out.push_back({name_ + ".b", &b_, &db_, {out_ch_}, true});
}

std::string Conv1d::describe() const {
    return name_ + ": conv1d(" + std::to_string(in_ch_) + "->" +
           std::to_string(out_ch_) + ", k=" + std::to_string(kernel_) + ")";
}

// ------------------------------------------------------------- BatchNorm

BatchNorm::BatchNorm(std::string name, int channels, double eps, double momentum)
    : name_(std::move(name)), ch_(channels), eps_(eps), momentum_(momentum),
      gamma_(channels, 1.0), beta_(channels, 0.0), dgamma_(channels, 0.0),
      dbeta_(channels, 0.0), run_mean_(channels, 0.0), run_var_(channels, 1.0) {}

Tensor BatchNorm::forward(const Tensor& x) {
    if (x.ch != ch_)
        throw std::invalid_argument(name_ + ": channel mismatch");
    if (x.batch < 2)
        throw std::domain_error(name_ + ": train-mode batch must have >= 2 frames");

    const int rows = x.batch * x.pos;
    count_ = static_cast<std::size_t>(rows);

    // Per-channel sums, chunked over rows with ordered combination.
    const int chunks = chunk_count(rows);
    std::vector<std::vector<double>> part(chunks);
    parallel_chunks(rows, [&](int c, int r0, int r1) {
        auto& buf = part[c];
        buf.assign(2 * ch_, 0.0);
        for (int r = r0; r < r1; ++r) {
            const double* row = x.v.data() + static_cast<std::size_t>(r) * ch_;
            for (int j = 0; j < ch_; ++j) {
                buf[j] += row[j];
                buf[ch_ + j] += row[j] * row[j];
            }
        }
    });
    std::vector<double> mean(ch_, 0.0), var(ch_, 0.0);
    for (int c = 0; c < chunks; ++c)
        for (int j = 0; j < ch_; ++j) {
            mean[j] += part[c][j];
            var[j] += part[c][ch_ + j];
        }
    for (int j = 0; j < ch_; ++j) {
        mean[j] /= rows;
        var[j] = std::max(0.0, var[j] / rows - mean[j] * mean[j]);
    }

    inv_std_.resize(ch_);
    for (int j = 0; j < ch_; ++j) inv_std_[j] = 1.0 / std::sqrt(var[j] + eps_);

    xhat_ = Tensor(x.batch, x.pos, x.ch);
    Tensor y(x.batch, x.pos, x.ch);
    parallel_chunks(rows, [&](int, int r0, int r1) {
        for (int r = r0; r < r1; ++r) {
            const double* xr = x.v.data() + static_cast<std::size_t>(r) * ch_;
            double* hr = xhat_.v.data() + static_cast<std::size_t>(r) * ch_;
            double* yr = y.v.data() + static_cast<std::size_t>(r) * ch_;
            for (int j = 0; j < ch_; ++j) {
                hr[j] = (xr[j] - mean[j]) * inv_std_[j];
                yr[j] = gamma_[j] * hr[j] + beta_[j];
            }
        }
    });

    for (int j = 0; j < ch_; ++j) {
        run_mean_[j] = quantize_f32(momentum_ * run_mean_[j] + (1.0 - momentum_) * mean[j]);
        run_var_[j] = quantize_f32(momentum_ * run_var_[j] + (1.0 - momentum_) * var[j]);
    }
    return y;
}

Tensor BatchNorm::backward(const Tensor& dy) {
    const int rows = dy.batch * dy.pos;
    const int chunks = chunk_count(rows);
    std::vector<std::vector<double>> part(chunks);
    parallel_chunks(rows, [&](int c, int r0, int r1) {
        auto& buf = part[c];
        buf.assign(2 * ch_, 0.0);
        for (int r = r0; r < r1; ++r) {
            const double* dr = dy.v.data() + static_cast<std::size_t>(r) * ch_;
            const double* hr = xhat_.v.data() + static_cast<std::size_t>(r) * ch_;
            for (int j = 0; j < ch_; ++j) {
                buf[j] += dr[j];
                buf[ch_ + j] += dr[j] * hr[j];
            }
        }
    });
    std::vector<double> sum_dy(ch_, 0.0), sum_dy_xhat(ch_, 0.0);
    for (int c = 0; c < chunks; ++c)
        for (int j = 0; j < ch_; ++j) {
            sum_dy[j] += part[c][j];
            sum_dy_xhat[j] += part[c][ch_ + j];
        }
    for (int j = 0; j < ch_; ++j) {
        dbeta_[j] += sum_dy[j];
        dgamma_[j] += sum_dy_xhat[j];
    }

    const double inv_n = 1.0 / static_cast<double>(count_);
    Tensor dx(dy.batch, dy.pos, dy.ch);
    parallel_chunks(rows, [&](int, int r0, int r1) {
        for (int r = r0; r < r1; ++r) {
            const double* dr = dy.v.data() + static_cast<std::size_t>(r) * ch_;
            const double* hr = xhat_.v.data() + static_cast<std::size_t>(r) * ch_;
            double* xr = dx.v.data() + static_cast<std::size_t>(r) * ch_;
            for (int j = 0; j < ch_; ++j) {
                xr[j] = gamma_[j] * inv_std_[j] *
                        (dr[j] - inv_n * sum_dy[j] - hr[j] * inv_n * sum_dy_xhat[j]);
            }
        }
    });
    return dx;
}

Tensor BatchNorm::infer(const Tensor& x, const NoiseCtx&) const {
    if (x.ch != ch_)
        throw std::invalid_argument(name_ + ": channel mismatch");
    Tensor y(x.batch, x.pos, x.ch);
    const int rows = x.batch * x.pos;
    std::vector<double> scale(ch_), shift(ch_);
    for (int j = 0; j < ch_; ++j) {
        scale[j] = gamma_[j] / std::sqrt(run_var_[j] + eps_);
        shift[j] = beta_[j] - scale[j] * run_mean_[j];
    }
    parallel_chunks(rows, [&](int, int r0, int r1) {
        for (int r = r0; r < r1; ++r) {
            const double* xr = x.v.data() + static_cast<std::size_t>(r) * ch_;
            double* yr = y.v.data() + static_cast<std::size_t>(r) * ch_;
            for (int j = 0; j < ch_; ++j) yr[j] = scale[j] * xr[j] + shift[j];
        }
    });
    return y;
}

void BatchNorm::collect_state(std::vector<ParamView>& out) {
    out.push_back({name_ + ".gamma", &gamma_, &dgamma_, {ch_}, true});
    out.push_back({name_ + ".beta", &beta_, &dbeta_, {ch_}, true});
    out.push_back({name_ + ".run_mean", &run_mean_, nullptr, {ch_}, false});
    out.push_back({name_ + ".run_var", &run_var_, nullptr, {ch_}, false});
}

std::string BatchNorm::describe() const {
    return name_ + ": batchnorm(" + std::to_string(ch_) + ")";
}

// ------------------------------------------------------------ Activation

namespace {

double act_apply(Act kind, double x) {
    switch (kind) {
        case Act::linear: return x;
        case Act::elu: return x > 0.0 ? x : std::expm1(x);
        case Act::sigmoid:
            if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
            {
                const double e = std::exp(x);
                return e / (1.0 + e);
            }
    }
    return x;
}

double act_grad_from_y(Act kind, double y) {
    switch (kind) {
        case Act::linear: return 1.0;
        case Act::elu: return y > 0.0 ? 1.0 : y + 1.0;
        case Act::sigmoid: return y * (1.0 - y);
    }
    return 1.0;
}

}  // namespace

Tensor Activation::forward(const Tensor& x) {
    Tensor y(x.batch, x.pos, x.ch);
    parallel_chunks(x.batch, [&](int, int b0, int b1) {
        const std::size_t stride = static_cast<std::size_t>(x.pos) * x.ch;
        for (int bi = b0; bi < b1; ++bi)
            for (std::size_t i = bi * stride; i < (bi + 1) * stride; ++i)
                y.v[i] = act_apply(kind_, x.v[i]);
    });
    y_cache_ = y;
    return y;
}

Tensor Activation::infer(const Tensor& x, const NoiseCtx&) const {
    Tensor y(x.batch, x.pos, x.ch);
    for (std::size_t i = 0; i < x.size(); ++i) y.v[i] = act_apply(kind_, x.v[i]);
    return y;
}

Tensor Activation::backward(const Tensor& dy) {
    Tensor dx(dy.batch, dy.pos, dy.ch);
    for (std::size_t i = 0; i < dy.size(); ++i)
        dx.v[i] = dy.v[i] * act_grad_from_y(kind_, y_cache_.v[i]);
    return dx;
}

std::string Activation::describe() const {
    switch (kind_) {
        case Act::linear: return "linear";
        case Act::elu: return "elu";
        case Act::sigmoid: return "sigmoid";
    }
    return "?";
}

// --------------------------------------------------------------- Reshape

std::pair<int, int> Reshape::output_shape(std::pair<int, int> in) const {
    if (static_cast<long>(in.first) * in.second !=
        static_cast<long>(out_pos_) * out_ch_)
        throw std::invalid_argument("reshape: element count mismatch");
    return {out_pos_, out_ch_};
}

Tensor Reshape::forward(const Tensor& x) {
    in_pos_ = x.pos;
    in_ch_ = x.ch;
    return infer(x, {});
}

Tensor Reshape::infer(const Tensor& x, const NoiseCtx&) const {
    if (static_cast<long>(x.pos) * x.ch != static_cast<long>(out_pos_) * out_ch_)
        throw std::invalid_argument("reshape: element count mismatch");
    Tensor y(x.batch, out_pos_, out_ch_);
    y.v = x.v;  // row-major frame blocks are contiguous
    return y;
}

Tensor Reshape::backward(const Tensor& dy) {
    Tensor dx(dy.batch, in_pos_, in_ch_);
    dx.v = dy.v;
    return dx;
}

std::string Reshape::describe() const {
    return "reshape(" + std::to_string(out_pos_) + "x" + std::to_string(out_ch_) + ")";
}

// ------------------------------------------------------------- PowerNorm

Tensor PowerNorm::forward(const Tensor& x) {
    x_cache_ = x;
    Tensor y(x.batch, x.pos, x.ch);
    scale_.assign(x.batch, 0.0);
    const std::size_t stride = static_cast<std::size_t>(x.pos) * x.ch;
    parallel_chunks(x.batch, [&](int, int b0, int b1) {
        for (int bi = b0; bi < b1; ++bi) {
            double s = 0.0;
            for (std::size_t i = bi * stride; i < (bi + 1) * stride; ++i)
                s += x.v[i] * x.v[i];
            const double p = s / x.pos;  // mean squared norm per position
            if (p <= 0.0)
                throw std::domain_error("power_norm: zero-power frame");
            const double inv = 1.0 / std::sqrt(p);
            scale_[bi] = inv;
            for (std::size_t i = bi * stride; i < (bi + 1) * stride; ++i)
                y.v[i] = x.v[i] * inv;
        }
    });
    return y;
}

Tensor PowerNorm::infer(const Tensor& x, const NoiseCtx&) const {
    Tensor y(x.batch, x.pos, x.ch);
    const std::size_t stride = static_cast<std::size_t>(x.pos) * x.ch;
    for (int bi = 0; bi < x.batch; ++bi) {
        double s = 0.0;
        for (std::size_t i = bi * stride; i < (bi + 1) * stride; ++i)
            s += x.v[i] * x.v[i];
        const double p = s / x.pos;
        if (p <= 0.0)
            throw std::domain_error("power_norm: zero-power frame");
        const double inv = 1.0 / std::sqrt(p);
        for (std::size_t i = bi * stride; i < (bi + 1) * stride; ++i)
            y.v[i] = x.v[i] * inv;
    }
    return y;
}

Tensor PowerNorm::backward(const Tensor& dy) {
    const Tensor& x = x_cache_;
    Tensor dx(x.batch, x.pos, x.ch);
    const std::size_t stride = static_cast<std::size_t>(x.pos) * x.ch;
    parallel_chunks(x.batch, [&](int, int b0, int b1) {
        for (int bi = b0; bi < b1; ++bi) {
            const double inv = scale_[bi];                // 1/s
            double dot = 0.0;
            for (std::size_t i = bi * stride; i < (bi + 1) * stride; ++i)
                dot += dy.v[i] * x.v[i];
            // d/dx_k (x_k / s) with s^2 = sum x^2 / P:
            // dx_k = dy_k / s - x_k * (dy . x) / (P s^3)
            const double coef = dot * inv * inv * inv / x.pos;
            for (std::size_t i = bi * stride; i < (bi + 1) * stride; ++i)
                dx.v[i] = dy.v[i] * inv - x.v[i] * coef;
        }
    });
    return dx;
}

// ------------------------------------------------------- GaussianChannel

void GaussianChannel::set_train_noise(double n0, std::uint64_t seed,
                                      std::uint64_t frame_base) {
    if (n0 < 0.0)
        throw std::domain_error("gaussian_channel: n0 must be >= 0");
    n0_ = n0;
    seed_ = seed;
    frame_base_ = frame_base;
}

namespace {

Tensor channel_apply(const Tensor& x, double n0, std::uint64_t seed,
                     std::uint64_t frame_base) {
    if (n0 == 0.0) return x;
    const double sigma = std::sqrt(n0 / 2.0);
    Tensor y(x.batch, x.pos, x.ch);
    const std::size_t stride = static_cast<std::size_t>(x.pos) * x.ch;
    parallel_chunks(x.batch, [&](int, int b0, int b1) {
        for (int bi = b0; bi < b1; ++bi) {
            const std::uint64_t stream = rng::stream_id(
                rng::StreamKind::train_noise, frame_base + bi);
            const double* xr = x.v.data() + bi * stride;
            double* yr = y.v.data() + bi * stride;
            for (std::size_t i = 0; i < stride; ++i)
                yr[i] = xr[i] + sigma * rng::gaussian(seed, stream, i);
        }
    });
    return y;
}

}  // namespace

Tensor GaussianChannel::forward(const Tensor& x) {
    return channel_apply(x, n0_, seed_, frame_base_);
}

Tensor GaussianChannel::infer(const Tensor& x, const NoiseCtx& ctx) const {
    if (ctx.n0 == 0.0) return x;
    const double sigma = std::sqrt(ctx.n0 / 2.0);
    Tensor y(x.batch, x.pos, x.ch);
    const std::size_t stride = static_cast<std::size_t>(x.pos) * x.ch;
    for (int bi = 0; bi < x.batch; ++bi) {
        const std::uint64_t stream =
            rng::stream_id(rng::StreamKind::noise, ctx.frame_base + bi);
        const double* xr = x.v.data() + bi * stride;
        double* yr = y.v.data() + bi * stride;
        for (std::size_t i = 0; i < stride; ++i)
            yr[i] = xr[i] + sigma * rng::gaussian(ctx.seed, stream, i);
    }
    return y;
}

Tensor GaussianChannel::backward(const Tensor& dy) { return dy; }

// ------------------------------------------------------------------ loss

double bce_loss(const Tensor& pred, const Tensor& target, Tensor* dpred) {
    if (!pred.same_shape(target))
        throw std::invalid_argument("bce_loss: shape mismatch");
    constexpr double lo = 1e-7;
    constexpr double hi = 1.0 - 1e-7;
    const std::size_t total = pred.size();
    const int rows = pred.batch;
    const std::size_t stride = total / (rows > 0 ? rows : 1);
    const int chunks = chunk_count(rows);
    std::vector<double> part(chunks, 0.0);
    if (dpred) *dpred = Tensor(pred.batch, pred.pos, pred.ch);
    parallel_chunks(rows, [&](int c, int b0, int b1) {
        double acc = 0.0;
        for (int bi = b0; bi < b1; ++bi) {
            for (std::size_t i = bi * stride; i < (bi + 1) * stride; ++i) {
                const double p_raw = pred.v[i];
                const double p = p_raw < lo ? lo : (p_raw > hi ? hi : p_raw);
                const double t = target.v[i];
                acc += -(t * std::log(p) + (1.0 - t) * std::log1p(-p));
                if (dpred) {
                    const bool clamped = p_raw < lo || p_raw > hi;
                    dpred->v[i] = clamped
                        ? 0.0
                        : (-t / p + (1.0 - t) / (1.0 - p)) / static_cast<double>(total);
                }
            }
        }
        part[c] = acc;
    });
    double loss = 0.0;
    for (double a : part) loss += a;
    return loss / static_cast<double>(total);
}

// ------------------------------------------------------------------ Adam

void Adam::step(const std::vector<ParamView>& params) {
    if (m_.empty()) {
        m_.resize(params.size());
        v_.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i)
            if (params[i].trainable) {
                m_[i].assign(params[i].count(), 0.0);
                v_[i].assign(params[i].count(), 0.0);
            }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i].trainable) continue;
        auto& val = *params[i].value;
        const auto& g = *params[i].grad;
        auto& m = m_[i];
        auto& v = v_[i];
        for (std::size_t j = 0; j < val.size(); ++j) {
            m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
            v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            val[j] = quantize_f32(val[j] - cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps));
        }
    }
}

void zero_grads(const std::vector<ParamView>& params) {
    for (const auto& p : params)
        if (p.grad)
            for (double& g : *p.grad) g = 0.0;
}

}  // namespace fblab::nn
