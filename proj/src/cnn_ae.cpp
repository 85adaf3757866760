#include "fblab/cnn_ae.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "fblab/rng.hpp"
#include "fblab/theory.hpp"

namespace fblab::ae {

// ---------------------------------------------------------------- Rational

Rational::Rational(long n, long d) : num(n), den(d) {
    if (den == 0) throw std::domain_error("Rational: zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
}

Rational Rational::parse(const std::string& text) {
    const auto slash = text.find('/');
    try {
        if (slash == std::string::npos) return Rational(std::stol(text), 1);
        return Rational(std::stol(text.substr(0, slash)),
                        std::stol(text.substr(slash + 1)));
    } catch (const std::exception&) {
        throw std::invalid_argument("Rational: cannot parse '" + text + "'");
    }
}

std::string Rational::str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
}

Rational operator*(const Rational& a, int k) { return Rational(a.num * k, a.den); }

// ------------------------------------------------------------ derive_config

AeConfig derive_config(int n, Rational rate, Rational rcod, int k_mod,
                       int m1, int m2, int kernel) {
    if (n < 1 || k_mod < 1)
        throw std::domain_error("derive_config: n and k_mod must be >= 1");
    if (m1 < 1 || m2 < 1)
        throw std::domain_error("derive_config: M1 and M2 must be >= 1");
    if (!(rcod * k_mod == rate))
        throw std::invalid_argument("derive_config: R_cod * k_mod != R");
    const long n_coded = static_cast<long>(n) * k_mod;
    if ((n_coded * rcod.num) % rcod.den != 0)
        throw std::invalid_argument("derive_config: K = n k_mod R_cod is not integral");
    const long k_bits = n_coded * rcod.num / rcod.den;
    if (k_bits < 1)
        throw std::invalid_argument("derive_config: K must be >= 1");

    AeConfig cfg;
    cfg.n = n;
    cfg.rate = rate;
    cfg.rcod = rcod;
    cfg.k_mod = k_mod;
    cfg.k_bits = k_bits;
    cfg.n_coded = n_coded;
    cfg.sub_count = std::gcd(k_bits, n_coded);
    cfg.k_sub = k_bits / cfg.sub_count;
    cfg.n_sub = n_coded / cfg.sub_count;
    cfg.m1 = m1;
    cfg.m2 = m2;
    cfg.kernel = kernel;
    return cfg;
}

// ----------------------------------------------------------------- AeModel

AeModel::AeModel(const AeConfig& cfg) : cfg_(cfg) {
    using namespace fblab::nn;
    const int L = static_cast<int>(cfg.sub_count);
    const int Kp = static_cast<int>(cfg.k_sub);
    const int Np = static_cast<int>(cfg.n_sub);
    const int k = cfg.kernel;

    auto conv_block = [&](const std::string& name, int in, int out, Act act,
                          bool bn) {
        layers_.push_back(std::make_unique<Conv1d>(name, in, out, k));
        if (act != Act::linear) layers_.push_back(std::make_unique<Activation>(act));
        if (bn) layers_.push_back(std::make_unique<BatchNorm>(name + ".bn", out));
    };

    // encoder: (K, 1) -> (L, K') -> (L, M1) -> (L, M1) -> (L, N')
    layers_.push_back(std::make_unique<Reshape>(L, Kp));
    conv_block("enc1", Kp, cfg.m1, Act::elu, true);
    conv_block("enc2", cfg.m1, cfg.m1, Act::elu, true);
    conv_block("enc3", cfg.m1, Np, Act::elu, true);
    // modulator: (n, k_mod) -> (n, M2) -> (n, 2)
    layers_.push_back(std::make_unique<Reshape>(cfg.n, cfg.k_mod));
    conv_block("mod1", cfg.k_mod, cfg.m2, Act::elu, true);
    conv_block("mod2", cfg.m2, 2, Act::linear, true);
    norm_index_ = static_cast<int>(layers_.size());
    layers_.push_back(std::make_unique<PowerNorm>());
    auto channel = std::make_unique<GaussianChannel>();
    channel_ = channel.get();
    layers_.push_back(std::move(channel));
    // demodulator: (n, 2) -> (n, M2) -> (n, k_mod)
    conv_block("dem1", 2, cfg.m2, Act::elu, true);
    conv_block("dem2", cfg.m2, cfg.k_mod, Act::linear, true);
    // decoder: (L, N') -> (L, M1) -> (L, M1) -> (L, K') -> (K, 1)
    layers_.push_back(std::make_unique<Reshape>(L, Np));
    conv_block("dec1", Np, cfg.m1, Act::elu, true);
    conv_block("dec2", cfg.m1, cfg.m1, Act::elu, true);
    // final layer: sigmoid output, no batch norm so outputs stay in (0, 1)
    conv_block("dec3", cfg.m1, Kp, Act::sigmoid, false);
    layers_.push_back(std::make_unique<Reshape>(static_cast<int>(cfg.k_bits), 1));
}

void AeModel::init_params(std::uint64_t seed) {
    cfg_.seed = seed;
    std::uint64_t ordinal = 0;
    for (auto& layer : layers_) {
        if (auto* conv = dynamic_cast<nn::Conv1d*>(layer.get())) {
            conv->init_glorot(seed, rng::stream_id(rng::StreamKind::init, ordinal));
        }
        ++ordinal;
    }
}

nn::Tensor AeModel::forward_train(const nn::Tensor& msg, double train_n0,
                                  std::uint64_t seed,
                                  std::uint64_t noise_frame_base) {
    channel_->set_train_noise(train_n0, seed, noise_frame_base);
    nn::Tensor x = msg;
    for (auto& layer : layers_) x = layer->forward(x);
    return x;
}

void AeModel::backward(const nn::Tensor& dout) {
    nn::Tensor g = dout;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
        g = (*it)->backward(g);
}

nn::Tensor AeModel::infer_soft(const nn::Tensor& msg,
                               const nn::NoiseCtx& ctx) const {
    nn::Tensor x = msg;
    for (const auto& layer : layers_) x = layer->infer(x, ctx);
    return x;
}

nn::Tensor AeModel::encode(const nn::Tensor& msg) const {
    nn::NoiseCtx quiet{};
    nn::Tensor x = msg;
    for (int i = 0; i <= norm_index_; ++i) x = layers_[i]->infer(x, quiet);
    return x;
}

nn::Tensor AeModel::encode_train(const nn::Tensor& msg) {
    nn::Tensor x = msg;
    for (int i = 0; i <= norm_index_; ++i) x = layers_[i]->forward(x);
    return x;
}

std::vector<nn::ParamView> AeModel::state() {
    std::vector<nn::ParamView> views;
    for (auto& layer : layers_) layer->collect_state(views);
    return views;
}

std::size_t AeModel::trainable_params() const {
    std::vector<nn::ParamView> views;
    for (auto& layer : layers_)
        layer->collect_state(views);
    std::size_t count = 0;
    for (const auto& v : views)
        if (v.trainable) count += v.count();
    return count;
}

void AeModel::zero_grads() {
    auto views = state();
    nn::zero_grads(views);
}

std::vector<StageShape> AeModel::shape_chain() const {
    std::vector<StageShape> chain;
    std::pair<int, int> shape{static_cast<int>(cfg_.k_bits), 1};
    chain.push_back({"input", shape.first, shape.second});
    for (const auto& layer : layers_) {
        shape = layer->output_shape(shape);
        // batch norm and activations keep shapes; report the named stages
        const std::string d = layer->describe();
        if (d.find("conv1d") != std::string::npos ||
            d.find("reshape") != std::string::npos ||
            d == "power_norm" || d == "gaussian_channel") {
            chain.push_back({d, shape.first, shape.second});
        }
    }
    return chain;
}

std::string AeModel::describe() const {
    std::ostringstream os;
    os << "cnn_ae n=" << cfg_.n << " R=" << cfg_.rate.str()
       << " rcod=" << cfg_.rcod.str() << " kmod=" << cfg_.k_mod
       << " K=" << cfg_.k_bits << " N=" << cfg_.n_coded
       << " L=" << cfg_.sub_count << " K'=" << cfg_.k_sub
       << " N'=" << cfg_.n_sub << " M1=" << cfg_.m1 << " M2=" << cfg_.m2
       << " kernel=" << cfg_.kernel;
    return os.str();
}

// ------------------------------------------------------------------ train

nn::Tensor message_tensor(std::uint64_t seed, std::uint64_t kind_stream_base,
                          std::uint64_t frame_base, int batch, long k_bits) {
    nn::Tensor t(batch, static_cast<int>(k_bits), 1);
    for (int b = 0; b < batch; ++b) {
        const std::uint64_t stream = kind_stream_base | (frame_base + b);
        for (long i = 0; i < k_bits; ++i)
            t.at(b, static_cast<int>(i), 0) =
                static_cast<double>(rng::bit(seed, stream, i));
    }
    return t;
}

std::vector<std::uint8_t> threshold_bits(const nn::Tensor& soft) {
    std::vector<std::uint8_t> bits(soft.size());
    for (std::size_t i = 0; i < soft.size(); ++i)
        bits[i] = soft.v[i] >= 0.5 ? 1 : 0;
    return bits;
}

TrainResult train(AeModel& model, const TrainConfig& tc) {
    const AeConfig& cfg = model.config();
    if (tc.frames < tc.batch)
        throw std::invalid_argument("train: frames must be >= batch");
    const double train_snr_db = cfg.train_snr_db + tc.snr_offset_db;
    const double gamma = theory::SnrPoint::from_db(train_snr_db).gamma;
    const double n0 = 1.0 / gamma;

    const long steps_per_epoch = tc.frames / tc.batch;
    nn::Adam adam(tc.adam);
    auto views = model.state();

    TrainResult result;
    result.loss_trace.reserve(static_cast<std::size_t>(steps_per_epoch) * tc.epochs);

    const std::uint64_t msg_base =
        rng::stream_id(rng::StreamKind::train_message, 0);
    std::uint64_t global_step = 0;
    for (int epoch = 0; epoch < tc.epochs; ++epoch) {
        for (long s = 0; s < steps_per_epoch; ++s, ++global_step) {
            const std::uint64_t data_frame = static_cast<std::uint64_t>(s) * tc.batch;
            nn::Tensor msg = message_tensor(cfg.seed, msg_base, data_frame,
                                            tc.batch, cfg.k_bits);
            // fresh noise every step: streams indexed by a global sample counter
            nn::Tensor out = model.forward_train(
                msg, n0, cfg.seed, global_step * static_cast<std::uint64_t>(tc.batch));
            nn::Tensor dout;
            const double loss = nn::bce_loss(out, msg, &dout);
            if (!std::isfinite(loss)) {
                std::ostringstream os;
                os << "train: loss diverged (non-finite) at epoch " << epoch
                   << " step " << s << "; lr=" << tc.adam.lr
                   << " batch=" << tc.batch;
                throw std::runtime_error(os.str());
            }
            result.loss_trace.push_back(loss);
            nn::zero_grads(views);
            model.backward(dout);
            adam.step(views);
        }
    }
    result.steps = static_cast<long>(result.loss_trace.size());
    result.final_loss = result.loss_trace.empty() ? 0.0 : result.loss_trace.back();
    return result;
}

}  // namespace fblab::ae
