#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "fblab/nn.hpp"
#include "fblab/rng.hpp"
#include "oracles.hpp"

using namespace fblab;
using nn::Act;
using nn::Tensor;

namespace {

Tensor random_tensor(int b, int p, int c, std::uint64_t stream, double scale = 1.0) {
    Tensor t(b, p, c);
    for (std::size_t i = 0; i < t.size(); ++i)
        t.v[i] = scale * (2.0 * rng::uniform(99, stream, i) - 1.0);
    return t;
}

Tensor random_binary(int b, int p, int c, std::uint64_t stream) {
    Tensor t(b, p, c);
    for (std::size_t i = 0; i < t.size(); ++i)
        t.v[i] = rng::bit(99, stream, i);
    return t;
}

// Deterministic scalar readout J = sum w_i y_i over a layer's output.
struct Readout {
    Tensor weights;
    explicit Readout(const Tensor& shape_like, std::uint64_t stream)
        : weights(shape_like.batch, shape_like.pos, shape_like.ch) {
        for (std::size_t i = 0; i < weights.size(); ++i)
            weights.v[i] = 2.0 * rng::uniform(7, stream, i) - 1.0;
    }
    double value(const Tensor& y) const {
        double s = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) s += weights.v[i] * y.v[i];
        return s;
    }
    Tensor grad() const { return weights; }
};

// Checks dJ/dx and dJ/dparams of one layer against central differences.
void check_layer_gradients(nn::Layer& layer, const Tensor& x0, double tol,
                           std::uint64_t stream) {
    Tensor x = x0;
    Tensor y0 = layer.forward(x);
    const Readout readout(y0, stream);

    // input gradient via an explicit input "parameter"
    std::vector<double> xgrad(x.size(), 0.0);
    auto forward_loss = [&]() {
        Tensor y = layer.forward(x);
        return readout.value(y);
    };
    auto loss_backward = [&]() {
        std::vector<nn::ParamView> views;
        layer.collect_state(views);
        nn::zero_grads(views);
        Tensor y = layer.forward(x);
        const double j = readout.value(y);
        Tensor dx = layer.backward(readout.grad());
        xgrad.assign(dx.v.begin(), dx.v.end());
        return j;
    };

    loss_backward();
    const auto xg = xgrad;
    double worst_x = 0.0;
    const std::size_t stride = std::max<std::size_t>(1, x.size() / 48);
    for (std::size_t i = 0; i < x.size(); i += stride) {
        const double saved = x.v[i];
        const double h = 1e-4;
        x.v[i] = saved + h;
        const double fp = forward_loss();
        x.v[i] = saved - h;
        const double fm = forward_loss();
        x.v[i] = saved;
        const double fd = (fp - fm) / (2.0 * h);
        worst_x = std::max(worst_x, std::fabs(fd - xg[i]) /
                                        std::max({1.0, std::fabs(fd), std::fabs(xg[i])}));
    }
    CHECK(worst_x < tol);

    // parameter gradients
    std::vector<nn::ParamView> views;
    layer.collect_state(views);
    if (!views.empty()) {
        const auto result = oracle::grad_check(loss_backward, forward_loss, views);
        INFO("worst parameter: ", result.worst_name, "[", result.worst_index, "]");
        CHECK(result.worst < tol);
    }
}

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("conv1d identity with unit kernel") {
    nn::Conv1d conv("c", 3, 3, 1);
    std::vector<nn::ParamView> views;
    conv.collect_state(views);
    // w[0][ic][oc] = identity
    for (int ic = 0; ic < 3; ++ic)
        for (int oc = 0; oc < 3; ++oc)
            (*views[0].value)[ic * 3 + oc] = ic == oc ? 1.0 : 0.0;
    const Tensor x = random_tensor(2, 5, 3, 11);
    const Tensor y = conv.infer(x, {});
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(y.v[i] == doctest::Approx(x.v[i]).epsilon(1e-15));
}

TEST_CASE("conv1d kernel width 1 equals a per-position affine map") {
    nn::Conv1d conv("c", 4, 2, 1);
    conv.init_glorot(3, 17);
    std::vector<nn::ParamView> views;
    conv.collect_state(views);
    const auto& w = *views[0].value;  // [ic][oc]
    const auto& b = *views[1].value;
    const Tensor x = random_tensor(3, 6, 4, 12);
    const Tensor y = conv.infer(x, {});
    for (int bi = 0; bi < 3; ++bi)
        for (int p = 0; p < 6; ++p)
            for (int oc = 0; oc < 2; ++oc) {
                double ref = b[oc];
                for (int ic = 0; ic < 4; ++ic)
                    ref += x.at(bi, p, ic) * w[ic * 2 + oc];
                CHECK(y.at(bi, p, oc) == doctest::Approx(ref).epsilon(1e-12));
            }
}

TEST_CASE("conv1d parameter count formula") {
    for (int t = 0; t < 10; ++t) {
        const int in = 1 + static_cast<int>(rng::uniform(5, 60, t) * 7);
        const int out = 1 + static_cast<int>(rng::uniform(5, 61, t) * 9);
        const int k = 1 + 2 * static_cast<int>(rng::uniform(5, 62, t) * 3);
        nn::Conv1d conv("c", in, out, k);
        CHECK(conv.param_count() ==
              static_cast<std::size_t>(k) * in * out + out);
    }
}

TEST_CASE("conv1d same-padding shape and channel mismatch error") {
    nn::Conv1d conv("c", 2, 5, 5);
    const Tensor x = random_tensor(2, 9, 2, 13);
    CHECK(conv.infer(x, {}).pos == 9);
    CHECK(conv.infer(x, {}).ch == 5);
    const Tensor bad = random_tensor(2, 9, 3, 14);
    CHECK_THROWS_AS(conv.forward(bad), std::invalid_argument);
}

TEST_CASE("conv1d gradients (2x4x3 input, kernel 3)") {
    nn::Conv1d conv("c", 3, 2, 3);
    conv.init_glorot(21, 5);
    check_layer_gradients(conv, random_tensor(2, 4, 3, 15), 1e-4, 31);
}

TEST_CASE("activation values") {
    nn::Activation elu(Act::elu);
    const Tensor x = [&] {
        Tensor t(1, 1, 3);
        t.v = {0.0, 1.0, -40.0};
        return t;
    }();
    const Tensor y = elu.infer(x, {});
    CHECK(y.v[0] == 0.0);
    CHECK(y.v[1] == 1.0);
    CHECK(y.v[2] == doctest::Approx(-1.0).epsilon(1e-12));

    nn::Activation sig(Act::sigmoid);
    Tensor z(1, 1, 3);
    z.v = {0.0, 800.0, -800.0};
    const Tensor s = sig.infer(z, {});
    CHECK(s.v[0] == 0.5);
    CHECK(s.v[1] == doctest::Approx(1.0));
    CHECK(s.v[2] == doctest::Approx(0.0));
    CHECK(std::isfinite(s.v[2]));
}

TEST_CASE("activation gradients") {
    for (Act kind : {Act::elu, Act::sigmoid, Act::linear}) {
        nn::Activation act(kind);
        check_layer_gradients(act, random_tensor(2, 3, 4, 40 + static_cast<int>(kind)),
                              1e-4, 50 + static_cast<int>(kind));
    }
}

TEST_CASE("batchnorm train-mode statistics") {
    nn::BatchNorm bn("bn", 3);
    const Tensor x = random_tensor(8, 4, 3, 16, 2.5);
    const Tensor y = bn.forward(x);
    // gamma=1, beta=0: output should have zero mean, unit variance per channel
    for (int c = 0; c < 3; ++c) {
        double mean = 0.0, var = 0.0;
        for (int b = 0; b < 8; ++b)
            for (int p = 0; p < 4; ++p) mean += y.at(b, p, c);
        mean /= 32;
        for (int b = 0; b < 8; ++b)
            for (int p = 0; p < 4; ++p)
                var += (y.at(b, p, c) - mean) * (y.at(b, p, c) - mean);
        var /= 32;
        CHECK(std::fabs(mean) < 1e-5);
        CHECK(std::fabs(var - 1.0) < 2e-3);  // eps = 1e-3 shrinks the variance
    }
}

TEST_CASE("batchnorm eval mode with unit running stats is the identity") {
    nn::BatchNorm bn("bn", 4, /*eps=*/1e-12);
    const Tensor x = random_tensor(3, 5, 4, 17);
    const Tensor y = bn.infer(x, {});
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(y.v[i] == doctest::Approx(x.v[i]).epsilon(1e-9));
}

TEST_CASE("batchnorm rejects degenerate batches in train mode") {
    nn::BatchNorm bn("bn", 2);
    const Tensor x = random_tensor(1, 5, 2, 18);
    CHECK_THROWS_AS(bn.forward(x), std::domain_error);
}

TEST_CASE("batchnorm gradients (8x4x3 input)") {
    nn::BatchNorm bn("bn", 3);
    check_layer_gradients(bn, random_tensor(8, 4, 3, 19, 1.7), 1e-3, 77);
}

TEST_CASE("reshape roundtrip and backward") {
    nn::Reshape reshape(6, 2);
    const Tensor x = random_tensor(2, 3, 4, 20);
    Tensor y = reshape.forward(x);
    CHECK(y.pos == 6);
    CHECK(y.ch == 2);
    CHECK(y.v == x.v);
    const Tensor dx = reshape.backward(y);
    CHECK(dx.pos == 3);
    CHECK(dx.ch == 4);
    CHECK(dx.v == x.v);
    nn::Reshape bad(5, 2);
    CHECK_THROWS_AS(bad.forward(x), std::invalid_argument);
}

TEST_CASE("power normalization enforces unit average power") {
    nn::PowerNorm norm;
    const Tensor x = random_tensor(4, 16, 2, 21, 3.0);
    const Tensor y = norm.forward(x);
    for (int b = 0; b < 4; ++b) {
        double s = 0.0;
        for (int p = 0; p < 16; ++p)
            s += y.at(b, p, 0) * y.at(b, p, 0) + y.at(b, p, 1) * y.at(b, p, 1);
        CHECK(std::fabs(s / 16 - 1.0) < 1e-12);
    }
    Tensor zero(1, 4, 2);
    CHECK_THROWS_AS(norm.forward(zero), std::domain_error);
}

TEST_CASE("power normalization gradients") {
    nn::PowerNorm norm;
    check_layer_gradients(norm, random_tensor(3, 5, 2, 22, 1.3), 1e-4, 78);
}

TEST_CASE("gaussian channel layer is deterministic and pass-through backward") {
    nn::GaussianChannel chan;
    chan.set_train_noise(0.25, 42, 1000);
    const Tensor x = random_tensor(3, 8, 2, 23);
    const Tensor y1 = chan.forward(x);
    const Tensor y2 = chan.forward(x);
    CHECK(y1.v == y2.v);
    const Tensor dy = random_tensor(3, 8, 2, 24);
    CHECK(chan.backward(dy).v == dy.v);
    // n0 = 0 is a pass-through
    chan.set_train_noise(0.0, 42, 1000);
    CHECK(chan.forward(x).v == x.v);
    // infer uses the ctx streams: same ctx, same noise
    const nn::NoiseCtx ctx{0.25, 7, 5};
    CHECK(chan.infer(x, ctx).v == chan.infer(x, ctx).v);
}

TEST_CASE("bce loss values and gradient") {
    Tensor pred(2, 3, 1), target(2, 3, 1);
    for (int i = 0; i < 6; ++i) {
        pred.v[i] = 0.5;
        target.v[i] = i % 2;
    }
    CHECK(nn::bce_loss(pred, target, nullptr) ==
          doctest::Approx(std::log(2.0)).epsilon(1e-12));

    // pred == target (clamped) gives a loss at the 1e-7 clamp scale
    for (int i = 0; i < 6; ++i) pred.v[i] = target.v[i];
    CHECK(nn::bce_loss(pred, target, nullptr) < 2e-7);

    Tensor p2 = random_tensor(2, 3, 1, 25);
    for (auto& v : p2.v) v = 0.5 + 0.4 * v;  // interior of (0,1)
    const Tensor t2 = random_binary(2, 3, 1, 26);
    Tensor grad;
    const double l0 = nn::bce_loss(p2, t2, &grad);
    CHECK(std::isfinite(l0));
    double worst = 0.0;
    for (std::size_t i = 0; i < p2.size(); ++i) {
        const double saved = p2.v[i];
        const double h = 1e-6;
        p2.v[i] = saved + h;
        const double fp = nn::bce_loss(p2, t2, nullptr);
        p2.v[i] = saved - h;
        const double fm = nn::bce_loss(p2, t2, nullptr);
        p2.v[i] = saved;
        const double fd = (fp - fm) / (2.0 * h);
        worst = std::max(worst, std::fabs(fd - grad.v[i]) /
                                    std::max({1.0, std::fabs(fd), std::fabs(grad.v[i])}));
    }
    CHECK(worst < 1e-5);
    Tensor bad(1, 2, 1);
    CHECK_THROWS_AS(nn::bce_loss(p2, bad, nullptr), std::invalid_argument);
}

TEST_CASE("adam descends on a scalar square") {
    std::vector<double> w{1.0}, g{2.0};  // f(w) = w^2, f'(1) = 2
    std::vector<nn::ParamView> views{{"w", &w, &g, {1}, true}};
    nn::Adam adam({0.001, 0.9, 0.999, 1e-7});
    adam.step(views);
    CHECK(w[0] < 1.0);
    CHECK(w[0] > 0.99);
}

TEST_CASE("adam leaves parameters unchanged on zero gradient") {
    // parameter stores are float32-representable by construction
    std::vector<double> w{nn::quantize_f32(0.7), nn::quantize_f32(-0.3)};
    std::vector<double> g{0.0, 0.0};
    const auto w0 = w;
    std::vector<nn::ParamView> views{{"w", &w, &g, {2}, true}};
    nn::Adam adam;
    adam.step(views);
    CHECK(w == w0);
    CHECK(adam.step_count() == 1);
}

TEST_CASE("adam reaches a tiny gradient on a 5-d convex quadratic") {
    // f(w) = 0.5 (w - w*)^T A (w - w*), A diagonal SPD
    const std::vector<double> a{0.5, 1.0, 2.0, 4.0, 8.0};
    const std::vector<double> wstar{1.0, -2.0, 0.5, 3.0, -1.5};
    std::vector<double> w(5, 0.0), g(5, 0.0);
    std::vector<nn::ParamView> views{{"w", &w, &g, {5}, true}};
    nn::Adam adam({0.05, 0.9, 0.999, 1e-7});
    for (int t = 0; t < 2000; ++t) {
        for (int i = 0; i < 5; ++i) g[i] = a[i] * (w[i] - wstar[i]);
        adam.step(views);
    }
    double norm = 0.0;
    for (int i = 0; i < 5; ++i) {
        const double gi = a[i] * (w[i] - wstar[i]);
        norm += gi * gi;
    }
    CHECK(std::sqrt(norm) < 1e-3);
}

TEST_CASE("parameter writes stay exactly float32 representable") {
    std::vector<double> w{0.1}, g{0.037};
    std::vector<nn::ParamView> views{{"w", &w, &g, {1}, true}};
    // 0.1 is not a float32 value; the first write must quantize the result
    nn::Adam adam;
    adam.step(views);
    CHECK(static_cast<double>(static_cast<float>(w[0])) == w[0]);
}

TEST_CASE("thread count does not change results") {
    nn::Conv1d conv("c", 3, 4, 5);
    conv.init_glorot(5, 6);
    const Tensor x = random_tensor(70, 9, 3, 27);  // spans several chunks
    nn::set_threads(1);
    const Tensor y1 = conv.forward(x);
    const Tensor d1 = conv.backward(random_tensor(70, 9, 4, 28));
    std::vector<nn::ParamView> v1;
    conv.collect_state(v1);
    const auto dw1 = *v1[0].grad;

    nn::set_threads(2);
    nn::zero_grads(v1);
    const Tensor y2 = conv.forward(x);
    const Tensor d2 = conv.backward(random_tensor(70, 9, 4, 28));
    const auto dw2 = *v1[0].grad;
    nn::set_threads(1);

    CHECK(y1.v == y2.v);
    CHECK(d1.v == d2.v);
    CHECK(dw1 == dw2);
}

}  // TEST_SUITE
