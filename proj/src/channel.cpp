#include "fblab/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fblab/rng.hpp"

namespace fblab::rng {

double gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t i) {
    const std::uint64_t pair = i >> 1;
    const double u1 = uniform_pos(seed, stream, 2 * pair);
    const double u2 = uniform(seed, stream, 2 * pair + 1);
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return (i & 1) ? r * std::sin(theta) : r * std::cos(theta);
}

}  // namespace fblab::rng

namespace fblab::channel {

Codeword::Codeword(int n_symbols, std::vector<double> data)
    : n(n_symbols), iq(std::move(data)) {
    if (static_cast<std::size_t>(2 * n) != iq.size())
        throw std::invalid_argument("Codeword: data size must be 2*n");
}

double Codeword::power() const {
    double s = 0.0;
    for (double v : iq) s += v * v;
    return s / n;
}

Codeword normalize_power(const Codeword& raw) {
    const double p = raw.power();
    if (p <= 0.0)
        throw std::domain_error("normalize_power: all-zero codeword");
    const double scale = 1.0 / std::sqrt(p);
    Codeword out = raw;
    for (double& v : out.iq) v *= scale;
    return out;
}

std::vector<double> transmit(const Codeword& x, const NoiseSpec& noise) {
    if (!(noise.n0 > 0.0))
        throw std::domain_error("transmit: n0 must be positive");
    const double sigma = std::sqrt(noise.n0 / 2.0);
    std::vector<double> y(x.iq.size());
    for (std::size_t j = 0; j < y.size(); ++j)
        y[j] = x.iq[j] + sigma * rng::gaussian(noise.seed, noise.stream_id, j);
    return y;
}

}  // namespace fblab::channel
