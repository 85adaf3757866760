// Checkpoint format FBLAE1: a magic line, one JSON manifest line (format
// version, configuration, array table, trainable parameter count, seed),
// then every state array as little-endian float32 in manifest order.

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "fblab/cnn_ae.hpp"
#include "json.hpp"

namespace fblab::ae {

namespace {

constexpr const char* kMagic = "FBLAE1";
constexpr int kFormatVersion = 1;

void put_f32_le(std::ostream& os, float f) {
    std::uint32_t u;
    static_assert(sizeof(u) == sizeof(f));
    std::memcpy(&u, &f, 4);
    const unsigned char b[4] = {
        static_cast<unsigned char>(u & 0xff),
        static_cast<unsigned char>((u >> 8) & 0xff),
        static_cast<unsigned char>((u >> 16) & 0xff),
        static_cast<unsigned char>((u >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

float get_f32_le(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw std::runtime_error("checkpoint: truncated parameter data");
    const std::uint32_t u = static_cast<std::uint32_t>(b[0]) |
                            (static_cast<std::uint32_t>(b[1]) << 8) |
                            (static_cast<std::uint32_t>(b[2]) << 16) |
                            (static_cast<std::uint32_t>(b[3]) << 24);
    float f;
    std::memcpy(&f, &u, 4);
    return f;
}

}  // namespace

void save_checkpoint(AeModel& model, const std::string& path) {
    const AeConfig& cfg = model.config();
    auto views = model.state();

    nlohmann::json manifest;
    manifest["format_version"] = kFormatVersion;
    manifest["config"] = {
        {"n", cfg.n},           {"rate", cfg.rate.str()},
        {"rcod", cfg.rcod.str()}, {"k_mod", cfg.k_mod},
        {"m1", cfg.m1},         {"m2", cfg.m2},
        {"kernel", cfg.kernel}, {"train_snr_db", cfg.train_snr_db},
        {"seed", cfg.seed}};
    nlohmann::json arrays = nlohmann::json::array();
    std::size_t trainable = 0;
    for (const auto& v : views) {
        arrays.push_back({{"name", v.name},
                          {"shape", v.shape},
                          {"count", v.count()},
                          {"trainable", v.trainable}});
        if (v.trainable) trainable += v.count();
    }
    manifest["arrays"] = arrays;
    manifest["trainable_params"] = trainable;

    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot open " + path);
    os << kMagic << '\n' << manifest.dump() << '\n';
    for (const auto& v : views)
        for (double x : *v.value) put_f32_le(os, static_cast<float>(x));
    if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

std::unique_ptr<AeModel> load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
    std::string magic, manifest_line;
    std::getline(is, magic);
    if (magic != kMagic)
        throw std::runtime_error("checkpoint: bad magic string in " + path);
    std::getline(is, manifest_line);
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(manifest_line);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("checkpoint: bad manifest: ") + e.what());
    }
    if (manifest.at("format_version").get<int>() != kFormatVersion)
        throw std::runtime_error("checkpoint: unsupported format version");

    const auto& jc = manifest.at("config");
    AeConfig cfg = derive_config(
        jc.at("n").get<int>(), Rational::parse(jc.at("rate").get<std::string>()),
        Rational::parse(jc.at("rcod").get<std::string>()),
        jc.at("k_mod").get<int>(), jc.at("m1").get<int>(), jc.at("m2").get<int>(),
        jc.at("kernel").get<int>());
    cfg.train_snr_db = jc.at("train_snr_db").get<double>();
    cfg.seed = jc.at("seed").get<std::uint64_t>();

    auto model = std::make_unique<AeModel>(cfg);
    auto views = model->state();
    const auto& arrays = manifest.at("arrays");
    if (arrays.size() != views.size())
        throw std::runtime_error("checkpoint: array table does not match model");
    std::size_t declared_trainable = 0;
    for (std::size_t i = 0; i < views.size(); ++i) {
        const auto& a = arrays[i];
        if (a.at("name").get<std::string>() != views[i].name ||
            a.at("count").get<std::size_t>() != views[i].count() ||
            a.at("trainable").get<bool>() != views[i].trainable)
            throw std::runtime_error("checkpoint: array mismatch at '" +
                                     views[i].name + "'");
        if (views[i].trainable) declared_trainable += views[i].count();
    }
    if (manifest.at("trainable_params").get<std::size_t>() != declared_trainable ||
        declared_trainable != model->trainable_params())
        throw std::runtime_error("checkpoint: trainable parameter count mismatch");

    for (auto& v : views)
        for (double& x : *v.value) x = static_cast<double>(get_f32_le(is));
    return model;
}

}  // namespace fblab::ae
