#include "fblab/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fblab::experiment {

namespace {

using nlohmann::json;

void require_keys(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key))
            throw std::invalid_argument("config: unknown key '" + where + key + "'");
    }
}

std::vector<ae::Rational> parse_rationals(const json& arr) {
    std::vector<ae::Rational> out;
    for (const auto& v : arr) out.push_back(ae::Rational::parse(v.get<std::string>()));
    return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << is.rdbuf();
    return from_json_text(ss.str());
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("config: parse error: ") + e.what());
    }
    ExperimentConfig cfg;
    require_keys(j, "", {"seed", "n", "epsilon", "snr_db", "workers", "ae",
                         "train", "eval", "sweep"});
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("n")) cfg.n = j["n"].get<int>();
    if (j.contains("epsilon")) cfg.epsilon = j["epsilon"].get<double>();
    if (j.contains("snr_db")) cfg.snr_db = j["snr_db"].get<double>();
    if (j.contains("workers")) cfg.workers = j["workers"].get<int>();
    if (j.contains("ae")) {
        const auto& a = j["ae"];
        require_keys(a, "ae.", {"rcod", "kmod", "m1", "m2", "kernel"});
        if (a.contains("rcod"))
            cfg.ae.rcod = ae::Rational::parse(a["rcod"].get<std::string>());
        if (a.contains("kmod")) cfg.ae.k_mod = a["kmod"].get<int>();
        if (a.contains("m1")) cfg.ae.m1 = a["m1"].get<int>();
        if (a.contains("m2")) cfg.ae.m2 = a["m2"].get<int>();
        if (a.contains("kernel")) cfg.ae.kernel = a["kernel"].get<int>();
    }
    if (j.contains("train")) {
        const auto& t = j["train"];
        require_keys(t, "train.",
                     {"frames", "batch", "epochs", "lr", "beta1", "beta2",
                      "eps_opt", "snr_offset_db"});
        if (t.contains("frames")) cfg.train.frames = t["frames"].get<long>();
        if (t.contains("batch")) cfg.train.batch = t["batch"].get<int>();
        if (t.contains("epochs")) cfg.train.epochs = t["epochs"].get<int>();
        if (t.contains("lr")) cfg.train.lr = t["lr"].get<double>();
        if (t.contains("beta1")) cfg.train.beta1 = t["beta1"].get<double>();
        if (t.contains("beta2")) cfg.train.beta2 = t["beta2"].get<double>();
        if (t.contains("eps_opt")) cfg.train.eps_opt = t["eps_opt"].get<double>();
        if (t.contains("snr_offset_db"))
            cfg.train.snr_offset_db = t["snr_offset_db"].get<double>();
    }
    if (j.contains("eval")) {
        const auto& e = j["eval"];
        require_keys(e, "eval.", {"frames"});
        if (e.contains("frames")) cfg.eval.frames = e["frames"].get<long>();
    }
    if (j.contains("sweep")) {
        const auto& s = j["sweep"];
        require_keys(s, "sweep.", {"snr_db", "schemes", "rcod", "kmod", "max_rate"});
        if (s.contains("snr_db"))
            cfg.sweep.snr_db = s["snr_db"].get<std::vector<double>>();
        if (s.contains("schemes"))
            cfg.sweep.schemes = s["schemes"].get<std::vector<std::string>>();
        if (s.contains("rcod")) cfg.sweep.rcod = parse_rationals(s["rcod"]);
        if (s.contains("kmod")) cfg.sweep.k_mod = s["kmod"].get<std::vector<int>>();
        if (s.contains("max_rate")) cfg.sweep.max_rate = s["max_rate"].get<double>();
    }
    return cfg;
}

std::string ExperimentConfig::canonical_json() const {
    json j;
    j["seed"] = seed;
    j["n"] = n;
    j["epsilon"] = epsilon;
    j["snr_db"] = snr_db;
    j["workers"] = workers;
    j["ae"] = {{"rcod", ae.rcod.str()},
               {"kmod", ae.k_mod},
               {"m1", ae.m1},
               {"m2", ae.m2},
               {"kernel", ae.kernel}};
    j["train"] = {{"frames", train.frames},   {"batch", train.batch},
                  {"epochs", train.epochs},   {"lr", train.lr},
                  {"beta1", train.beta1},     {"beta2", train.beta2},
                  {"eps_opt", train.eps_opt}, {"snr_offset_db", train.snr_offset_db}};
    j["eval"] = {{"frames", eval.frames}};
    json rc = json::array();
    for (const auto& r : sweep.rcod) rc.push_back(r.str());
    j["sweep"] = {{"snr_db", sweep.snr_db},
                  {"schemes", sweep.schemes},
                  {"rcod", rc},
                  {"kmod", sweep.k_mod},
                  {"max_rate", sweep.max_rate}};
    return j.dump();  // nlohmann dumps object keys sorted
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t ExperimentConfig::config_hash() const {
    return fnv1a64(canonical_json());
}

ae::TrainConfig ExperimentConfig::train_config() const {
    ae::TrainConfig tc;
    tc.frames = train.frames;
    tc.batch = train.batch;
    tc.epochs = train.epochs;
    tc.adam.lr = train.lr;
    tc.adam.beta1 = train.beta1;
    tc.adam.beta2 = train.beta2;
    tc.adam.eps = train.eps_opt;
    tc.snr_offset_db = train.snr_offset_db;
    return tc;
}

harness::SearchConfig ExperimentConfig::search_config() const {
    harness::SearchConfig sc;
    sc.frames = eval.frames;
    sc.seed = seed;
    sc.workers = workers;
    sc.m1 = ae.m1;
    sc.m2 = ae.m2;
    sc.kernel = ae.kernel;
    sc.train = train_config();
    sc.max_rate = sweep.max_rate;
    return sc;
}

std::vector<harness::Candidate> ExperimentConfig::ladder() const {
    if (sweep.rcod.empty() && sweep.k_mod.empty())
        return harness::default_ladder(n);
    const auto rcods = sweep.rcod.empty()
                           ? std::vector<ae::Rational>{{1, 4}, {1, 3}, {1, 2},
                                                       {2, 3}, {3, 4}, {5, 6}}
                           : sweep.rcod;
    const auto kmods =
        sweep.k_mod.empty() ? std::vector<int>{1, 2, 4, 6, 8} : sweep.k_mod;
    std::vector<harness::Candidate> ladder;
    for (int km : kmods)
        for (const auto& rc : rcods) {
            const long n_coded = static_cast<long>(n) * km;
            if ((n_coded * rc.num) % rc.den != 0) continue;
            ladder.push_back({rc, km});
        }
    std::sort(ladder.begin(), ladder.end(),
              [](const harness::Candidate& a, const harness::Candidate& b) {
                  return a.rate() > b.rate();
              });
    return ladder;
}

ae::AeConfig ExperimentConfig::ae_config() const {
    auto cfg = ae::derive_config(n, ae.rcod * ae.k_mod, ae.rcod, ae.k_mod, ae.m1,
                                 ae.m2, ae.kernel);
    cfg.train_snr_db = snr_db;
    cfg.seed = seed;
    return cfg;
}

}  // namespace fblab::experiment
