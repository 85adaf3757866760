// fblab: finite-blocklength coding laboratory.
//
// Subcommands: theory, train, eval, sweep, rate-search, baseline.
// Exit codes: 0 success, 1 error, 2 completed with a soft ordering failure.
//
// Every run is deterministic given (config, seed); evaluation results are
// independent of --workers because Monte-Carlo streams are indexed by frame.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "fblab/cnn_ae.hpp"
#include "fblab/experiment.hpp"
#include "fblab/fep.hpp"
#include "fblab/harness.hpp"
#include "fblab/nn.hpp"
#include "fblab/theory.hpp"
#include "json.hpp"

namespace {

using namespace fblab;

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// "a:b:step" inclusive range or comma list "0,5,10".
std::vector<double> parse_snr_list(const std::string& text) {
    std::vector<double> out;
    if (text.find(':') != std::string::npos) {
        double a, b, step = 1.0;
        const auto c1 = text.find(':');
        const auto c2 = text.find(':', c1 + 1);
        a = std::stod(text.substr(0, c1));
        if (c2 == std::string::npos) {
            b = std::stod(text.substr(c1 + 1));
        } else {
            b = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
            step = std::stod(text.substr(c2 + 1));
        }
        if (step <= 0.0) throw CLI::ValidationError("--snr", "step must be > 0");
        for (double v = a; v <= b + 1e-12; v += step) out.push_back(v);
    } else {
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) out.push_back(std::stod(item));
    }
    if (out.empty()) throw CLI::ValidationError("--snr", "empty SNR list");
    return out;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open output file '" + path + "'");
    return os;
}

void write_run_manifest(const std::string& path,
                        const experiment::ExperimentConfig& cfg,
                        const std::string& command, const nlohmann::json& extra) {
    nlohmann::json j;
    j["command"] = command;
    j["config_hash"] = cfg.config_hash();
    j["seed"] = cfg.seed;
    j["config"] = nlohmann::json::parse(cfg.canonical_json());
    j["results"] = extra;
    std::ofstream os(path);
    os << j.dump(2) << '\n';
}

void print_fep(const harness::FepReport& rep) {
    std::cout << "frames=" << rep.frames << " errors=" << rep.errors
              << " fep=" << rep.fep << " ci95=[" << rep.ci_low << ", "
              << rep.ci_high << "] seed=" << rep.seed << '\n';
}

int cmd_theory(int n, double epsilon, const std::string& snr_text,
               bool no_log_term, const std::string& out_path) {
    const auto snrs = parse_snr_list(snr_text);
    theory::FblParams params{n, epsilon};
    params.validate();
    std::vector<harness::RatePoint> points;
    for (double snr : snrs) {
        harness::RatePoint p;
        p.scheme = harness::Scheme::theory;
        p.snr_db = snr;
        p.rate = theory::max_rate_fbl(params, theory::SnrPoint::from_db(snr).gamma,
                                      !no_log_term);
        p.meets_target = true;
        points.push_back(p);
    }
    if (out_path.empty()) {
        harness::write_csv(std::cout, points, n, epsilon);
    } else {
        auto os = open_out(out_path);
        harness::write_csv(os, points, n, epsilon);
    }
    return 0;
}

int cmd_train(const experiment::ExperimentConfig& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    nn::set_threads(resolve_workers(cfg.workers));

    auto ae_cfg = cfg.ae_config();
    ae::AeModel model(ae_cfg);
    model.init_params(cfg.seed);
    std::cout << "# " << model.describe() << "\n# trainable parameters: "
              << model.trainable_params() << '\n';

    const auto tc = cfg.train_config();
    const auto result = ae::train(model, tc);

    const std::string ckpt = (fs::path(out_dir) / "checkpoint.fblae").string();
    save_checkpoint(model, ckpt);

    const std::string trace = (fs::path(out_dir) / "loss_trace.csv").string();
    {
        auto os = open_out(trace);
        os << "step,loss\n";
        char buf[32];
        for (std::size_t i = 0; i < result.loss_trace.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", result.loss_trace[i]);
            os << i << ',' << buf << '\n';
        }
    }

    // held-out FEP at the operating point
    harness::AeSystem system(model, cfg.snr_db);
    const auto rep = harness::estimate_fep(system, cfg.eval.frames, cfg.seed + 1,
                                           resolve_workers(cfg.workers));
    print_fep(rep);

    write_run_manifest((fs::path(out_dir) / "manifest.json").string(), cfg, "train",
                       {{"checkpoint", ckpt},
                        {"loss_trace", trace},
                        {"steps", result.steps},
                        {"final_loss", result.final_loss},
                        {"test_frames", rep.frames},
                        {"test_fep", rep.fep},
                        {"test_ci_high", rep.ci_high}});
    std::cout << "# wrote " << ckpt << '\n';
    return 0;
}

int cmd_eval(const std::string& ckpt_path, double snr_db, long frames,
             std::uint64_t seed, int workers, const std::string& out_path) {
    if (frames < 1) throw CLI::ValidationError("--frames", "must be >= 1");
    auto model = ae::load_checkpoint(ckpt_path);
    harness::AeSystem system(*model, snr_db);
    const auto rep = harness::estimate_fep(system, frames, seed,
                                           resolve_workers(workers));
    print_fep(rep);
    if (!out_path.empty()) {
        auto os = open_out(out_path);
        os << "snr_db,frames,errors,fep,ci_low,ci_high,seed\n"
           << snr_db << ',' << rep.frames << ',' << rep.errors << ',' << rep.fep
           << ',' << rep.ci_low << ',' << rep.ci_high << ',' << rep.seed << '\n';
    }
    return 0;
}

int cmd_rate_search(const experiment::ExperimentConfig& cfg,
                    const std::string& scheme_name, const std::string& out_path) {
    nn::set_threads(resolve_workers(cfg.workers));
    auto sc = cfg.search_config();
    sc.workers = resolve_workers(cfg.workers);
    sc.log = &std::cerr;
    const auto point = harness::rate_search(
        harness::scheme_from_string(scheme_name), cfg.n, cfg.epsilon, cfg.snr_db,
        cfg.ladder(), sc);
    std::vector<harness::RatePoint> points{point};
    if (out_path.empty()) {
        harness::write_csv(std::cout, points, cfg.n, cfg.epsilon);
    } else {
        auto os = open_out(out_path);
        harness::write_csv(os, points, cfg.n, cfg.epsilon);
    }
    return 0;
}

int cmd_sweep(const experiment::ExperimentConfig& cfg, const std::string& out_path) {
    nn::set_threads(resolve_workers(cfg.workers));
    auto sc = cfg.search_config();
    sc.workers = resolve_workers(cfg.workers);
    sc.log = &std::cerr;
    std::vector<harness::Scheme> schemes;
    for (const auto& s : cfg.sweep.schemes)
        schemes.push_back(harness::scheme_from_string(s));
    const auto result =
        harness::sweep(schemes, cfg.sweep.snr_db, cfg.n, cfg.epsilon, cfg.ladder(), sc);
    if (out_path.empty()) {
        harness::write_csv(std::cout, result.points, cfg.n, cfg.epsilon);
    } else {
        auto os = open_out(out_path);
        harness::write_csv(os, result.points, cfg.n, cfg.epsilon);
        write_run_manifest(out_path + ".manifest.json", cfg, "sweep",
                           {{"ordering_ok", result.ordering_ok},
                            {"diagnostics", result.ordering_diagnostics}});
    }
    if (!result.ordering_ok) {
        std::cerr << "SOFT-FAIL: learned code did not dominate the baselines\n";
        for (const auto& d : result.ordering_diagnostics)
            std::cerr << "  " << d << '\n';
        return 2;
    }
    return 0;
}

int cmd_baseline(const std::string& scheme_name, int n, double epsilon,
                 const std::string& rcod_text, int k_mod, double snr_db,
                 long frames, std::uint64_t seed, int workers,
                 const std::string& out_path) {
    const auto scheme = harness::scheme_from_string(scheme_name);
    if (scheme != harness::Scheme::polar_qam && scheme != harness::Scheme::rm_qam)
        throw CLI::ValidationError("--scheme", "baseline expects polar_qam or rm_qam");
    const auto rcod = ae::Rational::parse(rcod_text);
    std::unique_ptr<harness::CodedSystem> system;
    if (scheme == harness::Scheme::polar_qam)
        system = std::make_unique<harness::PolarQamSystem>(n, rcod, k_mod, snr_db, seed);
    else
        system = std::make_unique<harness::RmQamSystem>(n, rcod, k_mod, snr_db);
    const auto rep =
        harness::estimate_fep(*system, frames, seed, resolve_workers(workers));
    print_fep(rep);
    harness::RatePoint p;
    p.scheme = scheme;
    p.snr_db = snr_db;
    p.rate = system->rate();
    p.rcod = ae::Rational(system->message_bits(), static_cast<long>(n) * k_mod);
    p.k_mod = k_mod;
    p.fep = rep;
    p.meets_target = rep.ci_high <= epsilon;
    std::vector<harness::RatePoint> points{p};
    if (out_path.empty()) {
        harness::write_csv(std::cout, points, n, epsilon);
    } else {
        auto os = open_out(out_path);
        harness::write_csv(os, points, n, epsilon);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-blocklength coding laboratory"};
    app.require_subcommand(1);

    std::uint64_t seed_flag = 0;
    bool seed_set = false;
    int workers_flag = 0;
    std::string out_path;
    app.add_flag_callback("--version", [] {
        std::cout << "fblab 1.0\n";
        std::exit(0);
    });
    auto* seed_opt = app.add_option("--seed", seed_flag, "master seed (overrides config)");
    app.add_option("--workers", workers_flag, "evaluation worker threads (0 = hardware)");
    app.add_option("--out", out_path, "output file or directory");

    // theory
    auto* theory_cmd = app.add_subcommand("theory", "normal-approximation rate curve");
    int t_n = 128;
    double t_eps = 1e-2;
    std::string t_snr;
    bool t_no_log = false;
    theory_cmd->add_option("--n", t_n, "blocklength");
    theory_cmd->add_option("--eps", t_eps, "target frame error probability");
    theory_cmd->add_option("--snr", t_snr, "dB list 'a,b,c' or range 'a:b:step'")
        ->required();
    theory_cmd->add_flag("--no-log-term", t_no_log, "drop the log2(n)/(2n) term");

    // config-driven commands
    std::string config_path;
    auto* train_cmd = app.add_subcommand("train", "train the autoencoder from a config");
    train_cmd->add_option("--config", config_path, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    auto* sweep_cmd = app.add_subcommand("sweep", "multi-scheme rate-vs-SNR sweep");
    sweep_cmd->add_option("--config", config_path, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    auto* search_cmd = app.add_subcommand("rate-search", "best rate at one SNR");
    std::string search_scheme = "cnn_ae";
    search_cmd->add_option("--config", config_path, "experiment config (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    search_cmd->add_option("--scheme", search_scheme, "theory|cnn_ae|polar_qam|rm_qam");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Monte-Carlo FEP of a checkpoint");
    std::string ckpt_path;
    double e_snr = 10.0;
    long e_frames = 1'000'000;
    eval_cmd->add_option("--checkpoint", ckpt_path, "checkpoint path")
        ->required()
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("--snr-db", e_snr, "evaluation SNR in dB");
    eval_cmd->add_option("--frames", e_frames, "Monte-Carlo frames");

    // baseline
    auto* base_cmd = app.add_subcommand("baseline", "evaluate one coded-QAM baseline");
    std::string b_scheme = "polar_qam", b_rcod = "1/2";
    int b_n = 128, b_kmod = 2;
    double b_snr = 10.0, b_eps = 1e-2;
    long b_frames = 100'000;
    base_cmd->add_option("--scheme", b_scheme, "polar_qam|rm_qam");
    base_cmd->add_option("--n", b_n, "blocklength (symbols)");
    base_cmd->add_option("--eps", b_eps, "target frame error probability");
    base_cmd->add_option("--rcod", b_rcod, "coding rate, e.g. 1/2");
    base_cmd->add_option("--kmod", b_kmod, "bits per symbol");
    base_cmd->add_option("--snr-db", b_snr, "SNR in dB");
    base_cmd->add_option("--frames", b_frames, "Monte-Carlo frames");

    try {
        app.parse(argc, argv);
        seed_set = seed_opt->count() > 0;

        if (theory_cmd->parsed())
            return cmd_theory(t_n, t_eps, t_snr, t_no_log, out_path);

        if (eval_cmd->parsed())
            return cmd_eval(ckpt_path, e_snr, e_frames, seed_set ? seed_flag : 1,
                            workers_flag, out_path);

        if (base_cmd->parsed())
            return cmd_baseline(b_scheme, b_n, b_eps, b_rcod, b_kmod, b_snr,
                                b_frames, seed_set ? seed_flag : 1, workers_flag,
                                out_path);

        auto cfg = experiment::ExperimentConfig::load(config_path);
        if (seed_set) cfg.seed = seed_flag;
        if (workers_flag > 0) cfg.workers = workers_flag;

        if (train_cmd->parsed())
            return cmd_train(cfg, out_path.empty() ? "." : out_path);
        if (sweep_cmd->parsed()) return cmd_sweep(cfg, out_path);
        if (search_cmd->parsed()) return cmd_rate_search(cfg, search_scheme, out_path);
        return 1;
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
