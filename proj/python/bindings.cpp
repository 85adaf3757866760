// Python bindings for the main operations: theory functions, channel and
// QAM plumbing, the polar / Reed-Muller baselines, and the autoencoder
// (build, train, infer, checkpoint io, Monte-Carlo FEP).

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fblab/channel.hpp"
#include "fblab/cnn_ae.hpp"
#include "fblab/fep.hpp"
#include "fblab/harness.hpp"
#include "fblab/modem.hpp"
#include "fblab/nn.hpp"
#include "fblab/polar.hpp"
#include "fblab/reed_muller.hpp"
#include "fblab/rng.hpp"
#include "fblab/theory.hpp"

namespace py = pybind11;
using namespace fblab;

namespace {

// (seed, frames) -> FEP of a trained model at snr_db; releases the GIL.
harness::FepReport estimate_ae_fep(const ae::AeModel& model, double snr_db,
                                   long frames, std::uint64_t seed, int workers) {
    py::gil_scoped_release release;
    harness::AeSystem system(model, snr_db);
    return harness::estimate_fep(system, frames, seed, workers);
}

std::vector<double> theory_curve(int n, double epsilon,
                                 const std::vector<double>& snr_db,
                                 bool include_log_term) {
    theory::FblParams params{n, epsilon};
    std::vector<double> rates;
    rates.reserve(snr_db.size());
    for (double db : snr_db)
        rates.push_back(theory::max_rate_fbl(
            params, theory::SnrPoint::from_db(db).gamma, include_log_term));
    return rates;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "finite-blocklength coding laboratory (C++ core)";
    m.attr("__version__") = "1.0";

    // theory
    m.def("capacity", &theory::capacity, py::arg("gamma"));
    m.def("dispersion", &theory::dispersion, py::arg("gamma"));
    m.def("q_func", &theory::q_func, py::arg("x"));
    m.def("q_inv", &theory::q_inv, py::arg("p"));
    m.def(
        "max_rate_fbl",
        [](long long n, double epsilon, double gamma, bool include_log_term) {
            return theory::max_rate_fbl({n, epsilon}, gamma, include_log_term);
        },
        py::arg("n"), py::arg("epsilon"), py::arg("gamma"),
        py::arg("include_log_term") = true);
    m.def("theory_curve", &theory_curve, py::arg("n"), py::arg("epsilon"),
          py::arg("snr_db"), py::arg("include_log_term") = true);

    // channel
    m.def(
        "normalize_power",
        [](const std::vector<double>& iq) {
            const int n = static_cast<int>(iq.size() / 2);
            return channel::normalize_power(channel::Codeword(n, iq)).iq;
        },
        py::arg("iq"), "Scale an [re0, im0, ...] vector to unit average power.");
    m.def(
        "transmit",
        [](const std::vector<double>& iq, double n0, std::uint64_t seed,
           std::uint64_t stream_id) {
            const int n = static_cast<int>(iq.size() / 2);
            return channel::transmit(channel::Codeword(n, iq), {n0, seed, stream_id});
        },
        py::arg("iq"), py::arg("n0"), py::arg("seed"), py::arg("stream_id") = 0);

    // modem
    py::class_<modem::QamSpec>(m, "QamSpec")
        .def_static("make", &modem::QamSpec::make, py::arg("k_mod"))
        .def_readonly("k_mod", &modem::QamSpec::k_mod)
        .def_readonly("points", &modem::QamSpec::points)
        .def("order", &modem::QamSpec::order);
    m.def(
        "qam_modulate",
        [](const std::vector<std::uint8_t>& bits, const modem::QamSpec& spec) {
            return modem::qam_modulate(bits, spec).iq;
        },
        py::arg("bits"), py::arg("spec"));
    m.def("qam_demodulate_hard", &modem::qam_demodulate_hard, py::arg("iq"),
          py::arg("spec"));
    m.def("estimate_qam_bit_error_rate", &harness::estimate_qam_bit_error_rate,
          py::arg("k_mod"), py::arg("snr_db"), py::arg("min_bits") = 1'000'000,
          py::arg("seed") = 1);

    // polar
    py::class_<polar::PolarCode>(m, "PolarCode")
        .def_static("construct_bsc", &polar::PolarCode::construct_bsc,
                    py::arg("n_code"), py::arg("k_info"), py::arg("p"))
        .def_readonly("n_code", &polar::PolarCode::n_code)
        .def_readonly("k_info", &polar::PolarCode::k_info)
        .def_readonly("info_set", &polar::PolarCode::info_set);
    m.def("bhattacharyya_z", &polar::bhattacharyya_z, py::arg("n_code"), py::arg("p"));
    m.def("polar_encode", &polar::polar_encode, py::arg("msg"), py::arg("code"));
    m.def("sc_decode", &polar::sc_decode, py::arg("llr"), py::arg("code"));

    // reed-muller
    py::class_<rm::RmCode>(m, "RmCode")
        .def_static("make", &rm::RmCode::make, py::arg("r"), py::arg("m"))
        .def_readonly("r", &rm::RmCode::r)
        .def_readonly("m", &rm::RmCode::m)
        .def_readonly("n_code", &rm::RmCode::n_code)
        .def_readonly("k_info", &rm::RmCode::k_info)
        .def("guaranteed_corrections", &rm::RmCode::guaranteed_corrections);
    m.def("rm_encode", &rm::rm_encode, py::arg("msg"), py::arg("code"));
    m.def("rm_decode_reed", &rm::rm_decode_reed, py::arg("hard"), py::arg("code"));

    // autoencoder
    py::class_<ae::AeConfig>(m, "AeConfig")
        .def_readonly("n", &ae::AeConfig::n)
        .def_readonly("k_mod", &ae::AeConfig::k_mod)
        .def_readonly("k_bits", &ae::AeConfig::k_bits)
        .def_readonly("n_coded", &ae::AeConfig::n_coded)
        .def_readonly("sub_count", &ae::AeConfig::sub_count)
        .def_readonly("k_sub", &ae::AeConfig::k_sub)
        .def_readonly("n_sub", &ae::AeConfig::n_sub)
        .def_readonly("m1", &ae::AeConfig::m1)
        .def_readonly("m2", &ae::AeConfig::m2)
        .def_readonly("kernel", &ae::AeConfig::kernel)
        .def_readwrite("train_snr_db", &ae::AeConfig::train_snr_db)
        .def_readwrite("seed", &ae::AeConfig::seed)
        .def_property_readonly("rate", [](const ae::AeConfig& c) { return c.rate.value(); })
        .def_property_readonly("rcod", [](const ae::AeConfig& c) { return c.rcod.value(); });
    m.def(
        "derive_config",
        [](int n, const std::string& rate, const std::string& rcod, int k_mod,
           int m1, int m2, int kernel) {
            return ae::derive_config(n, ae::Rational::parse(rate),
                                     ae::Rational::parse(rcod), k_mod, m1, m2, kernel);
        },
        py::arg("n"), py::arg("rate"), py::arg("rcod"), py::arg("k_mod"),
        py::arg("m1"), py::arg("m2"), py::arg("kernel") = 5);

    py::class_<ae::TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("frames", &ae::TrainConfig::frames)
        .def_readwrite("batch", &ae::TrainConfig::batch)
        .def_readwrite("epochs", &ae::TrainConfig::epochs)
        .def_readwrite("snr_offset_db", &ae::TrainConfig::snr_offset_db)
        .def_property(
            "lr", [](const ae::TrainConfig& t) { return t.adam.lr; },
            [](ae::TrainConfig& t, double v) { t.adam.lr = v; });

    py::class_<ae::AeModel>(m, "AeModel")
        .def(py::init<const ae::AeConfig&>(), py::arg("config"))
        .def("init_params", &ae::AeModel::init_params, py::arg("seed"))
        .def_property_readonly("config", &ae::AeModel::config)
        .def("trainable_params", &ae::AeModel::trainable_params)
        .def("describe", &ae::AeModel::describe)
        .def("shape_chain",
             [](const ae::AeModel& model) {
                 std::vector<std::tuple<std::string, int, int>> out;
                 for (const auto& s : model.shape_chain())
                     out.emplace_back(s.stage, s.pos, s.ch);
                 return out;
             })
        .def(
            "encode",
            [](const ae::AeModel& model, const std::vector<std::uint8_t>& bits) {
                const long k = model.config().k_bits;
                if (bits.size() % k != 0)
                    throw std::invalid_argument("bits must hold whole frames");
                const int batch = static_cast<int>(bits.size() / k);
                nn::Tensor msg(batch, static_cast<int>(k), 1);
                for (std::size_t i = 0; i < bits.size(); ++i)
                    msg.v[i] = bits[i] ? 1.0 : 0.0;
                return model.encode(msg).v;  // (batch * n * 2) reals
            },
            py::arg("bits"), "Eval-mode transmitter; returns batch*n*2 reals.")
        .def(
            "infer",
            [](const ae::AeModel& model, const std::vector<std::uint8_t>& bits,
               double n0, std::uint64_t seed, std::uint64_t frame_base) {
                const long k = model.config().k_bits;
                if (bits.size() % k != 0)
                    throw std::invalid_argument("bits must hold whole frames");
                const int batch = static_cast<int>(bits.size() / k);
                nn::Tensor msg(batch, static_cast<int>(k), 1);
                for (std::size_t i = 0; i < bits.size(); ++i)
                    msg.v[i] = bits[i] ? 1.0 : 0.0;
                return ae::threshold_bits(model.infer_soft(msg, {n0, seed, frame_base}));
            },
            py::arg("bits"), py::arg("n0"), py::arg("seed") = 1,
            py::arg("frame_base") = 0);

    m.def(
        "train",
        [](ae::AeModel& model, const ae::TrainConfig& tc) {
            py::gil_scoped_release release;
            return ae::train(model, tc).loss_trace;
        },
        py::arg("model"), py::arg("train_config"),
        "Train in place; returns the per-step loss trace.");
    m.def("save_checkpoint", &ae::save_checkpoint, py::arg("model"), py::arg("path"));
    m.def("load_checkpoint", &ae::load_checkpoint, py::arg("path"));

    // harness
    py::class_<harness::FepReport>(m, "FepReport")
        .def_readonly("frames", &harness::FepReport::frames)
        .def_readonly("errors", &harness::FepReport::errors)
        .def_readonly("fep", &harness::FepReport::fep)
        .def_readonly("ci_low", &harness::FepReport::ci_low)
        .def_readonly("ci_high", &harness::FepReport::ci_high)
        .def_readonly("seed", &harness::FepReport::seed)
        .def("__repr__", [](const harness::FepReport& r) {
            return "FepReport(frames=" + std::to_string(r.frames) +
                   ", errors=" + std::to_string(r.errors) +
                   ", fep=" + std::to_string(r.fep) + ")";
        });
    m.def("estimate_ae_fep", &estimate_ae_fep, py::arg("model"), py::arg("snr_db"),
          py::arg("frames"), py::arg("seed") = 1, py::arg("workers") = 1);

    m.def("set_threads", &nn::set_threads, py::arg("threads"),
          "Cap batch-internal worker threads (results do not depend on it).");
}
