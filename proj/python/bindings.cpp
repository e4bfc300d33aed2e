// SPDX-License-Identifier: Apache-2.0

#include "cfmimo/harness.hpp"
#include "cfmimo/mdp.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace cfmimo;

namespace {

Algorithm algorithm_from(const std::string& name)
{
    if (auto a = parse_algorithm(name))
        return *a;
    throw py::value_error("unknown algorithm: " + name);
}

ChannelSnapshot snapshot_of(const Matrix& beta)
{
    ChannelSnapshot s;
    s.beta = beta;
    return s;
}

py::dict metrics_dict(const MetricsReport& m)
{
    py::dict d;
    d["se"] = m.se;
    d["rate"] = m.rate;
    d["serving_size"] = m.serving_size;
    d["ap_load"] = m.ap_load;
    d["mean_rate"] = m.mean_rate;
    d["mean_se"] = m.mean_se;
    d["sum_rate"] = m.sum_rate;
    d["jain"] = m.jain;
    d["pf_objective"] = m.pf_objective;
    d["mean_connections"] = m.mean_connections;
    d["mean_serving_size"] = m.mean_serving_size;
    d["median_se"] = median_se(m);
    d["blocks_with_violations"] = m.blocks_with_violations;
    return d;
}

}  // namespace

PYBIND11_MODULE(_cfmimo, m)
{
    m.doc() = "Cell-free massive MIMO AP-selection simulator";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InvalidAction>(m, "InvalidAction", PyExc_IndexError);

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("seed", &ExperimentConfig::seed)
        .def_readwrite("blocks", &ExperimentConfig::blocks)
        .def_readwrite("workers", &ExperimentConfig::workers)
        .def_readwrite("output_dir", &ExperimentConfig::output_dir)
        .def_readwrite("ap_count", &ExperimentConfig::ap_count)
        .def_readwrite("ue_count", &ExperimentConfig::ue_count)
        .def_readwrite("speed", &ExperimentConfig::speed)
        .def_property(
            "algorithm", [](const ExperimentConfig& c) { return std::string(to_string(c.algorithm)); },
            [](ExperimentConfig& c, const std::string& a) { c.algorithm = algorithm_from(a); })
        .def_property(
            "n_mc", [](const ExperimentConfig& c) { return c.evaluation.n_mc; },
            [](ExperimentConfig& c, int n) { c.evaluation.n_mc = n; })
        .def("validate", &ExperimentConfig::validate)
        .def("serialize", &serialize_config)
        .def("hash", &config_hash);

    m.def("parse_config", [](const std::string& text) { return parse_config(text); }, py::arg("text"));
    m.def("load_config", &load_config, py::arg("path"));

    m.def(
        "run",
        [](const ExperimentConfig& cfg, const std::optional<std::string>& algorithm) {
            const Algorithm a = algorithm ? algorithm_from(*algorithm) : cfg.algorithm;
            RunReport r;
            {
                py::gil_scoped_release release;
                r = run_algorithm(prepare_scenario(cfg), cfg, a);
            }
            return metrics_dict(r.metrics);
        },
        py::arg("config"), py::arg("algorithm") = py::none(),
        "Runs one algorithm over every block and returns its metrics.");

    m.def(
        "select",
        [](const std::string& algorithm, const Matrix& beta, int tau_p, int g_max, double delta, double beta0) {
            const Algorithm a = algorithm_from(algorithm);
            if (a == Algorithm::cuc)
                throw py::value_error("cuc needs a clustered topology; use run()");
            SelectionConstraints c;
            c.tau_p = tau_p;
            c.g_max = g_max;
            c.delta = delta;
            c.beta0 = beta0;
            MdpConfig mdp;
            mdp.constraints = c;
            return select(a, snapshot_of(beta), NetworkTopology{}, c, mdp).matrix();
        },
        py::arg("algorithm"), py::arg("beta"), py::arg("tau_p") = 10, py::arg("g_max") = 30,
        py::arg("delta") = 0.95, py::arg("beta0") = 0.0,
        "Cooperation matrix (M x K, 0/1) for a large-scale SNR matrix.");

    m.def("jain_index", py::overload_cast<const Vector&>(&jain_index), py::arg("values"));
    m.def(
        "simplified_sinr",
        [](const Eigen::MatrixXi& d, const Matrix& beta) {
            return simplified_sinr_all(CooperationMatrix::from_matrix(d), beta);
        },
        py::arg("d"), py::arg("beta"));
    m.def("empirical_cdf", [](std::vector<double> v) {
        std::vector<std::pair<double, double>> out;
        for (const auto& p : empirical_cdf(std::move(v)))
            out.emplace_back(p.value, p.cdf);
        return out;
    });

    py::class_<StepResult>(m, "StepResult")
        .def_readonly("reward", &StepResult::reward)
        .def_readonly("r1", &StepResult::r1)
        .def_readonly("r2", &StepResult::r2)
        .def_readonly("r3", &StepResult::r3)
        .def_readonly("round_end", &StepResult::round_end)
        .def_readonly("done", &StepResult::done);

    py::class_<MdpEnvironment>(m, "MdpEnvironment")
        .def(py::init([](const Matrix& beta, int tau_p, int g_max, int round_budget, double w1, double w2,
                         double w3) {
                 MdpConfig cfg;
                 cfg.constraints.tau_p = tau_p;
                 cfg.constraints.g_max = g_max;
                 cfg.constraints.beta0 = 0.0;
                 cfg.round_budget = round_budget;
                 cfg.w1 = w1;
                 cfg.w2 = w2;
                 cfg.w3 = w3;
                 return MdpEnvironment(beta, cfg);
             }),
             py::arg("beta"), py::arg("tau_p") = 10, py::arg("g_max") = 30, py::arg("round_budget") = 100,
             py::arg("w1") = 1.0, py::arg("w2") = 10.0, py::arg("w3") = 2000.0)
        .def("reset", [](MdpEnvironment& e) { e.reset(); })
        .def("step", &MdpEnvironment::step, py::arg("action"))
        .def("action_space", &MdpEnvironment::action_space)
        .def("greedy_action", &greedy_policy)
        .def_property_readonly("current_ue", &MdpEnvironment::current_ue)
        .def_property_readonly("done", &MdpEnvironment::done)
        .def_property_readonly("cooperation", [](const MdpEnvironment& e) { return e.cooperation().matrix(); });
}
