#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fedgrid/accounting.hpp"
#include "fedgrid/chain.hpp"
#include "fedgrid/errors.hpp"
#include "fedgrid/fedlearn.hpp"
#include "fedgrid/run.hpp"

namespace py = pybind11;
using namespace fedgrid;

namespace {

ClientDataset make_dataset(const std::vector<std::vector<double>>& features, const std::vector<double>& targets)
{
    if (features.size() != targets.size())
        throw DatasetError("features and targets have different lengths");
    ClientDataset data;
    data.feature_count = features.empty() ? 0 : features.front().size();
    for (std::size_t i = 0; i < features.size(); ++i)
        data.add_row(features[i], targets[i]);
    return data;
}

py::dict summary_dict(const RunSummary& s)
{
    py::list files;
    for (const auto& f : s.files)
        files.append(f.string());
    py::list alerts;
    for (const auto& a : s.alerts)
        alerts.append(py::make_tuple(a.period, static_cast<double>(a.surplus) / 1000.0));
    py::dict out;
    out["ledger_head"] = to_hex(s.ledger_head);
    out["ledger_blocks"] = s.ledger_blocks;
    out["demand_weights"] = s.demand_model.weights;
    out["production_weights"] = s.production_model.weights;
    out["alerts"] = alerts;
    out["files"] = files;
    out["simulated_training_seconds"] = s.simulated_training_seconds;
    return out;
}

} // namespace

PYBIND11_MODULE(_fedgrid, m)
{
    m.doc() = "Federated smart-grid simulator core";

    auto base = py::register_exception<Error>(m, "FedgridError", PyExc_RuntimeError);
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<DatasetError>(m, "DatasetError", base.ptr());
    py::register_exception<AggregationError>(m, "AggregationError", base.ptr());
    py::register_exception<NonFiniteWeightsError>(m, "NonFiniteWeightsError", base.ptr());
    py::register_exception<ContractViolation>(m, "ContractViolation", base.ptr());
    py::register_exception<LedgerError>(m, "LedgerError", base.ptr());
    py::register_exception<ReportError>(m, "ReportError", base.ptr());

    m.def("consumption_share", &consumption_share, py::arg("consumed"), py::arg("potential"));
    m.def("yearly_potential", &yearly_potential, py::arg("monthly"));
    m.def("co2_reduction", &co2_reduction, py::arg("energy_kwh"), py::arg("factor") = 6.9e-4);
    m.def("global_round_time", &global_round_time, py::arg("round_delay"), py::arg("server_seconds"),
          py::arg("local_seconds"));

    m.def(
        "client_update",
        [](std::vector<double> weights, const std::vector<std::vector<double>>& features,
           const std::vector<double>& targets, double learning_rate, int local_epochs, std::size_t batch_size) {
            FedConfig cfg;
            cfg.learning_rate = learning_rate;
            cfg.local_epochs = local_epochs;
            cfg.batch_size = batch_size;
            validate(cfg);
            return client_update(ModelState{std::move(weights), 0}, make_dataset(features, targets), cfg).weights;
        },
        py::arg("weights"), py::arg("features"), py::arg("targets"), py::arg("learning_rate"),
        py::arg("local_epochs") = 1, py::arg("batch_size") = std::size_t{1} << 20);

    m.def(
        "aggregate",
        [](const std::vector<std::pair<std::vector<double>, std::int64_t>>& updates) {
            std::vector<ModelState> states;
            for (const auto& [w, n] : updates)
                states.push_back({w, n});
            const auto out = aggregate(states);
            return py::make_tuple(out.weights, out.sample_count);
        },
        py::arg("updates"), "Sample-weighted mean of (weights, sample_count) pairs.");

    m.def(
        "sha256_hex", [](py::bytes data) {
            const std::string s = data;
            return to_hex(sha256(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size())));
        },
        py::arg("data"));

    m.def(
        "simulate",
        [](const std::string& out_dir, std::optional<std::string> config, std::optional<std::string> readings,
           std::optional<std::uint64_t> seed, std::optional<int> months) {
            RunConfig run;
            run.out_dir = out_dir;
            if (config)
                run.config_path = *config;
            if (readings)
                run.readings_path = *readings;
            run.seed = seed;
            run.months = months;
            RunSummary summary;
            {
                py::gil_scoped_release release;
                summary = simulate(run);
            }
            return summary_dict(summary);
        },
        py::arg("out_dir"), py::arg("config") = py::none(), py::arg("readings") = py::none(),
        py::arg("seed") = py::none(), py::arg("months") = py::none());

    m.def(
        "verify_ledger",
        [](const std::string& path) {
            const auto outcome = verify_ledger(path);
            return py::make_tuple(outcome.exit_code, outcome.message);
        },
        py::arg("path"), "Returns (exit_code, message): 0 valid, 1 tampered, 2 unreadable.");

    m.def(
        "render_report",
        [](const std::string& table, std::optional<std::string> run_dir, const std::string& format) {
            std::optional<std::filesystem::path> dir;
            if (run_dir)
                dir = *run_dir;
            return render_report(dir, table, parse_report_format(format)).content;
        },
        py::arg("table"), py::arg("run_dir") = py::none(), py::arg("format") = "text");

    m.attr("report_tables") = report_table_names();
}
