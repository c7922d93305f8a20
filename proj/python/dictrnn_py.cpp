// Python bindings for the core pipeline. Matrices come back as numpy arrays;
// configs cross the boundary as JSON strings (wrapped into dicts in
// dictrnn/__init__.py).

#include "dictrnn/errors.hpp"
#include "dictrnn/harness.hpp"
#include "dictrnn/verify.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <iostream>
#include <sstream>

namespace py = pybind11;
using namespace dictrnn;

namespace {

ExperimentConfig parse_config(std::string const& text)
{
    return config_from_json(nlohmann::json::parse(text));
}

template <class F>
py::tuple capture(F&& f)
{
    std::ostringstream log;
    int const rc = f(log);
    return py::make_tuple(rc, log.str());
}

} // namespace

PYBIND11_MODULE(_dictrnn, m)
{
    m.doc() = "Dictionary-driven RNN that reproduces quantized delay dynamics";

    static py::exception<Error> error(m, "DictrnnError");
    static py::exception<ConfigError> config_error(m, "ConfigError", error.ptr());
    static py::exception<ChecksumMismatch> checksum_error(m, "ChecksumMismatch", error.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p)
                std::rethrow_exception(p);
        } catch (ConfigError const& e) {
            py::set_error(config_error, e.what());
        } catch (ChecksumMismatch const& e) {
            py::set_error(checksum_error, e.what());
        } catch (Error const& e) {
            py::set_error(error, e.what());
        }
    });

    py::enum_<LipschitzMethod>(m, "LipschitzMethod")
        .value("analytic", LipschitzMethod::analytic)
        .value("sampled", LipschitzMethod::sampled);
    py::enum_<ActivationMode>(m, "ActivationMode")
        .value("tabulated", ActivationMode::tabulated)
        .value("analytic", ActivationMode::analytic);
    py::enum_<RunStatus>(m, "RunStatus")
        .value("completed", RunStatus::completed)
        .value("drift_exceeded", RunStatus::drift_exceeded)
        .value("snap_miss", RunStatus::snap_miss);
    py::enum_<BoundVerdict>(m, "BoundVerdict")
        .value("holds", BoundVerdict::holds)
        .value("violated", BoundVerdict::violated)
        .value("inconclusive", BoundVerdict::inconclusive);
    py::enum_<CheckStatus>(m, "CheckStatus")
        .value("pass_", CheckStatus::pass)
        .value("fail", CheckStatus::fail)
        .value("blocked", CheckStatus::blocked)
        .value("inconclusive", CheckStatus::inconclusive);

    py::class_<DelayMap>(m, "DelayMap")
        .def_readonly("name", &DelayMap::name)
        .def_readonly("params", &DelayMap::params)
        .def_readonly("L", &DelayMap::L)
        .def_readonly("analytic_lipschitz", &DelayMap::analytic_lipschitz)
        .def("apply", [](DelayMap const& d, std::vector<double> const& w) { return d.apply(w); });
    m.def("make_map", &make_map, py::arg("name"), py::arg("params") = Params{});
    m.def("registered_maps", &registered_maps);

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("values", &Trajectory::values)
        .def_readonly("origin_index", &Trajectory::origin_index)
        .def_readonly("map_name", &Trajectory::map_name)
        .def_property_readonly("t_min", &Trajectory::t_min)
        .def_property_readonly("t_max", &Trajectory::t_max)
        .def("at", &Trajectory::at);
    m.def(
        "generate",
        [](DelayMap const& map, std::vector<double> const& seed, long train_len, long eval_len, long burn_in) {
            return generate(map, seed, train_len, eval_len, burn_in);
        },
        py::arg("map"), py::arg("seed_window"), py::arg("train_len"), py::arg("eval_len"),
        py::arg("burn_in") = 0);

    py::class_<LipschitzCertificate>(m, "LipschitzCertificate")
        .def_readonly("e_lambda", &LipschitzCertificate::e_lambda)
        .def_readonly("method", &LipschitzCertificate::method)
        .def_readonly("sample_count", &LipschitzCertificate::sample_count);
    m.def("lipschitz", &lipschitz, py::arg("map"), py::arg("mode"), py::arg("n_pairs") = 100000,
          py::arg("seed") = 11);

    py::class_<Grid>(m, "Grid")
        .def_readonly("points", &Grid::points)
        .def_readonly("midpoints", &Grid::midpoints)
        .def_readonly("radius_x_K", &Grid::radius_x_K)
        .def_readonly("retries_used", &Grid::retries_used)
        .def_property_readonly("K", &Grid::K)
        .def_property_readonly("radius", &Grid::radius)
        .def("quantize", &Grid::quantize);
    m.def("make_grid", &make_grid);
    m.def(
        "build_grid",
        [](int K, std::vector<double> const& head, double jitter, std::uint64_t seed, int retries) {
            return build_grid(K, head, jitter, seed, retries);
        },
        py::arg("K"), py::arg("head") = std::vector<double>{}, py::arg("jitter_scale") = 1e-3,
        py::arg("seed") = 1, py::arg("max_retries") = 16);
    m.def("quantize", py::overload_cast<double, Grid const&>(&quantize));

    py::class_<QuantizedSeries>(m, "QuantizedSeries")
        .def_readonly("indices", &QuantizedSeries::indices)
        .def_readonly("t_begin", &QuantizedSeries::t_begin);
    m.def("quantize_series", &quantize_series);

    py::class_<Entry>(m, "Entry")
        .def_readonly("key", &Entry::key)
        .def_readonly("value_index", &Entry::value_index)
        .def_readonly("provenance", &Entry::provenance);
    py::class_<Dictionary>(m, "Dictionary")
        .def_property_readonly("L", &Dictionary::L)
        .def_property_readonly("K", &Dictionary::K)
        .def_property_readonly("N", &Dictionary::N)
        .def_property_readonly("grid", &Dictionary::grid)
        .def_property_readonly("entries", &Dictionary::entries)
        .def("find", &Dictionary::find)
        .def("value", &Dictionary::value);
    m.def("build_dictionary", &build_dictionary);
    m.def("initial_window", &initial_window);

    py::class_<GenericityReport>(m, "GenericityReport")
        .def_readonly("generic", &GenericityReport::generic)
        .def_readonly("worst_pair", &GenericityReport::worst_pair)
        .def_readonly("worst_gap", &GenericityReport::worst_gap);
    m.def("check_genericity", &check_genericity, py::arg("dictionary"), py::arg("tolerance") = 1e-9);
    py::class_<ClosureReport>(m, "ClosureReport")
        .def_readonly("closed", &ClosureReport::closed)
        .def_readonly("failing_keys", &ClosureReport::failing_keys)
        .def_readonly("successor_map", &ClosureReport::successor_map);
    m.def("check_closure", &check_closure);

    py::class_<SymbolicOrbit>(m, "SymbolicOrbit")
        .def_readonly("indices", &SymbolicOrbit::indices)
        .def_readonly("entries", &SymbolicOrbit::entries)
        .def_readonly("preperiod", &SymbolicOrbit::preperiod)
        .def_readonly("period", &SymbolicOrbit::period)
        .def("index_at", &SymbolicOrbit::index_at);
    m.def(
        "generate_ystar",
        [](Dictionary const& d, std::vector<int> const& init, long horizon) {
            return generate_ystar(d, init, horizon);
        },
        py::arg("dictionary"), py::arg("init"), py::arg("horizon"));

    py::class_<ActivationSpec>(m, "ActivationSpec")
        .def(py::init<>())
        .def_readwrite("mode", &ActivationSpec::mode)
        .def_readwrite("beta", &ActivationSpec::beta)
        .def_readwrite("table", &ActivationSpec::table)
        .def_readwrite("snap_tolerance", &ActivationSpec::snap_tolerance);
    py::class_<WeightSet>(m, "WeightSet")
        .def_readonly("N", &WeightSet::N)
        .def_readonly("L", &WeightSet::L)
        .def_readonly("K", &WeightSet::K)
        .def_readonly("X", &WeightSet::X)
        .def_readonly("Y", &WeightSet::Y)
        .def_readonly("W", &WeightSet::W)
        .def_readonly("W_in", &WeightSet::W_in)
        .def_readonly("W_out", &WeightSet::W_out)
        .def_readonly("r0", &WeightSet::r0)
        .def_readonly("yhat0", &WeightSet::yhat0)
        .def_readonly("cond_estimate", &WeightSet::cond_estimate)
        .def_readonly("rank_W", &WeightSet::rank_W)
        .def_readonly("retries_used", &WeightSet::retries_used)
        .def_readonly("init_window", &WeightSet::init_window);
    m.def(
        "build_weights",
        [](Dictionary const& d, std::vector<int> const& init, ActivationSpec const& spec, std::uint64_t h_seed,
           int max_retries) { return build_weights(d, init, spec, h_seed, max_retries); },
        py::arg("dictionary"), py::arg("init"), py::arg("spec") = ActivationSpec{}, py::arg("h_seed") = 7,
        py::arg("max_retries") = 16);
    m.def("numerical_rank", &numerical_rank, py::arg("M"), py::arg("rel") = 1e-8);

    py::class_<RunRow>(m, "RunRow")
        .def_readonly("t", &RunRow::t)
        .def_readonly("yhat", &RunRow::yhat)
        .def_readonly("n_t", &RunRow::n_t)
        .def_readonly("onehot_residual", &RunRow::onehot_residual)
        .def_readonly("drift", &RunRow::drift);
    py::class_<RunRecord>(m, "RunRecord")
        .def_readonly("rows", &RunRecord::rows)
        .def_readonly("status", &RunRecord::status)
        .def_readonly("message", &RunRecord::message);
    m.def("run", &run, py::arg("weights"), py::arg("T"), py::arg("dictionary"));

    py::class_<BoundRow>(m, "BoundRow")
        .def_readonly("t", &BoundRow::t)
        .def_readonly("y", &BoundRow::y)
        .def_readonly("ystar", &BoundRow::ystar)
        .def_readonly("yhat", &BoundRow::yhat)
        .def_readonly("abs_err", &BoundRow::abs_err)
        .def_readonly("bound", &BoundRow::bound)
        .def_readonly("slack", &BoundRow::slack)
        .def_readonly("active", &BoundRow::active);
    py::class_<BoundReport>(m, "BoundReport")
        .def_readonly("rows", &BoundReport::rows)
        .def_readonly("first_violation", &BoundReport::first_violation)
        .def_readonly("monotone_vacuity", &BoundReport::monotone_vacuity)
        .def_readonly("verdict", &BoundReport::verdict);
    m.def("check_bound", &check_bound);
    m.def("tracking_error_bound", &tracking_error_bound);

    py::class_<LedgerLine>(m, "LedgerLine")
        .def_readonly("invariant", &LedgerLine::invariant)
        .def_readonly("status", &LedgerLine::status)
        .def_readonly("detail", &LedgerLine::detail);
    py::class_<Ledger>(m, "Ledger")
        .def_property_readonly("lines", &Ledger::lines)
        .def_property_readonly("passed", &Ledger::passed)
        .def("to_jsonl", &Ledger::to_jsonl);
    py::class_<Evaluation>(m, "Evaluation")
        .def_readonly("ystar", &Evaluation::ystar)
        .def_readonly("run", &Evaluation::run)
        .def_readonly("bound", &Evaluation::bound);
    py::class_<PipelineResult>(m, "PipelineResult")
        .def_readonly("trajectory", &PipelineResult::trajectory)
        .def_readonly("certificate", &PipelineResult::certificate)
        .def_readonly("grid", &PipelineResult::grid)
        .def_readonly("dictionary", &PipelineResult::dictionary)
        .def_readonly("weights", &PipelineResult::weights)
        .def_readonly("evaluation", &PipelineResult::evaluation)
        .def_readonly("ledger", &PipelineResult::ledger);

    m.def("_normalize_config", [](std::string const& text) {
        auto const c = parse_config(text);
        c.validate();
        return config_to_json(c).dump();
    });
    m.def("_full_suite", [](std::string const& text) { return full_suite(parse_config(text)); });
    m.def("_cmd_generate", [](std::string const& t) { return capture([&](auto& log) { return cmd_generate(parse_config(t), log); }); });
    m.def("_cmd_build", [](std::string const& t) { return capture([&](auto& log) { return cmd_build(parse_config(t), log); }); });
    m.def("_cmd_run", [](std::string const& t) { return capture([&](auto& log) { return cmd_run(parse_config(t), log); }); });
    m.def("_cmd_verify", [](std::string const& t) { return capture([&](auto& log) { return cmd_verify(parse_config(t), log); }); });
    m.def("cmd_report", [](fs::path const& dir) { return capture([&](auto& log) { return cmd_report(dir, log); }); });
    m.def("load_artifact_manifest", [](fs::path const& dir) { return load_artifact(dir).manifest.dump(); });
}
