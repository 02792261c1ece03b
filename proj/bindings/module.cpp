#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ergokit/config.hpp"
#include "ergokit/errors.hpp"
#include "ergokit/group.hpp"
#include "ergokit/runner.hpp"

namespace py = pybind11;
using namespace ergo;

namespace {

// Same resolution order as the command line: existing file, then bundled
// preset name, then raw configuration text.
ExperimentConfig resolve(const std::string& config) {
    if (std::filesystem::exists(config)) return load_config_file(config);
    if (is_preset(config)) return parse_config_text(preset_text(config));
    // a string without a brace is a mistyped name, not inline JSON
    if (config.find('{') == std::string::npos)
        throw config_error("no such config file or preset: " + config);
    return parse_config_text(config);
}

py::dict result_dict(const RunResult& res) {
    py::dict d;
    d["exit_code"] = res.exit_code;
    d["id"] = res.id;
    d["outcome"] = res.outcome;
    d["series_files"] = res.series_files;
    d["summary_path"] = res.summary_path;
    d["summary"] = res.summary_text;
    py::list checks;
    for (const VerdictLine& v : res.verdicts)
        checks.append(py::make_tuple(v.label, v.file, v.text));
    d["checks"] = checks;
    return d;
}

RunOptions options_for(const std::string& out, std::optional<std::uint64_t> seed, int threads) {
    RunOptions opt;
    opt.out_dir = out;
    opt.seed = seed;
    opt.threads = threads;
    return opt;
}

FolnerSequence sequence_by_name(const std::string& name) {
    if (name == "z-initial") return FolnerSequence::z_initial();
    if (name == "z-symmetric") return FolnerSequence::z_symmetric();
    if (name == "z2-squares") return FolnerSequence::z2_squares();
    throw config_error("unknown sequence preset: " + name);
}

GroupElement element_from(const std::vector<long long>& coords, int rank) {
    if ((int)coords.size() != rank)
        throw config_error("element rank does not match the sequence");
    return GroupElement(coords);
}

} // namespace

PYBIND11_MODULE(_ergokit, m) {
    m.doc() = "Deterministic averaging experiments over group actions: run "
              "configurations or bundled presets and inspect exact window defects.";

    py::register_exception<config_error>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<hypothesis_error>(m, "HypothesisError", PyExc_RuntimeError);
    py::register_exception<inequality_failure>(m, "InequalityFailure", PyExc_RuntimeError);

    m.def("presets", &preset_names, "Names of the bundled experiment presets.");
    m.def("preset_config", &preset_text, py::arg("name"),
          "Configuration text of a bundled preset.");

    m.def(
        "run",
        [](const std::string& config, const std::string& out,
           std::optional<std::uint64_t> seed, int threads) {
            // run_experiment forwards inequality-fuzz configurations itself
            return result_dict(run_experiment(resolve(config), options_for(out, seed, threads)));
        },
        py::arg("config"), py::arg("out"), py::arg("seed") = std::nullopt,
        py::arg("threads") = 1,
        "Run a configuration (file path, preset name, or raw text) and return the "
        "result summary. Series files and summary.txt are written under `out`.");

    m.def(
        "fuzz",
        [](const std::string& config, const std::string& out,
           std::optional<std::uint64_t> seed, int threads) {
            return result_dict(run_fuzz(resolve(config), options_for(out, seed, threads)));
        },
        py::arg("config"), py::arg("out"), py::arg("seed") = std::nullopt,
        py::arg("threads") = 1,
        "Run the randomized inequality trials described by the configuration.");

    m.def(
        "folner_defect",
        [](const std::string& sequence, long long n, const std::vector<long long>& g) {
            FolnerSequence seq = sequence_by_name(sequence);
            return rat_to_string(
                folner_defect(seq, n, element_from(g, seq.model().rank())));
        },
        py::arg("sequence"), py::arg("n"), py::arg("g"),
        "Exact window defect mu(Lambda_n delta Lambda_n g) / mu(Lambda_n) as a "
        "rational string.");

    m.def(
        "uniform_defect",
        [](const std::string& sequence, long long n, long long m) {
            return rat_to_string(uniform_defect(sequence_by_name(sequence), n, m));
        },
        py::arg("sequence"), py::arg("n"), py::arg("m"),
        "Exact worst defect over shifts g in Lambda_m, as a rational string.");

    m.def(
        "quotient_measure",
        [](const std::string& sequence, long long n) {
            FolnerSequence seq = sequence_by_name(sequence);
            FiniteSubset win = seq.at(n);
            FiniteSubset quot = win.quotient();
            return py::make_tuple((std::size_t)quot.elements().size(),
                                  rat_to_string(quot.measure() / win.measure()));
        },
        py::arg("sequence"), py::arg("n"),
        "Size of Lambda_n^{-1} Lambda_n and the exact measure ratio to Lambda_n.");
}
