#include "rtriage/cli.hpp"
#include "rtriage/corpus.hpp"
#include "rtriage/report.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

namespace py = pybind11;
using namespace rtriage;

namespace {

AnalysisOptions make_options(const std::optional<std::vector<std::string>>& rules,
                             const std::optional<std::vector<std::string>>& call_kinds, bool report_bare,
                             double timeout)
{
    auto join = [](const std::vector<std::string>& v) {
        std::string s;
        for (const auto& x : v)
            s += (s.empty() ? "" : ",") + x;
        return s;
    };
    AnalysisOptions o;
    try {
        if (rules)
            o.rules = parse_rule_list(join(*rules));
        if (call_kinds)
            o.detector.call_kinds = parse_call_kind_list(join(*call_kinds));
    }
    catch (const ConfigError& e) {
        throw py::value_error(e.what());
    }
    o.detector.report_bare = report_bare;
    o.timeout_seconds = timeout;
    return o;
}

std::string timestamp_or_now(const std::optional<std::string>& ts)
{
    return ts ? *ts : report_timestamp();
}

std::string analyze_source_json(const std::string& text, const std::string& path,
                                const std::optional<std::vector<std::string>>& rules,
                                const std::optional<std::vector<std::string>>& call_kinds, bool report_bare,
                                double timeout, const std::optional<std::string>& timestamp)
{
    auto options = make_options(rules, call_kinds, report_bare, timeout);
    py::gil_scoped_release release;
    FileReport r = analyze_source(text, path, options);
    return analysis_report({&r}, timestamp_or_now(timestamp)).dump();
}

std::string analyze_files_json(const std::vector<std::string>& paths,
                               const std::optional<std::vector<std::string>>& rules,
                               const std::optional<std::vector<std::string>>& call_kinds, bool report_bare,
                               double timeout, unsigned workers, const std::optional<std::string>& timestamp)
{
    auto options = make_options(rules, call_kinds, report_bare, timeout);
    std::vector<CorpusFile> files;
    for (const auto& p : paths)
        files.push_back({p, p});
    py::gil_scoped_release release;
    auto batch = run_batch(files, {}, options, workers);
    std::vector<const FileReport*> ptrs;
    for (const auto& r : batch.reports)
        ptrs.push_back(&r);
    return analysis_report(ptrs, timestamp_or_now(timestamp)).dump();
}

std::string bench_json(const std::string& dir, const std::string& labels,
                       const std::optional<std::vector<std::string>>& rules,
                       const std::optional<std::vector<std::string>>& call_kinds, bool report_bare, double timeout,
                       unsigned workers)
{
    auto options = make_options(rules, call_kinds, report_bare, timeout);
    std::vector<CorpusRecord> records;
    try {
        records = load_labels(labels);
    }
    catch (const LabelError& e) {
        throw py::value_error(e.what());
    }
    py::gil_scoped_release release;
    auto deduped = dedupe(discover(dir));
    auto batch = run_batch(deduped.retained, records, options, workers);
    batch.metrics.input_count += deduped.removed.size() + deduped.unreadable.size();
    batch.metrics.duplicate_count = deduped.removed.size();
    batch.metrics.failed_count += deduped.unreadable.size();
    return to_json(batch.metrics).dump();
}

py::tuple cli(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    int code = 0;
    {
        py::gil_scoped_release release;
        code = run_cli(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
}

} // namespace

PYBIND11_MODULE(_rtriage, m)
{
    m.doc() = "Reentrancy detection with false-positive triage";
    m.attr("__version__") = std::string(kToolVersion);

    m.def("analyze_source", &analyze_source_json, py::arg("text"), py::arg("path") = "<input>",
          py::arg("rules") = py::none(), py::arg("call_kinds") = py::none(), py::arg("report_bare") = true,
          py::arg("timeout") = 120.0, py::arg("timestamp") = py::none(),
          "Analyze one source text; returns the JSON report as a string.");
    m.def("analyze_files", &analyze_files_json, py::arg("paths"), py::arg("rules") = py::none(),
          py::arg("call_kinds") = py::none(), py::arg("report_bare") = true, py::arg("timeout") = 120.0,
          py::arg("workers") = 1, py::arg("timestamp") = py::none(),
          "Analyze files; returns the JSON report as a string.");
    m.def("bench", &bench_json, py::arg("corpus_dir"), py::arg("labels"), py::arg("rules") = py::none(),
          py::arg("call_kinds") = py::none(), py::arg("report_bare") = true, py::arg("timeout") = 120.0,
          py::arg("workers") = 1, "Run a labeled corpus; returns the metrics JSON as a string.");
    m.def("normalized_hash", [](const std::string& text) { return to_hex(normalized_hash(text)); }, py::arg("text"),
          "Hash of the comment- and whitespace-free token stream.");
    m.def("cause_names", [] {
        std::vector<std::string> out;
        for (auto c : kAllCauses)
            out.emplace_back(to_string(c));
        return out;
    });
    m.def("run_cli", &cli, py::arg("args"), "Run the command line; returns (exit_code, stdout, stderr).");
}
