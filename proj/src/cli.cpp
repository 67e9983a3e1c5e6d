#include "rtriage/cli.hpp"

#include "rtriage/corpus.hpp"
#include "rtriage/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

namespace rtriage {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view text)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        }
        else
            cur += c;
    }
    out.push_back(trim(cur));
    out.erase(std::remove(out.begin(), out.end(), std::string()), out.end());
    return out;
}

bool parse_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes" || v == "on")
        return true;
    if (v == "false" || v == "0" || v == "no" || v == "off")
        return false;
    throw ConfigError(key + ": expected a boolean, found '" + v + "'");
}

double parse_number(const std::string& key, const std::string& v)
{
    try {
        std::size_t used = 0;
        double d = std::stod(v, &used);
        if (used == v.size() && d >= 0)
            return d;
    }
    catch (const std::exception&) {
    }
    throw ConfigError(key + ": expected a non-negative number, found '" + v + "'");
}

} // namespace

std::set<CauseType> parse_rule_list(std::string_view text)
{
    std::set<CauseType> out;
    for (const auto& name : split_list(text)) {
        if (name == "all") {
            out = all_causes();
            continue;
        }
        auto c = cause_from_string(name);
        if (!c)
            throw ConfigError("unknown rule '" + name + "'");
        out.insert(*c);
    }
    return out;
}

std::set<CallKind> parse_call_kind_list(std::string_view text)
{
    std::set<CallKind> out;
    for (const auto& name : split_list(text)) {
        if (name == "all") {
            out.insert(std::begin(kExternalCallKinds), std::end(kExternalCallKinds));
            continue;
        }
        auto k = call_kind_from_string(name);
        if (!k || !is_external(*k))
            throw ConfigError("unknown call kind '" + name + "'");
        out.insert(*k);
    }
    return out;
}

OutputFormat parse_format(std::string_view text)
{
    if (text == "json")
        return OutputFormat::json;
    if (text == "text")
        return OutputFormat::text;
    throw ConfigError("format must be json or text, found '" + std::string(text) + "'");
}

void apply_config_text(std::string_view text, RunConfig& config)
{
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        if (trim(line).empty())
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key == "rules")
            config.analysis.rules = parse_rule_list(value);
        else if (key == "call_kinds")
            config.analysis.detector.call_kinds = parse_call_kind_list(value);
        else if (key == "report_bare")
            config.analysis.detector.report_bare = parse_bool(key, value);
        else if (key == "timeout")
            config.analysis.timeout_seconds = parse_number(key, value);
        else if (key == "max_bytes")
            config.analysis.max_bytes = static_cast<std::size_t>(parse_number(key, value));
        else if (key == "format")
            config.format = parse_format(value);
        else if (key == "workers")
            config.workers = std::max(1u, static_cast<unsigned>(parse_number(key, value)));
        else if (key == "fail_on_finding")
            config.fail_on_finding = parse_bool(key, value);
        else if (key == "endpoint")
            config.fetch.url_template = value;
        else if (key == "api_key_env") {
            if (value.empty())
                throw ConfigError("api_key_env must name an environment variable");
            config.fetch.api_key_env = value;
        }
        else if (key == "retries")
            config.fetch.retries = static_cast<int>(parse_number(key, value));
        else if (key == "backoff")
            config.fetch.backoff_seconds = parse_number(key, value);
        else if (key == "fetch_timeout")
            config.fetch.timeout_seconds = parse_number(key, value);
        else if (key == "api_key" || key == "apikey" || key == "key" || key == "token")
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": credentials are read from the environment variable named by api_key_env");
        else
            throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
}

void apply_config_file(const fs::path& file, RunConfig& config)
{
    std::ifstream in(file);
    if (!in)
        throw ConfigError("cannot read config file " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    apply_config_text(ss.str(), config);
}

namespace {

struct AnalysisFlags
{
    std::string config_path;
    std::string format;
    std::string rules;
    std::string call_kinds;
    bool no_bare = false;
    double timeout = 0;
    unsigned workers = 1;

    CLI::Option* format_opt = nullptr;
    CLI::Option* rules_opt = nullptr;
    CLI::Option* kinds_opt = nullptr;
    CLI::Option* timeout_opt = nullptr;
    CLI::Option* workers_opt = nullptr;

    void add_to(CLI::App& cmd, bool with_workers)
    {
        cmd.add_option("--config", config_path, "key=value configuration file");
        format_opt = cmd.add_option("--format", format, "Output format: json or text");
        rules_opt = cmd.add_option("--rules", rules, "Comma-separated false-positive rules to enable (default all)");
        kinds_opt = cmd.add_option("--call-kinds", call_kinds, "Comma-separated external call kinds to detect");
        cmd.add_flag("--no-bare", no_bare, "Only report calls followed by state writes");
        timeout_opt = cmd.add_option("--timeout", timeout, "Per-file analysis budget in seconds (0 disables)");
        if (with_workers)
            workers_opt = cmd.add_option("--workers", workers, "Files analyzed concurrently");
    }

    /// Config file first, then explicit flags.
    RunConfig resolve(OutputFormat default_format) const
    {
        RunConfig c;
        c.format = default_format;
        if (!config_path.empty())
            apply_config_file(config_path, c);
        if (format_opt && format_opt->count())
            c.format = parse_format(format);
        if (rules_opt && rules_opt->count())
            c.analysis.rules = parse_rule_list(rules);
        if (kinds_opt && kinds_opt->count())
            c.analysis.detector.call_kinds = parse_call_kind_list(call_kinds);
        if (no_bare)
            c.analysis.detector.report_bare = false;
        if (timeout_opt && timeout_opt->count()) {
            if (timeout < 0)
                throw ConfigError("--timeout must be non-negative");
            c.analysis.timeout_seconds = timeout;
        }
        if (workers_opt && workers_opt->count())
            c.workers = std::max(1u, workers);
        return c;
    }
};

int cmd_analyze(const std::vector<std::string>& paths, const RunConfig& config, std::ostream& out, std::ostream& err)
{
    std::vector<CorpusFile> files;
    for (const auto& p : paths) {
        fs::path path(p);
        std::error_code ec;
        if (fs::is_directory(path, ec)) {
            for (auto f : discover(path)) {
                f.name = (path / f.name).generic_string();
                files.push_back(std::move(f));
            }
        }
        else if (fs::is_regular_file(path, ec))
            files.push_back({path, path.generic_string()});
        else {
            err << "rtriage: no such file: " << p << '\n';
            return exit_codes::usage;
        }
    }
    auto batch = run_batch(files, {}, config.analysis, config.workers);
    std::vector<const FileReport*> ptrs;
    for (const auto& r : batch.reports)
        ptrs.push_back(&r);
    if (config.format == OutputFormat::json)
        out << analysis_report(ptrs, report_timestamp()).dump(2) << '\n';
    else
        out << text_report(ptrs);
    bool any_tp = false;
    for (const auto& r : batch.reports)
        for (const auto& v : r.verdicts)
            any_tp |= v.classification == Classification::likely_true_positive;
    return config.fail_on_finding && any_tp ? exit_codes::findings : exit_codes::ok;
}

int cmd_bench(const fs::path& dir, const fs::path& labels_path, bool assert_mode, const std::string& json_out,
              const RunConfig& config, std::ostream& out, std::ostream& err)
{
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) {
        err << "rtriage: corpus directory not found: " << dir.string() << '\n';
        return exit_codes::usage;
    }
    std::vector<CorpusRecord> labels;
    try {
        labels = load_labels(labels_path);
    }
    catch (const LabelError& e) {
        err << "rtriage: " << e.what() << '\n';
        return exit_codes::usage;
    }
    std::vector<std::string> missing;
    for (const auto& rec : labels)
        if (!fs::is_regular_file(dir / rec.file, ec))
            missing.push_back("row " + std::to_string(rec.row) + ": " + rec.file);
    if (!missing.empty()) {
        err << "rtriage: label file references missing files:\n";
        for (const auto& m : missing)
            err << "  " << m << '\n';
        return exit_codes::usage;
    }

    auto deduped = dedupe(discover(dir));
    auto batch = run_batch(deduped.retained, labels, config.analysis, config.workers);
    auto& m = batch.metrics;
    m.input_count += deduped.removed.size() + deduped.unreadable.size();
    m.duplicate_count = deduped.removed.size();
    m.failed_count += deduped.unreadable.size();

    auto json = to_json(m);
    if (!json_out.empty()) {
        std::ofstream f(json_out);
        f << json.dump(2) << '\n';
        if (!f) {
            err << "rtriage: cannot write " << json_out << '\n';
            return exit_codes::usage;
        }
    }
    if (config.format == OutputFormat::json)
        out << json.dump(2) << '\n';
    else
        out << metrics_table(m);

    if (assert_mode && !m.all_expectations_met()) {
        err << "rtriage: labeled expectations not met:\n";
        for (const auto& o : m.records)
            if (!o.expectation_met)
                err << "  row " << o.record.row << ' ' << o.record.file << ' ' << o.record.contract << '.'
                    << o.record.function << ": " << o.detail << '\n';
        return exit_codes::findings;
    }
    return exit_codes::ok;
}

int cmd_fetch(const std::string& address, const fs::path& out_dir, const RunConfig& config, std::ostream& out,
              std::ostream& err)
{
    auto result = fetch_source(address, out_dir, config.fetch);
    if (result.status != FetchStatus::ok) {
        err << "rtriage: fetch " << to_string(result.status) << ": " << result.message << '\n';
        return exit_code(result.status);
    }
    for (const auto& f : result.files)
        out << f.generic_string() << '\n';
    out << result.metadata.generic_string() << '\n';
    return exit_codes::ok;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Reentrancy detector with false-positive triage", std::string(kToolName)};
    app.set_version_flag("--version", std::string(kToolName) + " " + std::string(kToolVersion));
    app.require_subcommand(1);

    auto* analyze = app.add_subcommand("analyze", "Analyze Solidity files and print findings");
    std::vector<std::string> paths;
    bool fail_on_finding = false;
    AnalysisFlags analyze_flags;
    analyze->add_option("paths", paths, "Solidity files or directories")->required();
    analyze_flags.add_to(*analyze, false);
    analyze->add_flag("--fail-on-finding", fail_on_finding, "Exit 1 when a likely true positive is found");

    auto* bench = app.add_subcommand("bench", "Run a labeled corpus and compute metrics");
    std::string bench_dir;
    std::string labels_path;
    std::string json_out;
    bool assert_mode = false;
    AnalysisFlags bench_flags;
    bench->add_option("dir", bench_dir, "Corpus directory")->required();
    bench->add_option("--labels", labels_path, "Label CSV")->required();
    bench->add_flag("--assert", assert_mode, "Exit 1 unless every labeled expectation holds");
    bench->add_option("--json-out", json_out, "Also write the metrics JSON to this file");
    bench_flags.add_to(*bench, true);

    auto* fetch = app.add_subcommand("fetch", "Download verified source from a block explorer");
    std::string address;
    std::string out_dir = ".";
    std::string fetch_config;
    fetch->add_option("address", address, "Contract address")->required();
    fetch->add_option("--out", out_dir, "Output directory");
    fetch->add_option("--config", fetch_config, "key=value configuration file");

    std::vector<const char*> argv{"rtriage"};
    for (const auto& a : args)
        argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    }
    catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? exit_codes::ok : exit_codes::usage;
    }

    try {
        if (analyze->parsed()) {
            RunConfig config = analyze_flags.resolve(OutputFormat::json);
            if (fail_on_finding)
                config.fail_on_finding = true;
            return cmd_analyze(paths, config, out, err);
        }
        if (bench->parsed()) {
            RunConfig config = bench_flags.resolve(OutputFormat::text);
            return cmd_bench(bench_dir, labels_path, assert_mode, json_out, config, out, err);
        }
        RunConfig config;
        if (!fetch_config.empty())
            apply_config_file(fetch_config, config);
        return cmd_fetch(address, out_dir, config, out, err);
    }
    catch (const ConfigError& e) {
        err << "rtriage: " << e.what() << '\n';
        return exit_codes::usage;
    }
    catch (const std::exception& e) {
        err << "rtriage: " << e.what() << '\n';
        return exit_codes::usage;
    }
}

} // namespace rtriage
