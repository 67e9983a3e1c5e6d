#include "rtriage/analysis.hpp"

#include <fstream>
#include <sstream>

namespace rtriage {

const char* to_string(FileStatus s)
{
    switch (s) {
        case FileStatus::ok: return "ok";
        case FileStatus::failed: return "failed";
        case FileStatus::timeout: return "timeout";
    }
    return "failed";
}

std::shared_ptr<const FileFacts> build_facts(const SourceUnit& unit, std::vector<Diagnostic>* diagnostics)
{
    std::vector<Diagnostic> local;
    auto flat = linearize(unit, {}, diagnostics ? *diagnostics : local);
    return std::make_shared<const FileFacts>(unit.path, std::move(flat));
}

FileReport analyze_source(std::string_view text, const std::string& path, const AnalysisOptions& options)
{
    FileReport report;
    report.path = path;
    Deadline deadline = options.timeout_seconds > 0
                            ? Deadline::after(std::chrono::duration<double>(options.timeout_seconds))
                            : Deadline();
    try {
        ParseOptions po;
        po.max_bytes = options.max_bytes;
        po.deadline = deadline;
        SourceUnit unit = parse_source(text, path, po);
        report.diagnostics = unit.diagnostics;
        if (unit.has_fatal()) {
            report.status = FileStatus::failed;
            report.error = "fatal syntax error";
            return report;
        }
        auto flat = linearize(unit, {}, report.diagnostics);
        auto facts = std::make_shared<const FileFacts>(path, std::move(flat), deadline);
        for (const Finding& f : detect_all(*facts, options.detector)) {
            deadline.check();
            report.verdicts.push_back(triage(f, *facts, options.rules));
        }
        report.facts = std::move(facts);
    } catch (const TimeoutError& e) {
        report.status = FileStatus::timeout;
        report.error = e.what();
        report.verdicts.clear();
    } catch (const InputError& e) {
        report.status = FileStatus::failed;
        report.error = e.what();
        report.diagnostics.push_back(Diagnostic{e.span(), Severity::fatal, e.what()});
    } catch (const std::exception& e) {
        report.status = FileStatus::failed;
        report.error = e.what();
    }
    return report;
}

FileReport analyze_file(const std::filesystem::path& file, const std::string& display_path,
                        const AnalysisOptions& options)
{
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        FileReport r;
        r.path = display_path;
        r.status = FileStatus::failed;
        r.error = "cannot read file";
        return r;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return analyze_source(buf.str(), display_path, options);
}

} // namespace rtriage
