#include "rtriage/report.hpp"

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <sstream>

namespace rtriage {

using nlohmann::ordered_json;

std::string format_utc(long long unix_seconds)
{
    std::time_t t = static_cast<std::time_t>(unix_seconds);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string report_timestamp()
{
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
        char* end = nullptr;
        long long v = std::strtoll(epoch, &end, 10);
        if (end != epoch && *end == '\0')
            return format_utc(v);
    }
    return format_utc(static_cast<long long>(std::time(nullptr)));
}

ordered_json to_json(const Span& s)
{
    return ordered_json{{"line", s.line}, {"column", s.column}, {"offset", s.offset}, {"length", s.length}};
}

ordered_json to_json(const Diagnostic& d)
{
    return ordered_json{{"severity", to_string(d.severity)}, {"message", d.message}, {"location", to_json(d.span)}};
}

namespace {

ordered_json evidence_json(const std::vector<Evidence>& ev)
{
    ordered_json out = ordered_json::array();
    for (const auto& e : ev)
        out.push_back(ordered_json{{"text", e.text}, {"location", to_json(e.span)}});
    return out;
}

} // namespace

ordered_json to_json(const Verdict& v)
{
    const Finding& f = v.finding;
    ordered_json writes = ordered_json::array();
    for (const auto& w : f.post_writes)
        writes.push_back(ordered_json{{"target", w.is_unknown() ? std::string("<unknown>") : w.target()},
                                      {"kind", to_string(w.kind)},
                                      {"location", to_json(w.location)}});
    ordered_json causes = ordered_json::array();
    for (const auto& [cause, ev] : v.causes)
        causes.push_back(ordered_json{{"cause", to_string(cause)}, {"evidence", evidence_json(ev)}});
    ordered_json trace = ordered_json::array();
    for (const auto& r : v.rule_trace)
        trace.push_back(ordered_json{{"rule", to_string(r.rule)}, {"enabled", r.enabled}, {"matched", r.matched}});

    ordered_json j;
    j["id"] = f.id;
    j["contract"] = f.contract;
    j["function"] = f.function;
    j["qualified_function"] = f.qualified_function;
    j["location"] = to_json(f.location);
    j["call_kind"] = to_string(f.call_site.call_kind);
    j["call"] = f.call_site.call ? to_source(*f.call_site.call) : std::string();
    j["variant"] = to_string(f.variant);
    j["post_writes"] = std::move(writes);
    j["classification"] = to_string(v.classification);
    j["causes"] = std::move(causes);
    j["rule_trace"] = std::move(trace);
    return j;
}

ordered_json to_json(const FileReport& r)
{
    ordered_json j;
    j["path"] = r.path;
    j["status"] = to_string(r.status);
    if (r.status != FileStatus::ok)
        j["error"] = r.error;
    ordered_json diags = ordered_json::array();
    for (const auto& d : r.diagnostics)
        diags.push_back(to_json(d));
    j["diagnostics"] = std::move(diags);
    ordered_json findings = ordered_json::array();
    for (const auto& v : r.verdicts)
        findings.push_back(to_json(v));
    j["findings"] = std::move(findings);
    return j;
}

namespace {

void add(ReportSummary& s, const FileReport& r)
{
    ++s.files;
    if (r.status != FileStatus::ok)
        ++s.failed;
    for (const auto& v : r.verdicts) {
        ++s.findings;
        if (v.classification == Classification::likely_true_positive)
            ++s.likely_true_positive;
        else
            ++s.suppressed_false_positive;
    }
}

void sort_by_path(std::vector<const FileReport*>& reports)
{
    std::stable_sort(reports.begin(), reports.end(),
                     [](const FileReport* a, const FileReport* b) { return a->path < b->path; });
}

} // namespace

ReportSummary summarize(const std::vector<FileReport>& reports)
{
    ReportSummary s;
    for (const auto& r : reports)
        add(s, r);
    return s;
}

ordered_json analysis_report(std::vector<const FileReport*> reports, const std::string& timestamp)
{
    sort_by_path(reports);
    ReportSummary s;
    ordered_json files = ordered_json::array();
    for (const auto* r : reports) {
        add(s, *r);
        files.push_back(to_json(*r));
    }
    ordered_json j;
    j["tool"] = ordered_json{{"name", std::string(kToolName)}, {"version", std::string(kToolVersion)}};
    j["schema_version"] = kReportSchemaVersion;
    j["timestamp"] = timestamp;
    j["files"] = std::move(files);
    j["summary"] = ordered_json{{"files", s.files},
                                {"failed", s.failed},
                                {"findings", s.findings},
                                {"likely_true_positive", s.likely_true_positive},
                                {"suppressed_false_positive", s.suppressed_false_positive}};
    return j;
}

std::string text_report(std::vector<const FileReport*> reports)
{
    sort_by_path(reports);
    std::ostringstream out;
    ReportSummary s;
    for (const auto* r : reports) {
        add(s, *r);
        if (r->status != FileStatus::ok)
            out << r->path << ": " << to_string(r->status) << ": " << r->error << '\n';
        for (const auto& d : r->diagnostics)
            if (d.severity != Severity::note)
                out << r->path << ':' << d.span.line << ':' << d.span.column << ": " << to_string(d.severity)
                    << ": " << d.message << '\n';
        for (const auto& v : r->verdicts) {
            const Finding& f = v.finding;
            out << r->path << ':' << f.location.line << ':' << f.location.column << ": "
                << to_string(v.classification) << ": " << to_string(f.call_site.call_kind) << " in "
                << f.contract << '.' << f.function << " (" << to_string(f.variant) << ")\n";
            if (f.call_site.call)
                out << "    call: " << to_source(*f.call_site.call) << '\n';
            if (!f.post_writes.empty()) {
                out << "    writes after call:";
                for (std::size_t i = 0; i < f.post_writes.size(); ++i) {
                    const auto& w = f.post_writes[i];
                    out << (i ? ", " : " ") << (w.is_unknown() ? std::string("<unknown>") : w.target()) << " (line "
                        << w.location.line << ')';
                }
                out << '\n';
            }
            for (const auto& [cause, ev] : v.causes) {
                out << "    cause " << to_string(cause) << ':';
                for (std::size_t i = 0; i < ev.size(); ++i)
                    out << (i ? "; " : " ") << "[line " << ev[i].span.line << "] " << ev[i].text;
                out << '\n';
            }
        }
    }
    out << s.files << " file(s), " << s.failed << " failed, " << s.findings << " finding(s): "
        << s.likely_true_positive << " likely true positive, " << s.suppressed_false_positive << " suppressed\n";
    return out.str();
}

} // namespace rtriage
