#pragma once

#include "rtriage/analysis.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace rtriage {

inline constexpr int kReportSchemaVersion = 1;

/// RFC 3339 UTC timestamp taken from SOURCE_DATE_EPOCH when set, else the clock.
std::string report_timestamp();
/// RFC 3339 UTC rendering of a Unix time.
std::string format_utc(long long unix_seconds);

nlohmann::ordered_json to_json(const Span& s);
nlohmann::ordered_json to_json(const Diagnostic& d);
nlohmann::ordered_json to_json(const Verdict& v);
nlohmann::ordered_json to_json(const FileReport& r);

struct ReportSummary
{
    std::size_t files = 0;
    std::size_t failed = 0;
    std::size_t findings = 0;
    std::size_t likely_true_positive = 0;
    std::size_t suppressed_false_positive = 0;
};

ReportSummary summarize(const std::vector<FileReport>& reports);

/// Full analysis report. Files are emitted sorted by path so that output does
/// not depend on input order.
nlohmann::ordered_json analysis_report(std::vector<const FileReport*> reports, const std::string& timestamp);

/// Same content as text: one line per finding plus indented details.
std::string text_report(std::vector<const FileReport*> reports);

} // namespace rtriage
