#pragma once

#include "rtriage/frontend.hpp"
#include "rtriage/triage.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace rtriage {

struct AnalysisOptions
{
    DetectorConfig detector;
    std::set<CauseType> rules = all_causes();
    /// Per-file budget; zero or negative disables the deadline.
    double timeout_seconds = 120.0;
    std::size_t max_bytes = 2 * 1024 * 1024;
};

enum class FileStatus { ok, failed, timeout };
const char* to_string(FileStatus s);

struct FileReport
{
    std::string path;
    FileStatus status = FileStatus::ok;
    std::string error; ///< reason when status != ok
    std::vector<Diagnostic> diagnostics;
    std::vector<Verdict> verdicts; ///< sorted by (line, column)
    std::shared_ptr<const FileFacts> facts;
};

/// Runs parse, flatten, flow analysis, detection and triage on one source text.
/// Never throws for bad input: failures are reported through `status`.
FileReport analyze_source(std::string_view text, const std::string& path, const AnalysisOptions& options = {});

/// Reads `file` and analyzes it; `display_path` is the name used in reports.
FileReport analyze_file(const std::filesystem::path& file, const std::string& display_path,
                        const AnalysisOptions& options = {});

/// Builds flow facts for an already parsed unit (no deadline).
std::shared_ptr<const FileFacts> build_facts(const SourceUnit& unit, std::vector<Diagnostic>* diagnostics = nullptr);

} // namespace rtriage
