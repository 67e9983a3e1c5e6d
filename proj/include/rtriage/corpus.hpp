#pragma once

#include "rtriage/analysis.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtriage {

enum class Label { tp, fp };
const char* to_string(Label l);

/// Ground truth for one function.
struct CorpusRecord
{
    std::string file; ///< path relative to the corpus root
    std::string contract;
    std::string function;
    Label label = Label::tp;
    std::optional<CauseType> expected_cause;
    std::size_t row = 0; ///< 1-based line in the label file
};

/// Label file problems. `rows` lists offending 1-based line numbers.
class LabelError : public std::runtime_error
{
public:
    LabelError(const std::string& what, std::vector<std::size_t> rows)
        : std::runtime_error(what), rows_(std::move(rows))
    {
    }
    [[nodiscard]] const std::vector<std::size_t>& rows() const { return rows_; }

private:
    std::vector<std::size_t> rows_;
};

/// Parses `file,contract,function,label,cause` CSV text. Throws LabelError
/// listing every malformed or duplicate row.
std::vector<CorpusRecord> parse_labels(std::string_view text);
/// Reads and parses a label file. Throws LabelError when it cannot be read.
std::vector<CorpusRecord> load_labels(const std::filesystem::path& csv);

/// One input of a batch: the file on disk and its name in reports.
struct CorpusFile
{
    std::filesystem::path path;
    std::string name;
};

/// Every `.sol` file under `root`, sorted, named relative to `root`.
std::vector<CorpusFile> discover(const std::filesystem::path& root);

struct DedupeResult
{
    std::vector<CorpusFile> retained;
    std::vector<CorpusFile> removed;    ///< token-identical to an earlier file
    std::vector<CorpusFile> unreadable; ///< could not be read
};

/// Hash of the comment- and whitespace-free token stream.
std::uint64_t normalized_hash(std::string_view text);

/// Keeps the first file of each normalized-source class.
DedupeResult dedupe(const std::vector<CorpusFile>& files);

struct RecordOutcome
{
    CorpusRecord record;
    bool found = false;    ///< the function has at least one finding
    bool reported = false; ///< at least one finding stayed likely_true_positive
    std::set<CauseType> causes; ///< union over its suppressed findings
    bool expectation_met = false;
    std::string detail;
};

struct MetricsReport
{
    std::size_t input_count = 0;
    std::size_t duplicate_count = 0;
    std::size_t analyzed_count = 0;
    std::size_t failed_count = 0;
    std::size_t finding_count = 0;
    /// Functions with at least one candidate before triage.
    std::size_t candidate_count = 0;
    /// Functions with at least one likely_true_positive finding.
    std::size_t reported_count = 0;
    /// Reported functions labeled TP.
    std::size_t tp_count = 0;
    std::optional<double> precision;
    /// Analyzed files with a reported function.
    std::size_t reported_contract_count = 0;
    std::optional<double> reported_rate;
    std::size_t candidate_contract_count = 0;
    std::optional<double> candidate_rate;
    /// Suppressed functions per cause; a function counts once per cause.
    std::map<CauseType, std::size_t> per_cause_counts;
    std::vector<RecordOutcome> records;

    [[nodiscard]] bool all_expectations_met() const;
};

/// Aggregates per-file reports into metrics. Independent of report order.
MetricsReport compute_metrics(const std::vector<FileReport>& reports, const std::vector<CorpusRecord>& labels);

struct BatchResult
{
    std::vector<FileReport> reports; ///< sorted by path
    MetricsReport metrics;
};

/// Analyzes `files` on up to `workers` threads and computes metrics.
BatchResult run_batch(const std::vector<CorpusFile>& files, const std::vector<CorpusRecord>& labels,
                      const AnalysisOptions& options, unsigned workers = 1);

nlohmann::ordered_json to_json(const MetricsReport& m);
/// Cause rows with one count column, followed by the headline metrics.
std::string metrics_table(const MetricsReport& m);
/// Ratio rendered with six decimals, or "n/a".
std::string format_ratio(const std::optional<double>& r);

} // namespace rtriage
