#include "rtriage/corpus.hpp"

#include "rtriage/lexer.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>
#include <tuple>

namespace rtriage {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

const char* to_string(Label l)
{
    return l == Label::tp ? "TP" : "FP";
}

namespace {

std::string trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

/// Splits one CSV line, honoring double-quoted fields. Returns nullopt on an unterminated quote.
std::optional<std::vector<std::string>> split_csv(std::string_view line)
{
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            }
            else if (c == '"')
                quoted = false;
            else
                cur += c;
        }
        else if (c == '"')
            quoted = true;
        else if (c == ',') {
            fields.push_back(trim(cur));
            cur.clear();
        }
        else
            cur += c;
    }
    if (quoted)
        return std::nullopt;
    fields.push_back(trim(cur));
    return fields;
}

using Key = std::tuple<std::string, std::string, std::string>;

Key key_of(const CorpusRecord& r)
{
    return {r.file, r.contract, r.function};
}

std::string rows_text(const std::vector<std::size_t>& rows)
{
    std::string s;
    for (auto r : rows)
        s += (s.empty() ? "" : ", ") + std::to_string(r);
    return s;
}

} // namespace

std::vector<CorpusRecord> parse_labels(std::string_view text)
{
    std::vector<CorpusRecord> out;
    std::vector<std::size_t> bad;
    std::vector<std::string> problems;
    std::map<Key, std::size_t> seen;
    bool header_seen = false;
    std::size_t row = 0;
    std::size_t pos = 0;
    auto reject = [&](std::size_t r, const std::string& why) {
        bad.push_back(r);
        problems.push_back("row " + std::to_string(r) + ": " + why);
    };
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++row;
        if (trim(line).empty())
            continue;
        auto fields = split_csv(line);
        if (!header_seen) {
            header_seen = true;
            static const std::vector<std::string> expected{"file", "contract", "function", "label", "cause"};
            if (!fields || *fields != expected)
                reject(row, "header must be file,contract,function,label,cause");
            continue;
        }
        if (!fields) {
            reject(row, "unterminated quote");
            continue;
        }
        if (fields->size() != 5) {
            reject(row, "expected 5 fields, found " + std::to_string(fields->size()));
            continue;
        }
        const auto& f = *fields;
        CorpusRecord rec;
        rec.file = f[0];
        rec.contract = f[1];
        rec.function = f[2];
        rec.row = row;
        if (rec.file.empty() || rec.contract.empty() || rec.function.empty()) {
            reject(row, "file, contract and function are required");
            continue;
        }
        if (f[3] == "TP")
            rec.label = Label::tp;
        else if (f[3] == "FP")
            rec.label = Label::fp;
        else {
            reject(row, "label must be TP or FP, found '" + f[3] + "'");
            continue;
        }
        if (!f[4].empty()) {
            rec.expected_cause = cause_from_string(f[4]);
            if (!rec.expected_cause) {
                reject(row, "unknown cause '" + f[4] + "'");
                continue;
            }
        }
        if (rec.label == Label::fp && !rec.expected_cause) {
            reject(row, "FP rows need a cause");
            continue;
        }
        if (rec.label == Label::tp && rec.expected_cause) {
            reject(row, "TP rows take no cause");
            continue;
        }
        auto [it, fresh] = seen.emplace(key_of(rec), row);
        if (!fresh) {
            reject(row, "duplicate of row " + std::to_string(it->second));
            continue;
        }
        out.push_back(std::move(rec));
    }
    if (!header_seen)
        reject(1, "missing header");
    if (!bad.empty()) {
        std::string msg = "malformed label rows: " + rows_text(bad);
        for (const auto& p : problems)
            msg += "\n  " + p;
        throw LabelError(msg, bad);
    }
    return out;
}

std::vector<CorpusRecord> load_labels(const fs::path& csv)
{
    std::ifstream in(csv, std::ios::binary);
    if (!in)
        throw LabelError("cannot read label file " + csv.string(), {});
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_labels(ss.str());
}

std::vector<CorpusFile> discover(const fs::path& root)
{
    std::vector<CorpusFile> out;
    if (fs::is_regular_file(root)) {
        out.push_back({root, root.filename().generic_string()});
        return out;
    }
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file() && entry.path().extension() == ".sol")
            out.push_back({entry.path(), entry.path().lexically_relative(root).generic_string()});
    }
    std::sort(out.begin(), out.end(), [](const CorpusFile& a, const CorpusFile& b) { return a.name < b.name; });
    return out;
}

std::uint64_t normalized_hash(std::string_view text)
{
    std::uint64_t h = fnv1a64("");
    for (const auto& t : token_texts(text)) {
        h = fnv1a64(t, h);
        h = fnv1a64(std::string_view("\x1f", 1), h);
    }
    return h;
}

DedupeResult dedupe(const std::vector<CorpusFile>& files)
{
    DedupeResult out;
    std::set<std::uint64_t> seen;
    for (const auto& f : files) {
        std::ifstream in(f.path, std::ios::binary);
        if (!in) {
            out.unreadable.push_back(f);
            continue;
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        std::uint64_t h = 0;
        try {
            h = normalized_hash(ss.str());
        }
        catch (const std::exception&) {
            // Not tokenizable; keep it so the analysis reports why.
            out.retained.push_back(f);
            continue;
        }
        if (seen.insert(h).second)
            out.retained.push_back(f);
        else
            out.removed.push_back(f);
    }
    return out;
}

bool MetricsReport::all_expectations_met() const
{
    return std::all_of(records.begin(), records.end(), [](const RecordOutcome& r) { return r.expectation_met; });
}

namespace {

struct FunctionState
{
    bool reported = false;
    std::set<CauseType> causes;
};

std::optional<double> ratio(std::size_t num, std::size_t den)
{
    if (den == 0)
        return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

std::string causes_text(const std::set<CauseType>& causes)
{
    if (causes.empty())
        return "none";
    std::string s;
    for (auto c : causes)
        s += (s.empty() ? "" : "+") + std::string(to_string(c));
    return s;
}

} // namespace

MetricsReport compute_metrics(const std::vector<FileReport>& reports, const std::vector<CorpusRecord>& labels)
{
    MetricsReport m;
    std::map<Key, FunctionState> functions;
    std::map<std::string, const FileReport*> by_path;
    for (const auto& r : reports) {
        by_path[r.path] = &r;
        if (r.status != FileStatus::ok) {
            ++m.failed_count;
            continue;
        }
        ++m.analyzed_count;
        bool file_reported = false;
        for (const auto& v : r.verdicts) {
            ++m.finding_count;
            auto& st = functions[{r.path, v.finding.contract, v.finding.function}];
            if (v.classification == Classification::likely_true_positive) {
                st.reported = true;
                file_reported = true;
            }
            for (const auto& [cause, ev] : v.causes)
                st.causes.insert(cause);
        }
        if (!r.verdicts.empty())
            ++m.candidate_contract_count;
        if (file_reported)
            ++m.reported_contract_count;
    }
    m.candidate_count = functions.size();
    for (auto c : kAllCauses)
        m.per_cause_counts[c] = 0;
    for (const auto& [key, st] : functions) {
        if (st.reported)
            ++m.reported_count;
        for (auto c : st.causes)
            ++m.per_cause_counts[c];
    }

    for (const auto& rec : labels) {
        RecordOutcome o;
        o.record = rec;
        auto it = functions.find(key_of(rec));
        if (it != functions.end()) {
            o.found = true;
            o.reported = it->second.reported;
            o.causes = it->second.causes;
        }
        std::string expected = rec.label == Label::tp
                                   ? std::string("likely_true_positive")
                                   : "suppressed_false_positive with " + std::string(to_string(*rec.expected_cause));
        std::string actual;
        auto file = by_path.find(rec.file);
        if (file == by_path.end())
            actual = "file not analyzed";
        else if (file->second->status != FileStatus::ok)
            actual = "file " + std::string(to_string(file->second->status)) + ": " + file->second->error;
        else if (!o.found)
            actual = "no finding";
        else if (o.reported)
            actual = "likely_true_positive";
        else
            actual = "suppressed_false_positive with " + causes_text(o.causes);
        if (rec.label == Label::tp) {
            o.expectation_met = o.reported;
            if (o.reported)
                ++m.tp_count;
        }
        else
            o.expectation_met = o.found && !o.reported && o.causes.count(*rec.expected_cause);
        o.detail = "expected " + expected + ", actual " + actual;
        m.records.push_back(std::move(o));
    }
    std::sort(m.records.begin(), m.records.end(), [](const RecordOutcome& a, const RecordOutcome& b) {
        return key_of(a.record) < key_of(b.record);
    });
    m.precision = ratio(m.tp_count, m.reported_count);
    m.reported_rate = ratio(m.reported_contract_count, m.analyzed_count);
    m.candidate_rate = ratio(m.candidate_contract_count, m.analyzed_count);
    return m;
}

BatchResult run_batch(const std::vector<CorpusFile>& files, const std::vector<CorpusRecord>& labels,
                      const AnalysisOptions& options, unsigned workers)
{
    BatchResult out;
    out.reports.resize(files.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < files.size(); i = next++) {
            try {
                out.reports[i] = analyze_file(files[i].path, files[i].name, options);
            }
            catch (const std::exception& e) {
                FileReport r;
                r.path = files[i].name;
                r.status = FileStatus::failed;
                r.error = e.what();
                out.reports[i] = std::move(r);
            }
        }
    };
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(files.size(), 1))));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w)
        pool.emplace_back(work);
    work();
    for (auto& t : pool)
        t.join();
    std::sort(out.reports.begin(), out.reports.end(),
              [](const FileReport& a, const FileReport& b) { return a.path < b.path; });
    out.metrics = compute_metrics(out.reports, labels);
    out.metrics.input_count = files.size();
    return out;
}

std::string format_ratio(const std::optional<double>& r)
{
    if (!r)
        return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", *r);
    return buf;
}

ordered_json to_json(const MetricsReport& m)
{
    ordered_json j;
    j["input_count"] = m.input_count;
    j["duplicate_count"] = m.duplicate_count;
    j["analyzed_count"] = m.analyzed_count;
    j["failed_count"] = m.failed_count;
    j["finding_count"] = m.finding_count;
    j["candidate_count"] = m.candidate_count;
    j["reported_count"] = m.reported_count;
    j["tp_count"] = m.tp_count;
    if (m.precision)
        j["precision"] = *m.precision;
    j["reported_contract_count"] = m.reported_contract_count;
    if (m.reported_rate)
        j["reported_rate"] = *m.reported_rate;
    j["candidate_contract_count"] = m.candidate_contract_count;
    if (m.candidate_rate)
        j["candidate_rate"] = *m.candidate_rate;
    ordered_json causes = ordered_json::object();
    for (auto c : kAllCauses) {
        auto it = m.per_cause_counts.find(c);
        causes[to_string(c)] = it == m.per_cause_counts.end() ? 0 : it->second;
    }
    j["per_cause_counts"] = std::move(causes);
    ordered_json records = ordered_json::array();
    for (const auto& o : m.records) {
        ordered_json r;
        r["file"] = o.record.file;
        r["contract"] = o.record.contract;
        r["function"] = o.record.function;
        r["label"] = to_string(o.record.label);
        r["expected_cause"] = o.record.expected_cause ? ordered_json(to_string(*o.record.expected_cause)) : ordered_json();
        r["found"] = o.found;
        r["reported"] = o.reported;
        ordered_json cs = ordered_json::array();
        for (auto c : o.causes)
            cs.push_back(to_string(c));
        r["causes"] = std::move(cs);
        r["expectation_met"] = o.expectation_met;
        r["detail"] = o.detail;
        records.push_back(std::move(r));
    }
    j["records"] = std::move(records);
    return j;
}

std::string metrics_table(const MetricsReport& m)
{
    std::ostringstream out;
    out << std::left << std::setw(28) << "Cause" << std::right << std::setw(8) << "Count" << '\n';
    out << std::string(36, '-') << '\n';
    std::size_t total = 0;
    for (auto c : kAllCauses) {
        auto it = m.per_cause_counts.find(c);
        std::size_t n = it == m.per_cause_counts.end() ? 0 : it->second;
        total += n;
        out << std::left << std::setw(28) << to_string(c) << std::right << std::setw(8) << n << '\n';
    }
    out << std::string(36, '-') << '\n';
    out << std::left << std::setw(28) << "Total" << std::right << std::setw(8) << total << "\n\n";
    out << "analyzed " << m.analyzed_count << ", failed " << m.failed_count << ", duplicates " << m.duplicate_count
        << '\n';
    out << "candidate functions " << m.candidate_count << ", reported functions " << m.reported_count
        << ", true positives " << m.tp_count << '\n';
    out << "precision " << format_ratio(m.precision) << ", reported rate " << format_ratio(m.reported_rate)
        << ", candidate rate " << format_ratio(m.candidate_rate) << '\n';
    return out.str();
}

} // namespace rtriage
