#pragma once

#include "rtriage/analysis.hpp"
#include "rtriage/lowering.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unistd.h>

namespace rtriage::test {

inline std::filesystem::path corpus_dir()
{
    return RTRIAGE_CORPUS_DIR;
}

inline std::filesystem::path canonical_dir()
{
    return corpus_dir() / "canonical";
}

inline std::filesystem::path mutants_dir()
{
    return corpus_dir() / "mutants";
}

inline std::string read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text)
{
    std::filesystem::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("rtriage-test-" + name + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline FileReport analyze_text(const std::string& text, const AnalysisOptions& options = {})
{
    return analyze_source(text, "<test>", options);
}

/// Copy of the single verdict of `function`; throws unless exactly one exists.
inline Verdict only_verdict(const FileReport& r, const std::string& function)
{
    const Verdict* found = nullptr;
    for (const auto& v : r.verdicts) {
        if (v.finding.function != function)
            continue;
        if (found)
            throw std::runtime_error("several verdicts for " + function);
        found = &v;
    }
    if (!found)
        throw std::runtime_error("no verdict for " + function + " in " + r.path);
    return *found;
}

inline bool rule_matched(const Verdict& v, CauseType c)
{
    for (const auto& r : v.rule_trace)
        if (r.rule == c)
            return r.matched;
    return false;
}

/// Flattened contract `name` of a single source text.
inline FlatContract flatten(const std::string& text, const std::string& name)
{
    SourceUnit unit = parse_source(text, "<test>");
    std::vector<Diagnostic> diags;
    for (auto& c : linearize(unit, {}, diags))
        if (c.name == name)
            return c;
    throw std::runtime_error("no contract " + name);
}

} // namespace rtriage::test
