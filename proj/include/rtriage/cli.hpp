#pragma once

#include "rtriage/analysis.hpp"
#include "rtriage/fetch.hpp"

#include <filesystem>
#include <iosfwd>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rtriage {

namespace exit_codes {
inline constexpr int ok = 0;
inline constexpr int findings = 1; ///< also: bench expectations not met
inline constexpr int usage = 2;
inline constexpr int network = 3;
inline constexpr int not_verified = 4;
inline constexpr int rate_limited = 5;
} // namespace exit_codes

class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

enum class OutputFormat { json, text };

struct RunConfig
{
    AnalysisOptions analysis;
    OutputFormat format = OutputFormat::json;
    unsigned workers = 1;
    bool fail_on_finding = false;
    FetchConfig fetch;
};

/// Comma-separated cause names; empty text selects no rule, `all` selects every rule.
std::set<CauseType> parse_rule_list(std::string_view text);
/// Comma-separated external call kinds; `all` selects every kind.
std::set<CallKind> parse_call_kind_list(std::string_view text);
OutputFormat parse_format(std::string_view text);

/// Applies `key=value` lines (`#` starts a comment). Credentials are refused.
void apply_config_text(std::string_view text, RunConfig& config);
void apply_config_file(const std::filesystem::path& file, RunConfig& config);

/// Runs the command line `args` (without the program name) and returns the exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace rtriage
