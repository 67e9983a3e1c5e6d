#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace rtriage {

struct FetchConfig
{
    /// GET endpoint; `{address}` and `{apikey}` are substituted.
    std::string url_template =
        "https://api.etherscan.io/api?module=contract&action=getsourcecode&address={address}&apikey={apikey}";
    /// Environment variable holding the credential.
    std::string api_key_env = "EXPLORER_API_KEY";
    int retries = 3;
    double backoff_seconds = 1.0; ///< doubled after each retry
    double timeout_seconds = 30.0;
};

enum class FetchStatus {
    ok,
    invalid_address,
    missing_credential,
    invalid_endpoint,
    output_error,
    network_failure,
    bad_response,
    not_verified,
    rate_limited,
};

const char* to_string(FetchStatus s);
/// Process exit code of a fetch outcome.
int exit_code(FetchStatus s);

struct FetchResult
{
    FetchStatus status = FetchStatus::ok;
    std::string message;
    int attempts = 0;
    std::vector<std::filesystem::path> files; ///< written sources
    std::filesystem::path metadata;
};

/// 40 hex digits with an optional 0x prefix.
bool is_valid_address(std::string_view address);

/// Sources of a verified contract, as named source units.
struct SourceBundle
{
    std::string contract_name;
    std::string compiler_version;
    std::vector<std::pair<std::string, std::string>> sources; ///< (file name, content)
};

/// Interprets an explorer response body. Sets `status` to ok, not_verified,
/// rate_limited or bad_response.
SourceBundle parse_source_response(std::string_view body, FetchStatus& status, std::string& message);

/// Flattens a source path into a safe file name ending in `.sol`.
std::string safe_source_name(std::string_view path);

/// Writes `files` into `dir` all-or-nothing: each goes to a temporary file
/// first and is renamed into place only after every write succeeded.
/// Returns false and removes everything it created on failure.
bool write_files_atomically(const std::filesystem::path& dir,
                            const std::vector<std::pair<std::string, std::string>>& files, std::string& error);

/// Downloads the verified source of `address` into `out_dir`.
FetchResult fetch_source(std::string_view address, const std::filesystem::path& out_dir, const FetchConfig& config);

} // namespace rtriage
