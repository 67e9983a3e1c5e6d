#pragma once

#include "rtriage/flow.hpp"

#include <set>
#include <string>
#include <vector>

namespace rtriage {

enum class DetectorVariant { cei_violation, bare_external_call };
const char* to_string(DetectorVariant v);

struct DetectorConfig
{
    std::set<CallKind> call_kinds{std::begin(kExternalCallKinds), std::end(kExternalCallKinds)};
    bool report_bare = true;
};

/// One reentrancy candidate. When modifier inlining duplicated the call, all
/// copies share one finding and `occurrences` lists their CFG site indexes.
struct Finding
{
    std::string id;
    std::string file;
    std::string contract;
    std::string function;
    std::string qualified_function;
    CallSite call_site;
    std::vector<StateWrite> post_writes;
    DetectorVariant variant = DetectorVariant::cei_violation;
    Span location;

    std::size_t contract_index = 0;
    std::size_t function_index = 0;
    std::vector<std::size_t> occurrences;
};

/// Stable identifier of a finding: hash of file, contract, function and call position.
std::string finding_id(const std::string& file, const std::string& contract, const std::string& function,
                       const Span& at);

/// Candidates in contract `c` of `facts`, sorted by (line, column). Only
/// functions declared by the contract itself are scanned, so inherited code is
/// reported once, under the contract that declares it.
std::vector<Finding> detect(const FileFacts& facts, std::size_t c, const DetectorConfig& config = {});

/// Candidates of every contract in the file, sorted by (file, line, column).
std::vector<Finding> detect_all(const FileFacts& facts, const DetectorConfig& config = {});

} // namespace rtriage
