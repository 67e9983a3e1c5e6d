#pragma once

#include "rtriage/detector.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace rtriage {

/// False-positive causes, in reporting order.
enum class CauseType {
    identity_control,
    address_control,
    reentrancy_lock,
    no_state_change,
    no_financial_risk,
    special_transfer_value,
    gas_stipend_transfer_send,
    non_callable,
};

inline constexpr CauseType kAllCauses[] = {
    CauseType::identity_control,       CauseType::address_control,           CauseType::reentrancy_lock,
    CauseType::no_state_change,        CauseType::no_financial_risk,         CauseType::special_transfer_value,
    CauseType::gas_stipend_transfer_send, CauseType::non_callable};

const char* to_string(CauseType c);
std::optional<CauseType> cause_from_string(std::string_view name);
std::set<CauseType> all_causes();

/// The construct a rule matched on.
struct Evidence
{
    Span span;
    std::string text;
};

bool operator==(const Evidence& a, const Evidence& b);

enum class Classification { likely_true_positive, suppressed_false_positive };
const char* to_string(Classification c);

struct RuleResult
{
    CauseType rule = CauseType::identity_control;
    bool enabled = true;
    bool matched = false;
    std::vector<Evidence> evidence;
};

struct Verdict
{
    Finding finding;
    std::map<CauseType, std::vector<Evidence>> causes;
    Classification classification = Classification::likely_true_positive;
    std::vector<RuleResult> rule_trace; ///< one entry per cause, canonical order
};

using RuleEvidence = std::optional<std::vector<Evidence>>;

// Individual rules. Each returns evidence when it matches on every copy of the call.
RuleEvidence rule_identity_control(const Finding& f, const FileFacts& facts);
RuleEvidence rule_address_control(const Finding& f, const FileFacts& facts);
RuleEvidence rule_reentrancy_lock(const Finding& f, const FileFacts& facts);
RuleEvidence rule_no_state_change(const Finding& f, const FileFacts& facts);
RuleEvidence rule_no_financial_risk(const Finding& f, const FileFacts& facts);
RuleEvidence rule_special_transfer_value(const Finding& f, const FileFacts& facts);
RuleEvidence rule_gas_stipend(const Finding& f, const FileFacts& facts);
RuleEvidence rule_non_callable(const Finding& f, const FileFacts& facts);

RuleEvidence run_rule(CauseType rule, const Finding& f, const FileFacts& facts);

/// Evaluates every enabled rule independently and classifies the finding.
Verdict triage(const Finding& f, const FileFacts& facts, const std::set<CauseType>& enabled = all_causes());

} // namespace rtriage
