#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cctype>

using namespace rtriage;
using namespace rtriage::test;

namespace {

struct Sample
{
    const char* file;
    const char* function;
    std::vector<CauseType> causes; // designated causes, all must match
};

const std::vector<Sample>& samples()
{
    static const std::vector<Sample> f = {
        {"identity_control.sol", "execute", {CauseType::identity_control}},
        {"address_control.sol", "register", {CauseType::address_control}},
        {"reentrancy_lock.sol", "withdraw", {CauseType::reentrancy_lock}},
        {"no_state_change.sol", "getTokenBal", {CauseType::no_state_change}},
        {"no_financial_risk.sol", "depositToken", {CauseType::no_financial_risk}},
        {"special_transfer_value.sol", "tradeEthVsDAI", {CauseType::special_transfer_value}},
        {"transfer_non_callable.sol", "_withdraw",
         {CauseType::gas_stipend_transfer_send, CauseType::non_callable}},
    };
    return f;
}

FileReport analyze_sample(const std::string& file, const AnalysisOptions& options = {})
{
    return analyze_file(canonical_dir() / file, file, options);
}

FileReport analyze_mutant(const std::string& file, const AnalysisOptions& options = {})
{
    return analyze_file(mutants_dir() / file, file, options);
}

std::string wrap(const std::string& members)
{
    return "pragma solidity ^0.8.0;\ncontract C {\n" + members + "\n}\n";
}

} // namespace

TEST(Triage, SimpleDaoIsLikelyTruePositive)
{
    FileReport r = analyze_sample("simple_dao.sol");
    const Verdict& v = only_verdict(r, "withdraw");
    EXPECT_EQ(v.classification, Classification::likely_true_positive);
    EXPECT_TRUE(v.causes.empty());
    EXPECT_EQ(v.finding.variant, DetectorVariant::cei_violation);
    ASSERT_EQ(v.rule_trace.size(), 8u);
    for (const auto& r2 : v.rule_trace) {
        EXPECT_TRUE(r2.enabled);
        EXPECT_FALSE(r2.matched) << to_string(r2.rule);
    }
}

TEST(Triage, EachCanonicalSampleIsSuppressedWithItsCause)
{
    for (const auto& sample : samples()) {
        FileReport r = analyze_sample(sample.file);
        ASSERT_EQ(r.status, FileStatus::ok) << sample.file << ": " << r.error;
        const Verdict& v = only_verdict(r, sample.function);
        EXPECT_EQ(v.classification, Classification::suppressed_false_positive) << sample.file;
        for (auto c : sample.causes) {
            ASSERT_TRUE(v.causes.count(c)) << sample.file << " lacks " << to_string(c);
            EXPECT_FALSE(v.causes.at(c).empty()) << sample.file;
        }
    }
}

TEST(Triage, DisabledRulesNeverSuppress)
{
    AnalysisOptions none;
    none.rules.clear();
    for (const auto& sample : samples()) {
        const Verdict& v = only_verdict(analyze_sample(sample.file, none), sample.function);
        EXPECT_EQ(v.classification, Classification::likely_true_positive) << sample.file;
        for (const auto& r : v.rule_trace) {
            EXPECT_FALSE(r.enabled);
            EXPECT_FALSE(r.matched);
        }
    }
}

TEST(Triage, CausesAreTheUnionOfSingleRuleRuns)
{
    for (const auto& sample : samples()) {
        const Verdict all = only_verdict(analyze_sample(sample.file), sample.function);
        std::set<CauseType> union_of_single;
        for (auto c : kAllCauses) {
            AnalysisOptions one;
            one.rules = {c};
            const Verdict v = only_verdict(analyze_sample(sample.file, one), sample.function);
            for (const auto& [cause, ev] : v.causes)
                union_of_single.insert(cause);
        }
        std::set<CauseType> got;
        for (const auto& [cause, ev] : all.causes)
            got.insert(cause);
        EXPECT_EQ(got, union_of_single) << sample.file;
    }
}

TEST(Triage, RuleTraceIsCanonicalAndConsistent)
{
    FileReport r = analyze_sample("transfer_non_callable.sol");
    const Verdict& v = only_verdict(r, "_withdraw");
    ASSERT_EQ(v.rule_trace.size(), 8u);
    for (std::size_t i = 0; i < 8; ++i) {
        EXPECT_EQ(v.rule_trace[i].rule, kAllCauses[i]);
        EXPECT_EQ(v.rule_trace[i].matched, v.causes.count(kAllCauses[i]) == 1);
    }
}

TEST(Triage, CauseNamesRoundTrip)
{
    for (auto c : kAllCauses)
        EXPECT_EQ(cause_from_string(to_string(c)), c);
    EXPECT_FALSE(cause_from_string("not_a_cause"));
}

// Construct removed from a canonical sample: the rule no longer matches.
struct Removal
{
    const char* sample;
    const char* mutant;
    const char* function;
    CauseType rule;
};

class RemovalMutant : public ::testing::TestWithParam<Removal>
{};

TEST_P(RemovalMutant, RuleStopsMatching)
{
    const Removal& m = GetParam();
    const Verdict& before = only_verdict(analyze_sample(m.sample), m.function);
    ASSERT_TRUE(rule_matched(before, m.rule)) << m.sample;
    FileReport r = analyze_mutant(m.mutant);
    ASSERT_EQ(r.status, FileStatus::ok) << r.error;
    const Verdict& after = only_verdict(r, m.function);
    EXPECT_FALSE(rule_matched(after, m.rule)) << m.mutant;
    EXPECT_FALSE(after.causes.count(m.rule));
}

INSTANTIATE_TEST_SUITE_P(
    Canonical, RemovalMutant,
    ::testing::Values(
        Removal{"identity_control.sol", "m01_no_modifier.sol", "execute", CauseType::identity_control},
        Removal{"address_control.sol", "m02_mutable_token.sol", "register", CauseType::address_control},
        Removal{"reentrancy_lock.sol", "m03_no_lock.sol", "withdraw", CauseType::reentrancy_lock},
        Removal{"no_state_change.sol", "m04_state_change.sol", "getTokenBal", CauseType::no_state_change},
        Removal{"no_financial_risk.sol", "m05_guarded_balance.sol", "depositToken",
                CauseType::no_financial_risk},
        Removal{"special_transfer_value.sol", "m06_param_value.sol", "tradeEthVsDAI",
                CauseType::special_transfer_value},
        Removal{"transfer_non_callable.sol", "m07_call_value.sol", "_withdraw",
                CauseType::gas_stipend_transfer_send},
        Removal{"transfer_non_callable.sol", "m08_public.sol", "_withdraw", CauseType::non_callable}),
    [](const auto& info) {
        std::string n = info.param.mutant;
        n = n.substr(0, n.find('.'));
        std::replace_if(n.begin(), n.end(), [](char ch) { return !std::isalnum(static_cast<unsigned char>(ch)); }, '_');
        return n;
    });

// Construct added to the reentrant example: it becomes suppressed with that cause.
struct Addition
{
    const char* mutant;
    CauseType rule;
};

class AdditionMutant : public ::testing::TestWithParam<Addition>
{};

TEST_P(AdditionMutant, SimpleDaoBecomesSuppressed)
{
    const Addition& m = GetParam();
    const Verdict& before = only_verdict(analyze_sample("simple_dao.sol"), "withdraw");
    ASSERT_FALSE(rule_matched(before, m.rule));
    FileReport r = analyze_mutant(m.mutant);
    ASSERT_EQ(r.status, FileStatus::ok) << r.error;
    const Verdict& after = only_verdict(r, "withdraw");
    EXPECT_EQ(after.classification, Classification::suppressed_false_positive) << m.mutant;
    EXPECT_TRUE(after.causes.count(m.rule)) << m.mutant;
}

INSTANTIATE_TEST_SUITE_P(
    SimpleDao, AdditionMutant,
    ::testing::Values(Addition{"m09_only_owner.sol", CauseType::identity_control},
                      Addition{"m10_fixed_target.sol", CauseType::address_control},
                      Addition{"m11_lock.sol", CauseType::reentrancy_lock},
                      Addition{"m13_msg_value.sol", CauseType::special_transfer_value},
                      Addition{"m14_transfer.sol", CauseType::gas_stipend_transfer_send},
                      Addition{"m15_internal.sol", CauseType::non_callable},
                      Addition{"m16_inbound_token.sol", CauseType::no_financial_risk}),
    [](const auto& info) {
        std::string n = info.param.mutant;
        n = n.substr(0, n.find('.'));
        std::replace_if(n.begin(), n.end(), [](char ch) { return !std::isalnum(static_cast<unsigned char>(ch)); }, '_');
        return n;
    });

TEST(Triage, EffectsFirstWithdrawalSendingEtherStaysReported)
{
    // no_state_change only covers calls that move no ether; this one still pays out.
    const Verdict& v = only_verdict(analyze_mutant("m12_effects_first.sol"), "withdraw");
    EXPECT_EQ(v.finding.variant, DetectorVariant::bare_external_call);
    EXPECT_FALSE(rule_matched(v, CauseType::no_state_change));
}

TEST(Triage, TransferAndVisibilityBothRemovedIsReported)
{
    const Verdict& v = only_verdict(analyze_mutant("m17_public_call.sol"), "_withdraw");
    EXPECT_EQ(v.classification, Classification::likely_true_positive);
}

TEST(Rules, IdentityControlAcceptsReversedComparisonAndRevertBranch)
{
    std::string a = wrap(R"(address owner; mapping(address => uint) bal;
        constructor() { owner = msg.sender; }
        function f(address payable to, uint v) public { require(owner == msg.sender); to.call{value: v}(""); bal[to] = 0; })");
    EXPECT_TRUE(rule_matched(only_verdict(analyze_text(a), "f"), CauseType::identity_control));
    std::string b = wrap(R"(address owner; mapping(address => uint) bal;
        constructor() { owner = msg.sender; }
        function f(address payable to, uint v) public { if (msg.sender != owner) revert(); to.call{value: v}(""); bal[to] = 0; })");
    EXPECT_TRUE(rule_matched(only_verdict(analyze_text(b), "f"), CauseType::identity_control));
}

TEST(Rules, IdentityControlNeedsAnEquality)
{
    std::string src = wrap(R"(address owner; mapping(address => uint) bal;
        function f(address payable to, uint v) public { require(msg.sender != owner); to.call{value: v}(""); bal[to] = 0; })");
    EXPECT_FALSE(rule_matched(only_verdict(analyze_text(src), "f"), CauseType::identity_control));
}

TEST(Rules, IdentityControlMustGuardTheCall)
{
    std::string src = wrap(R"(address owner; mapping(address => uint) bal;
        function f(address payable to, uint v) public { to.call{value: v}(""); require(msg.sender == owner); bal[to] = 0; })");
    EXPECT_FALSE(rule_matched(only_verdict(analyze_text(src), "f"), CauseType::identity_control));
}

TEST(Rules, LockWithStatusConstants)
{
    std::string src = wrap(R"(uint256 constant NOT_ENTERED = 1; uint256 constant ENTERED = 2; uint256 status = 1;
        mapping(address => uint) bal;
        modifier nonReentrant() { require(status != ENTERED); status = ENTERED; _; status = NOT_ENTERED; }
        function f(uint v) public nonReentrant { payable(msg.sender).call{value: v}(""); bal[msg.sender] = 0; })");
    EXPECT_TRUE(rule_matched(only_verdict(analyze_text(src), "f"), CauseType::reentrancy_lock));
}

TEST(Rules, LockWithoutReleaseIsNotALock)
{
    std::string src = wrap(R"(bool locked; mapping(address => uint) bal;
        function f(uint v) public { require(!locked); locked = true; payable(msg.sender).call{value: v}(""); bal[msg.sender] = 0; })");
    EXPECT_FALSE(rule_matched(only_verdict(analyze_text(src), "f"), CauseType::reentrancy_lock));
}

TEST(Rules, SendIsAStipendCall)
{
    std::string src = wrap(R"(mapping(address => uint) bal;
        function f(uint v) public { payable(msg.sender).send(v); bal[msg.sender] = 0; })");
    const Verdict& v = only_verdict(analyze_text(src), "f");
    EXPECT_TRUE(rule_matched(v, CauseType::gas_stipend_transfer_send));
}

TEST(Rules, InternalFunctionReachableFromPublicIsCallable)
{
    std::string src = wrap(R"(mapping(address => uint) bal;
        function pay(uint v) internal { payable(msg.sender).call{value: v}(""); bal[msg.sender] = 0; }
        function entry(uint v) public { pay(v); })");
    EXPECT_FALSE(rule_matched(only_verdict(analyze_text(src), "pay"), CauseType::non_callable));
}

TEST(Rules, DelegatecallIsNeverHarmless)
{
    std::string src = wrap(R"(address impl;
        function f(bytes memory d) public { impl.delegatecall(d); })");
    const Verdict& v = only_verdict(analyze_text(src), "f");
    EXPECT_EQ(v.finding.call_site.call_kind, CallKind::delegatecall);
    EXPECT_FALSE(rule_matched(v, CauseType::no_state_change));
    EXPECT_FALSE(rule_matched(v, CauseType::no_financial_risk));
}

TEST(Detector, CallKindFilterAndBareSwitch)
{
    AnalysisOptions only_transfer;
    only_transfer.detector.call_kinds = {CallKind::transfer};
    EXPECT_TRUE(analyze_sample("simple_dao.sol", only_transfer).verdicts.empty());
    EXPECT_EQ(analyze_sample("transfer_non_callable.sol", only_transfer).verdicts.size(), 1u);

    AnalysisOptions no_bare;
    no_bare.detector.report_bare = false;
    EXPECT_TRUE(analyze_sample("transfer_non_callable.sol", no_bare).verdicts.empty());
    EXPECT_EQ(analyze_sample("simple_dao.sol", no_bare).verdicts.size(), 1u);
}

TEST(Detector, FindingIdsAreStable)
{
    auto a = analyze_sample("simple_dao.sol");
    auto b = analyze_sample("simple_dao.sol");
    ASSERT_EQ(a.verdicts.size(), 1u);
    EXPECT_EQ(a.verdicts[0].finding.id, b.verdicts[0].finding.id);
    EXPECT_EQ(a.verdicts[0].finding.id.size(), 16u);
}

TEST(Detector, InheritedCodeIsReportedOnceUnderItsDeclarer)
{
    std::string src = R"(contract Base { mapping(address => uint) bal;
        function w(uint v) public { msg.sender.call.value(v)(); bal[msg.sender] = 0; } }
    contract Child is Base { })";
    FileReport r = analyze_text(src);
    ASSERT_EQ(r.verdicts.size(), 1u);
    EXPECT_EQ(r.verdicts[0].finding.contract, "Base");
}

TEST(Detector, ModifierDuplicatedCallIsOneFinding)
{
    std::string src = R"(contract C { mapping(address => uint) bal;
        modifier twice() { _; _; }
        function w(uint v) public twice { msg.sender.call.value(v)(); bal[msg.sender] = 0; } })";
    FileReport r = analyze_text(src);
    ASSERT_EQ(r.verdicts.size(), 1u);
    EXPECT_EQ(r.verdicts[0].finding.occurrences.size(), 2u);
}
