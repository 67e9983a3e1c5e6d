#include "support.hpp"

#include "rtriage/frontend.hpp"

#include <gtest/gtest.h>

using namespace rtriage;
using namespace rtriage::test;

namespace {

// Published listing, with its "..." elision kept.
const char* kElidedSimpleDao = R"(contract SimpleDAO {
    mapping (address => uint) public userbalance;
    ...
    function withdraw(uint amount) public{
        if (userbalance[msg.sender]>= amount) {
            require(msg.sender.call.value(amount)());
            userbalance[msg.sender]-=amount;
        }
    }  
}
)";

const Expr* find_call(const ExprPtr& e, CallKind kind)
{
    if (!e)
        return nullptr;
    if (e->kind == ExprKind::call && e->call_kind == kind)
        return e.get();
    for (const auto* child : {&e->lhs, &e->rhs})
        if (auto* f = find_call(*child, kind))
            return f;
    for (const auto& a : e->args)
        if (auto* f = find_call(a, kind))
            return f;
    if (auto* f = find_call(e->value_option, kind))
        return f;
    return nullptr;
}

const Expr* find_call(const StmtPtr& s, CallKind kind)
{
    if (!s)
        return nullptr;
    if (auto* f = find_call(s->expr, kind))
        return f;
    for (const auto& a : s->args)
        if (auto* f = find_call(a, kind))
            return f;
    for (const auto& c : s->children)
        if (auto* f = find_call(c, kind))
            return f;
    if (auto* f = find_call(s->init, kind))
        return f;
    return find_call(s->step, kind);
}

const FunctionDef& function(const SourceUnit& u, const std::string& contract, const std::string& name)
{
    const ContractDef* c = u.find_contract(contract);
    if (!c)
        throw std::runtime_error("no contract " + contract);
    for (const auto& f : c->functions)
        if (f.display_name() == name)
            return f;
    throw std::runtime_error("no function " + name);
}

} // namespace

TEST(Frontend, ElidedListingParsesWithElision)
{
    SourceUnit u = parse_source(kElidedSimpleDao, "simple_dao.sol");
    EXPECT_FALSE(u.has_fatal());
    const auto& withdraw = function(u, "SimpleDAO", "withdraw");
    ASSERT_TRUE(withdraw.body);
    // The call is on line 6 and the balance update on line 7.
    const Expr* call = find_call(*withdraw.body, CallKind::low_level_call);
    ASSERT_NE(call, nullptr);
    EXPECT_EQ(call->span.line, 6u);
    EXPECT_EQ(withdraw.span.line, 4u);
    ASSERT_NE(u.find_contract("SimpleDAO")->find_state_var("userbalance"), nullptr);
    EXPECT_EQ(u.find_contract("SimpleDAO")->find_state_var("userbalance")->span.line, 2u);
}

TEST(Frontend, ElidedListingYieldsOneLikelyTruePositive)
{
    FileReport r = analyze_source(kElidedSimpleDao, "simple_dao.sol");
    ASSERT_EQ(r.status, FileStatus::ok) << r.error;
    const Verdict& v = only_verdict(r, "withdraw");
    EXPECT_EQ(v.classification, Classification::likely_true_positive);
    EXPECT_EQ(v.finding.location.line, 6u);
    ASSERT_EQ(v.finding.post_writes.size(), 1u);
    EXPECT_EQ(v.finding.post_writes[0].variable, "userbalance");
    EXPECT_EQ(v.finding.post_writes[0].location.line, 7u);
}

TEST(Frontend, CallFormsAreClassified)
{
    const char* src = R"(pragma solidity ^0.8.0;
interface IT { function f() external; }
contract C {
    IT t;
    function g(address payable a) public {
        a.call{value: 1}("");
        a.transfer(1);
        a.send(1);
        t.f();
        a.delegatecall("");
        h();
    }
    function h() internal {}
}
)";
    SourceUnit u = parse_source(src, "c.sol");
    ASSERT_FALSE(u.has_fatal());
    const auto& g = function(u, "C", "g");
    for (auto k : {CallKind::low_level_call, CallKind::transfer, CallKind::send, CallKind::external_member_call,
                   CallKind::delegatecall, CallKind::internal})
        EXPECT_NE(find_call(*g.body, k), nullptr) << to_string(k);
    const Expr* call = find_call(*g.body, CallKind::low_level_call);
    ASSERT_TRUE(call->value_option);
    EXPECT_EQ(to_source(*call->value_option), "1");
}

TEST(Frontend, LegacyAndBraceValueOptionsAgree)
{
    SourceUnit a = parse_source("contract C { function f(address x) public { x.call.value(5)(); } }", "a.sol");
    SourceUnit b = parse_source("contract C { function f(address x) public { x.call{value: 5}(); } }", "b.sol");
    const Expr* ca = find_call(*function(a, "C", "f").body, CallKind::low_level_call);
    const Expr* cb = find_call(*function(b, "C", "f").body, CallKind::low_level_call);
    ASSERT_TRUE(ca && cb);
    ASSERT_TRUE(ca->value_option && cb->value_option);
    EXPECT_EQ(to_source(*ca->value_option), to_source(*cb->value_option));
}

TEST(Frontend, InternalFunctionWithTransfer)
{
    SourceUnit u = parse_source(read_file(canonical_dir() / "transfer_non_callable.sol"), "transfer_non_callable.sol");
    ASSERT_FALSE(u.has_fatal());
    const auto& w = function(u, "Exchange", "_withdraw");
    EXPECT_EQ(w.visibility, Visibility::internal);
    const Expr* t = find_call(*w.body, CallKind::transfer);
    ASSERT_NE(t, nullptr);
    EXPECT_EQ(t->span.line, 7u);
}

TEST(Frontend, EmptyInputHasNoContracts)
{
    SourceUnit u = parse_source("", "empty.sol");
    EXPECT_TRUE(u.contracts.empty());
    EXPECT_FALSE(u.has_fatal());
    FileReport r = analyze_source("", "empty.sol");
    EXPECT_EQ(r.status, FileStatus::ok);
    EXPECT_TRUE(r.verdicts.empty());
}

TEST(Frontend, SpansCoverTheirSourceText)
{
    std::string src = read_file(canonical_dir() / "simple_dao.sol");
    SourceUnit u = parse_source(src, "simple_dao.sol");
    const auto& w = function(u, "SimpleDAO", "withdraw");
    const Expr* call = find_call(*w.body, CallKind::low_level_call);
    ASSERT_NE(call, nullptr);
    std::string text = src.substr(call->span.offset, call->span.length);
    EXPECT_EQ(token_texts(text), token_texts(to_source(*call)));
}

TEST(Frontend, PrintingIsTokenFaithfulAcrossCanonicalCorpus)
{
    for (const auto& entry : std::filesystem::directory_iterator(canonical_dir())) {
        if (entry.path().extension() != ".sol")
            continue;
        std::string src = read_file(entry.path());
        SourceUnit u = parse_source(src, entry.path().string());
        for (const auto& c : u.contracts)
            for (const auto& f : c.functions) {
                if (!f.body)
                    continue;
                std::string text = src.substr((*f.body)->span.offset, (*f.body)->span.length);
                auto original = token_texts(text);
                // Elision comments are not tokens, so printed and original streams must agree.
                EXPECT_EQ(token_texts(to_source(**f.body)), original) << entry.path() << ' ' << f.display_name();
            }
    }
}

TEST(Frontend, NormalizationIsIdempotent)
{
    SourceUnit u = parse_source(read_file(canonical_dir() / "address_control.sol"), "address_control.sol");
    SourceUnit again = normalize_call_forms(u);
    const auto& a = function(u, "DaiSavingsEscrow", "register");
    const auto& b = function(again, "DaiSavingsEscrow", "register");
    EXPECT_EQ(to_source(**a.body), to_source(**b.body));
    EXPECT_NE(find_call(*b.body, CallKind::external_member_call), nullptr);
}

TEST(Frontend, TypeCastIsNotACall)
{
    SourceUnit u = parse_source(read_file(canonical_dir() / "address_control.sol"), "address_control.sol");
    const StateVarDef* dai = u.find_contract("DaiSavingsEscrow")->find_state_var("dai");
    ASSERT_NE(dai, nullptr);
    ASSERT_TRUE(dai->initializer);
    EXPECT_EQ(dai->initializer->kind, ExprKind::type_cast);
    EXPECT_EQ(&strip_casts(*dai->initializer), dai->initializer->lhs.get());
}

TEST(Frontend, RejectsInvalidUtf8)
{
    FileReport r = analyze_source(std::string("contract C {}\xff\xfe"), "bad.sol");
    EXPECT_EQ(r.status, FileStatus::failed);
}

TEST(Frontend, BraceImbalanceFailsTheFile)
{
    FileReport r = analyze_source(read_file(mutants_dir() / "m20_broken.sol"), "m20.sol");
    EXPECT_EQ(r.status, FileStatus::failed);
    EXPECT_FALSE(r.error.empty());
}

TEST(Frontend, AddressLiteralNormalization)
{
    EXPECT_EQ(normalize_address_literal("0x6B175474E89094C44Da98b954EedeAC495271d0F"),
              "6b175474e89094c44da98b954eedeac495271d0f");
}
