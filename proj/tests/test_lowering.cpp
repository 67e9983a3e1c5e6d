#include "support.hpp"

#include "rtriage/frontend.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace rtriage;
using namespace rtriage::test;

namespace {

std::vector<FlatContract> flatten_all(const std::string& text, std::vector<Diagnostic>& diags)
{
    SourceUnit unit = parse_source(text, "<test>");
    return linearize(unit, {}, diags);
}

std::size_t count_of(const std::string& haystack, const std::string& needle)
{
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1))
        ++n;
    return n;
}

std::string body_text(const FlatFunction& f)
{
    return f.body ? to_source(**f.body) : std::string();
}

const char* kDiamond = R"(
contract A { function f() public returns (uint) { return 1; } function a() public {} }
contract B is A { function f() public returns (uint) { return 2; } }
contract C is A { function f() public returns (uint) { return 3; } }
contract D is B, C { }
)";

} // namespace

TEST(Lowering, DiamondLinearizationMatchesC3)
{
    std::vector<Diagnostic> diags;
    auto flat = flatten_all(kDiamond, diags);
    auto d = std::find_if(flat.begin(), flat.end(), [](const FlatContract& c) { return c.name == "D"; });
    ASSERT_NE(d, flat.end());
    EXPECT_EQ(d->linearization, (std::vector<std::string>{"D", "C", "B", "A"}));
}

TEST(Lowering, MostDerivedOverrideWins)
{
    FlatContract d = flatten(kDiamond, "D");
    const FlatFunction* f = d.find_function("f", 0);
    ASSERT_NE(f, nullptr);
    EXPECT_EQ(f->origin, "C");
    EXPECT_EQ(f->contract, "D");
    const FlatFunction* a = d.find_function("a", 0);
    ASSERT_NE(a, nullptr);
    EXPECT_EQ(a->origin, "A");
    EXPECT_EQ(std::count_if(d.functions.begin(), d.functions.end(), [](const FlatFunction& x) { return x.name == "f"; }),
              1);
}

TEST(Lowering, StateVariablesAreBaseFirst)
{
    FlatContract g = flatten(read_file(canonical_dir() / "reentrancy_lock.sol"), "GovernanceVesting");
    ASSERT_FALSE(g.state_vars.empty());
    EXPECT_EQ(g.state_vars.front().def.name, "_notEntered");
    EXPECT_EQ(g.state_vars.front().origin, "ReentrancyGuard");
    EXPECT_NE(g.find_state_var("Withdrawn"), nullptr);
}

TEST(Lowering, ModifierBodyIsInlinedAroundTheFunction)
{
    FlatContract g = flatten(read_file(canonical_dir() / "reentrancy_lock.sol"), "GovernanceVesting");
    const FlatFunction* w = g.find_function("withdraw", 0);
    ASSERT_NE(w, nullptr);
    std::string text = body_text(*w);
    auto guard = text.find("require(_notEntered)");
    auto call = text.find("transfer(");
    auto restore = text.find("_notEntered = true");
    ASSERT_NE(guard, std::string::npos) << text;
    ASSERT_NE(call, std::string::npos) << text;
    ASSERT_NE(restore, std::string::npos) << text;
    EXPECT_LT(guard, call);
    EXPECT_LT(call, restore);
}

TEST(Lowering, PlaceholderUsedTwiceDuplicatesTheBody)
{
    const char* src = R"(
contract C {
    uint x;
    modifier twice() { _; _; }
    function f() public twice { x += 1; }
}
)";
    FlatContract c = flatten(src, "C");
    EXPECT_EQ(count_of(body_text(*c.find_function("f", 0)), "x += 1"), 2u);
}

TEST(Lowering, ModifierArgumentsAreSubstituted)
{
    const char* src = R"(
contract C {
    address owner;
    modifier only(address who) { require(msg.sender == who); _; }
    function f() public only(owner) { }
}
)";
    FlatContract c = flatten(src, "C");
    std::string text = body_text(*c.find_function("f", 0));
    EXPECT_NE(text.find("msg.sender == owner"), std::string::npos) << text;
    EXPECT_EQ(text.find("who"), std::string::npos) << text;
}

TEST(Lowering, StackedModifiersNestOutermostFirst)
{
    const char* src = R"(
contract C {
    uint log;
    modifier a() { log = 1; _; }
    modifier b() { log = 2; _; }
    function f() public a b { log = 3; }
}
)";
    std::string text = body_text(*flatten(src, "C").find_function("f", 0));
    auto one = text.find("log = 1");
    auto two = text.find("log = 2");
    auto three = text.find("log = 3");
    ASSERT_TRUE(one != std::string::npos && two != std::string::npos && three != std::string::npos) << text;
    EXPECT_LT(one, two);
    EXPECT_LT(two, three);
}

TEST(Lowering, UnknownModifierIsReportedAndIgnored)
{
    const char* src = "contract C { uint x; function f() public mystery { x = 1; } }";
    std::vector<Diagnostic> diags;
    auto flat = flatten_all(src, diags);
    ASSERT_EQ(flat.size(), 1u);
    EXPECT_NE(body_text(*flat[0].find_function("f", 0)).find("x = 1"), std::string::npos);
    EXPECT_TRUE(std::any_of(diags.begin(), diags.end(),
                            [](const Diagnostic& d) { return d.message.find("mystery") != std::string::npos; }));
}

TEST(Lowering, BaseConstructorInvocationIsNotAModifier)
{
    const char* src = R"(
contract A { uint v; constructor(uint x) public { v = x; } }
contract B is A { constructor() A(1) public { } }
)";
    std::vector<Diagnostic> diags;
    flatten_all(src, diags);
    for (const auto& d : diags)
        EXPECT_LT(d.severity, Severity::warning) << d.message;
}

TEST(Lowering, CyclicInheritanceIsSkipped)
{
    const char* src = "contract A is B { } contract B is A { } contract C { }";
    std::vector<Diagnostic> diags;
    auto flat = flatten_all(src, diags);
    ASSERT_EQ(flat.size(), 1u);
    EXPECT_EQ(flat[0].name, "C");
    EXPECT_TRUE(std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) {
        return d.severity >= Severity::error && d.message.find("cyclic") != std::string::npos;
    }));
}

TEST(Lowering, InterfacesAreNotFlattened)
{
    std::vector<Diagnostic> diags;
    auto flat = flatten_all(read_file(canonical_dir() / "address_control.sol"), diags);
    ASSERT_EQ(flat.size(), 1u);
    EXPECT_EQ(flat[0].name, "DaiSavingsEscrow");
}

TEST(Lowering, RelinearizingAFlatContractIsStable)
{
    FlatContract d = flatten(kDiamond, "D");
    SourceUnit unit;
    unit.path = "<flat>";
    unit.contracts.push_back(to_contract_def(d));
    std::vector<Diagnostic> diags;
    auto again = linearize(unit, {}, diags);
    ASSERT_EQ(again.size(), 1u);
    ASSERT_EQ(again[0].functions.size(), d.functions.size());
    for (std::size_t i = 0; i < d.functions.size(); ++i) {
        EXPECT_EQ(again[0].functions[i].signature, d.functions[i].signature);
        EXPECT_EQ(body_text(again[0].functions[i]), body_text(d.functions[i]));
    }
}

TEST(Lowering, ExternalVisibilityMakesFunctionsCallable)
{
    FlatContract w = flatten(read_file(canonical_dir() / "identity_control.sol"), "OwnedWallet");
    EXPECT_TRUE(w.find_function("execute", 3)->callable_externally);
    FlatContract e = flatten(read_file(canonical_dir() / "transfer_non_callable.sol"), "Exchange");
    EXPECT_FALSE(e.find_function("_withdraw", 4)->callable_externally);
}
