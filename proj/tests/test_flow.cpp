#include "flow_oracle.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

using namespace rtriage;
using namespace rtriage::test;

namespace {

struct Built
{
    FlatContract contract;
    Cfg cfg;
};

Built cfg_of(const std::string& src, const std::string& contract, const std::string& fn, std::size_t arity)
{
    Built b{flatten(src, contract), {}};
    const FlatFunction* f = b.contract.find_function(fn, arity);
    if (!f)
        throw std::runtime_error("no function " + fn);
    b.cfg = build_cfg(*f, b.contract);
    return b;
}

std::size_t live_blocks(const Cfg& cfg)
{
    return static_cast<std::size_t>(
        std::count_if(cfg.blocks.begin(), cfg.blocks.end(), [](const BasicBlock& b) { return !b.dead; }));
}

std::vector<std::string> targets(const std::vector<StateWrite>& ws)
{
    std::vector<std::string> out;
    for (const auto& w : ws)
        out.push_back(w.is_unknown() ? "?" : w.target());
    return out;
}

std::string wrap(const std::string& body, const std::string& extra = "")
{
    return "contract C { uint a; uint b; uint[] arr; mapping(address => uint) m; address payable owner; " + extra +
           " function f(uint x) public { " + body + " } }";
}

} // namespace

TEST(Cfg, SimpleDaoHasThreeBlocks)
{
    auto b = cfg_of(read_file(canonical_dir() / "simple_dao.sol"), "SimpleDAO", "withdraw", 1);
    EXPECT_EQ(live_blocks(b.cfg), 3u);
    ASSERT_EQ(b.cfg.sites.size(), 1u);
    EXPECT_EQ(b.cfg.sites[0].call_kind, CallKind::low_level_call);
    EXPECT_EQ(targets(writes_after(b.cfg, 0)), (std::vector<std::string>{"userbalance[msg.sender]"}));
    auto guards = guards_of(b.cfg, 0);
    ASSERT_EQ(guards.size(), 1u);
    EXPECT_EQ(guards[0].origin, Guard::Origin::branch);
    EXPECT_FALSE(guards[0].negated);
}

TEST(Cfg, EmptyBodyIsOneBlock)
{
    auto b = cfg_of(wrap(""), "C", "f", 1);
    EXPECT_EQ(b.cfg.entry, b.cfg.exit);
    EXPECT_EQ(live_blocks(b.cfg), 1u);
}

TEST(Cfg, IfElseJoins)
{
    auto b = cfg_of(wrap("if (x > 1) { a = 1; } else { b = 2; } owner.transfer(1);"), "C", "f", 1);
    // entry, then, else, join, exit
    EXPECT_EQ(live_blocks(b.cfg), 5u);
    ASSERT_EQ(b.cfg.sites.size(), 1u);
    EXPECT_TRUE(guards_of(b.cfg, 0).empty());
}

TEST(Cfg, NestedIfGuardsAreOutermostFirst)
{
    auto b = cfg_of(wrap("if (x > 1) { if (a == 0) { owner.transfer(1); } }"), "C", "f", 1);
    ASSERT_EQ(b.cfg.sites.size(), 1u);
    auto g = guards_of(b.cfg, 0);
    ASSERT_EQ(g.size(), 2u);
    EXPECT_EQ(to_source(*g[0].expr), "x > 1");
    EXPECT_EQ(to_source(*g[1].expr), "a == 0");
}

TEST(Cfg, ElseBranchGuardIsNegated)
{
    auto b = cfg_of(wrap("if (x > 1) { a = 1; } else { owner.transfer(1); }"), "C", "f", 1);
    auto g = guards_of(b.cfg, 0);
    ASSERT_EQ(g.size(), 1u);
    EXPECT_TRUE(g[0].negated);
}

TEST(Cfg, RequireIsAGuardWithoutSplitting)
{
    auto b = cfg_of(wrap("require(x > 0); owner.transfer(x); a = x;"), "C", "f", 1);
    // body, exit
    EXPECT_EQ(live_blocks(b.cfg), 2u);
    auto g = guards_of(b.cfg, 0);
    ASSERT_EQ(g.size(), 1u);
    EXPECT_EQ(g[0].origin, Guard::Origin::require);
    EXPECT_EQ(targets(writes_after(b.cfg, 0)), (std::vector<std::string>{"a"}));
}

TEST(Cfg, RequireAfterTheCallIsNotAGuard)
{
    auto b = cfg_of(wrap("owner.transfer(x); require(x > 0);"), "C", "f", 1);
    EXPECT_TRUE(guards_of(b.cfg, 0).empty());
}

TEST(Cfg, LoopBackEdgeReachesEarlierWrites)
{
    auto b = cfg_of(wrap("while (x > 0) { a = x; owner.transfer(1); x--; }"), "C", "f", 1);
    ASSERT_EQ(b.cfg.sites.size(), 1u);
    // `a` is written before the call but runs again on the next iteration.
    EXPECT_EQ(targets(writes_after(b.cfg, 0)), (std::vector<std::string>{"a"}));
}

TEST(Cfg, RevertEndsThePath)
{
    auto b = cfg_of(wrap("if (x == 0) { revert(); } owner.transfer(1);"), "C", "f", 1);
    auto g = guards_of(b.cfg, 0);
    ASSERT_EQ(g.size(), 1u);
    EXPECT_TRUE(g[0].negated);
    EXPECT_EQ(to_source(*g[0].expr), "x == 0");
}

TEST(Cfg, ReturnSkipsLaterCode)
{
    auto b = cfg_of(wrap("owner.transfer(1); if (x == 0) { return; } a = 1;"), "C", "f", 1);
    EXPECT_EQ(targets(writes_after(b.cfg, 0)), (std::vector<std::string>{"a"}));
    auto dead = cfg_of(wrap("owner.transfer(1); return; a = 1;"), "C", "f", 1);
    EXPECT_TRUE(writes_after(dead.cfg, 0).empty());
}

TEST(Cfg, CodeAfterRevertIsDead)
{
    auto b = cfg_of(wrap("revert(); owner.transfer(1);"), "C", "f", 1);
    EXPECT_TRUE(b.cfg.sites.empty());
}

TEST(Cfg, EvaluationOrderWithinAStatement)
{
    // The call runs before the assignment stores its result.
    auto b = cfg_of(wrap("m[msg.sender] = owner.send(1) ? 1 : 0;"), "C", "f", 1);
    ASSERT_EQ(b.cfg.sites.size(), 1u);
    EXPECT_EQ(targets(writes_after(b.cfg, 0)), (std::vector<std::string>{"m[msg.sender]"}));
}

TEST(Cfg, CompoundWritesAndArrayOps)
{
    auto b = cfg_of(wrap("owner.transfer(1); a += 1; arr.push(x); delete b;"), "C", "f", 1);
    auto ws = writes_after(b.cfg, 0);
    EXPECT_EQ(targets(ws), (std::vector<std::string>{"a", "arr", "b"}));
}

TEST(Cfg, InternalCalleeWritesAreSummarized)
{
    std::string src = wrap("owner.transfer(1); g();", "function g() internal { b = 1; }");
    FileReport r = analyze_source(src, "<t>");
    const Verdict& v = only_verdict(r, "f");
    EXPECT_EQ(targets(v.finding.post_writes), (std::vector<std::string>{"b"}));
}

TEST(Cfg, StoragePointerAliasWritesTheStateVariable)
{
    std::string src = R"(contract C {
        struct S { uint v; }
        mapping(address => S) data;
        function f() public { S storage s = data[msg.sender]; msg.sender.transfer(1); s.v = 0; }
    })";
    FileReport r = analyze_source(src, "<t>");
    const Verdict& v = only_verdict(r, "f");
    ASSERT_EQ(v.finding.post_writes.size(), 1u);
    EXPECT_EQ(v.finding.post_writes[0].variable, "data");
}

TEST(Cfg, MemoryLocalIsNotStorage)
{
    auto b = cfg_of(wrap("uint[] memory tmp = new uint[](1); owner.transfer(1); tmp[0] = 1;"), "C", "f", 1);
    EXPECT_TRUE(writes_after(b.cfg, 0).empty());
}

TEST(Cfg, GuardLiteralsDecomposeConjunctions)
{
    SourceUnit u = parse_source("contract C { function f(bool p, bool q, bool r) public { require(p && !(q || r)); } }",
                                "<t>");
    const auto& body = *u.contracts[0].functions[0].body;
    ExprPtr cond = body->children[0]->expr;
    auto lits = guard_literals(cond, true);
    ASSERT_EQ(lits.size(), 3u);
    EXPECT_EQ(to_source(*lits[0].first), "p");
    EXPECT_TRUE(lits[0].second);
    EXPECT_EQ(to_source(*lits[1].first), "q");
    EXPECT_FALSE(lits[1].second);
    EXPECT_FALSE(lits[2].second);
}

TEST(Cfg, DoWhileRunsBodyFirst)
{
    auto b = cfg_of(wrap("do { owner.transfer(1); } while (x > a); b = 1;"), "C", "f", 1);
    ASSERT_EQ(b.cfg.sites.size(), 1u);
    EXPECT_TRUE(guards_of(b.cfg, 0).empty());
    EXPECT_EQ(targets(writes_after(b.cfg, 0)), (std::vector<std::string>{"b"}));
}

TEST(Cfg, ForLoopStepRunsAfterTheBody)
{
    auto b = cfg_of(wrap("for (uint i = 0; i < x; i++) { owner.transfer(1); a = i; }"), "C", "f", 1);
    ASSERT_EQ(b.cfg.sites.size(), 1u);
    auto g = guards_of(b.cfg, 0);
    ASSERT_EQ(g.size(), 1u);
    EXPECT_EQ(to_source(*g[0].expr), "i < x");
}

TEST(FileFacts, ConstantsAndConstructorOnlyWritesAreFixed)
{
    std::string src = R"(contract C {
        address constant K = 0x6B175474E89094C44Da98b954EedeAC495271d0F;
        address owner;
        address fixedAtDeploy;
        address settable;
        constructor(address p) public { owner = p; fixedAtDeploy = address(this); }
        function set(address p) public { settable = p; }
    })";
    SourceUnit unit = parse_source(src, "<t>");
    auto facts = build_facts(unit);
    EXPECT_TRUE(facts->is_fixed(0, "K"));
    EXPECT_TRUE(facts->is_fixed(0, "fixedAtDeploy"));
    EXPECT_FALSE(facts->is_fixed(0, "owner"));
    EXPECT_FALSE(facts->is_fixed(0, "settable"));
}

TEST(FileFacts, CallGraphReachability)
{
    std::string src = R"(contract C {
        function pub() public { a(); }
        function a() internal { }
        function orphan() internal { }
    })";
    SourceUnit unit = parse_source(src, "<t>");
    auto facts = build_facts(unit);
    const auto& c = facts->contracts()[0];
    EXPECT_TRUE(facts->externally_reachable(*c.find_function("a", 0)));
    EXPECT_FALSE(facts->externally_reachable(*c.find_function("orphan", 0)));
}

TEST(FileFacts, MsgValueProvenanceFollowsEqualityGuards)
{
    SourceUnit unit = parse_source(read_file(canonical_dir() / "special_transfer_value.sol"), "<t>");
    auto facts = build_facts(unit);
    std::size_t ci = 0;
    while (ci < facts->contracts().size() && facts->contracts()[ci].name != "DaiTrader")
        ++ci;
    ASSERT_LT(ci, facts->contracts().size());
    const FunctionFacts* trade = nullptr;
    for (const auto& f : facts->functions(ci))
        if (f.function->name == "tradeEthVsDAI")
            trade = &f;
    ASSERT_NE(trade, nullptr);
    ASSERT_EQ(trade->cfg.sites.size(), 1u);
    const CallSite& site = trade->cfg.sites[0];
    ASSERT_TRUE(site.value_slot);
    EXPECT_EQ(facts->provenance(*site.value_slot, ci, *trade, 0), Provenance::msg_value);
}

TEST(FlowOracle, RandomGraphsAgreeWithPathEnumeration)
{
    auto st = run_flow_oracle(20240601u, 200);
    EXPECT_EQ(st.graphs, 200u);
    EXPECT_EQ(st.disagreements, 0u) << st.first_disagreement;
    EXPECT_GT(st.sites, 200u);
}
