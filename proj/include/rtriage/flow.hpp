#pragma once

#include "rtriage/common.hpp"
#include "rtriage/lowering.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace rtriage {

// ---------------------------------------------------------------------------
// Facts attached to CFG items

enum class WriteKind { direct_assign, compound_assign, opaque };
const char* to_string(WriteKind k);

/// A write to contract storage. An empty `variable` means the target is unknown
/// (opaque statement or unresolved callee).
struct StateWrite
{
    std::string variable;
    std::string index; ///< source text of the outermost index expression, if any
    WriteKind kind = WriteKind::direct_assign;
    Span location;
    ExprPtr value; ///< assigned expression for plain `=` writes

    [[nodiscard]] std::string target() const;
    [[nodiscard]] bool is_unknown() const { return variable.empty(); }
};

bool operator<(const StateWrite& a, const StateWrite& b);
bool operator==(const StateWrite& a, const StateWrite& b);

/// Value slot of a call: the transfer/send argument or the `value` option.
ExprPtr value_slot(const Expr& call);
/// Object the call is made on (`x` in `x.f()`, `x.call{...}()`, `x.transfer(v)`).
ExprPtr call_target(const Expr& call);
/// True when the call moves ether out of the contract.
bool is_ether_outflow(const Expr& call);
/// Literal zero, ignoring casts and parentheses.
bool is_literal_zero(const Expr& e);

struct CallSite
{
    CallKind call_kind = CallKind::unresolved;
    ExprPtr call;
    ExprPtr target_expr;
    ExprPtr value_slot;
    ExprPtr gas_slot;
    Span location;
    std::string enclosing_function;
    std::size_t block = 0;
    std::size_t item = 0;
    std::size_t effect = 0;
};

/// One observable step of evaluating an item, in evaluation order.
struct Effect
{
    enum class Kind { call, write, outflow };
    Kind kind = Kind::call;
    std::size_t site = 0; ///< index into Cfg::sites for external calls
    StateWrite write;
    Span location;
    ExprPtr expr; ///< the external call expression
};

struct CfgItem
{
    enum class Kind { statement, condition, require };
    Kind kind = Kind::statement;
    StmtPtr stmt;  ///< owning statement (may be null for synthetic items)
    ExprPtr cond;  ///< condition / require expression
    Span span;
    std::vector<Effect> effects;
    std::set<std::string> reads; ///< state variables read, including via locals and callees
};

enum class EdgeKind { seq, true_branch, false_branch, loop_back };
enum class Branch { none, when_true, when_false };
const char* to_string(EdgeKind k);

struct CfgEdge
{
    std::size_t from = 0;
    std::size_t to = 0;
    EdgeKind kind = EdgeKind::seq;
    Branch branch = Branch::none;
    ExprPtr condition; ///< set for branch edges
    Span span;
};

struct BasicBlock
{
    std::size_t id = 0;
    std::vector<CfgItem> items;
    bool dead = false;
};

/// Per-function control-flow graph. Edges leaving dead blocks are dropped.
class Cfg
{
public:
    std::vector<BasicBlock> blocks;
    std::vector<CfgEdge> edges;
    std::vector<CallSite> sites; ///< external call sites in live blocks
    std::size_t entry = 0;
    std::size_t exit = 0;
    std::string function_name;

    std::size_t add_block();
    void add_edge(CfgEdge e);

    /// Marks unreachable blocks dead, drops their edges, computes dominators
    /// and collects call sites from live blocks.
    void finalize();

    [[nodiscard]] std::vector<std::size_t> successors(std::size_t b) const;
    [[nodiscard]] std::vector<std::size_t> predecessors(std::size_t b) const;
    [[nodiscard]] bool dominates(std::size_t a, std::size_t b) const;
    /// Whether every path from entry to `b` crosses edge `e` (index into edges).
    [[nodiscard]] bool edge_dominates(std::size_t e, std::size_t b) const;
    [[nodiscard]] bool reachable(std::size_t from, std::size_t to) const;

private:
    std::vector<std::vector<bool>> dom_;
    std::vector<std::vector<bool>> edge_dom_;
};

// ---------------------------------------------------------------------------
// Queries

struct Guard
{
    enum class Origin { require, branch };
    ExprPtr expr;
    bool negated = false; ///< the guard holds when `expr` is false
    Origin origin = Origin::require;
    Span span;
    std::size_t block = 0;
    std::size_t item = 0; ///< require item index; for branches, item count of the source block
};

/// Storage writes on any path strictly after the call, including writes that
/// come around again through a loop back-edge. Sorted and unique.
std::vector<StateWrite> writes_after(const Cfg& cfg, std::size_t site);

/// Whether any ether outflow may happen after the call.
std::vector<Span> outflows_after(const Cfg& cfg, std::size_t site);

/// Conditions that hold on every path from entry to the call, outermost first.
std::vector<Guard> guards_of(const Cfg& cfg, std::size_t site);
/// Same, for an arbitrary item position.
std::vector<Guard> guards_at(const Cfg& cfg, std::size_t block, std::size_t item);

/// Conjunctive literals a guard establishes: (expression, holds-when-true).
/// `!x` flips polarity, `a && b` splits when positive, `a || b` when negated.
std::vector<std::pair<ExprPtr, bool>> guard_literals(const ExprPtr& expr, bool positive);

/// Whether position a is executed before position b on every path reaching b.
bool position_dominates(const Cfg& cfg, std::size_t block_a, std::size_t item_a, std::size_t block_b,
                        std::size_t item_b);

// ---------------------------------------------------------------------------
// File-level facts

struct FunctionSummary
{
    std::set<std::string> writes; ///< "" marks an unknown target
    std::set<std::string> reads;
    bool sends_ether = false;
    std::set<std::string> callees; ///< qualified names
};

struct FunctionFacts
{
    const FlatContract* contract = nullptr;
    const FlatFunction* function = nullptr;
    std::size_t index = 0; ///< position in contract->functions
    Cfg cfg;
    FunctionSummary summary; ///< transitive over internal calls
    std::set<std::string> locals; ///< params, returns and local declarations
    std::set<std::string> params;
    /// Every expression assigned to each local (initializers included).
    std::map<std::string, std::vector<ExprPtr>> local_defs;
    /// Storage-pointer locals mapped to the state variable they alias.
    std::map<std::string, std::string> aliases;
};

enum class Provenance {
    hardcoded_constant,
    state_var_fixed,
    state_var_mutable,
    msg_value,
    parameter,
    computed,
    unknown
};
const char* to_string(Provenance p);

struct CallGraph
{
    std::set<std::string> nodes;
    std::map<std::string, std::set<std::string>> edges;
    std::set<std::string> roots; ///< public/external non-constructor functions

    [[nodiscard]] bool reachable_from_roots(const std::string& node) const;
};

/// All flow facts for one source file. Owns the flattened contracts.
class FileFacts
{
public:
    FileFacts(std::string path, std::vector<FlatContract> contracts, const Deadline& deadline = {});
    FileFacts(const FileFacts&) = delete;
    FileFacts& operator=(const FileFacts&) = delete;

    [[nodiscard]] const std::string& path() const { return path_; }
    [[nodiscard]] const std::vector<FlatContract>& contracts() const { return contracts_; }
    /// Facts for every function of contract `c`, parallel to contracts()[c].functions.
    [[nodiscard]] const std::vector<FunctionFacts>& functions(std::size_t c) const { return facts_[c]; }
    [[nodiscard]] const CallGraph& call_graph() const { return graph_; }

    /// Whether the state variable of contract `c` can never change after deployment.
    [[nodiscard]] bool is_fixed(std::size_t c, const std::string& var) const;
    /// State variables read by a condition dominating an ether outflow anywhere in the file.
    [[nodiscard]] const std::map<std::string, std::vector<Span>>& outflow_guard_reads() const
    {
        return outflow_guard_reads_;
    }

    [[nodiscard]] Provenance provenance(const Expr& e, std::size_t c, const FunctionFacts& fn,
                                        std::optional<std::size_t> site = std::nullopt) const;

    [[nodiscard]] bool externally_reachable(const FlatFunction& fn) const;

    /// Literal value of a named constant or literal expression, if any.
    [[nodiscard]] std::optional<std::string> constant_value(const Expr& e, std::size_t c) const;

private:
    std::string path_;
    std::vector<FlatContract> contracts_;
    std::vector<std::vector<FunctionFacts>> facts_;
    std::vector<std::set<std::string>> fixed_;
    CallGraph graph_;
    std::map<std::string, std::vector<Span>> outflow_guard_reads_;

    Provenance provenance_rec(const Expr& e, std::size_t c, const FunctionFacts& fn, std::optional<std::size_t> site,
                              int depth) const;
};

/// Builds the CFG of `fn` without interprocedural summaries (callees are
/// treated as opaque when unresolvable, side-effect free otherwise).
Cfg build_cfg(const FlatFunction& fn, const FlatContract& contract);

bool externally_reachable(const FlatFunction& fn, const CallGraph& graph);

} // namespace rtriage
