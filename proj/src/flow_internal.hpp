#pragma once

#include "rtriage/flow.hpp"

#include <functional>

namespace rtriage::detail {

struct CalleeRef
{
    bool found = false;
    std::string qualified;
    const FunctionSummary* summary = nullptr; ///< null when summaries are not available yet
};

/// Name resolution and summaries a walk over one function needs.
struct EffectEnv
{
    const FlatContract* contract = nullptr;
    const std::set<std::string>* locals = nullptr;
    const std::map<std::string, std::string>* aliases = nullptr;
    const std::map<std::string, std::set<std::string>>* local_reads = nullptr;
    std::function<CalleeRef(const Expr& call)> resolve;
};

/// Appends the effects and state reads of evaluating `e` to `item`.
void expr_effects(const EffectEnv& env, const ExprPtr& e, CfgItem& item);
/// Effects of a straight-line statement (no control flow of its own).
void simple_stmt_effects(const EffectEnv& env, const Stmt& s, CfgItem& item);

/// State variables read by `e` directly, through locals and through callees.
std::set<std::string> expr_reads(const EffectEnv& env, const ExprPtr& e);

/// Builds a CFG for `fn` using `env` for effects. Checks `deadline` per statement.
Cfg build_cfg(const FlatFunction& fn, const EffectEnv& env, const Deadline& deadline = {});

/// Collects local names, storage aliases and local definitions of `fn`.
void collect_locals(const FlatFunction& fn, const FlatContract& contract, FunctionFacts& out);

/// Calls `visit` on every statement of `body`, pre-order.
void for_each_stmt(const StmtPtr& body, const std::function<void(const Stmt&)>& visit);

} // namespace rtriage::detail
