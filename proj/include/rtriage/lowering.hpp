#pragma once

#include "rtriage/ast.hpp"

#include <map>
#include <span>
#include <string>
#include <vector>

namespace rtriage {

struct FlatStateVar
{
    StateVarDef def;
    std::string origin; ///< contract that declares the variable
};

/// A function with all modifiers inlined, as seen from one flattened contract.
struct FlatFunction
{
    std::string contract;       ///< flattened contract this view belongs to
    std::string origin;         ///< contract that declares the body
    std::string name;           ///< display name ("constructor", "fallback", ...)
    std::string qualified_name; ///< origin.name
    std::string signature;      ///< name/arity, the override key
    Visibility visibility = Visibility::public_;
    Mutability mutability = Mutability::none;
    bool is_constructor = false;
    bool callable_externally = false;
    std::vector<VarDecl> params;
    std::vector<VarDecl> returns;
    std::optional<StmtPtr> body;
    Span span;
    Span header_span;
};

struct FlatContract
{
    std::string name;
    std::string path;
    ContractKind kind = ContractKind::contract;
    bool is_implicit = false;
    std::vector<std::string> linearization; ///< most-derived first
    std::vector<FlatStateVar> state_vars;   ///< base-first
    std::vector<FlatFunction> functions;
    Span span;

    [[nodiscard]] const FlatStateVar* find_state_var(std::string_view name) const;
    [[nodiscard]] const FlatFunction* find_function(std::string_view name, std::size_t arity) const;
};

using ModifierTable = std::map<std::string, const ModifierDef*, std::less<>>;

/// Flattens every non-interface contract of `unit`. Bases are looked up in
/// `unit` first, then in `all_units`. Unresolved bases and cyclic hierarchies
/// are reported in `diagnostics`; cyclic contracts are skipped.
std::vector<FlatContract> linearize(const SourceUnit& unit, std::span<const SourceUnit> all_units,
                                    std::vector<Diagnostic>& diagnostics);

/// Inlines `fn`'s modifiers outside-in. Unknown or mis-applied modifiers are
/// treated as no-op wrappers and reported. `contract_names` lists contracts
/// whose names may appear as base-constructor invocations.
FlatFunction inline_modifiers(const FunctionDef& fn, const ModifierTable& mods, std::vector<Diagnostic>& diagnostics,
                              const std::vector<std::string>& contract_names = {});

/// Converts a flattened contract back to a base-less definition, so that
/// linearizing it again yields the same functions and state.
ContractDef to_contract_def(const FlatContract& flat);

/// Rewrites identifiers named in `bindings` with the bound expressions.
ExprPtr substitute(const ExprPtr& expr, const std::map<std::string, ExprPtr, std::less<>>& bindings);
StmtPtr substitute(const StmtPtr& stmt, const std::map<std::string, ExprPtr, std::less<>>& bindings);

/// Statements of a body with nested plain blocks flattened, in source order.
std::vector<StmtPtr> flatten_statements(const StmtPtr& body);

} // namespace rtriage
