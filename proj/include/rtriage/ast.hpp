#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rtriage {

/// Location of a node within its source file. `line` and `column` are 1-based,
/// `offset` and `length` are byte positions.
struct Span
{
    std::uint32_t line = 0;
    std::uint32_t column = 0;
    std::uint32_t offset = 0;
    std::uint32_t length = 0;

    [[nodiscard]] std::uint32_t end() const { return offset + length; }
    [[nodiscard]] bool contains(const Span& other) const
    {
        return other.offset >= offset && other.end() <= end();
    }
    friend bool operator==(const Span&, const Span&) = default;
};

/// Covers both spans; `a` must start first.
Span join(const Span& a, const Span& b);

enum class Severity { note, warning, error, fatal };

struct Diagnostic
{
    Span span;
    Severity severity = Severity::error;
    std::string message;
};

const char* to_string(Severity s);

// ---------------------------------------------------------------------------
// Expressions

enum class ExprKind {
    identifier,
    member_access,
    index_access,
    call,
    literal,
    binary,
    unary,
    assign,
    conditional,
    tuple,
    msg_sender,
    msg_value,
    this_ref,
    type_cast,
    new_expr,
    elementary_type,
    opaque,
};

enum class LiteralKind { none, number, address, string, boolean, hex_string };

/// Canonical taxonomy of call expressions. The first five are the external
/// kinds a reentrancy candidate can be built from.
enum class CallKind {
    low_level_call,
    transfer,
    send,
    external_member_call,
    delegatecall,
    internal,
    builtin,
    creation,
    unresolved,
};

inline constexpr CallKind kExternalCallKinds[] = {
    CallKind::low_level_call, CallKind::transfer, CallKind::send, CallKind::external_member_call,
    CallKind::delegatecall};

bool is_external(CallKind k);
const char* to_string(CallKind k);
std::optional<CallKind> call_kind_from_string(std::string_view name);

/// How call options were written, kept so nodes can be printed back.
enum class OptionStyle { none, legacy_member, braces };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// One expression node. Field usage per kind:
///   identifier       text = name
///   member_access    lhs = object, text = member
///   index_access     lhs = base, rhs = index (may be null)
///   call             lhs = callee, args, arg_names (named-argument form), call options
///   literal          literal, text = verbatim token
///   binary           text = operator, lhs, rhs
///   unary            text = operator, lhs = operand, postfix
///   assign           text = operator ("=", "+=", ...), lhs = target, rhs = value
///   conditional      args = {condition, when_true, when_false}
///   tuple            args (null entries for omitted components)
///   type_cast        text = type name, lhs = operand
///   new_expr         text = type name
///   elementary_type  text = type name (a type used as an expression, e.g. `type(uint)`)
///   opaque           text = reconstructed token text
struct Expr
{
    ExprKind kind = ExprKind::opaque;
    Span span;
    std::string text;
    LiteralKind literal = LiteralKind::none;
    ExprPtr lhs;
    ExprPtr rhs;
    std::vector<ExprPtr> args;
    std::vector<std::string> arg_names;
    bool postfix = false;
    int paren_depth = 0;

    // call only
    CallKind call_kind = CallKind::unresolved;
    ExprPtr value_option;
    ExprPtr gas_option;
    OptionStyle option_style = OptionStyle::none;
    /// Order in which options appeared, e.g. {"value", "gas"}.
    std::vector<std::string> option_order;
};

// ---------------------------------------------------------------------------
// Statements

enum class StmtKind {
    block,
    if_stmt,
    loop,
    require,
    return_stmt,
    revert,
    local_decl,
    expr_stmt,
    assignment,
    placeholder,
    break_stmt,
    continue_stmt,
    emit,
    try_stmt,
    opaque,
};

enum class LoopKind { while_loop, for_loop, do_while };

struct VarDecl
{
    std::string type_name;
    std::string name;
    std::string location; // memory / storage / calldata or empty
    Span span;
};

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

/// One statement node. Field usage per kind:
///   block        children; text = "unchecked" for unchecked blocks, "..." for elided code
///   if_stmt      expr = condition, children = {then, else?}
///   loop         loop_kind, init (for), expr = condition (may be null), step, children = {body}
///   require      expr = condition, args = message arguments; text = "require" | "assert"
///   return_stmt  expr (may be null)
///   revert       text = "throw" | "revert"; args
///   local_decl   vars, expr = initializer (may be null); text = "var" for legacy `var`
///   expr_stmt    expr
///   assignment   expr = assign expression (compound flag mirrors its operator)
///   emit         expr = event call
///   try_stmt     expr = guarded call, children = clause blocks, clause_headers
///   opaque       text = construct name (assembly, ...)
struct Stmt
{
    StmtKind kind = StmtKind::opaque;
    Span span;
    std::string text;
    ExprPtr expr;
    std::vector<ExprPtr> args;
    std::vector<StmtPtr> children;
    std::vector<VarDecl> vars;
    bool tuple_decl = false;
    bool compound = false;
    LoopKind loop_kind = LoopKind::while_loop;
    StmtPtr init;
    ExprPtr step;
    /// try_stmt: header text preceding each clause block ("returns (...)", "catch Error(string m)").
    std::vector<std::string> clause_headers;
};

// ---------------------------------------------------------------------------
// Declarations

enum class Visibility { public_, external, internal, private_ };
enum class Mutability { none, view, pure, payable };
enum class ContractKind { contract, interface, library };

const char* to_string(Visibility v);
const char* to_string(Mutability m);
const char* to_string(ContractKind k);

struct StateVarDef
{
    std::string name;
    std::string type_name;
    Visibility visibility = Visibility::internal;
    bool is_constant_or_immutable = false;
    ExprPtr initializer;
    Span span;
};

struct ModifierInvocation
{
    std::string name;
    std::vector<ExprPtr> args;
    bool has_parens = false;
    Span span;
};

struct FunctionDef
{
    std::string name; // empty for fallback/receive
    bool is_fallback = false;
    bool is_receive = false;
    bool is_constructor = false;
    Visibility visibility = Visibility::public_;
    Mutability mutability = Mutability::none;
    std::vector<ModifierInvocation> modifiers_invoked;
    std::vector<VarDecl> params;
    std::vector<VarDecl> returns;
    std::optional<StmtPtr> body;
    Span span;
    Span header_span;

    /// "fallback" / "receive" for unnamed functions, otherwise the name.
    [[nodiscard]] std::string display_name() const;
};

struct ModifierDef
{
    std::string name;
    std::vector<VarDecl> params;
    std::optional<StmtPtr> body;
    Span span;
};

struct UsingDirective
{
    std::string library;
    std::string target_type; // "*" for wildcard
};

struct ContractDef
{
    std::string name;
    ContractKind kind = ContractKind::contract;
    bool is_abstract = false;
    /// Loose top-level definitions collected into one implicit container.
    bool is_implicit = false;
    std::vector<std::string> bases;
    std::vector<StateVarDef> state_vars;
    std::vector<FunctionDef> functions;
    std::vector<ModifierDef> modifiers;
    std::vector<UsingDirective> usings;
    /// Declared event and error names; calls to them are not function calls.
    std::vector<std::string> events;
    Span span;

    [[nodiscard]] const StateVarDef* find_state_var(std::string_view name) const;
};

/// Name of the implicit container for free functions/modifiers/variables.
inline constexpr std::string_view kImplicitContractName = "<toplevel>";

struct SourceUnit
{
    std::string path;
    std::optional<std::string> pragma;
    std::vector<ContractDef> contracts;
    std::vector<Diagnostic> diagnostics;
    std::size_t source_size = 0;

    [[nodiscard]] const ContractDef* find_contract(std::string_view name) const;
    [[nodiscard]] bool has_fatal() const;
};

} // namespace rtriage
