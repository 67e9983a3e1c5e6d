#pragma once

#include "rtriage/ast.hpp"
#include "rtriage/common.hpp"
#include "rtriage/lexer.hpp"

#include <string>
#include <string_view>

namespace rtriage {

struct ParseOptions
{
    std::size_t max_bytes = 2 * 1024 * 1024;
    /// Nesting beyond this depth is a fatal syntax error.
    int max_depth = 1000;
    Deadline deadline;
};

/// Parses one Solidity source file. Recoverable problems become diagnostics;
/// unsupported constructs become opaque statements. Throws InputError for
/// non-UTF-8/oversized input and unrecoverable brace imbalance, TimeoutError
/// when the deadline passes. The result is already call-normalized.
SourceUnit parse_source(std::string_view text, std::string path, const ParseOptions& options = {});

/// Classifies every call expression into the canonical CallKind taxonomy and
/// turns single-argument calls on type names into type casts. Idempotent.
SourceUnit normalize_call_forms(SourceUnit unit);

/// Source reconstruction, token-equivalent to the text each node was parsed from.
std::string to_source(const Expr& expr);
std::string to_source(const Stmt& stmt);

/// Root identifier of an lvalue-ish expression (`a` in `a[i].b`), or empty.
std::string root_name(const Expr& expr);

/// Drops type casts and reports the operand, e.g. `IERC20(x)` -> `x`.
const Expr& strip_casts(const Expr& expr);

/// Literal address text normalized for comparison: lowercase, no `0x`.
std::string normalize_address_literal(std::string_view text);

} // namespace rtriage
