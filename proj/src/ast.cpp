#include "rtriage/ast.hpp"
#include "rtriage/common.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

namespace rtriage {

Span join(const Span& a, const Span& b)
{
    Span s = a;
    s.length = std::max(a.end(), b.end()) - a.offset;
    return s;
}

const char* to_string(Severity s)
{
    switch (s) {
        case Severity::note: return "note";
        case Severity::warning: return "warning";
        case Severity::error: return "error";
        case Severity::fatal: return "fatal";
    }
    return "error";
}

namespace {
constexpr std::array<std::pair<CallKind, const char*>, 9> kCallKindNames = {{
    {CallKind::low_level_call, "low_level_call"},
    {CallKind::transfer, "transfer"},
    {CallKind::send, "send"},
    {CallKind::external_member_call, "external_member_call"},
    {CallKind::delegatecall, "delegatecall"},
    {CallKind::internal, "internal"},
    {CallKind::builtin, "builtin"},
    {CallKind::creation, "creation"},
    {CallKind::unresolved, "unresolved"},
}};
} // namespace

bool is_external(CallKind k)
{
    return std::find(std::begin(kExternalCallKinds), std::end(kExternalCallKinds), k) !=
           std::end(kExternalCallKinds);
}

const char* to_string(CallKind k)
{
    for (const auto& [kind, name] : kCallKindNames) {
        if (kind == k)
            return name;
    }
    return "unresolved";
}

std::optional<CallKind> call_kind_from_string(std::string_view name)
{
    for (const auto& [kind, n] : kCallKindNames) {
        if (name == n && is_external(kind))
            return kind;
    }
    return std::nullopt;
}

const char* to_string(Visibility v)
{
    switch (v) {
        case Visibility::public_: return "public";
        case Visibility::external: return "external";
        case Visibility::internal: return "internal";
        case Visibility::private_: return "private";
    }
    return "public";
}

const char* to_string(Mutability m)
{
    switch (m) {
        case Mutability::none: return "nonpayable";
        case Mutability::view: return "view";
        case Mutability::pure: return "pure";
        case Mutability::payable: return "payable";
    }
    return "nonpayable";
}

const char* to_string(ContractKind k)
{
    switch (k) {
        case ContractKind::contract: return "contract";
        case ContractKind::interface: return "interface";
        case ContractKind::library: return "library";
    }
    return "contract";
}

std::string FunctionDef::display_name() const
{
    if (is_constructor)
        return "constructor";
    if (is_receive)
        return "receive";
    if (is_fallback && name.empty())
        return "fallback";
    return name;
}

const StateVarDef* ContractDef::find_state_var(std::string_view n) const
{
    for (const auto& v : state_vars) {
        if (v.name == n)
            return &v;
    }
    return nullptr;
}

const ContractDef* SourceUnit::find_contract(std::string_view n) const
{
    for (const auto& c : contracts) {
        if (c.name == n)
            return &c;
    }
    return nullptr;
}

bool SourceUnit::has_fatal() const
{
    return std::any_of(diagnostics.begin(), diagnostics.end(),
                       [](const Diagnostic& d) { return d.severity == Severity::fatal; });
}

std::string to_hex(std::uint64_t value)
{
    std::array<char, 17> buf{};
    std::snprintf(buf.data(), buf.size(), "%016llx", static_cast<unsigned long long>(value));
    return std::string(buf.data());
}

} // namespace rtriage
