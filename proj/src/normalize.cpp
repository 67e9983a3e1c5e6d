#include "rtriage/frontend.hpp"

#include <cctype>
#include <map>
#include <set>

namespace rtriage {

namespace {

const std::set<std::string, std::less<>> kBuiltinFunctions = {
    "require",   "assert",   "revert",    "keccak256", "sha256", "sha3",     "ripemd160", "ecrecover",
    "addmod",    "mulmod",   "selfdestruct", "suicide", "blockhash", "gasleft", "type",   "blobhash"};

const std::set<std::string, std::less<>> kBuiltinNamespaces = {"abi", "block", "tx", "msg", "bytes", "string"};

// Library members assumed when a `using L for T` names a library that is not
// part of the file (typical for unflattened sources importing SafeMath).
const std::set<std::string, std::less<>> kAssumedLibraryMembers = {
    "add", "sub", "mul", "div", "mod", "pow", "min", "max", "toString", "toUint", "isContract",
    "safeAdd", "safeSub", "safeMul", "safeDiv", "tryAdd", "trySub", "tryMul", "tryDiv"};

struct UnitIndex
{
    std::map<std::string, ContractKind, std::less<>> types;
    std::map<std::string, std::set<std::string, std::less<>>, std::less<>> functions_by_contract;
    std::set<std::string, std::less<>> all_functions;
    std::set<std::string, std::less<>> events;
    std::map<std::string, const ContractDef*, std::less<>> contracts;

    explicit UnitIndex(const SourceUnit& unit)
    {
        for (const auto& c : unit.contracts) {
            contracts[c.name] = &c;
            if (!c.is_implicit)
                types[c.name] = c.kind;
            for (const auto& f : c.functions) {
                if (!f.name.empty()) {
                    functions_by_contract[c.name].insert(f.name);
                    all_functions.insert(f.name);
                }
            }
            events.insert(c.events.begin(), c.events.end());
        }
    }

    void collect_usings(const ContractDef& c, std::vector<UsingDirective>& out, std::set<std::string>& seen) const
    {
        if (!seen.insert(c.name).second)
            return;
        out.insert(out.end(), c.usings.begin(), c.usings.end());
        for (const auto& b : c.bases) {
            auto it = contracts.find(b);
            if (it != contracts.end())
                collect_usings(*it->second, out, seen);
        }
    }
};

class Normalizer
{
public:
    Normalizer(const UnitIndex& index, const ContractDef& contract) : index_(index)
    {
        std::set<std::string> seen;
        index_.collect_usings(contract, usings_, seen);
        for (const auto& f : contract.functions)
            if (!f.name.empty())
                own_functions_.insert(f.name);
    }

    ExprPtr expr(const ExprPtr& e)
    {
        if (!e)
            return e;
        auto copy = std::make_shared<Expr>(*e);
        bool changed = false;
        auto visit = [&](ExprPtr& slot) {
            if (!slot)
                return;
            ExprPtr n = expr(slot);
            if (n != slot) {
                slot = n;
                changed = true;
            }
        };
        visit(copy->lhs);
        visit(copy->rhs);
        visit(copy->value_option);
        visit(copy->gas_option);
        for (auto& a : copy->args)
            visit(a);

        if (copy->kind == ExprKind::call) {
            if (auto cast = as_cast(*copy))
                return cast;
            CallKind k = classify(*copy);
            if (k != copy->call_kind) {
                copy->call_kind = k;
                changed = true;
            }
        }
        return changed ? ExprPtr(copy) : e;
    }

    StmtPtr stmt(const StmtPtr& s)
    {
        if (!s)
            return s;
        auto copy = std::make_shared<Stmt>(*s);
        bool changed = false;
        auto visit_e = [&](ExprPtr& slot) {
            ExprPtr n = expr(slot);
            if (n != slot) {
                slot = n;
                changed = true;
            }
        };
        auto visit_s = [&](StmtPtr& slot) {
            StmtPtr n = stmt(slot);
            if (n != slot) {
                slot = n;
                changed = true;
            }
        };
        visit_e(copy->expr);
        visit_e(copy->step);
        for (auto& a : copy->args)
            visit_e(a);
        visit_s(copy->init);
        for (auto& c : copy->children)
            visit_s(c);
        return changed ? StmtPtr(copy) : s;
    }

private:
    const UnitIndex& index_;
    std::vector<UsingDirective> usings_;
    std::set<std::string, std::less<>> own_functions_;

    ExprPtr as_cast(const Expr& call) const
    {
        if (call.args.size() != 1 || !call.arg_names.empty() || call.option_style != OptionStyle::none)
            return nullptr;
        const Expr& callee = *call.lhs;
        bool is_type = false;
        if (callee.kind == ExprKind::elementary_type && callee.paren_depth == 0) {
            is_type = true;
        } else if (callee.kind == ExprKind::identifier && callee.paren_depth == 0) {
            if (index_.types.count(callee.text) != 0) {
                is_type = true;
            } else if (index_.all_functions.count(callee.text) == 0 && index_.events.count(callee.text) == 0 &&
                       kBuiltinFunctions.count(callee.text) == 0 &&
                       std::isupper(static_cast<unsigned char>(callee.text.front()))) {
                // Unknown capitalized single-argument call: an interface declared elsewhere.
                is_type = true;
            }
        } else if (callee.kind == ExprKind::member_access && callee.paren_depth == 0 &&
                   callee.lhs->kind == ExprKind::identifier && index_.types.count(callee.lhs->text) == 0 &&
                   std::isupper(static_cast<unsigned char>(callee.text.front())) &&
                   std::isupper(static_cast<unsigned char>(callee.lhs->text.front()))) {
            // Module-qualified type, e.g. `Lib.Interface(x)`.
            is_type = true;
        }
        if (!is_type)
            return nullptr;
        auto cast = std::make_shared<Expr>();
        cast->kind = ExprKind::type_cast;
        cast->span = call.span;
        cast->paren_depth = call.paren_depth;
        cast->text = to_source(callee);
        cast->lhs = call.args.front();
        return cast;
    }

    bool library_provides(std::string_view member) const
    {
        for (const auto& u : usings_) {
            auto it = index_.functions_by_contract.find(u.library);
            if (it != index_.functions_by_contract.end()) {
                if (it->second.count(member) != 0)
                    return true;
            } else if (index_.types.count(u.library) == 0 && kAssumedLibraryMembers.count(member) != 0) {
                return true;
            }
        }
        return false;
    }

    CallKind classify(const Expr& call) const
    {
        const Expr& callee = *call.lhs;
        switch (callee.kind) {
            case ExprKind::new_expr: return CallKind::creation;
            case ExprKind::elementary_type: return CallKind::builtin;
            case ExprKind::identifier: {
                const std::string& n = callee.text;
                if (kBuiltinFunctions.count(n) != 0 || index_.events.count(n) != 0)
                    return CallKind::builtin;
                if (own_functions_.count(n) != 0 || index_.all_functions.count(n) != 0)
                    return CallKind::internal;
                return CallKind::unresolved;
            }
            case ExprKind::member_access: break;
            default: return CallKind::unresolved;
        }

        const Expr& object = *callee.lhs;
        const std::string& member = callee.text;
        if (object.kind == ExprKind::identifier && object.paren_depth == 0) {
            if (object.text == "super")
                return CallKind::internal;
            auto t = index_.types.find(object.text);
            if (t != index_.types.end() && t->second != ContractKind::interface)
                return CallKind::internal;
            if (kBuiltinNamespaces.count(object.text) != 0)
                return CallKind::builtin;
        }
        if (member == "call")
            return CallKind::low_level_call;
        if (member == "delegatecall" || member == "callcode")
            return CallKind::delegatecall;
        if (member == "staticcall")
            return CallKind::external_member_call;
        bool single_positional = call.args.size() == 1 && call.arg_names.empty();
        if (member == "transfer" && single_positional)
            return CallKind::transfer;
        if (member == "send" && single_positional)
            return CallKind::send;
        if ((member == "push" || member == "pop") && object.kind != ExprKind::type_cast &&
            object.kind != ExprKind::this_ref)
            return CallKind::builtin;
        if (library_provides(member) && object.kind != ExprKind::this_ref)
            return CallKind::internal;
        return CallKind::external_member_call;
    }
};

} // namespace

SourceUnit normalize_call_forms(SourceUnit unit)
{
    UnitIndex index(unit);
    std::vector<ContractDef> contracts = unit.contracts;
    for (auto& c : contracts) {
        Normalizer n(index, c);
        for (auto& v : c.state_vars)
            v.initializer = n.expr(v.initializer);
        for (auto& f : c.functions) {
            if (f.body)
                f.body = n.stmt(*f.body);
            for (auto& m : f.modifiers_invoked)
                for (auto& a : m.args)
                    a = n.expr(a);
        }
        for (auto& m : c.modifiers) {
            if (m.body)
                m.body = n.stmt(*m.body);
        }
    }
    unit.contracts = std::move(contracts);
    return unit;
}

} // namespace rtriage
