#include "rtriage/lowering.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace rtriage {

const FlatStateVar* FlatContract::find_state_var(std::string_view n) const
{
    for (const auto& v : state_vars) {
        if (v.def.name == n)
            return &v;
    }
    return nullptr;
}

const FlatFunction* FlatContract::find_function(std::string_view n, std::size_t arity) const
{
    const FlatFunction* by_name = nullptr;
    for (const auto& f : functions) {
        if (f.is_constructor || f.name != n)
            continue;
        if (f.params.size() == arity)
            return &f;
        if (!by_name)
            by_name = &f;
    }
    return by_name;
}

ExprPtr substitute(const ExprPtr& e, const std::map<std::string, ExprPtr, std::less<>>& bindings)
{
    if (!e || bindings.empty())
        return e;
    if (e->kind == ExprKind::identifier) {
        auto it = bindings.find(e->text);
        if (it == bindings.end())
            return e;
        if (e->paren_depth == 0)
            return it->second;
        auto copy = std::make_shared<Expr>(*it->second);
        copy->paren_depth += e->paren_depth;
        return copy;
    }
    auto copy = std::make_shared<Expr>(*e);
    bool changed = false;
    auto visit = [&](ExprPtr& slot) {
        ExprPtr n = substitute(slot, bindings);
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
    return changed ? ExprPtr(copy) : e;
}

StmtPtr substitute(const StmtPtr& s, const std::map<std::string, ExprPtr, std::less<>>& bindings)
{
    if (!s || bindings.empty())
        return s;
    auto copy = std::make_shared<Stmt>(*s);
    bool changed = false;
    auto visit_e = [&](ExprPtr& slot) {
        ExprPtr n = substitute(slot, bindings);
        if (n != slot) {
            slot = n;
            changed = true;
        }
    };
    auto visit_s = [&](StmtPtr& slot) {
        StmtPtr n = substitute(slot, bindings);
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

namespace {

/// Replaces every placeholder statement in `s` with `inner`.
StmtPtr fill_placeholders(const StmtPtr& s, const StmtPtr& inner)
{
    if (!s)
        return s;
    if (s->kind == StmtKind::placeholder)
        return inner;
    auto copy = std::make_shared<Stmt>(*s);
    bool changed = false;
    for (auto& c : copy->children) {
        StmtPtr n = fill_placeholders(c, inner);
        if (n != c) {
            c = n;
            changed = true;
        }
    }
    if (copy->init) {
        StmtPtr n = fill_placeholders(copy->init, inner);
        if (n != copy->init) {
            copy->init = n;
            changed = true;
        }
    }
    return changed ? StmtPtr(copy) : s;
}

std::string signature_of(const FunctionDef& f)
{
    if (f.is_constructor)
        return "constructor";
    return f.display_name() + "/" + std::to_string(f.params.size());
}

class Linearizer
{
public:
    Linearizer(const SourceUnit& unit, std::span<const SourceUnit> all_units, std::vector<Diagnostic>& diags)
        : unit_(unit), all_(all_units), diags_(diags)
    {}

    const ContractDef* lookup(std::string_view name) const
    {
        if (auto* c = unit_.find_contract(name))
            return c;
        for (const auto& u : all_) {
            if (auto* c = u.find_contract(name))
                return c;
        }
        return nullptr;
    }

    /// Most-derived first. Throws on cycles.
    std::vector<const ContractDef*> order(const ContractDef& c)
    {
        if (auto it = memo_.find(c.name); it != memo_.end())
            return it->second;
        if (!visiting_.insert(c.name).second)
            throw std::runtime_error("cyclic inheritance involving '" + c.name + "'");

        std::vector<const ContractDef*> concat;
        for (auto b = c.bases.rbegin(); b != c.bases.rend(); ++b) {
            const ContractDef* base = lookup(*b);
            if (!base) {
                if (reported_.insert(c.name + "->" + *b).second)
                    diags_.push_back(Diagnostic{c.span, Severity::warning,
                                                "base contract '" + *b + "' of '" + c.name +
                                                    "' is not available; flattening without it"});
                continue;
            }
            auto sub = order(*base);
            concat.insert(concat.end(), sub.begin(), sub.end());
        }
        // Keep the last occurrence of each contract so shared bases sink below
        // every contract deriving from them.
        std::vector<const ContractDef*> result{&c};
        for (std::size_t i = 0; i < concat.size(); ++i) {
            bool later = std::find(concat.begin() + static_cast<std::ptrdiff_t>(i) + 1, concat.end(), concat[i]) !=
                         concat.end();
            if (!later && std::find(result.begin(), result.end(), concat[i]) == result.end())
                result.push_back(concat[i]);
        }
        visiting_.erase(c.name);
        memo_[c.name] = result;
        return result;
    }

    FlatContract flatten(const ContractDef& c, const std::vector<const ContractDef*>& lin)
    {
        FlatContract flat;
        flat.name = c.name;
        flat.path = unit_.path;
        flat.kind = c.kind;
        flat.is_implicit = c.is_implicit;
        flat.span = c.span;
        for (const auto* k : lin)
            flat.linearization.push_back(k->name);

        for (auto it = lin.rbegin(); it != lin.rend(); ++it) {
            for (const auto& v : (*it)->state_vars) {
                auto existing = std::find_if(flat.state_vars.begin(), flat.state_vars.end(),
                                             [&](const FlatStateVar& s) { return s.def.name == v.name; });
                if (existing != flat.state_vars.end())
                    *existing = FlatStateVar{v, (*it)->name};
                else
                    flat.state_vars.push_back(FlatStateVar{v, (*it)->name});
            }
        }

        ModifierTable mods;
        for (const auto* k : lin) {
            for (const auto& m : k->modifiers)
                mods.emplace(m.name, &m);
        }

        std::set<std::string> seen;
        for (const auto* k : lin) {
            for (const auto& f : k->functions) {
                std::string sig = signature_of(f);
                // Every constructor in the hierarchy is kept (they all run at
                // deployment); other functions are overridden by signature.
                if (!f.is_constructor && !seen.insert(sig).second)
                    continue;
                FlatFunction ff = inline_modifiers(f, mods, diags_, flat.linearization);
                ff.contract = c.name;
                ff.origin = k->name;
                ff.qualified_name = k->name + "." + ff.name;
                flat.functions.push_back(std::move(ff));
            }
        }
        return flat;
    }

private:
    const SourceUnit& unit_;
    std::span<const SourceUnit> all_;
    std::vector<Diagnostic>& diags_;
    std::map<std::string, std::vector<const ContractDef*>> memo_;
    std::set<std::string> visiting_;
    std::set<std::string> reported_;
};

} // namespace

FlatFunction inline_modifiers(const FunctionDef& fn, const ModifierTable& mods, std::vector<Diagnostic>& diagnostics,
                              const std::vector<std::string>& contract_names)
{
    FlatFunction out;
    out.name = fn.display_name();
    out.signature = signature_of(fn);
    out.visibility = fn.visibility;
    out.mutability = fn.mutability;
    out.is_constructor = fn.is_constructor;
    out.params = fn.params;
    out.returns = fn.returns;
    out.span = fn.span;
    out.header_span = fn.header_span;
    out.callable_externally =
        !fn.is_constructor && (fn.visibility == Visibility::public_ || fn.visibility == Visibility::external);
    if (!fn.body)
        return out;

    StmtPtr body = *fn.body;
    for (auto inv = fn.modifiers_invoked.rbegin(); inv != fn.modifiers_invoked.rend(); ++inv) {
        auto it = mods.find(inv->name);
        if (it == mods.end()) {
            bool base_ctor = std::find(contract_names.begin(), contract_names.end(), inv->name) != contract_names.end();
            if (!base_ctor) {
                diagnostics.push_back(Diagnostic{inv->span, Severity::warning,
                                                 "modifier '" + inv->name + "' is not available; treated as no-op"});
            }
            continue;
        }
        const ModifierDef& m = *it->second;
        if (m.params.size() != inv->args.size()) {
            diagnostics.push_back(Diagnostic{inv->span, Severity::warning,
                                             "modifier '" + inv->name + "' expects " + std::to_string(m.params.size()) +
                                                 " argument(s), got " + std::to_string(inv->args.size()) +
                                                 "; treated as no-op"});
            continue;
        }
        if (!m.body) {
            diagnostics.push_back(
                Diagnostic{inv->span, Severity::warning, "modifier '" + inv->name + "' has no body; treated as no-op"});
            continue;
        }
        std::map<std::string, ExprPtr, std::less<>> bindings;
        for (std::size_t i = 0; i < m.params.size(); ++i) {
            if (!m.params[i].name.empty())
                bindings[m.params[i].name] = inv->args[i];
        }
        body = fill_placeholders(substitute(*m.body, bindings), body);
    }
    out.body = body;
    return out;
}

std::vector<FlatContract> linearize(const SourceUnit& unit, std::span<const SourceUnit> all_units,
                                    std::vector<Diagnostic>& diagnostics)
{
    Linearizer lin(unit, all_units, diagnostics);
    std::vector<FlatContract> out;
    for (const auto& c : unit.contracts) {
        if (c.kind == ContractKind::interface)
            continue;
        try {
            out.push_back(lin.flatten(c, lin.order(c)));
        } catch (const std::runtime_error& e) {
            diagnostics.push_back(Diagnostic{c.span, Severity::error, std::string(e.what()) + "; contract skipped"});
        }
    }
    return out;
}

ContractDef to_contract_def(const FlatContract& flat)
{
    ContractDef c;
    c.name = flat.name;
    c.kind = flat.kind;
    c.is_implicit = flat.is_implicit;
    c.span = flat.span;
    for (const auto& v : flat.state_vars)
        c.state_vars.push_back(v.def);
    for (const auto& f : flat.functions) {
        FunctionDef d;
        d.name = f.is_constructor || f.name == "fallback" || f.name == "receive" ? std::string() : f.name;
        d.is_constructor = f.is_constructor;
        d.is_fallback = f.name == "fallback";
        d.is_receive = f.name == "receive";
        d.visibility = f.visibility;
        d.mutability = f.mutability;
        d.params = f.params;
        d.returns = f.returns;
        d.body = f.body;
        d.span = f.span;
        d.header_span = f.header_span;
        c.functions.push_back(std::move(d));
    }
    return c;
}

std::vector<StmtPtr> flatten_statements(const StmtPtr& body)
{
    std::vector<StmtPtr> out;
    std::function<void(const StmtPtr&)> walk = [&](const StmtPtr& s) {
        if (!s)
            return;
        if (s->kind == StmtKind::block && s->text != "...") {
            for (const auto& c : s->children)
                walk(c);
            return;
        }
        out.push_back(s);
    };
    walk(body);
    return out;
}

} // namespace rtriage
