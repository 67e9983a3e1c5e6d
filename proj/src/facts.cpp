#include "flow_internal.hpp"

#include "rtriage/frontend.hpp"

#include <algorithm>
#include <deque>

namespace rtriage {

using detail::CalleeRef;
using detail::EffectEnv;

const char* to_string(Provenance p)
{
    switch (p) {
        case Provenance::hardcoded_constant: return "hardcoded_constant";
        case Provenance::state_var_fixed: return "state_var_fixed";
        case Provenance::state_var_mutable: return "state_var_mutable";
        case Provenance::msg_value: return "msg_value";
        case Provenance::parameter: return "parameter";
        case Provenance::computed: return "computed";
        case Provenance::unknown: return "unknown";
    }
    return "unknown";
}

bool CallGraph::reachable_from_roots(const std::string& node) const
{
    std::set<std::string> seen(roots.begin(), roots.end());
    std::deque<std::string> work(roots.begin(), roots.end());
    while (!work.empty()) {
        if (work.front() == node)
            return true;
        auto it = edges.find(work.front());
        work.pop_front();
        if (it == edges.end())
            continue;
        for (const auto& next : it->second) {
            if (seen.insert(next).second)
                work.push_back(next);
        }
    }
    return false;
}

bool externally_reachable(const FlatFunction& fn, const CallGraph& graph)
{
    if (fn.is_constructor)
        return false;
    return fn.callable_externally || graph.reachable_from_roots(fn.qualified_name);
}

namespace {

struct FnRef
{
    std::size_t contract;
    std::size_t function;
};

/// Resolves internal calls of functions viewed from contract `c`.
class Resolver
{
public:
    explicit Resolver(const std::vector<FlatContract>& contracts) : contracts_(contracts) {}

    std::optional<FnRef> resolve(std::size_t c, const Expr& call) const
    {
        const FlatContract& self = contracts_[c];
        const Expr* callee = call.lhs.get();
        if (!callee)
            return std::nullopt;
        const std::size_t arity = call.args.size();
        if (callee->kind == ExprKind::identifier)
            return find_in(c, callee->text, arity);
        if (callee->kind != ExprKind::member_access || !callee->lhs)
            return std::nullopt;

        const Expr& object = *callee->lhs;
        if (object.kind == ExprKind::identifier) {
            if (object.text == "super") {
                // Next definition up the linearization.
                for (std::size_t i = 1; i < self.linearization.size(); ++i) {
                    if (auto r = find_declared(self.linearization[i], callee->text, arity))
                        return r;
                }
                return std::nullopt;
            }
            if (auto idx = index_of(object.text)) {
                if (auto r = find_declared(object.text, callee->text, arity))
                    return r;
                return find_in(*idx, callee->text, arity);
            }
        }
        // `x.f(...)` through `using L for T`: the receiver becomes the first argument.
        for (std::size_t i = 0; i < contracts_.size(); ++i) {
            if (contracts_[i].kind != ContractKind::library)
                continue;
            if (auto r = find_in(i, callee->text, arity + 1))
                return r;
        }
        return std::nullopt;
    }

    /// Member calls on libraries that are not part of the file are assumed to
    /// be side-effect-free helpers (SafeMath and friends).
    bool assumed_library_call(const Expr& call) const
    {
        const Expr* callee = call.lhs.get();
        return callee && callee->kind == ExprKind::member_access && callee->lhs &&
               !(callee->lhs->kind == ExprKind::identifier &&
                 (callee->lhs->text == "super" || index_of(callee->lhs->text)));
    }

private:
    const std::vector<FlatContract>& contracts_;

    std::optional<std::size_t> index_of(std::string_view name) const
    {
        for (std::size_t i = 0; i < contracts_.size(); ++i) {
            if (contracts_[i].name == name)
                return i;
        }
        return std::nullopt;
    }

    std::optional<FnRef> find_in(std::size_t c, const std::string& name, std::size_t arity) const
    {
        const auto& fns = contracts_[c].functions;
        std::optional<FnRef> by_name;
        for (std::size_t i = 0; i < fns.size(); ++i) {
            if (fns[i].is_constructor || fns[i].name != name)
                continue;
            if (fns[i].params.size() == arity)
                return FnRef{c, i};
            if (!by_name)
                by_name = FnRef{c, i};
        }
        return by_name;
    }

    /// The body declared in contract `origin` itself, looked up in that contract's own view.
    std::optional<FnRef> find_declared(const std::string& origin, const std::string& name, std::size_t arity) const
    {
        auto idx = index_of(origin);
        if (!idx)
            return std::nullopt;
        auto r = find_in(*idx, name, arity);
        if (r && contracts_[r->contract].functions[r->function].origin == origin)
            return r;
        return std::nullopt;
    }
};

} // namespace

FileFacts::FileFacts(std::string path, std::vector<FlatContract> contracts, const Deadline& deadline)
    : path_(std::move(path)), contracts_(std::move(contracts))
{
    Resolver resolver(contracts_);
    facts_.resize(contracts_.size());

    // Locals and direct summaries.
    std::vector<std::vector<FunctionSummary>> direct(contracts_.size());
    std::vector<std::vector<std::vector<FnRef>>> callees(contracts_.size());
    for (std::size_t c = 0; c < contracts_.size(); ++c) {
        const FlatContract& contract = contracts_[c];
        facts_[c].resize(contract.functions.size());
        direct[c].resize(contract.functions.size());
        callees[c].resize(contract.functions.size());
        for (std::size_t f = 0; f < contract.functions.size(); ++f) {
            deadline.check();
            FunctionFacts& ff = facts_[c][f];
            ff.contract = &contract;
            ff.function = &contract.functions[f];
            ff.index = f;
            detail::collect_locals(*ff.function, contract, ff);

            EffectEnv env;
            env.contract = &contract;
            env.locals = &ff.locals;
            env.aliases = &ff.aliases;
            env.resolve = [&, c, f](const Expr& call) {
                CalleeRef ref;
                if (auto r = resolver.resolve(c, call)) {
                    ref.found = true;
                    ref.qualified = contracts_[r->contract].functions[r->function].qualified_name;
                    callees[c][f].push_back(*r);
                } else if (resolver.assumed_library_call(call)) {
                    ref.found = true;
                }
                return ref;
            };
            // A throwaway CFG walk gathers every effect of the body.
            Cfg cfg = detail::build_cfg(*ff.function, env, deadline);
            FunctionSummary& s = direct[c][f];
            for (const auto& b : cfg.blocks) {
                for (const auto& it : b.items) {
                    s.reads.insert(it.reads.begin(), it.reads.end());
                    for (const auto& ef : it.effects) {
                        if (ef.kind == Effect::Kind::write)
                            s.writes.insert(ef.write.variable);
                        else if (ef.kind == Effect::Kind::outflow)
                            s.sends_ether = true;
                    }
                }
            }
            for (const auto& r : callees[c][f])
                s.callees.insert(contracts_[r.contract].functions[r.function].qualified_name);
        }
    }

    // Transitive summaries over resolved internal calls.
    for (std::size_t c = 0; c < contracts_.size(); ++c) {
        for (std::size_t f = 0; f < contracts_[c].functions.size(); ++f)
            facts_[c][f].summary = direct[c][f];
    }
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t c = 0; c < contracts_.size(); ++c) {
            for (std::size_t f = 0; f < contracts_[c].functions.size(); ++f) {
                FunctionSummary& s = facts_[c][f].summary;
                for (const auto& r : callees[c][f]) {
                    const FunctionSummary& t = facts_[r.contract][r.function].summary;
                    std::size_t before = s.writes.size() + s.reads.size() + s.callees.size();
                    bool sends = s.sends_ether;
                    s.writes.insert(t.writes.begin(), t.writes.end());
                    s.reads.insert(t.reads.begin(), t.reads.end());
                    s.callees.insert(t.callees.begin(), t.callees.end());
                    s.sends_ether = s.sends_ether || t.sends_ether;
                    if (before != s.writes.size() + s.reads.size() + s.callees.size() || sends != s.sends_ether)
                        changed = true;
                }
            }
        }
    }

    // Call graph, keyed by declaring contract so overloads and views merge.
    for (std::size_t c = 0; c < contracts_.size(); ++c) {
        for (std::size_t f = 0; f < contracts_[c].functions.size(); ++f) {
            const FlatFunction& fn = contracts_[c].functions[f];
            graph_.nodes.insert(fn.qualified_name);
            if (fn.callable_externally)
                graph_.roots.insert(fn.qualified_name);
            for (const auto& r : callees[c][f])
                graph_.edges[fn.qualified_name].insert(contracts_[r.contract].functions[r.function].qualified_name);
        }
    }

    // Final CFGs with summaries and local read sets.
    for (std::size_t c = 0; c < contracts_.size(); ++c) {
        const FlatContract& contract = contracts_[c];
        for (std::size_t f = 0; f < contract.functions.size(); ++f) {
            deadline.check();
            FunctionFacts& ff = facts_[c][f];
            EffectEnv env;
            env.contract = &contract;
            env.locals = &ff.locals;
            env.aliases = &ff.aliases;
            env.resolve = [&, c](const Expr& call) {
                CalleeRef ref;
                if (auto r = resolver.resolve(c, call)) {
                    ref.found = true;
                    ref.qualified = contracts_[r->contract].functions[r->function].qualified_name;
                    ref.summary = &facts_[r->contract][r->function].summary;
                } else if (resolver.assumed_library_call(call)) {
                    ref.found = true;
                }
                return ref;
            };
            std::map<std::string, std::set<std::string>> local_reads;
            env.local_reads = &local_reads;
            bool grew = true;
            while (grew) {
                grew = false;
                for (const auto& [name, defs] : ff.local_defs) {
                    if (ff.locals.count(name) == 0)
                        continue;
                    auto& acc = local_reads[name];
                    std::size_t before = acc.size();
                    for (const auto& d : defs) {
                        auto r = detail::expr_reads(env, d);
                        acc.insert(r.begin(), r.end());
                    }
                    grew = grew || acc.size() != before;
                }
            }
            ff.cfg = detail::build_cfg(*ff.function, env, deadline);
        }
    }

    // Reads that steer ether outflows.
    for (std::size_t c = 0; c < contracts_.size(); ++c) {
        for (const auto& ff : facts_[c]) {
            const Cfg& cfg = ff.cfg;
            for (const auto& b : cfg.blocks) {
                if (b.dead)
                    continue;
                for (std::size_t i = 0; i < b.items.size(); ++i) {
                    deadline.check();
                    const auto& it = b.items[i];
                    bool outflow = std::any_of(it.effects.begin(), it.effects.end(),
                                               [](const Effect& e) { return e.kind == Effect::Kind::outflow; });
                    if (!outflow)
                        continue;
                    for (const auto& v : it.reads)
                        outflow_guard_reads_[v].push_back(it.span);
                    for (const auto& g : guards_at(cfg, b.id, i)) {
                        const CfgItem& guard_item = g.origin == Guard::Origin::require
                                                        ? cfg.blocks[g.block].items[g.item]
                                                        : cfg.blocks[g.block].items.back();
                        for (const auto& v : guard_item.reads)
                            outflow_guard_reads_[v].push_back(g.span);
                    }
                }
            }
        }
    }
    for (auto& [v, spans] : outflow_guard_reads_) {
        std::sort(spans.begin(), spans.end(), [](const Span& a, const Span& b) { return a.offset < b.offset; });
        spans.erase(std::unique(spans.begin(), spans.end()), spans.end());
    }

    // Fixed state variables.
    fixed_.resize(contracts_.size());
    for (std::size_t c = 0; c < contracts_.size(); ++c) {
        const FlatContract& contract = contracts_[c];

        // Written outside constructors anywhere a view of this variable exists.
        std::set<std::string> disqualified;
        bool unknown_writes = false;
        for (std::size_t c2 = 0; c2 < contracts_.size(); ++c2) {
            for (std::size_t f = 0; f < contracts_[c2].functions.size(); ++f) {
                const FlatFunction& fn = contracts_[c2].functions[f];
                const FunctionSummary& s = direct[c2][f];
                for (const auto& w : s.writes) {
                    if (w.empty()) {
                        if (!fn.is_constructor && fn.mutability != Mutability::view &&
                            fn.mutability != Mutability::pure)
                            unknown_writes = unknown_writes || c2 == c;
                        continue;
                    }
                    const FlatStateVar* mine = contract.find_state_var(w);
                    const FlatStateVar* theirs = contracts_[c2].find_state_var(w);
                    if (!mine || !theirs || mine->origin != theirs->origin)
                        continue;
                    if (!fn.is_constructor || c2 != c)
                        disqualified.insert(w);
                }
            }
        }

        // Constructor assignments per variable; null value marks a non-literal write.
        std::map<std::string, std::vector<ExprPtr>> ctor_writes;
        for (const auto& ff : facts_[c]) {
            if (!ff.function->is_constructor)
                continue;
            for (const auto& b : ff.cfg.blocks) {
                for (const auto& it : b.items) {
                    for (const auto& ef : it.effects) {
                        if (ef.kind != Effect::Kind::write)
                            continue;
                        if (ef.write.variable.empty()) {
                            unknown_writes = true;
                            continue;
                        }
                        ctor_writes[ef.write.variable].push_back(
                            ef.write.kind == WriteKind::direct_assign && ef.write.index.empty() ? ef.write.value
                                                                                                 : nullptr);
                    }
                }
            }
        }

        std::map<std::string, int> state; // 0 unknown, 1 visiting, 2 fixed, 3 not fixed
        std::function<bool(const std::string&)> fixed_var;
        std::function<bool(const ExprPtr&)> fixed_expr = [&](const ExprPtr& e) -> bool {
            if (!e)
                return false;
            switch (e->kind) {
                case ExprKind::literal:
                case ExprKind::this_ref: return true;
                case ExprKind::type_cast: return fixed_expr(e->lhs);
                case ExprKind::identifier: return contract.find_state_var(e->text) && fixed_var(e->text);
                case ExprKind::binary: return fixed_expr(e->lhs) && fixed_expr(e->rhs);
                case ExprKind::unary: return e->text != "++" && e->text != "--" && fixed_expr(e->lhs);
                case ExprKind::tuple: return e->args.size() == 1 && fixed_expr(e->args.front());
                default: return false;
            }
        };
        fixed_var = [&](const std::string& name) -> bool {
            int& st = state[name];
            if (st == 2)
                return true;
            if (st == 1 || st == 3)
                return false;
            st = 1;
            bool ok = false;
            const FlatStateVar* v = contract.find_state_var(name);
            if (v && v->def.is_constant_or_immutable) {
                ok = true;
            } else if (v && !unknown_writes && disqualified.count(name) == 0) {
                auto cw = ctor_writes.find(name);
                bool ctor_ok = true;
                if (cw != ctor_writes.end()) {
                    for (const auto& val : cw->second)
                        ctor_ok = ctor_ok && fixed_expr(val);
                }
                bool has_value = v->def.initializer != nullptr || cw != ctor_writes.end();
                ok = has_value && ctor_ok && (!v->def.initializer || fixed_expr(v->def.initializer));
            }
            state[name] = ok ? 2 : 3;
            return ok;
        };
        for (const auto& v : contract.state_vars) {
            if (fixed_var(v.def.name))
                fixed_[c].insert(v.def.name);
        }
    }
}

bool FileFacts::is_fixed(std::size_t c, const std::string& var) const
{
    return fixed_[c].count(var) != 0;
}

bool FileFacts::externally_reachable(const FlatFunction& fn) const
{
    return rtriage::externally_reachable(fn, graph_);
}

std::optional<std::string> FileFacts::constant_value(const Expr& e, std::size_t c) const
{
    const Expr& s = strip_casts(e);
    if (s.kind == ExprKind::literal)
        return s.text;
    if (s.kind == ExprKind::identifier) {
        const FlatStateVar* v = contracts_[c].find_state_var(s.text);
        if (v && v->def.is_constant_or_immutable && v->def.initializer) {
            const Expr& init = strip_casts(*v->def.initializer);
            if (init.kind == ExprKind::literal)
                return init.text;
        }
    }
    return std::nullopt;
}

Provenance FileFacts::provenance(const Expr& e, std::size_t c, const FunctionFacts& fn,
                                 std::optional<std::size_t> site) const
{
    return provenance_rec(e, c, fn, site, 0);
}

namespace {

bool equals_msg_value(const Expr& lit, const std::string& name)
{
    if (lit.kind != ExprKind::binary || (lit.text != "==" && lit.text != "!="))
        return false;
    const Expr& a = strip_casts(*lit.lhs);
    const Expr& b = strip_casts(*lit.rhs);
    auto is_name = [&](const Expr& x) { return x.kind == ExprKind::identifier && x.text == name; };
    return (a.kind == ExprKind::msg_value && is_name(b)) || (b.kind == ExprKind::msg_value && is_name(a));
}

} // namespace

Provenance FileFacts::provenance_rec(const Expr& e, std::size_t c, const FunctionFacts& fn,
                                     std::optional<std::size_t> site, int depth) const
{
    if (depth > 16)
        return Provenance::unknown;
    const Expr& x = strip_casts(e);
    switch (x.kind) {
        case ExprKind::literal:
        case ExprKind::this_ref: return Provenance::hardcoded_constant;
        case ExprKind::msg_value: return Provenance::msg_value;
        case ExprKind::msg_sender: return Provenance::unknown;
        case ExprKind::tuple:
            if (x.args.size() == 1 && x.args.front() && x.text != "[")
                return provenance_rec(*x.args.front(), c, fn, site, depth + 1);
            return Provenance::computed;
        case ExprKind::identifier: {
            const std::string& n = x.text;
            auto defs = fn.local_defs.find(n);
            const std::size_t def_count = defs == fn.local_defs.end() ? 0 : defs->second.size();
            if (fn.params.count(n) != 0) {
                if (site && def_count == 0) {
                    for (const auto& g : guards_of(fn.cfg, *site)) {
                        for (const auto& [lit, positive] : guard_literals(g.expr, !g.negated)) {
                            if (equals_msg_value(*lit, n) && positive == (lit->text == "=="))
                                return Provenance::msg_value;
                        }
                    }
                }
                return def_count == 0 ? Provenance::parameter : Provenance::computed;
            }
            if (fn.locals.count(n) != 0) {
                if (def_count == 1 && defs->second.front())
                    return provenance_rec(*defs->second.front(), c, fn, site, depth + 1);
                return def_count == 0 ? Provenance::unknown : Provenance::computed;
            }
            if (contracts_[c].find_state_var(n))
                return is_fixed(c, n) ? Provenance::state_var_fixed : Provenance::state_var_mutable;
            return Provenance::unknown;
        }
        case ExprKind::member_access:
        case ExprKind::index_access: {
            std::string root = root_name(x);
            if (root.empty())
                return Provenance::computed;
            if (fn.locals.count(root) != 0) {
                if (auto a = fn.aliases.find(root); a != fn.aliases.end())
                    return is_fixed(c, a->second) ? Provenance::state_var_fixed : Provenance::state_var_mutable;
                return fn.params.count(root) != 0 ? Provenance::parameter : Provenance::computed;
            }
            if (contracts_[c].find_state_var(root))
                return is_fixed(c, root) ? Provenance::state_var_fixed : Provenance::state_var_mutable;
            return Provenance::unknown;
        }
        default: return Provenance::computed;
    }
}

Cfg build_cfg(const FlatFunction& fn, const FlatContract& contract)
{
    FunctionFacts ff;
    detail::collect_locals(fn, contract, ff);
    EffectEnv env;
    env.contract = &contract;
    env.locals = &ff.locals;
    env.aliases = &ff.aliases;
    env.resolve = [&](const Expr& call) {
        CalleeRef ref;
        const Expr* callee = call.lhs.get();
        if (callee && callee->kind == ExprKind::identifier)
            ref.found = contract.find_function(callee->text, call.args.size()) != nullptr;
        else
            ref.found = callee != nullptr;
        return ref;
    };
    return detail::build_cfg(fn, env);
}

} // namespace rtriage
