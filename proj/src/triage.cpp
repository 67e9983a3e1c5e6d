#include "rtriage/triage.hpp"

#include "rtriage/frontend.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

namespace rtriage {

namespace {

constexpr const char* kCauseNames[] = {"identity_control",       "address_control",
                                       "reentrancy_lock",        "no_state_change",
                                       "no_financial_risk",      "special_transfer_value",
                                       "gas_stipend_transfer_send", "non_callable"};

} // namespace

const char* to_string(CauseType c)
{
    return kCauseNames[static_cast<std::size_t>(c)];
}

std::optional<CauseType> cause_from_string(std::string_view name)
{
    for (CauseType c : kAllCauses) {
        if (name == to_string(c))
            return c;
    }
    return std::nullopt;
}

std::set<CauseType> all_causes()
{
    return {std::begin(kAllCauses), std::end(kAllCauses)};
}

bool operator==(const Evidence& a, const Evidence& b)
{
    return a.span == b.span && a.text == b.text;
}

const char* to_string(Classification c)
{
    return c == Classification::likely_true_positive ? "likely_true_positive" : "suppressed_false_positive";
}

namespace {

/// Everything a rule needs about one copy of the call.
struct Site
{
    const FileFacts& facts;
    const Finding& finding;
    const FunctionFacts& fn;
    const Cfg& cfg;
    std::size_t index;
    const CallSite& call;
    std::size_t contract;

    [[nodiscard]] const FlatStateVar* state_var(const Expr& e) const
    {
        const Expr& s = strip_casts(e);
        if (s.kind != ExprKind::identifier || fn.locals.count(s.text) != 0)
            return nullptr;
        return fn.contract->find_state_var(s.text);
    }
};

Evidence at(const Span& span, std::string text)
{
    return Evidence{span, std::move(text)};
}

std::string src(const ExprPtr& e)
{
    return e ? to_source(*e) : std::string();
}

using SiteRule = std::function<RuleEvidence(const Site&)>;

/// A rule matches a finding only if it matches every inlined copy of the call.
RuleEvidence on_all_copies(const Finding& f, const FileFacts& facts, const SiteRule& rule)
{
    const FunctionFacts& fn = facts.functions(f.contract_index)[f.function_index];
    std::vector<Evidence> merged;
    for (std::size_t idx : f.occurrences) {
        Site site{facts, f, fn, fn.cfg, idx, fn.cfg.sites[idx], f.contract_index};
        RuleEvidence ev = rule(site);
        if (!ev || ev->empty())
            return std::nullopt;
        for (auto& e : *ev) {
            if (std::find(merged.begin(), merged.end(), e) == merged.end())
                merged.push_back(std::move(e));
        }
    }
    if (merged.empty())
        return std::nullopt;
    return merged;
}

bool is_address_or_contract_type(const std::string& type)
{
    return type.rfind("address", 0) == 0 || (!type.empty() && std::isupper(static_cast<unsigned char>(type[0])));
}

bool is_true_literal(const Expr& e)
{
    const Expr& s = strip_casts(e);
    return s.kind == ExprKind::literal && s.text == "true";
}

RuleEvidence identity_at(const Site& s)
{
    for (const auto& g : guards_of(s.cfg, s.index)) {
        for (const auto& [lit, positive] : guard_literals(g.expr, !g.negated)) {
            const Expr& e = *lit;
            if (e.kind == ExprKind::binary && (e.text == "==" || e.text == "!=")) {
                const bool equality = (e.text == "==") == positive;
                if (!equality)
                    continue;
                const Expr& a = strip_casts(*e.lhs);
                const Expr& b = strip_casts(*e.rhs);
                const Expr* other = a.kind == ExprKind::msg_sender ? &b : b.kind == ExprKind::msg_sender ? &a : nullptr;
                if (other) {
                    const FlatStateVar* v = s.state_var(*other);
                    if (v && is_address_or_contract_type(v->def.type_name))
                        return std::vector<Evidence>{at(g.span, to_source(e))};
                }
                // `allowed[msg.sender] == true`
                const Expr* member = is_true_literal(b) ? &a : is_true_literal(a) ? &b : nullptr;
                if (!member)
                    continue;
                if (member->kind == ExprKind::index_access && member->rhs &&
                    strip_casts(*member->rhs).kind == ExprKind::msg_sender) {
                    const FlatStateVar* m = s.state_var(*member->lhs);
                    if (m && m->def.type_name.rfind("mapping", 0) == 0)
                        return std::vector<Evidence>{at(g.span, to_source(e))};
                }
                continue;
            }
            // Membership test `allowed[msg.sender]`.
            if (positive && e.kind == ExprKind::index_access && e.rhs &&
                strip_casts(*e.rhs).kind == ExprKind::msg_sender) {
                const FlatStateVar* m = s.state_var(*e.lhs);
                if (m && m->def.type_name.rfind("mapping", 0) == 0)
                    return std::vector<Evidence>{at(g.span, to_source(e))};
            }
        }
    }
    return std::nullopt;
}

RuleEvidence address_at(const Site& s)
{
    if (!s.call.target_expr)
        return std::nullopt;
    const Expr& target = *s.call.target_expr;
    Provenance p = s.facts.provenance(target, s.contract, s.fn, s.index);
    if (p != Provenance::hardcoded_constant && p != Provenance::state_var_fixed)
        return std::nullopt;
    std::vector<Evidence> ev{at(target.span, to_source(target) + " is " + to_string(p))};
    std::string root = root_name(strip_casts(target));
    if (const FlatStateVar* v = root.empty() ? nullptr : s.fn.contract->find_state_var(root)) {
        ev.push_back(at(v->def.span, "declaration of " + v->def.name));
    }
    return ev;
}

/// Lock condition on a state flag: which flag values let the guard pass.
struct LockCondition
{
    std::string flag;
    std::function<bool(const std::string&)> passes;
};

std::optional<LockCondition> lock_condition(const Site& s, const Expr& lit, bool positive)
{
    if (const FlatStateVar* v = s.state_var(lit)) {
        return LockCondition{v->def.name, [positive](const std::string& val) {
                                 return (val == "true") == positive;
                             }};
    }
    if (lit.kind != ExprKind::binary || (lit.text != "==" && lit.text != "!="))
        return std::nullopt;
    const bool equality = (lit.text == "==") == positive;
    for (int side = 0; side < 2; ++side) {
        const Expr& flag = side == 0 ? *lit.lhs : *lit.rhs;
        const Expr& other = side == 0 ? *lit.rhs : *lit.lhs;
        const FlatStateVar* v = s.state_var(flag);
        auto value = s.facts.constant_value(other, s.contract);
        if (v && value) {
            std::string c = *value;
            return LockCondition{v->def.name, [c, equality](const std::string& val) {
                                     return (val == c) == equality;
                                 }};
        }
    }
    return std::nullopt;
}

RuleEvidence lock_at(const Site& s)
{
    const CallSite& call = s.call;
    for (const auto& g : guards_of(s.cfg, s.index)) {
        for (const auto& [lit, positive] : guard_literals(g.expr, !g.negated)) {
            auto cond = lock_condition(s, *lit, positive);
            if (!cond)
                continue;

            // A blocking assignment between the guard and the call.
            std::optional<Evidence> blocking;
            for (const auto& b : s.cfg.blocks) {
                if (b.dead || blocking)
                    continue;
                for (std::size_t i = 0; i < b.items.size() && !blocking; ++i) {
                    for (const auto& ef : b.items[i].effects) {
                        if (ef.kind != Effect::Kind::write || ef.write.variable != cond->flag ||
                            ef.write.kind != WriteKind::direct_assign || !ef.write.index.empty() || !ef.write.value)
                            continue;
                        auto val = s.facts.constant_value(*ef.write.value, s.contract);
                        if (!val || cond->passes(*val))
                            continue;
                        if (!position_dominates(s.cfg, b.id, i, call.block, call.item))
                            continue;
                        bool after_guard = false;
                        for (const auto& g2 : guards_at(s.cfg, b.id, i)) {
                            if (g2.expr == g.expr && g2.negated == g.negated && g2.block == g.block)
                                after_guard = true;
                        }
                        if (after_guard) {
                            blocking = at(ef.location, cond->flag + " = " + *val);
                            break;
                        }
                    }
                }
            }
            if (!blocking)
                continue;

            // And a restoring assignment once the call returns.
            for (const auto& w : writes_after(s.cfg, s.index)) {
                if (w.variable != cond->flag || w.kind != WriteKind::direct_assign || !w.index.empty() || !w.value)
                    continue;
                auto val = s.facts.constant_value(*w.value, s.contract);
                if (val && cond->passes(*val)) {
                    return std::vector<Evidence>{at(g.span, to_source(*lit)), *blocking,
                                                 at(w.location, cond->flag + " = " + *val)};
                }
            }
        }
    }
    return std::nullopt;
}

bool value_slot_empty_or_zero(const CallSite& c)
{
    return !c.value_slot || is_literal_zero(*c.value_slot);
}

RuleEvidence no_state_change_at(const Site& s)
{
    if (s.call.call_kind == CallKind::delegatecall)
        return std::nullopt;
    if (!writes_after(s.cfg, s.index).empty() || !value_slot_empty_or_zero(s.call) ||
        !outflows_after(s.cfg, s.index).empty())
        return std::nullopt;
    return std::vector<Evidence>{at(s.call.location, "no storage write or ether transfer after " + src(s.call.call))};
}

RuleEvidence no_financial_risk_at(const Site& s)
{
    const CallSite& c = s.call;
    if (c.call_kind == CallKind::delegatecall || !c.call)
        return std::nullopt;
    std::vector<Evidence> ev;
    const auto& args = c.call->args;
    const bool inbound = args.size() >= 2 && c.call->arg_names.empty() &&
                         strip_casts(*args[0]).kind == ExprKind::msg_sender &&
                         strip_casts(*args[1]).kind == ExprKind::this_ref;
    if (inbound) {
        ev.push_back(at(c.location, "inbound transfer from msg.sender to this"));
    } else if (value_slot_empty_or_zero(c) && !s.fn.summary.sends_ether) {
        ev.push_back(at(c.location, "no ether sent by " + s.fn.function->qualified_name));
    } else {
        return std::nullopt;
    }
    const auto& guarded = s.facts.outflow_guard_reads();
    for (const auto& w : writes_after(s.cfg, s.index)) {
        if (w.is_unknown() || guarded.count(w.variable) != 0)
            return std::nullopt;
        ev.push_back(at(w.location, w.variable + " does not steer any ether transfer"));
    }
    return ev;
}

RuleEvidence special_value_at(const Site& s)
{
    if (!s.call.value_slot)
        return std::nullopt;
    if (s.facts.provenance(*s.call.value_slot, s.contract, s.fn, s.index) != Provenance::msg_value)
        return std::nullopt;
    std::vector<Evidence> ev{at(s.call.value_slot->span, src(s.call.value_slot) + " is msg.value")};
    const Expr& v = strip_casts(*s.call.value_slot);
    if (v.kind == ExprKind::identifier) {
        for (const auto& g : guards_of(s.cfg, s.index)) {
            for (const auto& [lit, positive] : guard_literals(g.expr, !g.negated)) {
                std::string text = to_source(*lit);
                if (lit->kind == ExprKind::binary && text.find("msg.value") != std::string::npos &&
                    text.find(v.text) != std::string::npos)
                    ev.push_back(at(g.span, text));
            }
        }
    }
    return ev;
}

RuleEvidence gas_stipend_at(const Site& s)
{
    if ((s.call.call_kind != CallKind::transfer && s.call.call_kind != CallKind::send) || s.call.gas_slot)
        return std::nullopt;
    return std::vector<Evidence>{at(s.call.location, std::string(to_string(s.call.call_kind)) +
                                                           " forwards only the 2300 gas stipend")};
}

RuleEvidence non_callable_at(const Site& s)
{
    const FlatFunction& fn = *s.fn.function;
    if (fn.is_constructor)
        return std::vector<Evidence>{at(fn.header_span, "constructor runs only at deployment")};
    if (!s.facts.externally_reachable(fn)) {
        return std::vector<Evidence>{at(fn.header_span, std::string(to_string(fn.visibility)) + " function " +
                                                             fn.name + " has no externally callable caller")};
    }
    return std::nullopt;
}

} // namespace

RuleEvidence rule_identity_control(const Finding& f, const FileFacts& facts)
{
    return on_all_copies(f, facts, identity_at);
}

RuleEvidence rule_address_control(const Finding& f, const FileFacts& facts)
{
    return on_all_copies(f, facts, address_at);
}

RuleEvidence rule_reentrancy_lock(const Finding& f, const FileFacts& facts)
{
    return on_all_copies(f, facts, lock_at);
}

RuleEvidence rule_no_state_change(const Finding& f, const FileFacts& facts)
{
    return on_all_copies(f, facts, no_state_change_at);
}

RuleEvidence rule_no_financial_risk(const Finding& f, const FileFacts& facts)
{
    return on_all_copies(f, facts, no_financial_risk_at);
}

RuleEvidence rule_special_transfer_value(const Finding& f, const FileFacts& facts)
{
    return on_all_copies(f, facts, special_value_at);
}

RuleEvidence rule_gas_stipend(const Finding& f, const FileFacts& facts)
{
    return on_all_copies(f, facts, gas_stipend_at);
}

RuleEvidence rule_non_callable(const Finding& f, const FileFacts& facts)
{
    return on_all_copies(f, facts, non_callable_at);
}

RuleEvidence run_rule(CauseType rule, const Finding& f, const FileFacts& facts)
{
    switch (rule) {
        case CauseType::identity_control: return rule_identity_control(f, facts);
        case CauseType::address_control: return rule_address_control(f, facts);
        case CauseType::reentrancy_lock: return rule_reentrancy_lock(f, facts);
        case CauseType::no_state_change: return rule_no_state_change(f, facts);
        case CauseType::no_financial_risk: return rule_no_financial_risk(f, facts);
        case CauseType::special_transfer_value: return rule_special_transfer_value(f, facts);
        case CauseType::gas_stipend_transfer_send: return rule_gas_stipend(f, facts);
        case CauseType::non_callable: return rule_non_callable(f, facts);
    }
    return std::nullopt;
}

Verdict triage(const Finding& f, const FileFacts& facts, const std::set<CauseType>& enabled)
{
    Verdict v;
    v.finding = f;
    for (CauseType rule : kAllCauses) {
        RuleResult r;
        r.rule = rule;
        r.enabled = enabled.count(rule) != 0;
        if (r.enabled) {
            if (RuleEvidence ev = run_rule(rule, f, facts)) {
                r.matched = true;
                r.evidence = *ev;
                v.causes[rule] = *ev;
            }
        }
        v.rule_trace.push_back(std::move(r));
    }
    v.classification =
        v.causes.empty() ? Classification::likely_true_positive : Classification::suppressed_false_positive;
    return v;
}

} // namespace rtriage
