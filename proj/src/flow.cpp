#include "rtriage/flow.hpp"

#include "rtriage/frontend.hpp"

#include <algorithm>
#include <deque>
#include <tuple>

namespace rtriage {

const char* to_string(WriteKind k)
{
    switch (k) {
        case WriteKind::direct_assign: return "direct_assign";
        case WriteKind::compound_assign: return "compound_assign";
        case WriteKind::opaque: return "opaque";
    }
    return "opaque";
}

const char* to_string(EdgeKind k)
{
    switch (k) {
        case EdgeKind::seq: return "seq";
        case EdgeKind::true_branch: return "true";
        case EdgeKind::false_branch: return "false";
        case EdgeKind::loop_back: return "loop_back";
    }
    return "seq";
}

std::string StateWrite::target() const
{
    return variable.empty() ? std::string("<unknown>") : variable + index;
}

namespace {
auto write_key(const StateWrite& w)
{
    return std::make_tuple(std::cref(w.variable), std::cref(w.index), w.kind, w.location.offset, w.location.length);
}
} // namespace

bool operator<(const StateWrite& a, const StateWrite& b)
{
    return write_key(a) < write_key(b);
}

bool operator==(const StateWrite& a, const StateWrite& b)
{
    return write_key(a) == write_key(b);
}

ExprPtr value_slot(const Expr& call)
{
    if ((call.call_kind == CallKind::transfer || call.call_kind == CallKind::send) && !call.args.empty())
        return call.args.front();
    return call.value_option;
}

ExprPtr call_target(const Expr& call)
{
    if (call.lhs && call.lhs->kind == ExprKind::member_access)
        return call.lhs->lhs;
    return call.lhs;
}

bool is_literal_zero(const Expr& e)
{
    const Expr& s = strip_casts(e);
    if (s.kind != ExprKind::literal || s.literal != LiteralKind::number)
        return false;
    std::string digits;
    for (char c : s.text) {
        if (c != '_')
            digits += c;
    }
    return digits.find_first_not_of('0') == std::string::npos ||
           (digits.size() > 2 && digits[0] == '0' && (digits[1] == 'x' || digits[1] == 'X') &&
            digits.find_first_not_of('0', 2) == std::string::npos);
}

bool is_ether_outflow(const Expr& call)
{
    if (!is_external(call.call_kind) || call.call_kind == CallKind::delegatecall)
        return false;
    ExprPtr v = value_slot(call);
    return v && !is_literal_zero(*v);
}

// ---------------------------------------------------------------------------
// Cfg

std::size_t Cfg::add_block()
{
    BasicBlock b;
    b.id = blocks.size();
    blocks.push_back(std::move(b));
    return blocks.back().id;
}

void Cfg::add_edge(CfgEdge e)
{
    edges.push_back(std::move(e));
}

std::vector<std::size_t> Cfg::successors(std::size_t b) const
{
    std::vector<std::size_t> out;
    for (const auto& e : edges) {
        if (e.from == b && std::find(out.begin(), out.end(), e.to) == out.end())
            out.push_back(e.to);
    }
    return out;
}

std::vector<std::size_t> Cfg::predecessors(std::size_t b) const
{
    std::vector<std::size_t> out;
    for (const auto& e : edges) {
        if (e.to == b && std::find(out.begin(), out.end(), e.from) == out.end())
            out.push_back(e.from);
    }
    return out;
}

namespace {

/// Blocks reachable from `from` (inclusive), optionally ignoring one edge.
std::vector<bool> reach(const Cfg& cfg, std::size_t from, std::optional<std::size_t> skip_edge = std::nullopt)
{
    std::vector<std::vector<std::size_t>> out(cfg.blocks.size());
    for (std::size_t i = 0; i < cfg.edges.size(); ++i)
        out[cfg.edges[i].from].push_back(i);
    std::vector<bool> seen(cfg.blocks.size(), false);
    std::deque<std::size_t> work{from};
    seen[from] = true;
    while (!work.empty()) {
        std::size_t b = work.front();
        work.pop_front();
        for (std::size_t i : out[b]) {
            const auto& e = cfg.edges[i];
            if ((skip_edge && *skip_edge == i) || seen[e.to])
                continue;
            seen[e.to] = true;
            work.push_back(e.to);
        }
    }
    return seen;
}

} // namespace

void Cfg::finalize()
{
    if (blocks.empty())
        add_block();
    std::vector<bool> live = reach(*this, entry);
    for (auto& b : blocks)
        b.dead = !live[b.id];
    edges.erase(std::remove_if(edges.begin(), edges.end(), [&](const CfgEdge& e) { return !live[e.from]; }),
                edges.end());

    // Iterative dominator sets; small graphs make the quadratic form fine.
    const std::size_t n = blocks.size();
    dom_.assign(n, std::vector<bool>(n, true));
    for (std::size_t b = 0; b < n; ++b) {
        if (!live[b])
            dom_[b].assign(n, false);
    }
    dom_[entry].assign(n, false);
    dom_[entry][entry] = true;
    std::vector<std::vector<std::size_t>> preds(n);
    for (const auto& e : edges)
        preds[e.to].push_back(e.from);
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t b = 0; b < n; ++b) {
            if (b == entry || !live[b])
                continue;
            std::vector<bool> next(n, true);
            bool any = false;
            for (std::size_t p : preds[b]) {
                any = true;
                for (std::size_t k = 0; k < n; ++k)
                    next[k] = next[k] && dom_[p][k];
            }
            if (!any)
                next.assign(n, false);
            next[b] = true;
            if (next != dom_[b]) {
                dom_[b] = std::move(next);
                changed = true;
            }
        }
    }

    // Blocks cut off from the entry when a branch edge is removed.
    edge_dom_.assign(edges.size(), {});
    for (std::size_t e = 0; e < edges.size(); ++e) {
        if (edges[e].branch == Branch::none)
            continue;
        edge_dom_[e] = reach(*this, entry, e);
        for (std::size_t b = 0; b < n; ++b)
            edge_dom_[e][b] = live[b] && !edge_dom_[e][b];
    }

    sites.clear();
    for (auto& b : blocks) {
        if (b.dead)
            continue;
        for (std::size_t i = 0; i < b.items.size(); ++i) {
            auto& item = b.items[i];
            for (std::size_t k = 0; k < item.effects.size(); ++k) {
                auto& ef = item.effects[k];
                if (ef.kind != Effect::Kind::call)
                    continue;
                ef.site = sites.size();
                CallSite site;
                if (ef.expr) {
                    site.call_kind = ef.expr->call_kind;
                    site.call = ef.expr;
                    site.target_expr = call_target(*ef.expr);
                    site.value_slot = value_slot(*ef.expr);
                    site.gas_slot = ef.expr->gas_option;
                    site.location = ef.expr->span;
                } else {
                    site.location = ef.location;
                }
                site.enclosing_function = function_name;
                site.block = b.id;
                site.item = i;
                site.effect = k;
                sites.push_back(std::move(site));
            }
        }
    }
}

bool Cfg::dominates(std::size_t a, std::size_t b) const
{
    return b < dom_.size() && a < dom_.size() && dom_[b][a];
}

bool Cfg::edge_dominates(std::size_t e, std::size_t b) const
{
    if (blocks[b].dead)
        return false;
    if (e < edge_dom_.size() && !edge_dom_[e].empty())
        return edge_dom_[e][b];
    return !reach(*this, entry, e)[b];
}

bool Cfg::reachable(std::size_t from, std::size_t to) const
{
    return reach(*this, from)[to];
}

// ---------------------------------------------------------------------------
// Queries

namespace {

template <typename Visit>
void visit_effects_after(const Cfg& cfg, std::size_t site_index, Visit&& visit)
{
    const CallSite& site = cfg.sites.at(site_index);
    const auto& block = cfg.blocks[site.block];
    const auto& item = block.items[site.item];
    for (std::size_t k = site.effect + 1; k < item.effects.size(); ++k)
        visit(item.effects[k]);
    for (std::size_t i = site.item + 1; i < block.items.size(); ++i) {
        for (const auto& ef : block.items[i].effects)
            visit(ef);
    }
    // Everything in a block reachable through the successors executes after
    // the call, including the call's own block when a loop leads back to it.
    std::vector<bool> seen(cfg.blocks.size(), false);
    std::deque<std::size_t> work;
    for (std::size_t s : cfg.successors(site.block)) {
        if (!seen[s]) {
            seen[s] = true;
            work.push_back(s);
        }
    }
    while (!work.empty()) {
        std::size_t b = work.front();
        work.pop_front();
        for (const auto& it : cfg.blocks[b].items) {
            for (const auto& ef : it.effects)
                visit(ef);
        }
        for (std::size_t s : cfg.successors(b)) {
            if (!seen[s]) {
                seen[s] = true;
                work.push_back(s);
            }
        }
    }
}

int dom_depth(const Cfg& cfg, std::size_t b)
{
    int d = 0;
    for (std::size_t a = 0; a < cfg.blocks.size(); ++a) {
        if (cfg.dominates(a, b))
            ++d;
    }
    return d;
}

} // namespace

std::vector<StateWrite> writes_after(const Cfg& cfg, std::size_t site)
{
    std::vector<StateWrite> out;
    visit_effects_after(cfg, site, [&](const Effect& ef) {
        if (ef.kind == Effect::Kind::write)
            out.push_back(ef.write);
    });
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<Span> outflows_after(const Cfg& cfg, std::size_t site)
{
    std::vector<Span> out;
    visit_effects_after(cfg, site, [&](const Effect& ef) {
        if (ef.kind == Effect::Kind::outflow)
            out.push_back(ef.location);
    });
    std::sort(out.begin(), out.end(), [](const Span& a, const Span& b) { return a.offset < b.offset; });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<Guard> guards_at(const Cfg& cfg, std::size_t block, std::size_t item)
{
    struct Ranked
    {
        int depth;
        std::size_t item;
        std::size_t order;
        Guard guard;
    };
    std::vector<Ranked> ranked;
    if (cfg.blocks[block].dead)
        return {};

    for (const auto& b : cfg.blocks) {
        if (b.dead)
            continue;
        std::size_t limit = 0;
        if (b.id == block)
            limit = item;
        else if (cfg.dominates(b.id, block))
            limit = b.items.size();
        for (std::size_t i = 0; i < limit; ++i) {
            const auto& it = b.items[i];
            if (it.kind != CfgItem::Kind::require || !it.cond)
                continue;
            Guard g;
            g.expr = it.cond;
            g.origin = Guard::Origin::require;
            g.span = it.span;
            g.block = b.id;
            g.item = i;
            ranked.push_back({dom_depth(cfg, b.id), i, ranked.size(), g});
        }
    }
    for (std::size_t e = 0; e < cfg.edges.size(); ++e) {
        const auto& edge = cfg.edges[e];
        if (edge.branch == Branch::none || !edge.condition || !cfg.edge_dominates(e, block))
            continue;
        Guard g;
        g.expr = edge.condition;
        g.negated = edge.branch == Branch::when_false;
        g.origin = Guard::Origin::branch;
        g.span = edge.condition->span;
        g.block = edge.from;
        g.item = cfg.blocks[edge.from].items.size();
        ranked.push_back({dom_depth(cfg, edge.from), g.item, ranked.size(), g});
    }
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        return std::tie(a.depth, a.item, a.order) < std::tie(b.depth, b.item, b.order);
    });
    std::vector<Guard> out;
    for (auto& r : ranked)
        out.push_back(std::move(r.guard));
    return out;
}

std::vector<Guard> guards_of(const Cfg& cfg, std::size_t site)
{
    const CallSite& s = cfg.sites.at(site);
    return guards_at(cfg, s.block, s.item);
}

std::vector<std::pair<ExprPtr, bool>> guard_literals(const ExprPtr& expr, bool positive)
{
    std::vector<std::pair<ExprPtr, bool>> out;
    if (!expr)
        return out;
    if (expr->kind == ExprKind::unary && expr->text == "!" && !expr->postfix)
        return guard_literals(expr->lhs, !positive);
    if (expr->kind == ExprKind::binary && ((expr->text == "&&" && positive) || (expr->text == "||" && !positive))) {
        auto l = guard_literals(expr->lhs, positive);
        auto r = guard_literals(expr->rhs, positive);
        out.insert(out.end(), l.begin(), l.end());
        out.insert(out.end(), r.begin(), r.end());
        return out;
    }
    if (expr->kind == ExprKind::tuple && expr->args.size() == 1 && expr->text != "[")
        return guard_literals(expr->args.front(), positive);
    out.emplace_back(expr, positive);
    return out;
}

bool position_dominates(const Cfg& cfg, std::size_t block_a, std::size_t item_a, std::size_t block_b,
                        std::size_t item_b)
{
    if (block_a == block_b)
        return item_a < item_b;
    return cfg.dominates(block_a, block_b);
}

} // namespace rtriage
