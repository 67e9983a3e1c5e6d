#include "flow_internal.hpp"

#include "rtriage/frontend.hpp"

namespace rtriage::detail {

namespace {

bool is_elementary_type(const std::string& t)
{
    static const char* const prefixes[] = {"uint", "int", "bool", "address", "bytes", "byte", "fixed", "ufixed"};
    if (t == "bytes" || t == "string")
        return false; // dynamic reference types
    for (const char* p : prefixes) {
        if (t.rfind(p, 0) == 0 && t.find('[') == std::string::npos)
            return true;
    }
    return false;
}

bool is_local(const EffectEnv& env, const std::string& n)
{
    return env.locals && env.locals->count(n) != 0;
}

bool is_state(const EffectEnv& env, const std::string& n)
{
    return env.contract && env.contract->find_state_var(n) != nullptr;
}

void add_identifier_reads(const EffectEnv& env, const std::string& n, std::set<std::string>& reads)
{
    if (is_local(env, n)) {
        if (env.aliases) {
            if (auto it = env.aliases->find(n); it != env.aliases->end())
                reads.insert(it->second);
        }
        if (env.local_reads) {
            if (auto it = env.local_reads->find(n); it != env.local_reads->end())
                reads.insert(it->second.begin(), it->second.end());
        }
        return;
    }
    if (is_state(env, n))
        reads.insert(n);
}

std::string suffix_after_root(const Expr& target, const std::string& root)
{
    std::string text = to_source(target);
    if (text.rfind(root, 0) == 0)
        return text.substr(root.size());
    return text;
}

class Walker
{
public:
    Walker(const EffectEnv& env, CfgItem& item) : env_(env), item_(item) {}

    void walk(const ExprPtr& e)
    {
        if (!e)
            return;
        switch (e->kind) {
            case ExprKind::identifier: add_identifier_reads(env_, e->text, item_.reads); break;
            case ExprKind::member_access:
            case ExprKind::type_cast: walk(e->lhs); break;
            case ExprKind::index_access:
                walk(e->lhs);
                walk(e->rhs);
                break;
            case ExprKind::binary:
                walk(e->lhs);
                walk(e->rhs);
                break;
            case ExprKind::unary:
                if (e->text == "++" || e->text == "--" || e->text == "delete") {
                    bool compound = e->text != "delete";
                    lvalue_inner(e->lhs, compound);
                    write_targets(e->lhs, compound ? WriteKind::compound_assign : WriteKind::direct_assign, nullptr,
                                  e->span);
                } else {
                    walk(e->lhs);
                }
                break;
            case ExprKind::assign: {
                walk(e->rhs);
                bool compound = e->text != "=";
                lvalue_inner(e->lhs, compound);
                write_targets(e->lhs, compound ? WriteKind::compound_assign : WriteKind::direct_assign,
                              compound ? nullptr : e->rhs, e->span);
                break;
            }
            case ExprKind::conditional:
            case ExprKind::tuple:
                for (const auto& a : e->args)
                    walk(a);
                break;
            case ExprKind::call: call(*e, e); break;
            default: break;
        }
    }

private:
    const EffectEnv& env_;
    CfgItem& item_;

    /// Evaluates the parts of an lvalue that are read (index expressions and,
    /// for compound operators, the target itself).
    void lvalue_inner(const ExprPtr& e, bool target_read)
    {
        if (!e)
            return;
        switch (e->kind) {
            case ExprKind::identifier:
                if (target_read)
                    add_identifier_reads(env_, e->text, item_.reads);
                break;
            case ExprKind::index_access:
                lvalue_inner(e->lhs, target_read);
                walk(e->rhs);
                break;
            case ExprKind::member_access: lvalue_inner(e->lhs, target_read); break;
            case ExprKind::tuple:
                for (const auto& a : e->args)
                    lvalue_inner(a, target_read);
                break;
            default: walk(e); break;
        }
    }

    void push_write(std::string var, std::string index, WriteKind kind, ExprPtr value, Span at)
    {
        Effect ef;
        ef.kind = Effect::Kind::write;
        ef.write = StateWrite{std::move(var), std::move(index), kind, at, std::move(value)};
        ef.location = at;
        item_.effects.push_back(std::move(ef));
    }

    void write_targets(const ExprPtr& target, WriteKind kind, const ExprPtr& value, Span at)
    {
        if (!target)
            return;
        if (target->kind == ExprKind::tuple) {
            const bool paired = value && value->kind == ExprKind::tuple && value->args.size() == target->args.size();
            for (std::size_t i = 0; i < target->args.size(); ++i)
                write_targets(target->args[i], kind, paired ? value->args[i] : nullptr, at);
            return;
        }
        std::string root = root_name(*target);
        if (root.empty()) {
            push_write("", "", WriteKind::opaque, nullptr, at);
            return;
        }
        if (is_local(env_, root)) {
            if (!env_.aliases)
                return;
            auto it = env_.aliases->find(root);
            if (it != env_.aliases->end())
                push_write(it->second, suffix_after_root(*target, root), kind, nullptr, target->span);
            return;
        }
        // State variable, or a name declared somewhere we cannot see.
        push_write(root, suffix_after_root(*target, root), kind, value, target->span);
    }

    void call(const Expr& c, const ExprPtr& self)
    {
        const ExprPtr& callee = c.lhs;
        if (callee && callee->kind == ExprKind::member_access)
            walk(callee->lhs);
        else if (callee && callee->kind != ExprKind::identifier)
            walk(callee);
        walk(c.value_option);
        walk(c.gas_option);
        for (const auto& a : c.args)
            walk(a);

        if (is_external(c.call_kind)) {
            Effect ef;
            ef.kind = Effect::Kind::call;
            ef.location = c.span;
            ef.expr = self;
            item_.effects.push_back(ef);
            if (is_ether_outflow(c)) {
                Effect out;
                out.kind = Effect::Kind::outflow;
                out.location = c.span;
                item_.effects.push_back(out);
            }
            return;
        }
        switch (c.call_kind) {
            case CallKind::internal: {
                CalleeRef ref = env_.resolve ? env_.resolve(c) : CalleeRef{};
                if (!ref.found) {
                    push_write("", "", WriteKind::opaque, nullptr, c.span);
                    return;
                }
                if (!ref.summary)
                    return;
                for (const auto& w : ref.summary->writes)
                    push_write(w, "", w.empty() ? WriteKind::opaque : WriteKind::direct_assign, nullptr, c.span);
                item_.reads.insert(ref.summary->reads.begin(), ref.summary->reads.end());
                if (ref.summary->sends_ether) {
                    Effect out;
                    out.kind = Effect::Kind::outflow;
                    out.location = c.span;
                    item_.effects.push_back(out);
                }
                return;
            }
            case CallKind::unresolved: push_write("", "", WriteKind::opaque, nullptr, c.span); return;
            case CallKind::builtin: {
                if (callee && callee->kind == ExprKind::member_access &&
                    (callee->text == "push" || callee->text == "pop")) {
                    write_targets(callee->lhs, WriteKind::compound_assign, nullptr, c.span);
                } else if (callee && callee->kind == ExprKind::identifier &&
                           (callee->text == "selfdestruct" || callee->text == "suicide")) {
                    Effect out;
                    out.kind = Effect::Kind::outflow;
                    out.location = c.span;
                    item_.effects.push_back(out);
                }
                return;
            }
            default: return;
        }
    }
};

void for_each_expr(const ExprPtr& e, const std::function<void(const Expr&)>& visit)
{
    if (!e)
        return;
    visit(*e);
    for_each_expr(e->lhs, visit);
    for_each_expr(e->rhs, visit);
    for_each_expr(e->value_option, visit);
    for_each_expr(e->gas_option, visit);
    for (const auto& a : e->args)
        for_each_expr(a, visit);
}

class Builder
{
public:
    Builder(const EffectEnv& env, const Deadline& deadline) : env_(env), deadline_(deadline) {}

    Cfg build(const FlatFunction& fn)
    {
        cfg_.function_name = fn.qualified_name;
        cfg_.entry = cfg_.add_block();
        cur_ = cfg_.entry;
        if (fn.body)
            stmt(*fn.body);
        if (cfg_.blocks[cur_].items.empty()) {
            cfg_.exit = cur_;
        } else {
            cfg_.exit = cfg_.add_block();
            edge(cur_, cfg_.exit);
        }
        for (std::size_t r : returns_)
            edge(r, cfg_.exit);
        cfg_.finalize();
        return std::move(cfg_);
    }

private:
    struct LoopTargets
    {
        std::size_t on_continue;
        std::size_t on_break;
    };

    const EffectEnv& env_;
    const Deadline& deadline_;
    Cfg cfg_;
    std::size_t cur_ = 0;
    std::vector<std::size_t> returns_;
    std::vector<LoopTargets> loops_;
    std::vector<std::size_t> headers_;

    void edge(std::size_t from, std::size_t to, EdgeKind kind = EdgeKind::seq, Branch branch = Branch::none,
              ExprPtr cond = nullptr)
    {
        CfgEdge e;
        e.from = from;
        e.to = to;
        e.kind = kind;
        e.branch = branch;
        e.span = cond ? cond->span : Span{};
        e.condition = std::move(cond);
        cfg_.add_edge(std::move(e));
    }

    /// Continues in a fresh block with no predecessors.
    void terminate() { cur_ = cfg_.add_block(); }

    void append(CfgItem::Kind kind, const StmtPtr& s, const ExprPtr& cond, Span span)
    {
        CfgItem item;
        item.kind = kind;
        item.stmt = s;
        item.cond = cond;
        item.span = span;
        if (kind == CfgItem::Kind::statement && s)
            simple_stmt_effects(env_, *s, item);
        else
            expr_effects(env_, cond, item);
        if (kind == CfgItem::Kind::require && s) {
            for (const auto& a : s->args)
                expr_effects(env_, a, item);
        }
        cfg_.blocks[cur_].items.push_back(std::move(item));
    }

    void append_expr(const StmtPtr& owner, const ExprPtr& e)
    {
        CfgItem item;
        item.stmt = owner;
        item.span = e->span;
        expr_effects(env_, e, item);
        cfg_.blocks[cur_].items.push_back(std::move(item));
    }

    void stmt(const StmtPtr& s)
    {
        if (!s)
            return;
        deadline_.check();
        switch (s->kind) {
            case StmtKind::block:
                for (const auto& c : s->children)
                    stmt(c);
                return;
            case StmtKind::if_stmt: if_stmt(s); return;
            case StmtKind::loop: loop(s); return;
            case StmtKind::require: append(CfgItem::Kind::require, s, s->expr, s->span); return;
            case StmtKind::return_stmt:
                append(CfgItem::Kind::statement, s, nullptr, s->span);
                returns_.push_back(cur_);
                terminate();
                return;
            case StmtKind::revert:
                append(CfgItem::Kind::statement, s, nullptr, s->span);
                terminate();
                return;
            case StmtKind::break_stmt:
                if (!loops_.empty())
                    edge(cur_, loops_.back().on_break);
                terminate();
                return;
            case StmtKind::continue_stmt:
                if (!loops_.empty()) {
                    std::size_t target = loops_.back().on_continue;
                    bool to_header = !headers_.empty() && headers_.back() == target;
                    edge(cur_, target, to_header ? EdgeKind::loop_back : EdgeKind::seq);
                }
                terminate();
                return;
            case StmtKind::try_stmt: try_stmt(s); return;
            case StmtKind::placeholder: return;
            default: append(CfgItem::Kind::statement, s, nullptr, s->span); return;
        }
    }

    void if_stmt(const StmtPtr& s)
    {
        append(CfgItem::Kind::condition, s, s->expr, s->expr->span);
        const std::size_t head = cur_;
        const std::size_t then_b = cfg_.add_block();
        edge(head, then_b, EdgeKind::true_branch, Branch::when_true, s->expr);
        cur_ = then_b;
        stmt(s->children[0]);
        const std::size_t then_end = cur_;

        std::optional<std::size_t> else_end;
        if (s->children.size() > 1) {
            const std::size_t else_b = cfg_.add_block();
            edge(head, else_b, EdgeKind::false_branch, Branch::when_false, s->expr);
            cur_ = else_b;
            stmt(s->children[1]);
            else_end = cur_;
        }
        const std::size_t join = cfg_.add_block();
        edge(then_end, join);
        if (else_end)
            edge(*else_end, join);
        else
            edge(head, join, EdgeKind::seq, Branch::when_false, s->expr);
        cur_ = join;
    }

    void loop(const StmtPtr& s)
    {
        if (s->loop_kind == LoopKind::do_while) {
            const std::size_t body = cfg_.add_block();
            edge(cur_, body);
            const std::size_t cond_b = cfg_.add_block();
            const std::size_t after = cfg_.add_block();
            loops_.push_back({cond_b, after});
            headers_.push_back(body);
            cur_ = body;
            stmt(s->children[0]);
            edge(cur_, cond_b);
            headers_.pop_back();
            loops_.pop_back();
            cur_ = cond_b;
            append(CfgItem::Kind::condition, s, s->expr, s->expr->span);
            edge(cond_b, body, EdgeKind::loop_back, Branch::when_true, s->expr);
            edge(cond_b, after, EdgeKind::false_branch, Branch::when_false, s->expr);
            cur_ = after;
            return;
        }

        if (s->init)
            stmt(s->init);
        const std::size_t header = cfg_.add_block();
        edge(cur_, header);
        cur_ = header;
        if (s->expr)
            append(CfgItem::Kind::condition, s, s->expr, s->expr->span);
        const std::size_t body = cfg_.add_block();
        const std::size_t after = cfg_.add_block();
        if (s->expr) {
            edge(header, body, EdgeKind::true_branch, Branch::when_true, s->expr);
            edge(header, after, EdgeKind::false_branch, Branch::when_false, s->expr);
        } else {
            edge(header, body);
        }
        std::optional<std::size_t> step_b;
        if (s->step)
            step_b = cfg_.add_block();
        loops_.push_back({step_b ? *step_b : header, after});
        headers_.push_back(header);
        cur_ = body;
        stmt(s->children[0]);
        if (step_b) {
            edge(cur_, *step_b);
            cur_ = *step_b;
            append_expr(s, s->step);
        }
        edge(cur_, header, EdgeKind::loop_back);
        headers_.pop_back();
        loops_.pop_back();
        cur_ = after;
    }

    void try_stmt(const StmtPtr& s)
    {
        append(CfgItem::Kind::statement, s, nullptr, s->span);
        const std::size_t head = cur_;
        std::vector<std::size_t> ends;
        for (const auto& clause : s->children) {
            const std::size_t b = cfg_.add_block();
            edge(head, b);
            cur_ = b;
            stmt(clause);
            ends.push_back(cur_);
        }
        const std::size_t join = cfg_.add_block();
        if (ends.empty())
            edge(head, join);
        for (std::size_t e : ends)
            edge(e, join);
        cur_ = join;
    }
};

} // namespace

void expr_effects(const EffectEnv& env, const ExprPtr& e, CfgItem& item)
{
    Walker(env, item).walk(e);
}

void simple_stmt_effects(const EffectEnv& env, const Stmt& s, CfgItem& item)
{
    Walker w(env, item);
    switch (s.kind) {
        case StmtKind::require:
            w.walk(s.expr);
            for (const auto& a : s.args)
                w.walk(a);
            break;
        case StmtKind::revert:
            w.walk(s.expr);
            for (const auto& a : s.args)
                w.walk(a);
            break;
        case StmtKind::opaque: {
            Effect ef;
            ef.kind = Effect::Kind::write;
            ef.write = StateWrite{"", "", WriteKind::opaque, s.span, nullptr};
            ef.location = s.span;
            item.effects.push_back(std::move(ef));
            break;
        }
        case StmtKind::local_decl:
        case StmtKind::expr_stmt:
        case StmtKind::assignment:
        case StmtKind::return_stmt:
        case StmtKind::emit:
        case StmtKind::try_stmt: w.walk(s.expr); break;
        default: break;
    }
}

std::set<std::string> expr_reads(const EffectEnv& env, const ExprPtr& e)
{
    CfgItem scratch;
    expr_effects(env, e, scratch);
    return scratch.reads;
}

Cfg build_cfg(const FlatFunction& fn, const EffectEnv& env, const Deadline& deadline)
{
    return Builder(env, deadline).build(fn);
}

void for_each_stmt(const StmtPtr& body, const std::function<void(const Stmt&)>& visit)
{
    if (!body)
        return;
    visit(*body);
    for_each_stmt(body->init, visit);
    for (const auto& c : body->children)
        for_each_stmt(c, visit);
}

void collect_locals(const FlatFunction& fn, const FlatContract& contract, FunctionFacts& out)
{
    for (const auto& p : fn.params) {
        if (!p.name.empty()) {
            out.locals.insert(p.name);
            out.params.insert(p.name);
        }
    }
    for (const auto& r : fn.returns) {
        if (!r.name.empty())
            out.locals.insert(r.name);
    }
    if (!fn.body)
        return;

    auto note_assign = [&](const ExprPtr& target, const ExprPtr& value) {
        if (target && target->kind == ExprKind::identifier)
            out.local_defs[target->text].push_back(value);
    };

    for_each_stmt(*fn.body, [&](const Stmt& s) {
        if (s.kind == StmtKind::local_decl) {
            const bool paired = s.expr && s.expr->kind == ExprKind::tuple && s.expr->args.size() == s.vars.size();
            for (std::size_t i = 0; i < s.vars.size(); ++i) {
                const VarDecl& v = s.vars[i];
                if (v.name.empty())
                    continue;
                out.locals.insert(v.name);
                if (s.expr)
                    out.local_defs[v.name].push_back(paired ? s.expr->args[i] : s.expr);
            }
            if (s.vars.size() == 1 && s.expr && s.text != "var") {
                const VarDecl& v = s.vars.front();
                // Pre-0.5 code declares storage pointers without a location keyword.
                const bool element = s.expr->kind == ExprKind::index_access || s.expr->kind == ExprKind::member_access;
                const bool storage =
                    v.location == "storage" || (v.location.empty() && element && !is_elementary_type(v.type_name));
                std::string root = root_name(*s.expr);
                if (storage && !root.empty()) {
                    if (auto it = out.aliases.find(root); it != out.aliases.end())
                        out.aliases[v.name] = it->second;
                    else if (contract.find_state_var(root) && out.locals.count(root) == 0)
                        out.aliases[v.name] = root;
                }
            }
        }
        auto visit_expr = [&](const Expr& e) {
            if (e.kind == ExprKind::assign) {
                ExprPtr value = e.text == "=" ? e.rhs : nullptr;
                if (e.lhs && e.lhs->kind == ExprKind::tuple) {
                    const bool paired =
                        value && value->kind == ExprKind::tuple && value->args.size() == e.lhs->args.size();
                    for (std::size_t i = 0; i < e.lhs->args.size(); ++i)
                        note_assign(e.lhs->args[i], paired ? value->args[i] : nullptr);
                } else {
                    note_assign(e.lhs, value);
                }
            } else if (e.kind == ExprKind::unary && (e.text == "++" || e.text == "--" || e.text == "delete")) {
                note_assign(e.lhs, nullptr);
            }
        };
        for_each_expr(s.expr, visit_expr);
        for_each_expr(s.step, visit_expr);
        for (const auto& a : s.args)
            for_each_expr(a, visit_expr);
    });
}

} // namespace rtriage::detail
