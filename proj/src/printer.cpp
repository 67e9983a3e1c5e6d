#include "rtriage/frontend.hpp"

#include <cctype>

namespace rtriage {

namespace {

std::string join_exprs(const std::vector<ExprPtr>& list)
{
    std::string out;
    for (std::size_t i = 0; i < list.size(); ++i) {
        if (i > 0)
            out += ", ";
        if (list[i])
            out += to_source(*list[i]);
    }
    return out;
}

std::string print_call(const Expr& e)
{
    std::string out = to_source(*e.lhs);
    if (e.option_style == OptionStyle::legacy_member) {
        for (const auto& o : e.option_order) {
            const auto& v = o == "value" ? e.value_option : e.gas_option;
            out += "." + o + "(" + (v ? to_source(*v) : std::string()) + ")";
        }
    } else if (e.option_style == OptionStyle::braces) {
        out += "{";
        for (std::size_t i = 0; i < e.option_order.size(); ++i) {
            if (i > 0)
                out += ", ";
            const auto& o = e.option_order[i];
            if (o == "value" || o == "gas") {
                const auto& v = o == "value" ? e.value_option : e.gas_option;
                out += o + ": " + (v ? to_source(*v) : std::string());
            } else {
                auto eq = o.find('=');
                out += o.substr(0, eq) + ": " + o.substr(eq + 1);
            }
        }
        out += "}";
    }
    out += "(";
    if (!e.arg_names.empty()) {
        out += "{";
        for (std::size_t i = 0; i < e.args.size(); ++i) {
            if (i > 0)
                out += ", ";
            out += e.arg_names[i] + ": " + to_source(*e.args[i]);
        }
        out += "}";
    } else {
        out += join_exprs(e.args);
    }
    out += ")";
    return out;
}

std::string print_bare(const Expr& e)
{
    switch (e.kind) {
        case ExprKind::identifier:
        case ExprKind::literal:
        case ExprKind::elementary_type:
        case ExprKind::opaque: return e.text;
        case ExprKind::this_ref: return "this";
        case ExprKind::msg_sender: return "msg.sender";
        case ExprKind::msg_value: return "msg.value";
        case ExprKind::member_access: return to_source(*e.lhs) + "." + e.text;
        case ExprKind::index_access:
            return to_source(*e.lhs) + "[" + (e.rhs ? to_source(*e.rhs) : std::string()) + "]";
        case ExprKind::call: return print_call(e);
        case ExprKind::binary:
        case ExprKind::assign: return to_source(*e.lhs) + " " + e.text + " " + to_source(*e.rhs);
        case ExprKind::unary: {
            std::string operand = to_source(*e.lhs);
            if (e.postfix)
                return operand + e.text;
            bool word = std::isalpha(static_cast<unsigned char>(e.text.front())) != 0;
            bool clash = !operand.empty() && (operand.front() == '-' || operand.front() == '+');
            return e.text + (word || clash ? " " : "") + operand;
        }
        case ExprKind::conditional:
            return to_source(*e.args[0]) + " ? " + to_source(*e.args[1]) + " : " + to_source(*e.args[2]);
        case ExprKind::tuple:
            if (e.text == "[")
                return "[" + join_exprs(e.args) + "]";
            return "(" + join_exprs(e.args) + ")";
        case ExprKind::type_cast: return e.text + "(" + to_source(*e.lhs) + ")";
        case ExprKind::new_expr: return "new " + e.text;
    }
    return e.text;
}

std::string print_var(const VarDecl& v, bool with_type)
{
    std::string out;
    if (with_type)
        out = v.type_name;
    if (!v.location.empty())
        out += " " + v.location;
    if (!v.name.empty())
        out += (out.empty() ? "" : " ") + v.name;
    return out;
}

std::string block_body(const Stmt& s)
{
    std::string out = "{";
    for (const auto& c : s.children)
        out += " " + to_source(*c);
    out += " }";
    return out;
}

} // namespace

std::string to_source(const Expr& expr)
{
    std::string out = print_bare(expr);
    for (int i = 0; i < expr.paren_depth; ++i)
        out = "(" + out + ")";
    return out;
}

std::string to_source(const Stmt& s)
{
    switch (s.kind) {
        case StmtKind::block:
            if (s.text == "...")
                return "...";
            if (s.text == "unchecked")
                return "unchecked " + block_body(s);
            return block_body(s);
        case StmtKind::if_stmt: {
            std::string out = "if (" + to_source(*s.expr) + ") " + to_source(*s.children[0]);
            if (s.children.size() > 1)
                out += " else " + to_source(*s.children[1]);
            return out;
        }
        case StmtKind::loop:
            switch (s.loop_kind) {
                case LoopKind::while_loop:
                    return "while (" + to_source(*s.expr) + ") " + to_source(*s.children[0]);
                case LoopKind::do_while:
                    return "do " + to_source(*s.children[0]) + " while (" + to_source(*s.expr) + ");";
                case LoopKind::for_loop:
                    return "for (" + (s.init ? to_source(*s.init) : std::string(";")) + " " +
                           (s.expr ? to_source(*s.expr) : std::string()) + "; " +
                           (s.step ? to_source(*s.step) : std::string()) + ") " + to_source(*s.children[0]);
            }
            return {};
        case StmtKind::require: {
            std::vector<ExprPtr> all{s.expr};
            all.insert(all.end(), s.args.begin(), s.args.end());
            return s.text + "(" + join_exprs(all) + ");";
        }
        case StmtKind::return_stmt: return s.expr ? "return " + to_source(*s.expr) + ";" : "return;";
        case StmtKind::revert:
            if (s.text == "throw")
                return "throw;";
            if (s.text == "revert_error")
                return "revert " + to_source(*s.expr) + ";";
            return "revert(" + join_exprs(s.args) + ");";
        case StmtKind::local_decl: {
            std::string out;
            bool typed = s.text != "var";
            if (!typed)
                out = "var ";
            if (s.tuple_decl) {
                out += "(";
                for (std::size_t i = 0; i < s.vars.size(); ++i) {
                    if (i > 0)
                        out += ", ";
                    out += print_var(s.vars[i], typed);
                }
                out += ")";
            } else {
                out += print_var(s.vars.front(), typed);
            }
            if (s.expr)
                out += " = " + to_source(*s.expr);
            return out + ";";
        }
        case StmtKind::expr_stmt:
        case StmtKind::assignment: return to_source(*s.expr) + ";";
        case StmtKind::placeholder: return "_;";
        case StmtKind::break_stmt: return "break;";
        case StmtKind::continue_stmt: return "continue;";
        case StmtKind::emit: return "emit " + to_source(*s.expr) + ";";
        case StmtKind::try_stmt: {
            std::string out = "try " + to_source(*s.expr);
            for (std::size_t i = 0; i < s.children.size(); ++i) {
                if (i < s.clause_headers.size() && !s.clause_headers[i].empty())
                    out += " " + s.clause_headers[i];
                out += " " + to_source(*s.children[i]);
            }
            return out;
        }
        case StmtKind::opaque: {
            auto colon = s.text.find(':');
            return colon == std::string::npos ? s.text : s.text.substr(colon + 1);
        }
    }
    return {};
}

std::string root_name(const Expr& e)
{
    switch (e.kind) {
        case ExprKind::identifier: return e.text;
        case ExprKind::member_access:
        case ExprKind::index_access: return e.lhs ? root_name(*e.lhs) : std::string();
        default: return {};
    }
}

const Expr& strip_casts(const Expr& e)
{
    const Expr* cur = &e;
    while (cur->kind == ExprKind::type_cast && cur->lhs)
        cur = cur->lhs.get();
    return *cur;
}

std::string normalize_address_literal(std::string_view text)
{
    if (text.size() >= 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X'))
        text.remove_prefix(2);
    std::string out;
    out.reserve(text.size());
    for (char c : text)
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

} // namespace rtriage
