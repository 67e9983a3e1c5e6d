#include "rtriage/frontend.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <utility>

namespace rtriage {

namespace {

constexpr std::array<std::string_view, 11> kUnits = {"wei",     "gwei",  "szabo", "finney", "ether", "seconds",
                                                     "minutes", "hours", "days",  "weeks",  "years"};

constexpr std::array<std::string_view, 4> kVisibilities = {"public", "external", "internal", "private"};

bool is_elementary_type(std::string_view w)
{
    static const std::set<std::string_view> fixed = {"address", "bool", "string", "bytes", "byte",
                                                     "int",     "uint", "fixed",  "ufixed", "var"};
    if (fixed.count(w) != 0)
        return true;
    auto numbered = [&](std::string_view prefix) {
        if (w.size() <= prefix.size() || w.substr(0, prefix.size()) != prefix)
            return false;
        return std::all_of(w.begin() + static_cast<std::ptrdiff_t>(prefix.size()), w.end(),
                           [](char c) { return (c >= '0' && c <= '9') || c == 'x'; });
    };
    return numbered("uint") || numbered("int") || numbered("bytes") || numbered("ufixed") || numbered("fixed");
}

bool is_reserved_statement_word(std::string_view w)
{
    static const std::set<std::string_view> words = {
        "if",     "else",   "while",   "for",      "do",       "return",  "throw",     "emit",
        "break",  "continue", "assembly", "try",   "catch",    "unchecked", "returns", "is",
        "memory", "storage", "calldata", "public", "private",  "internal", "external", "constant",
        "immutable", "payable", "view", "pure", "override", "virtual", "indexed", "delete", "new"};
    return words.count(w) != 0;
}

bool is_location(std::string_view w)
{
    return w == "memory" || w == "storage" || w == "calldata";
}

bool ident_like(const std::string& s)
{
    return !s.empty() && (std::isalnum(static_cast<unsigned char>(s.front())) || s.front() == '_' ||
                          s.front() == '$' || s.front() == '"' || s.front() == '\'');
}

/// Joins tokens so that re-lexing yields the same token sequence.
std::string join_tokens(const std::vector<Token>& toks, std::size_t from, std::size_t to)
{
    std::string out;
    for (std::size_t i = from; i < to; ++i) {
        const auto& t = toks[i].text;
        if (!out.empty() && ident_like(t) && (ident_like(std::string(1, out.back())) || out.back() == '"'))
            out += ' ';
        else if (!out.empty() && !ident_like(t) && !ident_like(std::string(1, out.back())))
            out += ' ';
        out += t;
    }
    return out;
}

struct SyntaxError
{
    Span span;
    std::string message;
};

class Parser
{
public:
    Parser(std::vector<Token> tokens, SourceUnit& unit, const ParseOptions& options)
        : toks_(std::move(tokens)), unit_(unit), options_(options)
    {}

    void parse_unit()
    {
        check_brace_balance();
        while (!at_eof()) {
            options_.deadline.check();
            std::size_t before = pos_;
            try {
                parse_top_level();
            } catch (const SyntaxError& e) {
                error(e.span, e.message);
                recover_member();
            }
            if (pos_ == before)
                ++pos_;
        }
        if (implicit_)
            unit_.contracts.push_back(std::move(*implicit_));
    }

private:
    std::vector<Token> toks_;
    SourceUnit& unit_;
    const ParseOptions& options_;
    std::size_t pos_ = 0;
    int depth_ = 0;
    std::optional<ContractDef> implicit_;
    std::set<std::string> contract_names_;

    // -- token helpers -----------------------------------------------------

    const Token& peek(std::size_t ahead = 0) const
    {
        std::size_t i = std::min(pos_ + ahead, toks_.size() - 1);
        return toks_[i];
    }
    bool at_eof() const { return peek().kind == TokenKind::end_of_file; }
    bool at(std::string_view t, std::size_t ahead = 0) const { return peek(ahead).is(t); }
    bool at_ident(std::size_t ahead = 0) const { return peek(ahead).kind == TokenKind::identifier; }

    const Token& take()
    {
        const Token& t = peek();
        if (!at_eof())
            ++pos_;
        return t;
    }

    bool accept(std::string_view t)
    {
        if (at(t)) {
            ++pos_;
            return true;
        }
        return false;
    }

    const Token& expect(std::string_view t)
    {
        if (!at(t))
            throw SyntaxError{peek().span, "expected '" + std::string(t) + "' but found '" + peek().text + "'"};
        return take();
    }

    const Token& expect_ident()
    {
        if (!at_ident())
            throw SyntaxError{peek().span, "expected identifier but found '" + peek().text + "'"};
        return take();
    }

    Span prev_span() const { return toks_[pos_ == 0 ? 0 : pos_ - 1].span; }
    Span span_from(const Span& start) const { return join(start, prev_span()); }

    void error(Span span, std::string msg, Severity sev = Severity::error)
    {
        unit_.diagnostics.push_back(Diagnostic{span, sev, std::move(msg)});
    }

    struct DepthGuard
    {
        Parser& p;
        explicit DepthGuard(Parser& parser) : p(parser)
        {
            if (++p.depth_ > p.options_.max_depth) {
                throw InputError(InputErrorKind::fatal_syntax, p.peek().span, "nesting too deep");
            }
        }
        ~DepthGuard() { --p.depth_; }
        DepthGuard(const DepthGuard&) = delete;
        DepthGuard& operator=(const DepthGuard&) = delete;
    };

    void check_brace_balance() const
    {
        std::vector<const Token*> open;
        for (const auto& t : toks_) {
            if (t.kind != TokenKind::punct)
                continue;
            if (t.text == "{") {
                open.push_back(&t);
            } else if (t.text == "}") {
                if (open.empty())
                    throw InputError(InputErrorKind::fatal_syntax, t.span, "unmatched '}'");
                open.pop_back();
            }
        }
        if (!open.empty())
            throw InputError(InputErrorKind::fatal_syntax, open.back()->span, "unclosed '{'");
    }

    /// Index of the token closing the bracket at `i`.
    std::size_t matching(std::size_t i) const
    {
        const std::string& o = toks_[i].text;
        std::string c = o == "(" ? ")" : o == "[" ? "]" : "}";
        int d = 0;
        for (std::size_t k = i; k < toks_.size(); ++k) {
            if (toks_[k].kind != TokenKind::punct)
                continue;
            if (toks_[k].text == o)
                ++d;
            else if (toks_[k].text == c && --d == 0)
                return k;
        }
        return toks_.size() - 1;
    }

    void skip_balanced()
    {
        std::size_t end = matching(pos_);
        pos_ = std::min(end + 1, toks_.size() - 1);
    }

    /// Skips to just after the next `;` or balanced `{...}` at depth zero,
    /// stopping before an unmatched `}`.
    void recover_statement()
    {
        int d = 0;
        while (!at_eof()) {
            const Token& t = peek();
            if (t.kind == TokenKind::punct) {
                if (t.text == "(" || t.text == "[") {
                    ++d;
                } else if (t.text == ")" || t.text == "]") {
                    d = std::max(0, d - 1);
                } else if (t.text == "{") {
                    skip_balanced();
                    if (d == 0)
                        return;
                    continue;
                } else if (t.text == "}") {
                    return;
                } else if (t.text == ";" && d == 0) {
                    ++pos_;
                    return;
                }
            }
            ++pos_;
        }
    }

    void recover_member() { recover_statement(); }

    // -- top level ----------------------------------------------------------

    ContractDef& implicit_contract()
    {
        if (!implicit_) {
            implicit_.emplace();
            implicit_->name = std::string(kImplicitContractName);
            implicit_->is_implicit = true;
            implicit_->span = peek().span;
        }
        return *implicit_;
    }

    void parse_top_level()
    {
        if (accept(";"))
            return;
        if (at("pragma")) {
            take();
            std::size_t from = pos_;
            while (!at_eof() && !at(";"))
                ++pos_;
            if (from < pos_ && toks_[from].text == "solidity" && !unit_.pragma)
                unit_.pragma = join_tokens(toks_, from + 1, pos_);
            expect(";");
            return;
        }
        if (at("import")) {
            while (!at_eof() && !at(";"))
                ++pos_;
            expect(";");
            return;
        }
        if (at("contract") || at("interface") || at("library") || (at("abstract") && at("contract", 1))) {
            parse_contract();
            return;
        }
        if (at("...")) {
            error(take().span, "elided code skipped", Severity::note);
            return;
        }
        // Free-standing members: free functions (0.7+) and loose snippets.
        parse_member(implicit_contract());
    }

    void parse_contract()
    {
        Span start = peek().span;
        ContractDef c;
        if (accept("abstract"))
            c.is_abstract = true;
        const Token& kw = take();
        c.kind = kw.text == "interface" ? ContractKind::interface
                 : kw.text == "library" ? ContractKind::library
                                        : ContractKind::contract;
        Span name_span = peek().span;
        c.name = expect_ident().text;
        if (accept("is")) {
            do {
                std::string base = expect_ident().text;
                while (accept("."))
                    base = expect_ident().text;
                c.bases.push_back(base);
                if (at("("))
                    skip_balanced();
            } while (accept(","));
        }
        expect("{");
        while (!at_eof() && !at("}")) {
            options_.deadline.check();
            std::size_t before = pos_;
            try {
                parse_member(c);
            } catch (const SyntaxError& e) {
                error(e.span, e.message);
                recover_member();
            }
            if (pos_ == before)
                ++pos_;
        }
        expect("}");
        c.span = span_from(start);

        if (!contract_names_.insert(c.name).second) {
            error(name_span, "duplicate contract name '" + c.name + "'; keeping the first definition");
            return;
        }
        // Pre-0.5 constructors are functions named after the contract.
        for (auto& f : c.functions) {
            if (!f.is_constructor && !f.name.empty() && f.name == c.name) {
                f.is_constructor = true;
            }
        }
        int ctor_count = 0;
        for (auto& f : c.functions) {
            if (f.is_constructor && ++ctor_count > 1)
                error(f.header_span, "more than one constructor in '" + c.name + "'");
        }
        if (ctor_count > 1) {
            bool seen = false;
            std::erase_if(c.functions, [&](const FunctionDef& f) {
                if (!f.is_constructor)
                    return false;
                if (!seen) {
                    seen = true;
                    return false;
                }
                return true;
            });
        }
        unit_.contracts.push_back(std::move(c));
    }

    void parse_member(ContractDef& c)
    {
        if (accept(";"))
            return;
        if (at("...")) {
            error(take().span, "elided code skipped", Severity::note);
            return;
        }
        if (at("function") || at("constructor") || at("fallback") || at("receive")) {
            // `fallback`/`receive` are plain identifiers before 0.6; a state
            // variable of that name would be declared with a type first.
            if ((at("fallback") || at("receive")) && !at("(", 1)) {
                parse_state_var(c);
                return;
            }
            c.functions.push_back(parse_function(c.name));
            return;
        }
        if (at("modifier")) {
            c.modifiers.push_back(parse_modifier());
            return;
        }
        if (at("event") || at("error")) {
            if (at_ident(1) && at("(", 2)) {
                c.events.push_back(peek(1).text);
                while (!at_eof() && !at(";"))
                    ++pos_;
                expect(";");
                return;
            }
        }
        if (at("struct") || at("enum")) {
            pos_ += 2;
            if (!at("{"))
                throw SyntaxError{peek().span, "expected '{' after struct/enum name"};
            skip_balanced();
            return;
        }
        if (at("using")) {
            take();
            UsingDirective u;
            if (at("{")) {
                skip_balanced();
                u.library = "{}";
            } else {
                u.library = expect_ident().text;
                while (accept("."))
                    u.library = expect_ident().text;
            }
            expect("for");
            std::size_t from = pos_;
            while (!at_eof() && !at(";"))
                ++pos_;
            u.target_type = join_tokens(toks_, from, pos_);
            if (u.target_type.ends_with(" global"))
                u.target_type.resize(u.target_type.size() - 7);
            expect(";");
            c.usings.push_back(std::move(u));
            return;
        }
        if (at("type") && at_ident(1) && at("is", 2)) {
            while (!at_eof() && !at(";"))
                ++pos_;
            expect(";");
            return;
        }
        parse_state_var(c);
    }

    // -- types ----------------------------------------------------------------

    /// Parses a type name; returns its normalized text. Throws SyntaxError if
    /// the tokens do not form a type.
    std::string parse_type_name()
    {
        std::size_t from = pos_;
        if (at("mapping")) {
            take();
            expect("(");
            parse_type_name();
            if (at_ident() && !at("=>"))
                take();
            expect("=>");
            parse_type_name();
            if (at_ident())
                take();
            expect(")");
        } else if (at("function") && at("(", 1)) {
            take();
            skip_balanced();
            while (at_ident() && (at("internal") || at("external") || at("view") || at("pure") ||
                                  at("payable") || at("constant")))
                take();
            if (accept("returns")) {
                if (!at("("))
                    throw SyntaxError{peek().span, "expected '(' after returns"};
                skip_balanced();
            }
        } else {
            if (!at_ident() || is_reserved_statement_word(peek().text))
                throw SyntaxError{peek().span, "expected type name"};
            std::string first = take().text;
            if (first == "address" && at("payable"))
                take();
            while (at(".") && at_ident(1)) {
                take();
                take();
            }
        }
        while (at("[")) {
            std::size_t close = matching(pos_);
            pos_ = close + 1;
        }
        return join_tokens(toks_, from, pos_);
    }

    VarDecl parse_param()
    {
        VarDecl v;
        Span start = peek().span;
        v.type_name = parse_type_name();
        while (at_ident() && (is_location(peek().text) || at("indexed") || at("payable"))) {
            if (is_location(peek().text))
                v.location = peek().text;
            take();
        }
        if (at_ident() && !is_reserved_statement_word(peek().text))
            v.name = take().text;
        v.span = span_from(start);
        return v;
    }

    std::vector<VarDecl> parse_param_list()
    {
        std::vector<VarDecl> out;
        expect("(");
        if (at("...")) {
            error(take().span, "elided parameter list", Severity::note);
            expect(")");
            return out;
        }
        if (accept(")"))
            return out;
        do {
            out.push_back(parse_param());
        } while (accept(","));
        expect(")");
        return out;
    }

    // -- declarations ---------------------------------------------------------

    void parse_state_var(ContractDef& c)
    {
        StateVarDef v;
        Span start = peek().span;
        v.type_name = parse_type_name();
        while (at_ident()) {
            const std::string& w = peek().text;
            if (w == "public") {
                v.visibility = Visibility::public_;
            } else if (w == "private") {
                v.visibility = Visibility::private_;
            } else if (w == "internal") {
                v.visibility = Visibility::internal;
            } else if (w == "constant" || w == "immutable") {
                v.is_constant_or_immutable = true;
            } else if (w == "override") {
                take();
                if (at("("))
                    skip_balanced();
                continue;
            } else if (w != "transient") {
                break;
            }
            take();
        }
        v.name = expect_ident().text;
        if (accept("="))
            v.initializer = parse_expression();
        expect(";");
        v.span = span_from(start);
        c.state_vars.push_back(std::move(v));
    }

    ModifierDef parse_modifier()
    {
        ModifierDef m;
        Span start = take().span;
        m.name = expect_ident().text;
        if (at("("))
            m.params = parse_param_list();
        while (at("virtual") || at("override")) {
            take();
            if (at("("))
                skip_balanced();
        }
        if (!accept(";"))
            m.body = parse_block();
        m.span = span_from(start);
        return m;
    }

    FunctionDef parse_function(const std::string& contract_name)
    {
        FunctionDef f;
        Span start = peek().span;
        const Token& kw = take();
        if (kw.text == "constructor") {
            f.is_constructor = true;
        } else if (kw.text == "fallback") {
            f.is_fallback = true;
            f.visibility = Visibility::external;
        } else if (kw.text == "receive") {
            f.is_receive = true;
            f.visibility = Visibility::external;
        } else if (at_ident()) {
            f.name = take().text;
        } else {
            f.is_fallback = true; // pre-0.6 unnamed function
        }
        f.params = parse_param_list();
        bool explicit_visibility = false;
        while (!at_eof() && !at("{") && !at(";")) {
            if (at("returns")) {
                take();
                f.returns = parse_param_list();
                continue;
            }
            const Token& t = peek();
            if (!at_ident())
                throw SyntaxError{t.span, "unexpected '" + t.text + "' in function header"};
            auto vis = std::find(kVisibilities.begin(), kVisibilities.end(), t.text);
            if (vis != kVisibilities.end()) {
                f.visibility = static_cast<Visibility>(vis - kVisibilities.begin());
                explicit_visibility = true;
                take();
            } else if (t.text == "view" || t.text == "constant") {
                f.mutability = Mutability::view;
                take();
            } else if (t.text == "pure") {
                f.mutability = Mutability::pure;
                take();
            } else if (t.text == "payable") {
                f.mutability = Mutability::payable;
                take();
            } else if (t.text == "virtual") {
                take();
            } else if (t.text == "override") {
                take();
                if (at("("))
                    skip_balanced();
            } else {
                ModifierInvocation inv;
                Span ms = t.span;
                inv.name = take().text;
                while (accept("."))
                    inv.name = expect_ident().text;
                if (at("(")) {
                    inv.has_parens = true;
                    inv.args = parse_call_args(nullptr).first;
                }
                inv.span = span_from(ms);
                f.modifiers_invoked.push_back(std::move(inv));
            }
        }
        f.header_span = span_from(start);
        if (!explicit_visibility && f.is_constructor)
            f.visibility = Visibility::public_;
        if (!accept(";"))
            f.body = parse_block();
        f.span = span_from(start);
        (void)contract_name;
        return f;
    }

    // -- statements -------------------------------------------------------------

    StmtPtr parse_block()
    {
        DepthGuard guard(*this);
        auto s = std::make_shared<Stmt>();
        s->kind = StmtKind::block;
        Span start = expect("{").span;
        while (!at_eof() && !at("}")) {
            options_.deadline.check();
            std::size_t before = pos_;
            try {
                s->children.push_back(parse_statement());
            } catch (const SyntaxError& e) {
                error(e.span, e.message);
                pos_ = before;
                s->children.push_back(opaque_statement("unparsed"));
            }
            if (pos_ == before)
                ++pos_;
        }
        expect("}");
        s->span = span_from(start);
        return s;
    }

    /// Skips one statement and stands in an opaque node for it.
    StmtPtr opaque_statement(std::string what)
    {
        auto s = std::make_shared<Stmt>();
        s->kind = StmtKind::opaque;
        Span start = peek().span;
        std::size_t from = pos_;
        recover_statement();
        if (pos_ == from && !at_eof() && !at("}"))
            ++pos_;
        s->span = span_from(start);
        s->text = what + ":" + join_tokens(toks_, from, pos_);
        return s;
    }

    StmtPtr elided()
    {
        auto s = std::make_shared<Stmt>();
        s->kind = StmtKind::block;
        s->text = "...";
        s->span = take().span;
        error(s->span, "elided code skipped", Severity::note);
        accept(";");
        return s;
    }

    std::shared_ptr<Stmt> simple(StmtKind kind, Span start)
    {
        auto s = std::make_shared<Stmt>();
        s->kind = kind;
        s->span = start;
        return s;
    }

    StmtPtr parse_statement()
    {
        DepthGuard guard(*this);
        Span start = peek().span;
        if (at("{"))
            return parse_block();
        if (at("..."))
            return elided();
        if (at("unchecked") && at("{", 1)) {
            take();
            auto inner = parse_block();
            auto s = std::make_shared<Stmt>(*inner);
            s->text = "unchecked";
            s->span = span_from(start);
            return s;
        }
        if (at("if")) {
            take();
            auto s = std::make_shared<Stmt>();
            s->kind = StmtKind::if_stmt;
            expect("(");
            s->expr = parse_expression();
            expect(")");
            s->children.push_back(parse_statement());
            if (accept("else"))
                s->children.push_back(parse_statement());
            s->span = span_from(start);
            return s;
        }
        if (at("while")) {
            take();
            auto s = std::make_shared<Stmt>();
            s->kind = StmtKind::loop;
            s->loop_kind = LoopKind::while_loop;
            expect("(");
            s->expr = parse_expression();
            expect(")");
            s->children.push_back(parse_statement());
            s->span = span_from(start);
            return s;
        }
        if (at("do")) {
            take();
            auto s = std::make_shared<Stmt>();
            s->kind = StmtKind::loop;
            s->loop_kind = LoopKind::do_while;
            s->children.push_back(parse_statement());
            expect("while");
            expect("(");
            s->expr = parse_expression();
            expect(")");
            expect(";");
            s->span = span_from(start);
            return s;
        }
        if (at("for")) {
            take();
            auto s = std::make_shared<Stmt>();
            s->kind = StmtKind::loop;
            s->loop_kind = LoopKind::for_loop;
            expect("(");
            if (!accept(";"))
                s->init = parse_simple_statement();
            if (!at(";"))
                s->expr = parse_expression();
            expect(";");
            if (!at(")"))
                s->step = parse_expression();
            expect(")");
            s->children.push_back(parse_statement());
            s->span = span_from(start);
            return s;
        }
        if (at("return")) {
            take();
            auto s = simple(StmtKind::return_stmt, start);
            if (!at(";"))
                s->expr = parse_expression();
            expect(";");
            s->span = span_from(start);
            return s;
        }
        if (at("throw") && at(";", 1)) {
            take();
            take();
            auto s = simple(StmtKind::revert, span_from(start));
            s->text = "throw";
            return s;
        }
        if (at("break") && at(";", 1)) {
            pos_ += 2;
            return simple(StmtKind::break_stmt, span_from(start));
        }
        if (at("continue") && at(";", 1)) {
            pos_ += 2;
            return simple(StmtKind::continue_stmt, span_from(start));
        }
        if (at("_") && at(";", 1)) {
            pos_ += 2;
            return simple(StmtKind::placeholder, span_from(start));
        }
        if (at("emit")) {
            take();
            auto s = simple(StmtKind::emit, start);
            s->expr = parse_expression();
            expect(";");
            s->span = span_from(start);
            return s;
        }
        if (at("revert") && at_ident(1)) {
            // revert CustomError(...);
            take();
            auto s = simple(StmtKind::revert, start);
            s->text = "revert_error";
            s->expr = parse_expression();
            expect(";");
            s->span = span_from(start);
            return s;
        }
        if (at("assembly")) {
            take();
            auto s = simple(StmtKind::opaque, start);
            std::size_t from = pos_ - 1;
            if (peek().kind == TokenKind::string)
                take();
            if (at("("))
                skip_balanced();
            if (!at("{"))
                throw SyntaxError{peek().span, "expected '{' after assembly"};
            skip_balanced();
            s->text = "assembly:" + join_tokens(toks_, from, pos_);
            s->span = span_from(start);
            error(s->span, "inline assembly treated as opaque state write", Severity::warning);
            return s;
        }
        if (at("try")) {
            return parse_try();
        }
        auto s = parse_simple_statement();
        return s;
    }

    StmtPtr parse_try()
    {
        Span start = take().span;
        auto s = std::make_shared<Stmt>();
        s->kind = StmtKind::try_stmt;
        s->expr = parse_expression();
        std::size_t from = pos_;
        if (accept("returns")) {
            if (!at("("))
                throw SyntaxError{peek().span, "expected '(' after returns"};
            skip_balanced();
        }
        s->clause_headers.push_back(join_tokens(toks_, from, pos_));
        s->children.push_back(parse_block());
        while (at("catch")) {
            from = pos_;
            take();
            if (at_ident())
                take();
            if (at("("))
                skip_balanced();
            s->clause_headers.push_back(join_tokens(toks_, from, pos_));
            s->children.push_back(parse_block());
        }
        s->span = span_from(start);
        return s;
    }

    /// Declaration, expression statement, require/revert. Consumes the `;`.
    StmtPtr parse_simple_statement()
    {
        Span start = peek().span;
        if (auto decl = try_local_decl())
            return decl;

        ExprPtr e = parse_expression();
        expect(";");
        auto s = std::make_shared<Stmt>();
        s->span = span_from(start);
        s->expr = e;
        if (e->kind == ExprKind::assign) {
            s->kind = StmtKind::assignment;
            s->compound = e->text != "=";
        } else if (e->kind == ExprKind::call && e->paren_depth == 0 && e->lhs->kind == ExprKind::identifier &&
                   (e->lhs->text == "require" || e->lhs->text == "assert") && !e->args.empty()) {
            s->kind = StmtKind::require;
            s->text = e->lhs->text;
            s->expr = e->args.front();
            s->args.assign(e->args.begin() + 1, e->args.end());
        } else if (e->kind == ExprKind::call && e->paren_depth == 0 && e->lhs->kind == ExprKind::identifier &&
                   e->lhs->text == "revert") {
            s->kind = StmtKind::revert;
            s->text = "revert";
            s->args = e->args;
        } else {
            s->kind = StmtKind::expr_stmt;
        }
        return s;
    }

    StmtPtr try_local_decl()
    {
        std::size_t saved = pos_;
        Span start = peek().span;
        auto fail = [&]() -> StmtPtr {
            pos_ = saved;
            return nullptr;
        };

        if (at("(")) {
            // (T a, , T b) = expr;
            std::size_t close = matching(pos_);
            if (!toks_[close + 1].is("="))
                return nullptr;
            take();
            auto s = std::make_shared<Stmt>();
            s->kind = StmtKind::local_decl;
            s->tuple_decl = true;
            bool any_typed = false;
            while (!at(")")) {
                if (at(",")) {
                    take();
                    s->vars.push_back(VarDecl{});
                    continue;
                }
                try {
                    VarDecl v = parse_param();
                    if (v.name.empty())
                        return fail();
                    any_typed = true;
                    s->vars.push_back(std::move(v));
                } catch (const SyntaxError&) {
                    return fail();
                }
                if (!at(")") && !accept(","))
                    return fail();
                if (at(")") && toks_[pos_ - 1].is(","))
                    s->vars.push_back(VarDecl{});
            }
            if (!any_typed)
                return fail();
            expect(")");
            expect("=");
            s->expr = parse_expression();
            expect(";");
            s->span = span_from(start);
            return s;
        }

        if (at("var")) {
            take();
            auto s = std::make_shared<Stmt>();
            s->kind = StmtKind::local_decl;
            s->text = "var";
            if (at("(")) {
                s->tuple_decl = true;
                take();
                while (!at(")")) {
                    VarDecl v;
                    v.type_name = "var";
                    if (at_ident()) {
                        v.span = peek().span;
                        v.name = take().text;
                    }
                    s->vars.push_back(std::move(v));
                    if (!accept(","))
                        break;
                }
                expect(")");
            } else {
                VarDecl v;
                v.type_name = "var";
                v.span = peek().span;
                v.name = expect_ident().text;
                s->vars.push_back(std::move(v));
            }
            if (accept("="))
                s->expr = parse_expression();
            expect(";");
            s->span = span_from(start);
            return s;
        }

        if (!at_ident() || is_reserved_statement_word(peek().text))
            return nullptr;
        VarDecl v;
        try {
            v.type_name = parse_type_name();
        } catch (const SyntaxError&) {
            return fail();
        }
        while (at_ident() && is_location(peek().text)) {
            v.location = take().text;
        }
        if (!at_ident() || is_reserved_statement_word(peek().text))
            return fail();
        v.name = take().text;
        v.span = span_from(start);
        if (!at("=") && !at(";"))
            return fail();
        auto s = std::make_shared<Stmt>();
        s->kind = StmtKind::local_decl;
        s->vars.push_back(std::move(v));
        if (accept("="))
            s->expr = parse_expression();
        expect(";");
        s->span = span_from(start);
        return s;
    }

    // -- expressions ------------------------------------------------------------

    static std::shared_ptr<Expr> make(ExprKind kind, Span span)
    {
        auto e = std::make_shared<Expr>();
        e->kind = kind;
        e->span = span;
        return e;
    }

    ExprPtr parse_expression()
    {
        DepthGuard guard(*this);
        return parse_assignment();
    }

    ExprPtr parse_assignment()
    {
        ExprPtr lhs = parse_conditional();
        static const std::set<std::string_view> ops = {"=",  "+=", "-=",  "*=",  "/=",  "%=",
                                                       "|=", "&=", "^=", "<<=", ">>=", ">>>="};
        if (peek().kind == TokenKind::punct && ops.count(peek().text) != 0) {
            std::string op = take().text;
            ExprPtr rhs = parse_assignment();
            auto e = make(ExprKind::assign, join(lhs->span, rhs->span));
            e->text = op;
            e->lhs = lhs;
            e->rhs = rhs;
            return e;
        }
        return lhs;
    }

    ExprPtr parse_conditional()
    {
        ExprPtr cond = parse_binary(0);
        if (at("?")) {
            take();
            ExprPtr a = parse_assignment();
            expect(":");
            ExprPtr b = parse_assignment();
            auto e = make(ExprKind::conditional, join(cond->span, b->span));
            e->args = {cond, a, b};
            return e;
        }
        return cond;
    }

    static int precedence(const Token& t)
    {
        if (t.kind != TokenKind::punct)
            return -1;
        static const std::vector<std::pair<std::vector<std::string_view>, int>> table = {
            {{"||"}, 1},        {{"&&"}, 2},           {{"==", "!="}, 3},  {{"<", ">", "<=", ">="}, 4},
            {{"|"}, 5},         {{"^"}, 6},            {{"&"}, 7},         {{"<<", ">>", ">>>"}, 8},
            {{"+", "-"}, 9},    {{"*", "/", "%"}, 10}, {{"**"}, 11},
        };
        for (const auto& [ops, p] : table) {
            if (std::find(ops.begin(), ops.end(), t.text) != ops.end())
                return p;
        }
        return -1;
    }

    ExprPtr parse_binary(int min_prec)
    {
        ExprPtr lhs = parse_unary();
        while (true) {
            int p = precedence(peek());
            if (p < 0 || p < min_prec)
                return lhs;
            std::string op = take().text;
            // `**` is right-associative.
            ExprPtr rhs = parse_binary(op == "**" ? p : p + 1);
            auto e = make(ExprKind::binary, join(lhs->span, rhs->span));
            e->text = op;
            e->lhs = lhs;
            e->rhs = rhs;
            lhs = e;
        }
    }

    ExprPtr parse_unary()
    {
        DepthGuard guard(*this);
        const Token& t = peek();
        if ((t.kind == TokenKind::punct && (t.text == "!" || t.text == "~" || t.text == "-" || t.text == "+" ||
                                            t.text == "++" || t.text == "--")) ||
            t.is("delete")) {
            Span start = t.span;
            std::string op = take().text;
            ExprPtr operand = parse_unary();
            auto e = make(ExprKind::unary, join(start, operand->span));
            e->text = op;
            e->lhs = operand;
            return e;
        }
        return parse_postfix(parse_primary());
    }

    std::pair<std::vector<ExprPtr>, std::vector<std::string>> parse_call_args(Span* end)
    {
        std::vector<ExprPtr> args;
        std::vector<std::string> names;
        expect("(");
        if (at("{")) {
            take();
            while (!at("}")) {
                names.push_back(expect_ident().text);
                expect(":");
                args.push_back(parse_expression());
                if (!accept(","))
                    break;
            }
            expect("}");
        } else if (!at(")")) {
            do {
                args.push_back(parse_expression());
            } while (accept(","));
        }
        const Token& close = expect(")");
        if (end)
            *end = close.span;
        return {std::move(args), std::move(names)};
    }

    struct PendingOptions
    {
        ExprPtr value;
        ExprPtr gas;
        std::vector<std::string> order;
        OptionStyle style = OptionStyle::none;
    };

    /// True when a `(`...`)` starting at `i` is followed by a call or another
    /// legacy option, meaning `.value(v)` / `.gas(g)` configure the next call.
    bool legacy_option_follows(std::size_t open) const
    {
        std::size_t close = matching(open);
        const Token& n = toks_[std::min(close + 1, toks_.size() - 1)];
        if (n.is("("))
            return true;
        if (n.is(".") && close + 3 < toks_.size()) {
            const Token& m = toks_[close + 2];
            return (m.is("value") || m.is("gas")) && toks_[close + 3].is("(") && legacy_option_follows(close + 3);
        }
        return false;
    }

    ExprPtr parse_postfix(ExprPtr e)
    {
        PendingOptions pending;
        while (true) {
            if (at(".")) {
                if ((at("value", 1) || at("gas", 1)) && at("(", 2) && legacy_option_follows(pos_ + 2)) {
                    take();
                    std::string which = take().text;
                    expect("(");
                    ExprPtr v = parse_expression();
                    expect(")");
                    (which == "value" ? pending.value : pending.gas) = v;
                    pending.order.push_back(which);
                    pending.style = OptionStyle::legacy_member;
                    continue;
                }
                take();
                const Token& name = peek();
                if (!at_ident())
                    throw SyntaxError{name.span, "expected member name after '.'"};
                take();
                if (e->kind == ExprKind::identifier && e->text == "msg" && e->paren_depth == 0 &&
                    (name.text == "sender" || name.text == "value")) {
                    auto m = make(name.text == "sender" ? ExprKind::msg_sender : ExprKind::msg_value,
                                  join(e->span, name.span));
                    e = m;
                    continue;
                }
                auto m = make(ExprKind::member_access, join(e->span, name.span));
                m->lhs = e;
                m->text = name.text;
                e = m;
                continue;
            }
            if (at("[")) {
                take();
                auto ix = make(ExprKind::index_access, e->span);
                ix->lhs = e;
                if (!at("]")) {
                    if (at(":")) {
                        ix->rhs = slice_index();
                    } else {
                        ExprPtr idx = parse_expression();
                        if (at(":")) {
                            ix->rhs = slice_index(idx);
                        } else {
                            ix->rhs = idx;
                        }
                    }
                }
                const Token& close = expect("]");
                ix->span = join(e->span, close.span);
                e = ix;
                continue;
            }
            if (at("{") && at_ident(1) && at(":", 2)) {
                take();
                while (!at("}")) {
                    std::string name = expect_ident().text;
                    expect(":");
                    ExprPtr v = parse_expression();
                    if (name == "value")
                        pending.value = v;
                    else if (name == "gas")
                        pending.gas = v;
                    pending.order.push_back(name);
                    if (name != "value" && name != "gas")
                        pending.order.back() = name + "=" + to_source(*v);
                    if (!accept(","))
                        break;
                }
                expect("}");
                pending.style = OptionStyle::braces;
                if (!at("("))
                    throw SyntaxError{peek().span, "expected '(' after call options"};
                continue;
            }
            if (at("(")) {
                Span end;
                auto [args, names] = parse_call_args(&end);
                auto c = make(ExprKind::call, join(e->span, end));
                c->lhs = e;
                c->args = std::move(args);
                c->arg_names = std::move(names);
                c->value_option = pending.value;
                c->gas_option = pending.gas;
                c->option_order = pending.order;
                c->option_style = pending.style;
                pending = PendingOptions{};
                e = c;
                continue;
            }
            if (peek().kind == TokenKind::punct && (at("++") || at("--"))) {
                const Token& op = take();
                auto u = make(ExprKind::unary, join(e->span, op.span));
                u->text = op.text;
                u->lhs = e;
                u->postfix = true;
                e = u;
                continue;
            }
            return e;
        }
    }

    ExprPtr slice_index(ExprPtr from = nullptr)
    {
        Span start = from ? from->span : peek().span;
        std::size_t begin = pos_;
        expect(":");
        if (!at("]"))
            parse_expression();
        auto o = make(ExprKind::opaque, span_from(start));
        o->text = (from ? to_source(*from) : std::string()) + join_tokens(toks_, begin, pos_);
        return o;
    }

    ExprPtr parse_primary()
    {
        const Token& t = peek();
        Span start = t.span;
        switch (t.kind) {
            case TokenKind::number: {
                take();
                auto e = make(ExprKind::literal, start);
                e->text = t.text;
                e->literal = (t.text.size() == 42 && (t.text[1] == 'x' || t.text[1] == 'X')) ? LiteralKind::address
                                                                                                : LiteralKind::number;
                if (at_ident() && std::find(kUnits.begin(), kUnits.end(), peek().text) != kUnits.end()) {
                    e->text += " " + take().text;
                    e->span = span_from(start);
                }
                return e;
            }
            case TokenKind::string: {
                take();
                auto e = make(ExprKind::literal, start);
                e->literal = LiteralKind::string;
                e->text = t.text;
                while (peek().kind == TokenKind::string) {
                    e->text += " " + take().text;
                    e->span = span_from(start);
                }
                return e;
            }
            case TokenKind::hex_string: {
                take();
                auto e = make(ExprKind::literal, start);
                e->literal = LiteralKind::hex_string;
                e->text = t.text;
                return e;
            }
            case TokenKind::end_of_file:
                throw SyntaxError{t.span, "unexpected end of input"};
            case TokenKind::punct:
                break;
            case TokenKind::identifier:
                return parse_identifier_primary();
        }

        if (at("(")) {
            take();
            std::vector<ExprPtr> parts;
            bool tuple = false;
            while (!at(")")) {
                if (at(",")) {
                    take();
                    parts.push_back(nullptr);
                    tuple = true;
                    if (at(")"))
                        parts.push_back(nullptr);
                    continue;
                }
                parts.push_back(parse_expression());
                if (accept(",")) {
                    tuple = true;
                    if (at(")"))
                        parts.push_back(nullptr);
                } else {
                    break;
                }
            }
            const Token& close = expect(")");
            if (!tuple && parts.size() == 1) {
                auto inner = std::make_shared<Expr>(*parts.front());
                inner->paren_depth += 1;
                inner->span = join(start, close.span);
                return inner;
            }
            auto e = make(ExprKind::tuple, join(start, close.span));
            e->args = std::move(parts);
            return e;
        }
        if (at("[")) {
            take();
            auto e = make(ExprKind::tuple, start);
            e->text = "[";
            while (!at("]")) {
                e->args.push_back(parse_expression());
                if (!accept(","))
                    break;
            }
            e->span = join(start, expect("]").span);
            return e;
        }
        throw SyntaxError{t.span, "unexpected '" + t.text + "' in expression"};
    }

    ExprPtr parse_identifier_primary()
    {
        const Token& t = peek();
        Span start = t.span;
        if (t.text == "true" || t.text == "false") {
            take();
            auto e = make(ExprKind::literal, start);
            e->literal = LiteralKind::boolean;
            e->text = t.text;
            return e;
        }
        if (t.text == "this") {
            take();
            auto e = make(ExprKind::this_ref, start);
            e->text = "this";
            return e;
        }
        if (t.text == "new") {
            take();
            std::string type = parse_type_name();
            auto e = make(ExprKind::new_expr, span_from(start));
            e->text = type;
            return e;
        }
        if (t.text == "payable" && at("(", 1)) {
            take();
            auto e = make(ExprKind::elementary_type, start);
            e->text = "payable";
            return e;
        }
        if (is_elementary_type(t.text) && t.text != "var") {
            std::size_t saved = pos_;
            std::string type = parse_type_name();
            if (at("(")) {
                auto e = make(ExprKind::elementary_type, span_from(start));
                e->text = type;
                return e;
            }
            if (at(")") || at(",") || at(".") || at(";")) {
                auto e = make(ExprKind::elementary_type, span_from(start));
                e->text = type;
                return e;
            }
            pos_ = saved;
        }
        if (is_reserved_statement_word(t.text) && t.text != "payable")
            throw SyntaxError{t.span, "unexpected keyword '" + t.text + "' in expression"};
        take();
        auto e = make(ExprKind::identifier, start);
        e->text = t.text;
        return e;
    }
};

} // namespace

SourceUnit parse_source(std::string_view text, std::string path, const ParseOptions& options)
{
    if (text.size() > options.max_bytes) {
        throw InputError(InputErrorKind::unreadable_input, Span{1, 1, 0, 0},
                         "input exceeds size limit of " + std::to_string(options.max_bytes) + " bytes");
    }
    if (auto bad = find_invalid_utf8(text); bad != std::string_view::npos) {
        throw InputError(InputErrorKind::unreadable_input, Span{0, 0, static_cast<std::uint32_t>(bad), 1},
                         "input is not valid UTF-8 (byte offset " + std::to_string(bad) + ")");
    }
    SourceUnit unit;
    unit.path = std::move(path);
    unit.source_size = text.size();
    Parser parser(tokenize(text), unit, options);
    parser.parse_unit();
    return normalize_call_forms(std::move(unit));
}

} // namespace rtriage
