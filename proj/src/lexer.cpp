#include "rtriage/lexer.hpp"

#include <cctype>

namespace rtriage {

namespace {

bool is_ident_start(char c)
{
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool is_ident_char(char c)
{
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

// Longest first so the greedy match picks e.g. ">>>=" over ">>".
constexpr std::string_view kPunctuators[] = {
    ">>>=", "...", "<<=", ">>=", ">>>", "**=", "==", "!=", "<=", ">=", "&&", "||", "++", "--",
    "+=",   "-=",  "*=",  "/=",  "%=",  "|=",  "&=", "^=", "<<", ">>", "=>", "->", ":=", "**",
    "(",    ")",   "{",   "}",   "[",   "]",   ";",  ",",  ".",  "?",  ":",  "=",  "+",  "-",
    "*",    "/",   "%",   "<",   ">",   "!"};

constexpr std::string_view kSingleExtra[] = {"&", "|", "^", "~"};

class Lexer
{
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    std::vector<Token> run()
    {
        std::vector<Token> out;
        while (true) {
            skip_trivia();
            if (pos_ >= text_.size()) {
                out.push_back(Token{TokenKind::end_of_file, "", here(0)});
                return out;
            }
            out.push_back(next());
        }
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::uint32_t line_ = 1;
    std::uint32_t col_ = 1;

    [[nodiscard]] char peek(std::size_t ahead = 0) const
    {
        return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
    }

    void advance(std::size_t n = 1)
    {
        for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i) {
            if (text_[pos_] == '\n') {
                ++line_;
                col_ = 1;
            } else if ((static_cast<unsigned char>(text_[pos_]) & 0xC0) != 0x80) {
                ++col_;
            }
            ++pos_;
        }
    }

    [[nodiscard]] Span here(std::uint32_t length) const
    {
        return Span{line_, col_, static_cast<std::uint32_t>(pos_), length};
    }

    void skip_trivia()
    {
        while (pos_ < text_.size()) {
            char c = peek();
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == '/' && peek(1) == '/') {
                while (pos_ < text_.size() && peek() != '\n')
                    advance();
            } else if (c == '/' && peek(1) == '*') {
                Span start = here(2);
                advance(2);
                while (pos_ < text_.size() && !(peek() == '*' && peek(1) == '/'))
                    advance();
                if (pos_ >= text_.size())
                    throw InputError(InputErrorKind::fatal_syntax, start, "unterminated block comment");
                advance(2);
            } else {
                return;
            }
        }
    }

    Token finish(TokenKind kind, Span start)
    {
        start.length = static_cast<std::uint32_t>(pos_ - start.offset);
        return Token{kind, std::string(text_.substr(start.offset, start.length)), start};
    }

    Token lex_string(Span start, TokenKind kind)
    {
        char quote = peek();
        advance();
        while (pos_ < text_.size() && peek() != quote) {
            if (peek() == '\n')
                break;
            if (peek() == '\\')
                advance();
            advance();
        }
        if (peek() != quote)
            throw InputError(InputErrorKind::fatal_syntax, start, "unterminated string literal");
        advance();
        return finish(kind, start);
    }

    Token next()
    {
        Span start = here(0);
        char c = peek();

        if (is_ident_start(c)) {
            while (is_ident_char(peek()))
                advance();
            auto word = text_.substr(start.offset, pos_ - start.offset);
            if ((word == "hex" || word == "unicode") && (peek() == '"' || peek() == '\'')) {
                return lex_string(start, word == "hex" ? TokenKind::hex_string : TokenKind::string);
            }
            return finish(TokenKind::identifier, start);
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
            if (c == '0' && (peek(1) == 'x' || peek(1) == 'X')) {
                advance(2);
                while (std::isxdigit(static_cast<unsigned char>(peek())) || peek() == '_')
                    advance();
            } else {
                while (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '.' ||
                       peek() == 'e' || peek() == 'E') {
                    if ((peek() == 'e' || peek() == 'E') && peek(1) == '-')
                        advance();
                    if (peek() == '.' && !std::isdigit(static_cast<unsigned char>(peek(1))))
                        break;
                    advance();
                }
            }
            return finish(TokenKind::number, start);
        }
        if (c == '"' || c == '\'')
            return lex_string(start, TokenKind::string);

        for (auto p : kPunctuators) {
            if (text_.substr(pos_, p.size()) == p) {
                advance(p.size());
                return finish(TokenKind::punct, start);
            }
        }
        for (auto p : kSingleExtra) {
            if (text_.substr(pos_, 1) == p) {
                advance();
                return finish(TokenKind::punct, start);
            }
        }
        // Anything else becomes a one-character punctuator; the parser reports it.
        advance();
        return finish(TokenKind::punct, start);
    }
};

} // namespace

std::vector<Token> tokenize(std::string_view text)
{
    return Lexer(text).run();
}

std::vector<std::string> token_texts(std::string_view text)
{
    std::vector<std::string> out;
    for (auto& t : tokenize(text)) {
        if (t.kind != TokenKind::end_of_file)
            out.push_back(std::move(t.text));
    }
    return out;
}

std::size_t find_invalid_utf8(std::string_view text)
{
    std::size_t i = 0;
    while (i < text.size()) {
        auto c = static_cast<unsigned char>(text[i]);
        std::size_t extra = 0;
        if (c < 0x80) {
            extra = 0;
        } else if ((c & 0xE0) == 0xC0 && c >= 0xC2) {
            extra = 1;
        } else if ((c & 0xF0) == 0xE0) {
            extra = 2;
        } else if ((c & 0xF8) == 0xF0 && c <= 0xF4) {
            extra = 3;
        } else {
            return i;
        }
        if (extra > 0 && i + extra >= text.size())
            return i;
        for (std::size_t k = 1; k <= extra; ++k) {
            if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80)
                return i;
        }
        i += extra + 1;
    }
    return std::string_view::npos;
}

} // namespace rtriage
