#pragma once

#include "rtriage/ast.hpp"

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rtriage {

enum class TokenKind { identifier, number, string, hex_string, punct, end_of_file };

struct Token
{
    TokenKind kind = TokenKind::end_of_file;
    std::string text;
    Span span;

    [[nodiscard]] bool is(std::string_view t) const
    {
        return (kind == TokenKind::punct || kind == TokenKind::identifier) && text == t;
    }
};

enum class InputErrorKind { unreadable_input, fatal_syntax };

/// Unrecoverable input problem. Carries the location where it was detected.
class InputError : public std::runtime_error
{
public:
    InputError(InputErrorKind kind, Span span, const std::string& message)
        : std::runtime_error(message), kind_(kind), span_(span)
    {}

    [[nodiscard]] InputErrorKind kind() const { return kind_; }
    [[nodiscard]] const Span& span() const { return span_; }

private:
    InputErrorKind kind_;
    Span span_;
};

/// Splits source text into tokens, dropping whitespace and comments.
/// Unterminated strings/comments are reported as fatal syntax errors.
std::vector<Token> tokenize(std::string_view text);

/// Token texts only, as used for span round-trips and normalized hashing.
std::vector<std::string> token_texts(std::string_view text);

/// Validates UTF-8 encoding. Returns the byte offset of the first bad
/// sequence, or npos when the input is well formed.
std::size_t find_invalid_utf8(std::string_view text);

} // namespace rtriage
