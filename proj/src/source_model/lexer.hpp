#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace xlb::lex {

enum class TokKind { name, number, string, op, comment, newline };

struct Token {
    TokKind kind = TokKind::op;
    std::string_view text;
    int line = 1;      // 1-based
    int column = 0;    // 0-based byte column
    int end_line = 1;  // line of the last byte
    size_t offset = 0;
    size_t end = 0;    // one past the last byte

    bool is(std::string_view t) const { return text == t && kind != TokKind::string && kind != TokKind::comment; }
    bool is_name() const { return kind == TokKind::name; }
};

struct LexResult {
    std::vector<Token> tokens;
    std::vector<std::string> warnings;
};

// Python tokens. Emits `newline` tokens for physical line breaks outside
// string literals (backslash continuations are folded away). Comments are
// kept so callers can strip or skip them.
LexResult tokenize_python(std::string_view source);

// Java tokens. No newline tokens; comments are kept.
LexResult tokenize_java(std::string_view source);

bool is_python_keyword(std::string_view word);
bool is_java_keyword(std::string_view word);

}  // namespace xlb::lex
