#include "lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace xlb::lex {
namespace {

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80; }

class Cursor {
public:
    explicit Cursor(std::string_view src) : src_(src) {}

    bool done() const { return pos_ >= src_.size(); }
    char peek(size_t ahead = 0) const { return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0'; }
    size_t pos() const { return pos_; }
    int line() const { return line_; }
    int column() const { return static_cast<int>(pos_ - line_start_); }

    void advance() {
        if (done()) return;
        if (src_[pos_] == '\n') {
            ++line_;
            line_start_ = pos_ + 1;
        }
        ++pos_;
    }
    void advance(size_t n) {
        for (size_t i = 0; i < n; ++i) advance();
    }
    bool starts_with(std::string_view s) const { return src_.substr(pos_).starts_with(s); }

    Token make(TokKind kind, size_t start, int line, int col) const {
        Token t;
        t.kind = kind;
        t.text = src_.substr(start, pos_ - start);
        t.line = line;
        t.column = col;
        t.offset = start;
        t.end = pos_;
        t.end_line = line_;
        if (pos_ > start && src_[pos_ - 1] == '\n') t.end_line = line_ - 1;
        return t;
    }

private:
    std::string_view src_;
    size_t pos_ = 0;
    int line_ = 1;
    size_t line_start_ = 0;
};

template <size_t N>
bool match_op(Cursor& cur, const std::array<std::string_view, N>& ops) {
    for (auto op : ops) {
        if (cur.starts_with(op)) {
            cur.advance(op.size());
            return true;
        }
    }
    return false;
}

constexpr std::array<std::string_view, 25> kPythonOps = {
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "==", "!=", "<=", "<>", ">=", "**",
    "//",  "<<",  ">>",  "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^=", "@="};

constexpr std::array<std::string_view, 25> kJavaOps = {
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=",
    "<=",   ">=",  "+=",  "-=",  "*=",  "/=", "%=", "&=", "|=", "^=", "<<", ">>"};

void lex_number(Cursor& cur) {
    while (!cur.done()) {
        char c = cur.peek();
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.') {
            bool exp = (c == 'e' || c == 'E');
            cur.advance();
            if (exp && (cur.peek() == '+' || cur.peek() == '-')) cur.advance();
        } else {
            break;
        }
    }
}

}  // namespace

LexResult tokenize_python(std::string_view source) {
    LexResult out;
    Cursor cur(source);
    while (!cur.done()) {
        char c = cur.peek();
        size_t start = cur.pos();
        int line = cur.line();
        int col = cur.column();

        if (c == '\n') {
            cur.advance();
            out.tokens.push_back(cur.make(TokKind::newline, start, line, col));
            out.tokens.back().end_line = line;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r' || c == '\f') {
            cur.advance();
            continue;
        }
        if (c == '\\' && (cur.peek(1) == '\n' || (cur.peek(1) == '\r' && cur.peek(2) == '\n'))) {
            cur.advance(cur.peek(1) == '\n' ? 2 : 3);
            continue;
        }
        if (c == '#') {
            while (!cur.done() && cur.peek() != '\n') cur.advance();
            out.tokens.push_back(cur.make(TokKind::comment, start, line, col));
            continue;
        }

        // String prefix detection: up to two prefix letters then a quote.
        size_t prefix = 0;
        while (prefix < 2 && std::string_view("rRbBuUfF").find(cur.peek(prefix)) != std::string_view::npos &&
               cur.peek(prefix) != '\0')
            ++prefix;
        bool is_string = (c == '"' || c == '\'') ||
                         (prefix > 0 && (cur.peek(prefix) == '"' || cur.peek(prefix) == '\''));
        if (is_string) {
            if (!(c == '"' || c == '\'')) cur.advance(prefix);
            char q = cur.peek();
            bool triple = cur.peek(1) == q && cur.peek(2) == q;
            cur.advance(triple ? 3 : 1);
            bool closed = false;
            while (!cur.done()) {
                char d = cur.peek();
                if (d == '\\') {
                    cur.advance(2);
                    continue;
                }
                if (triple) {
                    if (d == q && cur.peek(1) == q && cur.peek(2) == q) {
                        cur.advance(3);
                        closed = true;
                        break;
                    }
                } else {
                    if (d == '\n') break;
                    if (d == q) {
                        cur.advance();
                        closed = true;
                        break;
                    }
                }
                cur.advance();
            }
            if (!closed)
                out.warnings.push_back("unterminated string literal at line " + std::to_string(line));
            out.tokens.push_back(cur.make(TokKind::string, start, line, col));
            continue;
        }
        if (ident_start(static_cast<unsigned char>(c)) && c != '$') {
            while (!cur.done() && ident_char(static_cast<unsigned char>(cur.peek())) && cur.peek() != '$')
                cur.advance();
            out.tokens.push_back(cur.make(TokKind::name, start, line, col));
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && std::isdigit(static_cast<unsigned char>(cur.peek(1))))) {
            lex_number(cur);
            out.tokens.push_back(cur.make(TokKind::number, start, line, col));
            continue;
        }
        if (!match_op(cur, kPythonOps)) cur.advance();
        out.tokens.push_back(cur.make(TokKind::op, start, line, col));
    }
    return out;
}

LexResult tokenize_java(std::string_view source) {
    LexResult out;
    Cursor cur(source);
    while (!cur.done()) {
        char c = cur.peek();
        size_t start = cur.pos();
        int line = cur.line();
        int col = cur.column();

        if (std::isspace(static_cast<unsigned char>(c))) {
            cur.advance();
            continue;
        }
        if (c == '/' && cur.peek(1) == '/') {
            while (!cur.done() && cur.peek() != '\n') cur.advance();
            out.tokens.push_back(cur.make(TokKind::comment, start, line, col));
            continue;
        }
        if (c == '/' && cur.peek(1) == '*') {
            cur.advance(2);
            bool closed = false;
            while (!cur.done()) {
                if (cur.peek() == '*' && cur.peek(1) == '/') {
                    cur.advance(2);
                    closed = true;
                    break;
                }
                cur.advance();
            }
            if (!closed) out.warnings.push_back("unterminated block comment at line " + std::to_string(line));
            out.tokens.push_back(cur.make(TokKind::comment, start, line, col));
            continue;
        }
        if (c == '"' && cur.peek(1) == '"' && cur.peek(2) == '"') {
            cur.advance(3);
            bool closed = false;
            while (!cur.done()) {
                if (cur.peek() == '\\') {
                    cur.advance(2);
                    continue;
                }
                if (cur.starts_with("\"\"\"")) {
                    cur.advance(3);
                    closed = true;
                    break;
                }
                cur.advance();
            }
            if (!closed) out.warnings.push_back("unterminated text block at line " + std::to_string(line));
            out.tokens.push_back(cur.make(TokKind::string, start, line, col));
            continue;
        }
        if (c == '"' || c == '\'') {
            cur.advance();
            bool closed = false;
            while (!cur.done() && cur.peek() != '\n') {
                if (cur.peek() == '\\') {
                    cur.advance(2);
                    continue;
                }
                if (cur.peek() == c) {
                    cur.advance();
                    closed = true;
                    break;
                }
                cur.advance();
            }
            if (!closed) out.warnings.push_back("unterminated literal at line " + std::to_string(line));
            out.tokens.push_back(cur.make(TokKind::string, start, line, col));
            continue;
        }
        if (ident_start(static_cast<unsigned char>(c))) {
            while (!cur.done() && ident_char(static_cast<unsigned char>(cur.peek()))) cur.advance();
            out.tokens.push_back(cur.make(TokKind::name, start, line, col));
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && std::isdigit(static_cast<unsigned char>(cur.peek(1))))) {
            lex_number(cur);
            out.tokens.push_back(cur.make(TokKind::number, start, line, col));
            continue;
        }
        if (!match_op(cur, kJavaOps)) cur.advance();
        out.tokens.push_back(cur.make(TokKind::op, start, line, col));
    }
    return out;
}

bool is_python_keyword(std::string_view w) {
    static constexpr std::array<std::string_view, 38> kw = {
        "False", "None",   "True",    "and",      "as",     "assert", "async", "await",
        "break", "class",  "continue", "def",     "del",    "elif",   "else",  "except",
        "finally", "for",  "from",    "global",   "if",     "import", "in",    "is",
        "lambda", "nonlocal", "not",  "or",       "pass",   "raise",  "return", "try",
        "while", "with",   "yield",   "print_function", "exec_", "__debug__"};
    return std::find(kw.begin(), kw.end(), w) != kw.end();
}

bool is_java_keyword(std::string_view w) {
    static constexpr std::array<std::string_view, 56> kw = {
        "abstract", "assert",    "boolean",  "break",     "byte",       "case",     "catch",
        "char",     "class",     "const",    "continue",  "default",    "do",       "double",
        "else",     "enum",      "extends",  "final",     "finally",    "float",    "for",
        "goto",     "if",        "implements", "import",  "instanceof", "int",      "interface",
        "long",     "native",    "new",      "package",   "private",    "protected", "public",
        "return",   "short",     "static",   "strictfp",  "super",      "switch",   "synchronized",
        "this",     "throw",     "throws",   "transient", "try",        "void",     "volatile",
        "while",    "true",      "false",    "null",      "var",        "yield",    "record"};
    return std::find(kw.begin(), kw.end(), w) != kw.end();
}

}  // namespace xlb::lex
