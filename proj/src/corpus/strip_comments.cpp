#include <algorithm>
#include <cctype>
#include <vector>

#include <spdlog/spdlog.h>

#include "source_model/lexer.hpp"
#include "xlb/corpus.hpp"

namespace xlb {
namespace {

using lex::Token;
using lex::TokKind;

struct Range {
    size_t begin;
    size_t end;
};

bool is_header(const std::vector<const Token*>& stmt) {
    if (stmt.empty() || !stmt.back()->is(":")) return false;
    const Token& first = *stmt.front();
    if (first.is_name() && (first.text == "def" || first.text == "class")) return true;
    return first.is_name() && first.text == "async" && stmt.size() > 1 && stmt[1]->is_name() && stmt[1]->text == "def";
}

bool is_doc_literal(const Token& t) {
    if (t.kind != TokKind::string) return false;
    for (char c : t.text) {
        if (c == '"' || c == '\'') break;
        if (c == 'f' || c == 'F' || c == 'b' || c == 'B') return false;
    }
    return true;
}

// Leading string-only statements of the module and of every def/class body.
// Consecutive ones are all removed so a second pass finds nothing new.
std::vector<Range> python_docstrings(const std::vector<Token>& tokens) {
    std::vector<std::vector<const Token*>> statements(1);
    int depth = 0;
    for (const auto& t : tokens) {
        if (t.kind == TokKind::comment) continue;
        if (t.kind == TokKind::newline) {
            if (depth == 0 && !statements.back().empty()) statements.emplace_back();
            continue;
        }
        if (t.kind == TokKind::op) {
            if (t.text == "(" || t.text == "[" || t.text == "{") ++depth;
            else if ((t.text == ")" || t.text == "]" || t.text == "}") && depth > 0) --depth;
        }
        statements.back().push_back(&t);
    }
    std::vector<Range> out;
    bool body_start = true;
    for (const auto& stmt : statements) {
        if (stmt.empty()) continue;
        bool only_strings = true;
        for (const Token* t : stmt) only_strings = only_strings && is_doc_literal(*t);
        if (body_start && only_strings) {
            out.push_back(Range{stmt.front()->offset, stmt.back()->end});
            continue;
        }
        body_start = is_header(stmt);
    }
    return out;
}

bool blank(char c) { return c == ' ' || c == '\t' || c == '\f' || c == '\v' || c == '\n'; }

}  // namespace

std::string strip_comments(std::string_view code, Language language) {
    std::string text;
    text.reserve(code.size());
    for (size_t i = 0; i < code.size(); ++i) {
        if (code[i] == '\r' && i + 1 < code.size() && code[i + 1] == '\n') continue;
        text += code[i];
    }

    lex::LexResult lexed = language == Language::python ? lex::tokenize_python(text) : lex::tokenize_java(text);
    for (const auto& w : lexed.warnings)
        if (w.find("block comment") != std::string::npos) spdlog::warn("strip_comments: {}", w);

    std::vector<Range> removed;
    std::vector<Range> strings;
    for (const auto& t : lexed.tokens) {
        if (t.kind == TokKind::comment) removed.push_back(Range{t.offset, t.end});
        else if (t.kind == TokKind::string) strings.push_back(Range{t.offset, t.end});
    }
    if (language == Language::python) {
        auto docs = python_docstrings(lexed.tokens);
        removed.insert(removed.end(), docs.begin(), docs.end());
        std::sort(removed.begin(), removed.end(), [](auto a, auto b) { return a.begin < b.begin; });
    }

    // Copy everything outside removed ranges, remembering which bytes sit
    // inside string literals.
    std::string out;
    std::vector<bool> in_string;
    out.reserve(text.size());
    in_string.reserve(text.size());
    size_t r = 0, s = 0;
    for (size_t i = 0; i < text.size();) {
        if (r < removed.size() && removed[r].begin == i) {
            i = removed[r].end;
            ++r;
            // Keep neighbouring tokens apart (`a/**/b`).
            if (!out.empty() && !blank(out.back()) && i < text.size() && !blank(text[i])) {
                out += ' ';
                in_string.push_back(false);
            }
            continue;
        }
        while (s < strings.size() && strings[s].end <= i) ++s;
        out += text[i];
        in_string.push_back(s < strings.size() && strings[s].begin <= i);
        ++i;
    }

    std::string result;
    bool first = true;
    size_t begin = 0;
    while (begin <= out.size()) {
        size_t nl = out.find('\n', begin);
        size_t end = nl == std::string::npos ? out.size() : nl;
        bool continues_string = nl != std::string::npos && in_string[nl];
        size_t keep = end;
        if (!continues_string)
            while (keep > begin && !in_string[keep - 1] && std::isspace(static_cast<unsigned char>(out[keep - 1])))
                --keep;
        if (continues_string || keep > begin) {
            if (!first) result += '\n';
            first = false;
            result.append(out, begin, keep - begin);
        }
        if (nl == std::string::npos) break;
        begin = nl + 1;
    }
    return result;
}

}  // namespace xlb
