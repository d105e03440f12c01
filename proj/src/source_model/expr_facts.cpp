#include "expr_facts.hpp"

#include <array>
#include <cctype>

namespace xlb::detail {
namespace {

bool is_keyword(Language lang, std::string_view w) {
    return lang == Language::python ? lex::is_python_keyword(w) : lex::is_java_keyword(w);
}

bool is_chain_root(const Token& t, Language lang) {
    if (!t.is_name()) return false;
    if (lang == Language::java && (t.text == "this" || t.text == "super")) return true;
    return !is_keyword(lang, t.text);
}

// Names referenced inside f-string replacement fields.
void fstring_uses(std::string_view text, std::set<std::string>& uses) {
    size_t q = text.find_first_of("'\"");
    if (q == std::string_view::npos) return;
    std::string_view prefix = text.substr(0, q);
    bool is_f = prefix.find_first_of("fF") != std::string_view::npos;
    if (!is_f) return;
    int depth = 0;
    for (size_t i = q; i < text.size(); ++i) {
        char c = text[i];
        if (c == '{') {
            if (depth == 0 && i + 1 < text.size() && text[i + 1] == '{') {
                ++i;
                continue;
            }
            ++depth;
            continue;
        }
        if (c == '}') {
            if (depth > 0) --depth;
            continue;
        }
        if (depth > 0 && (std::isalpha(static_cast<unsigned char>(c)) || c == '_')) {
            size_t j = i;
            while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
            bool attr = i > 0 && text[i - 1] == '.';
            std::string word(text.substr(i, j - i));
            if (!attr && !lex::is_python_keyword(word)) uses.insert(word);
            i = j - 1;
        }
    }
}

}  // namespace

bool is_open_bracket(const Token& t) {
    return t.kind == lex::TokKind::op && (t.text == "(" || t.text == "[" || t.text == "{");
}

bool is_close_bracket(const Token& t) {
    return t.kind == lex::TokKind::op && (t.text == ")" || t.text == "]" || t.text == "}");
}

bool is_assign_op(std::string_view op) {
    static constexpr std::array<std::string_view, 16> ops = {
        "=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>=", "**=", "//=", "@=", ":="};
    for (auto o : ops)
        if (o == op) return true;
    return false;
}

size_t match_bracket(TokenSpan toks, size_t open) {
    int depth = 0;
    for (size_t i = open; i < toks.size(); ++i) {
        if (is_open_bracket(toks[i])) {
            ++depth;
        } else if (is_close_bracket(toks[i])) {
            if (--depth == 0) return i;
        }
    }
    return toks.size();
}

std::vector<TokenSpan> split_top_level(TokenSpan toks, std::string_view sep) {
    std::vector<TokenSpan> parts;
    int depth = 0;
    size_t start = 0;
    for (size_t i = 0; i < toks.size(); ++i) {
        if (is_open_bracket(toks[i])) {
            ++depth;
        } else if (is_close_bracket(toks[i])) {
            if (depth > 0) --depth;
        } else if (depth == 0 && toks[i].is(sep)) {
            parts.push_back(toks.subspan(start, i - start));
            start = i + 1;
        }
    }
    parts.push_back(toks.subspan(start));
    return parts;
}

std::optional<std::string> dotted_chain(TokenSpan toks) {
    if (toks.empty() || toks.size() % 2 == 0) return std::nullopt;
    std::string out;
    for (size_t i = 0; i < toks.size(); ++i) {
        if (i % 2 == 0) {
            if (!toks[i].is_name()) return std::nullopt;
            out += toks[i].text;
        } else {
            if (!toks[i].is(".")) return std::nullopt;
            out += '.';
        }
    }
    return out;
}

std::string source_text(std::string_view source, TokenSpan toks) {
    if (toks.empty()) return {};
    size_t b = toks.front().offset;
    size_t e = toks.back().end;
    if (e < b || e > source.size()) return {};
    return std::string(source.substr(b, e - b));
}

void analyze_expr(TokenSpan toks, Language lang, std::string_view source, ExprFacts& out) {
    int depth = 0;
    for (size_t i = 0; i < toks.size(); ++i) {
        const Token& t = toks[i];
        if (is_open_bracket(t)) {
            ++depth;
            continue;
        }
        if (is_close_bracket(t)) {
            if (depth > 0) --depth;
            continue;
        }
        if (t.kind == lex::TokKind::string) {
            if (lang == Language::python) fstring_uses(t.text, out.uses);
            continue;
        }

        // Java object creation: new a.b.Type<...>(args)
        if (lang == Language::java && t.is("new")) {
            size_t j = i + 1;
            std::string last;
            int name_line = t.line, name_col = t.column;
            while (j < toks.size() && (toks[j].is_name() || toks[j].is("."))) {
                if (toks[j].is_name()) {
                    last = std::string(toks[j].text);
                    name_line = toks[j].line;
                    name_col = toks[j].column;
                }
                ++j;
            }
            if (j < toks.size() && toks[j].is("<")) {
                int angle = 0;
                for (; j < toks.size(); ++j) {
                    if (toks[j].is("<")) ++angle;
                    else if (toks[j].is(">")) --angle;
                    else if (toks[j].is(">>")) angle -= 2;
                    else if (toks[j].is(">>>")) angle -= 3;
                    if (angle <= 0) {
                        ++j;
                        break;
                    }
                }
            }
            if (!last.empty() && j < toks.size() && toks[j].is("(")) {
                size_t close = match_bracket(toks, j);
                CallExpr call;
                call.callee = last;
                call.is_constructor = true;
                call.line = name_line;
                call.column = name_col;
                if (close > j + 1 && close <= toks.size()) {
                    auto args = toks.subspan(j + 1, std::min(close, toks.size()) - j - 1);
                    ExprFacts inner;
                    analyze_expr(args, lang, source, inner);
                    call.arg_vars = inner.uses;
                    call.args_text = source_text(source, args);
                }
                out.calls.push_back(std::move(call));
            }
            // Arguments are scanned by the main loop; skip only the type name.
            i = (j > i + 1) ? j - 1 : i;
            continue;
        }

        if (!t.is_name()) continue;
        if (lang == Language::java && t.text != "this" && t.text != "super" && is_keyword(lang, t.text)) continue;
        if (lang == Language::python && is_keyword(lang, t.text)) continue;

        bool after_dot = i > 0 && (toks[i - 1].is(".") || toks[i - 1].is("::"));
        bool after_at = i > 0 && toks[i - 1].is("@") && lang == Language::java;
        bool call = i + 1 < toks.size() && toks[i + 1].is("(");
        if (after_at) continue;

        if (lang == Language::python && depth > 0 && i + 1 < toks.size() && toks[i + 1].is("=") && !after_dot) {
            continue;  // keyword argument name
        }
        if (lang == Language::python && i + 1 < toks.size() && toks[i + 1].is(":=")) {
            out.walrus_defs.insert(std::string(t.text));
            continue;
        }

        if (call) {
            CallExpr c;
            c.callee = std::string(t.text);
            c.line = t.line;
            c.column = t.column;
            if (after_dot && toks[i - 1].is(".")) {
                std::string chain;
                size_t j = i - 1;  // points at '.'
                bool computed = false;
                while (true) {
                    if (j == 0) break;
                    const Token& prev = toks[j - 1];
                    if (is_chain_root(prev, lang)) {
                        chain = chain.empty() ? std::string(prev.text) : std::string(prev.text) + "." + chain;
                        if (j >= 2 && toks[j - 2].is(".")) {
                            j -= 2;
                            continue;
                        }
                        break;
                    }
                    computed = true;
                    break;
                }
                if (computed) chain = chain.empty() ? "<expr>" : "<expr>." + chain;
                if (chain.empty()) chain = "<expr>";
                c.receiver = chain;
            } else if (after_dot) {
                c.receiver = "<expr>";
            }
            if (!c.receiver && lang == Language::python) out.uses.insert(c.callee);
            size_t close = match_bracket(toks, i + 1);
            size_t arg_end = std::min(close, toks.size());
            if (arg_end > i + 2) {
                auto args = toks.subspan(i + 2, arg_end - i - 2);
                ExprFacts inner;
                analyze_expr(args, lang, source, inner);
                c.arg_vars = inner.uses;
                c.args_text = source_text(source, args);
            }
            out.calls.push_back(std::move(c));
            continue;
        }
        if (after_dot) continue;
        if (lang == Language::java && (t.text == "this" || t.text == "super")) continue;
        out.uses.insert(std::string(t.text));
    }
}

}  // namespace xlb::detail
