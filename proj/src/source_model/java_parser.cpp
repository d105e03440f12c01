#include <algorithm>
#include <array>

#include "expr_facts.hpp"
#include "front_ends.hpp"

namespace xlb::detail {
namespace {

using lex::TokKind;

struct GroupInfo {
    int arm_count = 1;
    bool exhaustive = false;
};

bool is_primitive(std::string_view w) {
    static constexpr std::array<std::string_view, 9> p = {"int",   "long",   "short", "byte", "char",
                                                          "boolean", "float", "double", "var"};
    return std::find(p.begin(), p.end(), w) != p.end();
}

bool is_modifier(std::string_view w) {
    static constexpr std::array<std::string_view, 14> m = {
        "public",   "private",  "protected", "static",   "final",  "abstract", "native",
        "synchronized", "transient", "volatile", "strictfp", "default", "sealed", "non"};
    return std::find(m.begin(), m.end(), w) != m.end();
}

bool is_type_keyword(std::string_view w) { return w == "class" || w == "interface" || w == "enum" || w == "record"; }

class JavaParser {
public:
    JavaParser(std::string_view path, std::string_view source) : src_(source) {
        unit_.path = std::string(path);
        unit_.language = Language::java;
    }

    SourceUnit run() {
        auto lexed = lex::tokenize_java(src_);
        unit_.warnings = std::move(lexed.warnings);
        unit_.line_count = static_cast<int>(split_lines(src_).size());
        for (auto& t : lexed.tokens)
            if (t.kind != TokKind::comment) toks_.push_back(t);

        while (!done()) {
            size_t before = pos_;
            top_level();
            if (pos_ == before) ++pos_;
        }
        finalize();
        return std::move(unit_);
    }

private:
    std::string_view src_;
    std::vector<Token> toks_;
    size_t pos_ = 0;
    SourceUnit unit_;
    std::vector<GroupInfo> groups_;
    std::vector<std::string> names_;  // enclosing type/method chain
    std::vector<std::string> type_names_;
    std::vector<ArmRef> arms_;
    int fn_depth_ = 0;

    bool done() const { return pos_ >= toks_.size(); }
    const Token& cur() const { return toks_[pos_]; }
    bool at(std::string_view s) const { return !done() && toks_[pos_].is(s); }
    bool at_offset(size_t k, std::string_view s) const {
        return pos_ + k < toks_.size() && toks_[pos_ + k].is(s);
    }
    int cur_line() const { return done() ? (toks_.empty() ? 1 : toks_.back().end_line) : cur().line; }

    int new_group() {
        groups_.push_back(GroupInfo{});
        return static_cast<int>(groups_.size()) - 1;
    }

    std::string join_names(const std::string& leaf) const {
        std::string q;
        for (const auto& n : names_) q += n + ".";
        return q + leaf;
    }

    size_t skip_balanced(size_t i) const {
        TokenSpan all(toks_);
        size_t close = match_bracket(all, i);
        return close >= toks_.size() ? toks_.size() : close + 1;
    }

    size_t skip_annotation(size_t i) const {
        // i at '@'
        ++i;
        while (i < toks_.size() && (toks_[i].is_name() || toks_[i].is("."))) ++i;
        if (i < toks_.size() && toks_[i].is("(")) i = skip_balanced(i);
        return i;
    }

    // Returns position after modifiers/annotations and whether `mod` was seen.
    size_t skip_modifiers(size_t i, std::vector<std::string>* mods = nullptr) const {
        while (i < toks_.size()) {
            const auto& t = toks_[i];
            if (t.is("@") && !(i + 1 < toks_.size() && toks_[i + 1].is("interface"))) {
                i = skip_annotation(i);
            } else if (t.is_name() && is_modifier(t.text)) {
                if (t.text == "non" && i + 2 < toks_.size() && toks_[i + 1].is("-")) {
                    i += 3;
                    continue;
                }
                if (t.text == "default" && i + 1 < toks_.size() && toks_[i + 1].is(":")) break;
                if (mods) mods->push_back(std::string(t.text));
                ++i;
            } else {
                break;
            }
        }
        return i;
    }

    bool type_decl_at(size_t i) const {
        if (i >= toks_.size()) return false;
        if (toks_[i].is("@") && i + 1 < toks_.size() && toks_[i + 1].is("interface")) return true;
        if (!toks_[i].is_name() || !is_type_keyword(toks_[i].text)) return false;
        if (toks_[i].text == "record" || toks_[i].text == "enum") {
            return i + 2 < toks_.size() && toks_[i + 1].is_name() &&
                   (toks_[i + 2].is("(") || toks_[i + 2].is("{") || toks_[i + 2].is("<") ||
                    toks_[i + 2].is("implements"));
        }
        return i + 1 < toks_.size() && toks_[i + 1].is_name();
    }

    void top_level() {
        if (at("package")) {
            while (!done() && !at(";")) ++pos_;
            ++pos_;
            return;
        }
        if (at("import")) {
            parse_import();
            return;
        }
        if (at(";")) {
            ++pos_;
            return;
        }
        size_t start = pos_;
        size_t after = skip_modifiers(pos_);
        if (type_decl_at(after)) {
            pos_ = after;
            parse_type_decl(start);
            return;
        }
        pos_ = std::max(after, pos_ + 1);
    }

    void parse_import() {
        int line = cur().line;
        ++pos_;
        ImportDecl d;
        d.line = line;
        if (at("static")) {
            d.is_static = true;
            ++pos_;
        }
        std::string name;
        while (!done() && !at(";")) {
            if (cur().is("*")) d.wildcard = true;
            else name += cur().text;
            ++pos_;
        }
        if (!done()) ++pos_;
        if (!name.empty() && name.back() == '.') name.pop_back();
        if (name.empty()) return;
        d.module_or_type = name;
        unit_.imports.push_back(std::move(d));
    }

    std::vector<std::string> parse_supertypes(size_t& i) const {
        std::vector<std::string> out;
        int angle = 0;
        std::string last;
        bool collecting = false;
        while (i < toks_.size() && !toks_[i].is("{") && !toks_[i].is(";")) {
            const auto& t = toks_[i];
            if (t.is("<")) ++angle;
            else if (t.is(">")) --angle;
            else if (t.is(">>")) angle -= 2;
            else if (t.is(">>>")) angle -= 3;
            else if (t.is("(")) {
                i = skip_balanced(i);
                continue;
            } else if (angle <= 0) {
                if (t.is("extends") || t.is("implements") || t.is("permits")) {
                    if (collecting && !last.empty()) out.push_back(last);
                    last.clear();
                    collecting = !t.is("permits");
                } else if (t.is(",")) {
                    if (collecting && !last.empty()) out.push_back(last);
                    last.clear();
                } else if (t.is_name()) {
                    last = std::string(t.text);
                }
            }
            ++i;
        }
        if (collecting && !last.empty()) out.push_back(last);
        return out;
    }

    void parse_type_decl(size_t decl_start) {
        std::string kind;
        if (at("@")) {
            kind = "annotation";
            pos_ += 2;
        } else {
            kind = std::string(cur().text);
            ++pos_;
        }
        if (done() || !cur().is_name()) return;
        TypeDecl td;
        td.name = std::string(cur().text);
        td.qualified_name = join_names(td.name);
        td.kind = kind;
        td.start_line = toks_[decl_start].line;
        ++pos_;
        size_t i = pos_;
        if (i < toks_.size() && toks_[i].is("<")) {
            int angle = 0;
            for (; i < toks_.size(); ++i) {
                if (toks_[i].is("<")) ++angle;
                else if (toks_[i].is(">")) --angle;
                else if (toks_[i].is(">>")) angle -= 2;
                if (angle <= 0) {
                    ++i;
                    break;
                }
            }
        }
        if (i < toks_.size() && toks_[i].is("(")) i = skip_balanced(i);  // record header
        td.supertypes = parse_supertypes(i);
        pos_ = i;
        size_t type_index = unit_.types.size();
        unit_.types.push_back(td);
        if (!at("{")) {
            if (!done()) ++pos_;
            unit_.types[type_index].end_line = cur_line();
            return;
        }
        names_.push_back(td.name);
        type_names_.push_back(td.name);
        int end_line = parse_class_body(kind == "enum");
        type_names_.pop_back();
        names_.pop_back();
        unit_.types[type_index].end_line = end_line;
    }

    // pos_ at '{'. Returns the line of the closing brace.
    int parse_class_body(bool is_enum) {
        ++pos_;
        if (is_enum) {
            while (!done() && !at(";") && !at("}")) {
                if (at("(")) {
                    pos_ = skip_balanced(pos_);
                } else if (at("{")) {
                    std::string constant = pos_ > 0 ? std::string(toks_[pos_ - 1].text) : "constant";
                    names_.push_back(constant);
                    parse_class_body(false);
                    names_.pop_back();
                } else {
                    ++pos_;
                }
            }
            if (at(";")) ++pos_;
        }
        while (!done() && !at("}")) {
            size_t before = pos_;
            parse_member();
            if (pos_ == before) ++pos_;
        }
        int line = cur_line();
        if (!done()) ++pos_;
        return line;
    }

    std::map<std::string, std::string> parse_params(size_t open, size_t close) const {
        std::map<std::string, std::string> out;
        std::vector<Token> param;
        int angle = 0;
        int depth = 0;
        auto flush = [&] {
            // drop annotations and modifiers
            std::vector<Token> clean;
            for (size_t k = 0; k < param.size(); ++k) {
                if (param[k].is("@")) {
                    ++k;
                    while (k + 1 < param.size() && param[k + 1].is(".")) k += 2;
                    if (k + 1 < param.size() && param[k + 1].is("(")) {
                        int d = 0;
                        for (++k; k < param.size(); ++k) {
                            if (param[k].is("(")) ++d;
                            if (param[k].is(")") && --d == 0) break;
                        }
                    }
                    continue;
                }
                if (param[k].is("final")) continue;
                clean.push_back(param[k]);
            }
            param.clear();
            if (clean.size() < 2 || !clean.back().is_name()) return;
            std::string type;
            int a = 0;
            for (size_t k = 0; k + 1 < clean.size(); ++k) {
                if (clean[k].is("<")) ++a;
                else if (clean[k].is(">")) --a;
                else if (clean[k].is(">>")) a -= 2;
                else if (a <= 0 && clean[k].is_name()) type = std::string(clean[k].text);
            }
            if (!type.empty()) out[std::string(clean.back().text)] = type;
        };
        for (size_t i = open + 1; i < close && i < toks_.size(); ++i) {
            const auto& t = toks_[i];
            if (t.is("<")) ++angle;
            else if (t.is(">")) --angle;
            else if (t.is(">>")) angle -= 2;
            else if (t.is(">>>")) angle -= 3;
            else if (is_open_bracket(t)) ++depth;
            else if (is_close_bracket(t)) --depth;
            if (t.is(",") && angle <= 0 && depth == 0) {
                flush();
                continue;
            }
            param.push_back(t);
        }
        flush();
        return out;
    }

    void parse_member() {
        if (at(";")) {
            ++pos_;
            return;
        }
        size_t member_start = pos_;
        std::vector<std::string> mods;
        size_t after = skip_modifiers(pos_, &mods);
        if (type_decl_at(after)) {
            pos_ = after;
            parse_type_decl(member_start);
            return;
        }
        if (after < toks_.size() && toks_[after].is("{")) {
            bool is_static = std::find(mods.begin(), mods.end(), "static") != mods.end();
            pos_ = after;
            FunctionSpan fn;
            fn.name = is_static ? "<static_init>" : "<instance_init>";
            fn.qualified_name = join_names(fn.name);
            fn.start_line = toks_[member_start].line;
            fn.owner_type = type_names_.empty() ? "" : type_names_.back();
            parse_function_body(std::move(fn));
            return;
        }
        // Find the first '(' / '=' / ';' / '{' at depth 0.
        size_t i = after;
        int depth = 0;
        size_t paren = toks_.size();
        for (; i < toks_.size(); ++i) {
            const auto& t = toks_[i];
            if (t.is("}") && depth == 0) break;
            if (depth == 0 && (t.is("=") || t.is(";") || t.is("{"))) break;
            if (t.is("(") && depth == 0) {
                paren = i;
                break;
            }
            if (t.is("[")) ++depth;
            if (t.is("]") && depth > 0) --depth;
        }
        if (paren < toks_.size() && paren > after && toks_[paren - 1].is_name() &&
            !lex::is_java_keyword(toks_[paren - 1].text)) {
            FunctionSpan fn;
            fn.name = std::string(toks_[paren - 1].text);
            fn.qualified_name = join_names(fn.name);
            fn.start_line = toks_[member_start].line;
            fn.owner_type = type_names_.empty() ? "" : type_names_.back();
            fn.is_native_decl = std::find(mods.begin(), mods.end(), "native") != mods.end();
            size_t close = match_bracket(TokenSpan(toks_), paren);
            if (close < toks_.size()) fn.param_types = parse_params(paren, close);
            size_t j = close < toks_.size() ? close + 1 : toks_.size();
            while (j < toks_.size() && !toks_[j].is("{") && !toks_[j].is(";") && !toks_[j].is("}")) {
                if (toks_[j].is("(")) {
                    j = skip_balanced(j);
                    continue;
                }
                ++j;
            }
            pos_ = j;
            if (at("{") && !fn.is_native_decl) {
                parse_function_body(std::move(fn));
                return;
            }
            fn.has_body = false;
            fn.is_native_decl = fn.is_native_decl;
            fn.end_line = cur_line();
            if (at(";")) ++pos_;
            else if (at("{")) pos_ = skip_balanced(pos_);  // malformed native with body
            unit_.functions.push_back(std::move(fn));
            return;
        }
        // Field declaration.
        pos_ = member_start;
        auto saved = arms_;
        arms_.clear();
        auto toks = collect_statement();
        arms_ = saved;
        java_statement(TokenSpan(toks));
    }

    void parse_function_body(FunctionSpan fn) {
        size_t index = unit_.functions.size();
        unit_.functions.push_back(std::move(fn));
        auto saved_arms = arms_;
        arms_.clear();
        names_.push_back(unit_.functions[index].name);
        ++fn_depth_;
        int end = parse_block();
        --fn_depth_;
        names_.pop_back();
        arms_ = saved_arms;
        unit_.functions[index].end_line = end;
    }

    // pos_ at '{'. Returns the line of the closing brace.
    int parse_block() {
        if (at("{")) ++pos_;
        while (!done() && !at("}")) {
            size_t before = pos_;
            parse_statement();
            if (pos_ == before) ++pos_;
        }
        int line = cur_line();
        if (!done()) ++pos_;
        return line;
    }

    // Token range of a parenthesised header at pos_; advances past it.
    TokenSpan paren_range() {
        if (!at("(")) return {};
        size_t open = pos_;
        size_t close = match_bracket(TokenSpan(toks_), open);
        pos_ = close < toks_.size() ? close + 1 : toks_.size();
        size_t end = std::min(close, toks_.size());
        return TokenSpan(toks_).subspan(open + 1, end > open + 1 ? end - open - 1 : 0);
    }

    void in_arm(int group, int arm, auto&& body) {
        arms_.push_back(ArmRef{group, arm, 1, false});
        body();
        arms_.pop_back();
    }

    void parse_statement() {
        if (at("{")) {
            parse_block();
            return;
        }
        if (at(";")) {
            ++pos_;
            return;
        }
        const Token& t = cur();
        if (t.is("if")) {
            ++pos_;
            auto cond = paren_range();
            expression_statement(cond, t);
            int g = new_group();
            in_arm(g, 0, [&] { parse_statement(); });
            if (at("else")) {
                ++pos_;
                groups_[static_cast<size_t>(g)].arm_count = 2;
                groups_[static_cast<size_t>(g)].exhaustive = true;
                in_arm(g, 1, [&] { parse_statement(); });
            }
            return;
        }
        if (t.is("for")) {
            ++pos_;
            auto header = paren_range();
            int g = new_group();
            int depth = 0;
            size_t colon = header.size();
            for (size_t i = 0; i < header.size(); ++i) {
                if (is_open_bracket(header[i])) ++depth;
                else if (is_close_bracket(header[i])) --depth;
                else if (depth == 0 && header[i].is(":")) {
                    colon = i;
                    break;
                }
            }
            if (colon < header.size()) {
                in_arm(g, 0, [&] {
                    foreach_statement(header.subspan(0, colon), header.subspan(colon + 1), t);
                    parse_statement();
                });
            } else {
                auto parts = split_top_level(header, ";");
                if (!parts.empty()) java_statement(parts[0]);
                if (parts.size() > 1) expression_statement(parts[1], t);
                in_arm(g, 0, [&] {
                    if (parts.size() > 2)
                        for (auto u : split_top_level(parts[2], ",")) java_statement(u);
                    parse_statement();
                });
            }
            return;
        }
        if (t.is("while")) {
            ++pos_;
            auto cond = paren_range();
            expression_statement(cond, t);
            int g = new_group();
            in_arm(g, 0, [&] { parse_statement(); });
            return;
        }
        if (t.is("do")) {
            ++pos_;
            parse_statement();
            if (at("while")) {
                const Token& w = cur();
                ++pos_;
                auto cond = paren_range();
                expression_statement(cond, w);
                if (at(";")) ++pos_;
            }
            return;
        }
        if (t.is("try")) {
            ++pos_;
            if (at("(")) {
                auto res = paren_range();
                for (auto r : split_top_level(res, ";"))
                    if (!r.empty()) java_statement(r);
            }
            if (at("{")) parse_block();
            int g = -1;
            int arm = 0;
            while (at("catch")) {
                ++pos_;
                if (g < 0) g = new_group();
                auto param = paren_range();
                in_arm(g, arm, [&] {
                    catch_param(param);
                    if (at("{")) parse_block();
                });
                ++arm;
                groups_[static_cast<size_t>(g)].arm_count = arm;
            }
            if (at("finally")) {
                ++pos_;
                if (at("{")) parse_block();
            }
            return;
        }
        if (t.is("switch")) {
            ++pos_;
            auto subject = paren_range();
            expression_statement(subject, t);
            if (!at("{")) return;
            ++pos_;
            int g = new_group();
            int arm = -1;
            while (!done() && !at("}")) {
                size_t before = pos_;
                if (at("case") || (at("default") && (at_offset(1, ":") || at_offset(1, "->")))) {
                    if (at("default")) groups_[static_cast<size_t>(g)].exhaustive = true;
                    int depth = 0;
                    while (!done()) {
                        if (is_open_bracket(cur())) ++depth;
                        else if (is_close_bracket(cur())) --depth;
                        else if (depth == 0 && (at(":") || at("->"))) break;
                        ++pos_;
                    }
                    if (!done()) ++pos_;
                    ++arm;
                    groups_[static_cast<size_t>(g)].arm_count = arm + 1;
                    continue;
                }
                in_arm(g, std::max(arm, 0), [&] { parse_statement(); });
                if (pos_ == before) ++pos_;
            }
            if (!done()) ++pos_;
            return;
        }
        if (t.is("synchronized") && at_offset(1, "(")) {
            ++pos_;
            auto lock = paren_range();
            expression_statement(lock, t);
            if (at("{")) parse_block();
            return;
        }
        if (t.is("else") || t.is("catch") || t.is("finally") || t.is("case")) {
            ++pos_;
            return;
        }
        if (t.is_name() && at_offset(1, ":") && !lex::is_java_keyword(t.text)) {
            pos_ += 2;  // label
            return;
        }
        {
            size_t start = pos_;
            size_t after = skip_modifiers(pos_);
            if (type_decl_at(after)) {
                pos_ = after;
                parse_type_decl(start);
                return;
            }
        }
        auto toks = collect_statement();
        java_statement(TokenSpan(toks));
    }

    // True when the '{' about to be read opens an anonymous class body.
    bool anonymous_body_follows(const std::vector<Token>& out, std::string* type_name) const {
        if (out.empty() || !out.back().is(")")) return false;
        int depth = 0;
        size_t i = out.size();
        while (i > 0) {
            --i;
            if (out[i].is(")")) ++depth;
            else if (out[i].is("(") && --depth == 0) break;
        }
        if (depth != 0 || i == 0) return false;
        size_t j = i;
        // skip generic args `<...>` before '('
        if (j > 0 && out[j - 1].is(">")) {
            int a = 0;
            while (j > 0) {
                --j;
                if (out[j].is(">")) ++a;
                else if (out[j].is("<") && --a == 0) break;
            }
        }
        if (j == 0 || !out[j - 1].is_name()) return false;
        std::string name(out[j - 1].text);
        size_t k = j - 1;
        while (k >= 2 && out[k - 1].is(".") && out[k - 2].is_name()) k -= 2;
        if (k == 0 || !out[k - 1].is("new")) return false;
        if (type_name) *type_name = name;
        return true;
    }

    // Collects one statement's tokens up to ';'. Lambda bodies and anonymous
    // class bodies are parsed in place and left out of the result.
    std::vector<Token> collect_statement() {
        std::vector<Token> out;
        int depth = 0;
        while (!done()) {
            const Token& t = cur();
            if (depth == 0 && t.is(";")) {
                ++pos_;
                break;
            }
            if (depth == 0 && t.is("}")) break;
            if (t.is("{")) {
                std::string anon;
                if (!out.empty() && out.back().is("->")) {
                    int g = new_group();
                    in_arm(g, 0, [&] { parse_block(); });
                    continue;
                }
                if (anonymous_body_follows(out, &anon)) {
                    auto saved = arms_;
                    arms_.clear();
                    names_.push_back(anon);
                    type_names_.push_back(anon);
                    parse_class_body(false);
                    type_names_.pop_back();
                    names_.pop_back();
                    arms_ = saved;
                    continue;
                }
            }
            if (is_open_bracket(t)) ++depth;
            else if (is_close_bracket(t) && depth > 0) --depth;
            out.push_back(t);
            ++pos_;
        }
        return out;
    }

    Statement make_statement(TokenSpan toks) const {
        Statement s;
        s.line = toks.front().line;
        s.column = toks.front().column;
        s.end_line = toks.front().end_line;
        for (const auto& t : toks) s.end_line = std::max(s.end_line, t.end_line);
        s.arms = arms_;
        s.text = source_text(src_, toks);
        return s;
    }

    void expression_statement(TokenSpan expr, const Token& keyword) {
        if (expr.empty()) return;
        Statement s = make_statement(expr);
        s.line = keyword.line;
        s.column = keyword.column;
        ExprFacts f;
        analyze_expr(expr, Language::java, src_, f);
        s.used_vars = std::move(f.uses);
        s.calls = std::move(f.calls);
        s.kind = StatementKind::expression;
        unit_.statements.push_back(std::move(s));
    }

    void foreach_statement(TokenSpan decl, TokenSpan iterable, const Token& keyword) {
        if (decl.empty()) return;
        Statement s = make_statement(decl);
        s.line = keyword.line;
        s.column = keyword.column;
        size_t i = 0;
        while (i < decl.size() && (decl[i].is("final") || decl[i].is("@"))) {
            if (decl[i].is("@")) i += 2;
            else ++i;
        }
        if (decl.back().is_name()) {
            std::string name(decl.back().text);
            std::string type;
            int a = 0;
            for (size_t k = i; k + 1 < decl.size(); ++k) {
                if (decl[k].is("<")) ++a;
                else if (decl[k].is(">")) --a;
                else if (decl[k].is(">>")) a -= 2;
                else if (a <= 0 && decl[k].is_name()) type = std::string(decl[k].text);
            }
            s.defined_vars.insert(name);
            s.targets.push_back(name);
            if (!type.empty() && type != "var") s.declared_types[name] = type;
        }
        ExprFacts f;
        analyze_expr(iterable, Language::java, src_, f);
        s.used_vars = std::move(f.uses);
        s.calls = std::move(f.calls);
        s.kind = s.defined_vars.empty() ? StatementKind::expression : StatementKind::assignment;
        unit_.statements.push_back(std::move(s));
    }

    void catch_param(TokenSpan param) {
        if (param.empty() || !param.back().is_name()) return;
        Statement s = make_statement(param);
        std::string name(param.back().text);
        std::string type;
        for (size_t k = 0; k + 1 < param.size(); ++k)
            if (param[k].is_name() && !param[k].is("final")) type = std::string(param[k].text);
        s.defined_vars.insert(name);
        s.targets.push_back(name);
        if (!type.empty()) s.declared_types[name] = type;
        s.kind = StatementKind::assignment;
        unit_.statements.push_back(std::move(s));
    }

    // Length of a type starting at i (0 when no type parses there).
    size_t type_length(TokenSpan toks, size_t i) const {
        size_t j = i;
        if (j >= toks.size() || !toks[j].is_name()) return 0;
        std::string_view first = toks[j].text;
        if (lex::is_java_keyword(first) && !is_primitive(first)) return 0;
        ++j;
        while (j + 1 < toks.size() && toks[j].is(".") && toks[j + 1].is_name()) j += 2;
        if (j < toks.size() && toks[j].is("<")) {
            int a = 0;
            for (; j < toks.size(); ++j) {
                const auto& t = toks[j];
                if (t.is("<")) ++a;
                else if (t.is(">")) --a;
                else if (t.is(">>")) a -= 2;
                else if (t.is(">>>")) a -= 3;
                else if (!(t.is_name() || t.is(",") || t.is(".") || t.is("?") || t.is("[") || t.is("]") ||
                           t.is("&")))
                    return 0;
                if (a <= 0) {
                    ++j;
                    break;
                }
            }
            if (a > 0) return 0;
        }
        while (j + 1 < toks.size() && toks[j].is("[") && toks[j + 1].is("]")) j += 2;
        if (j < toks.size() && toks[j].is("...")) ++j;
        return j - i;
    }

    static std::string simple_type_name(TokenSpan type) {
        std::string last;
        int a = 0;
        for (const auto& t : type) {
            if (t.is("<")) ++a;
            else if (t.is(">")) --a;
            else if (t.is(">>")) a -= 2;
            else if (t.is(">>>")) a -= 3;
            else if (a <= 0 && t.is_name()) last = std::string(t.text);
        }
        return last;
    }

    static bool is_load_call(const CallExpr& c) {
        if (!c.receiver) return false;
        return (*c.receiver == "System" && (c.callee == "loadLibrary" || c.callee == "load")) ||
               (*c.receiver == "Native" && (c.callee == "load" || c.callee == "loadLibrary"));
    }

    void java_statement(TokenSpan toks) {
        size_t i = 0;
        while (i < toks.size() && (toks[i].is("final") || toks[i].is("@"))) {
            if (toks[i].is("@")) {
                ++i;
                while (i + 1 < toks.size() && toks[i + 1].is(".")) i += 2;
                if (i < toks.size()) ++i;
                if (i < toks.size() && toks[i].is("(")) i = match_bracket(toks, i) + 1;
            } else {
                ++i;
            }
        }
        // Field-level modifiers.
        while (i < toks.size() && toks[i].is_name() && is_modifier(toks[i].text)) ++i;
        if (i >= toks.size()) return;
        toks = toks.subspan(i);
        Statement s = make_statement(toks);
        std::string_view kw = toks.front().is_name() ? toks.front().text : std::string_view{};

        if (kw == "return" || kw == "throw" || kw == "assert" ||
            (kw == "yield" && toks.size() > 1 && !toks[1].is("=") && !toks[1].is("("))) {
            ExprFacts f;
            analyze_expr(toks.subspan(1), Language::java, src_, f);
            s.used_vars = std::move(f.uses);
            s.calls = std::move(f.calls);
            s.is_return = kw == "return";
            s.kind = StatementKind::expression;
            unit_.statements.push_back(std::move(s));
            return;
        }
        if (kw == "break" || kw == "continue") {
            s.kind = StatementKind::other;
            unit_.statements.push_back(std::move(s));
            return;
        }

        size_t tlen = type_length(toks, 0);
        bool decl = tlen > 0 && tlen < toks.size() && toks[tlen].is_name() &&
                    !lex::is_java_keyword(toks[tlen].text) &&
                    (tlen + 1 == toks.size() || toks[tlen + 1].is("=") || toks[tlen + 1].is(",") ||
                     toks[tlen + 1].is("[") || toks[tlen + 1].is(";"));
        if (decl) {
            std::string type = simple_type_name(toks.subspan(0, tlen));
            for (auto d : split_top_level(toks.subspan(tlen), ",")) {
                if (d.empty() || !d.front().is_name()) continue;
                std::string name(d.front().text);
                size_t eq = 1;
                while (eq < d.size() && !d[eq].is("=")) ++eq;
                std::string declared = type;
                if (eq < d.size()) {
                    auto init = d.subspan(eq + 1);
                    ExprFacts f;
                    analyze_expr(init, Language::java, src_, f);
                    s.used_vars.insert(f.uses.begin(), f.uses.end());
                    for (auto& c : f.calls) s.calls.push_back(std::move(c));
                    s.defined_vars.insert(name);
                    s.targets.push_back(name);
                    if (init.size() >= 2 && init[0].is("new") && declared == "var") {
                        std::string last;
                        for (size_t k = 1; k < init.size() && (init[k].is_name() || init[k].is(".")); ++k)
                            if (init[k].is_name()) last = std::string(init[k].text);
                        declared = last;
                    }
                    if (!s.value_chain) s.value_chain = dotted_chain(init);
                }
                if (!declared.empty() && declared != "var") s.declared_types[name] = declared;
            }
            s.kind = s.defined_vars.empty() ? StatementKind::other : StatementKind::assignment;
            unit_.statements.push_back(std::move(s));
            return;
        }

        // Assignment expression?
        std::vector<size_t> eq_pos;
        size_t aug = toks.size();
        int depth = 0;
        for (size_t k = 0; k < toks.size(); ++k) {
            const auto& t = toks[k];
            if (is_open_bracket(t)) ++depth;
            else if (is_close_bracket(t)) depth = std::max(0, depth - 1);
            else if (depth == 0 && t.kind == TokKind::op) {
                if (t.text == "->") break;
                if (t.text == "=") eq_pos.push_back(k);
                else if (is_assign_op(t.text) && t.text != ":=" && aug == toks.size() && eq_pos.empty()) {
                    aug = k;
                    break;
                }
            }
        }
        auto lhs = [&](TokenSpan target, bool compound) {
            if (target.size() == 1 && target[0].is_name() && !lex::is_java_keyword(target[0].text)) {
                std::string name(target[0].text);
                s.defined_vars.insert(name);
                s.targets.push_back(name);
                if (compound) s.used_vars.insert(name);
                return;
            }
            if (auto chain = dotted_chain(target)) s.targets.push_back(*chain);
            ExprFacts f;
            analyze_expr(target, Language::java, src_, f);
            s.used_vars.insert(f.uses.begin(), f.uses.end());
            for (auto& c : f.calls) s.calls.push_back(std::move(c));
        };
        if (!eq_pos.empty()) {
            size_t start = 0;
            for (size_t e : eq_pos) {
                lhs(toks.subspan(start, e - start), false);
                start = e + 1;
            }
            auto rhs = toks.subspan(eq_pos.back() + 1);
            ExprFacts f;
            analyze_expr(rhs, Language::java, src_, f);
            s.used_vars.insert(f.uses.begin(), f.uses.end());
            for (auto& c : f.calls) s.calls.push_back(std::move(c));
            s.value_chain = dotted_chain(rhs);
        } else if (aug < toks.size()) {
            lhs(toks.subspan(0, aug), true);
            ExprFacts f;
            analyze_expr(toks.subspan(aug + 1), Language::java, src_, f);
            s.used_vars.insert(f.uses.begin(), f.uses.end());
            for (auto& c : f.calls) s.calls.push_back(std::move(c));
        } else if (toks.size() == 2 && ((toks[0].is_name() && (toks[1].is("++") || toks[1].is("--"))) ||
                                        ((toks[0].is("++") || toks[0].is("--")) && toks[1].is_name()))) {
            const auto& n = toks[0].is_name() ? toks[0] : toks[1];
            s.defined_vars.insert(std::string(n.text));
            s.used_vars.insert(std::string(n.text));
            s.targets.push_back(std::string(n.text));
        } else {
            ExprFacts f;
            analyze_expr(toks, Language::java, src_, f);
            s.used_vars = std::move(f.uses);
            s.calls = std::move(f.calls);
        }
        if (!s.defined_vars.empty()) {
            s.kind = StatementKind::assignment;
        } else if (std::any_of(s.calls.begin(), s.calls.end(), is_load_call)) {
            s.kind = StatementKind::load_decl;
        } else if (s.used_vars.empty() && s.calls.empty() && s.targets.empty()) {
            s.kind = StatementKind::other;
        } else {
            s.kind = StatementKind::expression;
        }
        unit_.statements.push_back(std::move(s));
    }

    void finalize() {
        for (auto& s : unit_.statements) {
            for (auto& a : s.arms) {
                const auto& info = groups_[static_cast<size_t>(a.group)];
                a.arm_count = std::max(info.arm_count, a.arm + 1);
                a.exhaustive = info.exhaustive;
            }
        }
        std::stable_sort(unit_.statements.begin(), unit_.statements.end(), [](const auto& a, const auto& b) {
            return std::pair(a.line, a.column) < std::pair(b.line, b.column);
        });
        // Statements sharing a start position (e.g. a for-header split into
        // init and condition) keep only distinct positions by nudging columns.
        for (size_t k = 1; k < unit_.statements.size(); ++k) {
            auto& prev = unit_.statements[k - 1];
            auto& s = unit_.statements[k];
            if (s.line == prev.line && s.column <= prev.column) s.column = prev.column + 1;
        }
        std::stable_sort(unit_.functions.begin(), unit_.functions.end(), [](const auto& a, const auto& b) {
            return std::pair(a.start_line, -a.end_line) < std::pair(b.start_line, -b.end_line);
        });
        for (auto& fn : unit_.functions) {
            fn.end_line = std::max(fn.start_line, std::min(fn.end_line, unit_.line_count));
            fn.body_text = slice_lines(src_, fn.start_line, fn.end_line);
        }
        for (auto& td : unit_.types) td.end_line = std::max(td.start_line, td.end_line);
    }
};

}  // namespace

SourceUnit parse_java(std::string_view path, std::string_view source) { return JavaParser(path, source).run(); }

}  // namespace xlb::detail
