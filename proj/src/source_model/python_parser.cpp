#include <algorithm>
#include <map>

#include "expr_facts.hpp"
#include "front_ends.hpp"

namespace xlb::detail {
namespace {

using lex::TokKind;

struct LogicalLine {
    std::vector<Token> toks;
    int indent = 0;
    int first_line = 0;
    int last_line = 0;
};

int indent_width(std::string_view source, size_t offset) {
    size_t start = source.rfind('\n', offset == 0 ? 0 : offset - 1);
    start = (start == std::string_view::npos || offset == 0) ? 0 : start + 1;
    int width = 0;
    for (size_t i = start; i < offset; ++i) {
        if (source[i] == '\t')
            width = (width / 8 + 1) * 8;
        else
            ++width;
    }
    return width;
}

std::vector<LogicalLine> logical_lines(const std::vector<Token>& tokens, std::string_view source) {
    std::vector<LogicalLine> lines;
    LogicalLine cur;
    int depth = 0;
    auto flush = [&] {
        if (!cur.toks.empty()) {
            cur.indent = indent_width(source, cur.toks.front().offset);
            cur.first_line = cur.toks.front().line;
            cur.last_line = 0;
            for (const auto& t : cur.toks) cur.last_line = std::max(cur.last_line, t.end_line);
            lines.push_back(std::move(cur));
        }
        cur = LogicalLine{};
        depth = 0;
    };
    for (const auto& t : tokens) {
        if (t.kind == TokKind::comment) continue;
        if (t.kind == TokKind::newline) {
            if (depth == 0) flush();
            continue;
        }
        if (is_open_bracket(t)) ++depth;
        if (is_close_bracket(t) && depth > 0) --depth;
        cur.toks.push_back(t);
    }
    flush();
    return lines;
}

// Position of the colon ending a compound-statement header.
size_t header_colon(TokenSpan toks) {
    int depth = 0;
    int lambdas = 0;
    for (size_t i = 0; i < toks.size(); ++i) {
        if (is_open_bracket(toks[i])) ++depth;
        else if (is_close_bracket(toks[i])) depth = std::max(0, depth - 1);
        else if (depth == 0 && toks[i].is("lambda")) ++lambdas;
        else if (depth == 0 && toks[i].is(":")) {
            if (lambdas > 0) {
                --lambdas;
                continue;
            }
            return i;
        }
    }
    return toks.size();
}

enum class FrameKind { module, def, cls, control };
enum class ChainKind { none, if_chain, loop, try_chain };

struct Chain {
    ChainKind kind = ChainKind::none;
    int group = -1;
    int arms = 0;
    int indent = -1;
};

struct Frame {
    FrameKind kind = FrameKind::module;
    int header_indent = -1;
    int fn_index = -1;
    int type_index = -1;
    std::string name;
    std::vector<ArmRef> arms;
    int last_line = 0;
    Chain chain;
    int match_group = -1;
    int match_arms = 0;
};

struct GroupInfo {
    int arm_count = 1;
    bool exhaustive = false;
};

class PythonParser {
public:
    PythonParser(std::string_view path, std::string_view source) : source_(source) {
        unit_.path = std::string(path);
        unit_.language = Language::python;
    }

    SourceUnit run() {
        auto lexed = lex::tokenize_python(source_);
        unit_.warnings = std::move(lexed.warnings);
        unit_.line_count = static_cast<int>(split_lines(source_).size());
        auto lines = logical_lines(lexed.tokens, source_);

        frames_.push_back(Frame{});
        for (auto& line : lines) process(line);
        while (frames_.size() > 1) pop_frame();

        finalize();
        return std::move(unit_);
    }

private:
    std::string_view source_;
    SourceUnit unit_;
    std::vector<Frame> frames_;
    std::vector<GroupInfo> groups_;
    std::optional<int> pending_decorator_;

    int new_group() {
        groups_.push_back(GroupInfo{});
        return static_cast<int>(groups_.size()) - 1;
    }

    void pop_frame() {
        Frame f = std::move(frames_.back());
        frames_.pop_back();
        if (f.kind == FrameKind::def && f.fn_index >= 0) {
            auto& fn = unit_.functions[static_cast<size_t>(f.fn_index)];
            fn.end_line = std::max(fn.start_line, f.last_line);
        }
        if (f.kind == FrameKind::cls && f.type_index >= 0) {
            auto& td = unit_.types[static_cast<size_t>(f.type_index)];
            td.end_line = std::max(td.start_line, f.last_line);
        }
        frames_.back().last_line = std::max(frames_.back().last_line, f.last_line);
    }

    std::string qualify(const std::string& name) const {
        std::string q;
        for (const auto& f : frames_) {
            if (f.kind == FrameKind::def || f.kind == FrameKind::cls) q += f.name + ".";
        }
        return q + name;
    }

    std::string enclosing_class() const {
        if (frames_.back().kind == FrameKind::cls) return frames_.back().name;
        return {};
    }

    static bool is_continuation(std::string_view kw) {
        return kw == "elif" || kw == "else" || kw == "except" || kw == "finally";
    }

    void process(LogicalLine& line) {
        TokenSpan toks(line.toks);
        while (frames_.size() > 1 && line.indent <= frames_.back().header_indent) pop_frame();

        Frame& parent = frames_.back();
        parent.last_line = std::max(parent.last_line, line.last_line);

        std::string_view kw = toks.front().text;
        size_t kw_pos = 0;
        if (kw == "async" && toks.size() > 1) {
            kw = toks[1].text;
            kw_pos = 1;
        }

        if (toks.front().is("@")) {
            if (!pending_decorator_) pending_decorator_ = line.first_line;
            return;
        }

        bool continuation = is_continuation(kw) && toks.front().is_name();
        Chain saved_chain = parent.chain;
        if (!continuation) parent.chain = Chain{};

        size_t colon = header_colon(toks);
        bool has_colon = colon < toks.size();
        TokenSpan head = toks.subspan(0, std::min(colon, toks.size()));
        TokenSpan tail = has_colon ? toks.subspan(colon + 1) : TokenSpan{};
        std::vector<ArmRef> base = parent.arms;

        auto push_control = [&](std::vector<ArmRef> arms) {
            Frame f;
            f.kind = FrameKind::control;
            f.header_indent = line.indent;
            f.arms = std::move(arms);
            f.last_line = line.last_line;
            frames_.push_back(std::move(f));
        };
        auto with_arm = [&](int group, int arm) {
            auto a = base;
            a.push_back(ArmRef{group, arm, 1, false});
            return a;
        };

        if (has_colon && toks.front().is_name() && (kw == "def" || kw == "class") && kw_pos + 1 < toks.size()) {
            std::string name(toks[kw_pos + 1].text);
            int start = pending_decorator_.value_or(line.first_line);
            pending_decorator_.reset();
            Frame f;
            f.header_indent = line.indent;
            f.name = name;
            f.last_line = line.last_line;
            if (kw == "def") {
                FunctionSpan fn;
                fn.name = name;
                fn.qualified_name = qualify(name);
                fn.start_line = start;
                fn.end_line = line.last_line;
                fn.owner_type = enclosing_class();
                unit_.functions.push_back(std::move(fn));
                f.kind = FrameKind::def;
                f.fn_index = static_cast<int>(unit_.functions.size()) - 1;
            } else {
                TypeDecl td;
                td.name = name;
                td.qualified_name = qualify(name);
                td.kind = "class";
                td.start_line = start;
                td.end_line = line.last_line;
                if (kw_pos + 2 < head.size() && head[kw_pos + 2].is("(")) {
                    size_t close = match_bracket(head, kw_pos + 2);
                    auto inside = head.subspan(kw_pos + 3, std::min(close, head.size()) - kw_pos - 3);
                    for (auto part : split_top_level(inside, ",")) {
                        std::string last;
                        for (const auto& t : part)
                            if (t.is_name()) last = std::string(t.text);
                        if (!last.empty()) td.supertypes.push_back(last);
                    }
                }
                unit_.types.push_back(std::move(td));
                f.kind = FrameKind::cls;
                f.type_index = static_cast<int>(unit_.types.size()) - 1;
                f.arms = base;
            }
            frames_.push_back(std::move(f));
            simple_statements(tail, frames_.back().arms);
            return;
        }
        pending_decorator_.reset();

        if (!has_colon || !toks.front().is_name()) {
            simple_statements(toks, base);
            return;
        }

        if (kw == "if") {
            int g = new_group();
            header_expr(head.subspan(kw_pos + 1), head, base);
            push_control(with_arm(g, 0));
            parent_chain() = Chain{ChainKind::if_chain, g, 1, line.indent};
        } else if (kw == "elif") {
            if (saved_chain.kind == ChainKind::if_chain && saved_chain.indent == line.indent) {
                int arm = saved_chain.arms;
                auto arms = with_arm(saved_chain.group, arm);
                header_expr(head.subspan(1), head, arms);
                push_control(arms);
                saved_chain.arms++;
                groups_[static_cast<size_t>(saved_chain.group)].arm_count = saved_chain.arms;
                parent_chain() = saved_chain;
            } else {
                int g = new_group();
                header_expr(head.subspan(1), head, base);
                push_control(with_arm(g, 0));
                parent_chain() = Chain{ChainKind::if_chain, g, 1, line.indent};
            }
        } else if (kw == "else") {
            if (saved_chain.indent == line.indent &&
                (saved_chain.kind == ChainKind::if_chain || saved_chain.kind == ChainKind::loop)) {
                int arm = saved_chain.arms;
                auto& info = groups_[static_cast<size_t>(saved_chain.group)];
                info.arm_count = arm + 1;
                if (saved_chain.kind == ChainKind::if_chain) info.exhaustive = true;
                push_control(with_arm(saved_chain.group, arm));
            } else {
                push_control(base);
                if (saved_chain.kind == ChainKind::try_chain) parent_chain() = saved_chain;
            }
        } else if (kw == "for") {
            int g = new_group();
            auto arms = with_arm(g, 0);
            for_header(head.subspan(kw_pos + 1), head, arms);
            push_control(arms);
            parent_chain() = Chain{ChainKind::loop, g, 1, line.indent};
        } else if (kw == "while") {
            int g = new_group();
            header_expr(head.subspan(1), head, base);
            push_control(with_arm(g, 0));
            parent_chain() = Chain{ChainKind::loop, g, 1, line.indent};
        } else if (kw == "try") {
            push_control(base);
            parent_chain() = Chain{ChainKind::try_chain, -1, 0, line.indent};
        } else if (kw == "except") {
            if (saved_chain.kind == ChainKind::try_chain && saved_chain.indent == line.indent) {
                if (saved_chain.group < 0) saved_chain.group = new_group();
                int arm = saved_chain.arms++;
                groups_[static_cast<size_t>(saved_chain.group)].arm_count = saved_chain.arms;
                auto arms = with_arm(saved_chain.group, arm);
                except_header(head.subspan(1), head, arms);
                push_control(arms);
                parent_chain() = saved_chain;
            } else {
                except_header(head.subspan(1), head, base);
                push_control(base);
            }
        } else if (kw == "finally") {
            push_control(base);
        } else if (kw == "with") {
            with_header(head.subspan(kw_pos + 1), head, base);
            push_control(base);
        } else if (kw == "match" && head.size() >= 2 && !head[1].is("=") && !head[1].is(".")) {
            int g = new_group();
            header_expr(head.subspan(1), head, base);
            push_control(base);
            frames_.back().match_group = g;
        } else if (kw == "case" && frames_.back().match_group >= 0) {
            Frame& m = frames_.back();
            int arm = m.match_arms++;
            auto& info = groups_[static_cast<size_t>(m.match_group)];
            info.arm_count = m.match_arms;
            if (head.size() == 2 && head[1].is("_")) info.exhaustive = true;
            auto arms = m.arms;
            arms.push_back(ArmRef{m.match_group, arm, 1, false});
            push_control(arms);
        } else {
            // Not a recognised compound header (e.g. a dict display or a
            // broken line): treat the whole line as simple statements.
            simple_statements(toks, base);
            return;
        }
        simple_statements(tail, frames_.back().arms);
    }

    Chain& parent_chain() {
        // The frame just pushed is the body; its parent owns the chain.
        return frames_[frames_.size() - 2].chain;
    }

    Statement make_statement(TokenSpan span_for_pos, const std::vector<ArmRef>& arms) const {
        Statement s;
        s.line = span_for_pos.front().line;
        s.column = span_for_pos.front().column;
        s.end_line = span_for_pos.front().end_line;
        for (const auto& t : span_for_pos) s.end_line = std::max(s.end_line, t.end_line);
        s.arms = arms;
        s.text = source_text(source_, span_for_pos);
        return s;
    }

    void add_statement(Statement s) { unit_.statements.push_back(std::move(s)); }

    void header_expr(TokenSpan expr, TokenSpan head, const std::vector<ArmRef>& arms) {
        Statement s = make_statement(head, arms);
        ExprFacts f;
        analyze_expr(expr, Language::python, source_, f);
        s.used_vars = std::move(f.uses);
        s.calls = std::move(f.calls);
        s.defined_vars = std::move(f.walrus_defs);
        s.kind = s.defined_vars.empty() ? StatementKind::expression : StatementKind::assignment;
        add_statement(std::move(s));
    }

    void for_header(TokenSpan rest, TokenSpan head, const std::vector<ArmRef>& arms) {
        Statement s = make_statement(head, arms);
        size_t in_pos = rest.size();
        int depth = 0;
        for (size_t i = 0; i < rest.size(); ++i) {
            if (is_open_bracket(rest[i])) ++depth;
            else if (is_close_bracket(rest[i])) depth = std::max(0, depth - 1);
            else if (depth == 0 && rest[i].is("in")) {
                in_pos = i;
                break;
            }
        }
        analyze_targets(rest.subspan(0, in_pos), s);
        if (in_pos < rest.size()) {
            ExprFacts f;
            analyze_expr(rest.subspan(in_pos + 1), Language::python, source_, f);
            s.used_vars.insert(f.uses.begin(), f.uses.end());
            s.calls = std::move(f.calls);
        }
        s.kind = s.defined_vars.empty() ? StatementKind::expression : StatementKind::assignment;
        add_statement(std::move(s));
    }

    void except_header(TokenSpan rest, TokenSpan head, const std::vector<ArmRef>& arms) {
        Statement s = make_statement(head, arms);
        auto parts = split_top_level(rest, "as");
        ExprFacts f;
        analyze_expr(parts.front(), Language::python, source_, f);
        s.used_vars = std::move(f.uses);
        s.calls = std::move(f.calls);
        if (parts.size() > 1 && parts[1].size() == 1 && parts[1][0].is_name()) {
            s.defined_vars.insert(std::string(parts[1][0].text));
            s.targets.push_back(std::string(parts[1][0].text));
        }
        s.kind = s.defined_vars.empty() ? StatementKind::other : StatementKind::assignment;
        add_statement(std::move(s));
    }

    void with_header(TokenSpan rest, TokenSpan head, const std::vector<ArmRef>& arms) {
        Statement s = make_statement(head, arms);
        TokenSpan items = rest;
        if (items.size() >= 2 && items.front().is("(") && match_bracket(items, 0) == items.size() - 1)
            items = items.subspan(1, items.size() - 2);
        for (auto item : split_top_level(items, ",")) {
            auto parts = split_top_level(item, "as");
            ExprFacts f;
            analyze_expr(parts.front(), Language::python, source_, f);
            s.used_vars.insert(f.uses.begin(), f.uses.end());
            for (auto& c : f.calls) s.calls.push_back(std::move(c));
            if (parts.size() > 1) analyze_targets(parts[1], s);
        }
        s.kind = s.defined_vars.empty() ? StatementKind::expression : StatementKind::assignment;
        add_statement(std::move(s));
    }

    // Assignment targets: names are definitions, attribute/subscript targets
    // are recorded as chains and their base names count as reads.
    void analyze_targets(TokenSpan target, Statement& s) {
        while (target.size() >= 2 && (target.front().is("(") || target.front().is("[")) &&
               match_bracket(target, 0) == target.size() - 1)
            target = target.subspan(1, target.size() - 2);
        auto parts = split_top_level(target, ",");
        if (parts.size() > 1) {
            for (auto p : parts)
                if (!p.empty()) analyze_targets(p, s);
            return;
        }
        if (!target.empty() && target.front().is("*")) target = target.subspan(1);
        if (target.empty()) return;
        if (target.size() == 1 && target[0].is_name() && !lex::is_python_keyword(target[0].text)) {
            s.defined_vars.insert(std::string(target[0].text));
            s.targets.push_back(std::string(target[0].text));
            return;
        }
        if (auto chain = dotted_chain(target)) s.targets.push_back(*chain);
        ExprFacts f;
        analyze_expr(target, Language::python, source_, f);
        s.used_vars.insert(f.uses.begin(), f.uses.end());
        for (auto& c : f.calls) s.calls.push_back(std::move(c));
    }

    void simple_statements(TokenSpan toks, const std::vector<ArmRef>& arms) {
        if (toks.empty()) return;
        for (auto part : split_top_level(toks, ";")) {
            if (!part.empty()) simple_statement(part, arms);
        }
    }

    void import_statement(TokenSpan toks, Statement& s) {
        int line = toks.front().line;
        if (toks.front().is("import")) {
            for (auto item : split_top_level(toks.subspan(1), ",")) {
                auto parts = split_top_level(item, "as");
                auto mod = dotted_chain(parts.front());
                if (!mod) continue;
                ImportDecl d;
                d.module_or_type = *mod;
                d.line = line;
                if (parts.size() > 1 && parts[1].size() == 1) d.alias = std::string(parts[1][0].text);
                unit_.imports.push_back(std::move(d));
            }
            return;
        }
        // from X import a as b, c
        size_t imp = 1;
        while (imp < toks.size() && !toks[imp].is("import")) ++imp;
        std::string module;
        for (size_t i = 1; i < imp; ++i) module += toks[i].text;
        if (imp >= toks.size()) return;
        TokenSpan names = toks.subspan(imp + 1);
        if (!names.empty() && names.front().is("(")) names = names.subspan(1, names.size() >= 2 ? names.size() - 2 : 0);
        for (auto item : split_top_level(names, ",")) {
            if (item.empty()) continue;
            ImportDecl d;
            d.line = line;
            d.from_import = true;
            if (item.size() == 1 && item[0].is("*")) {
                d.module_or_type = module;
                d.wildcard = true;
            } else {
                auto parts = split_top_level(item, "as");
                if (parts.front().empty()) continue;
                d.module_or_type = module.empty() || module.back() == '.'
                                       ? module + std::string(parts.front().front().text)
                                       : module + "." + std::string(parts.front().front().text);
                if (parts.size() > 1 && parts[1].size() == 1) d.alias = std::string(parts[1][0].text);
            }
            unit_.imports.push_back(std::move(d));
        }
        (void)s;
    }

    void simple_statement(TokenSpan toks, const std::vector<ArmRef>& arms) {
        Statement s = make_statement(toks, arms);
        std::string_view kw = toks.front().is_name() ? toks.front().text : std::string_view{};

        if (kw == "import" || (kw == "from" && toks.size() > 1)) {
            import_statement(toks, s);
            s.kind = StatementKind::other;
            add_statement(std::move(s));
            return;
        }
        if (kw == "pass" || kw == "break" || kw == "continue" || kw == "global" || kw == "nonlocal") {
            s.kind = StatementKind::other;
            add_statement(std::move(s));
            return;
        }
        if (kw == "return" || kw == "yield" || kw == "raise" || kw == "assert" || kw == "del" ||
            kw == "await") {
            ExprFacts f;
            analyze_expr(toks.subspan(1), Language::python, source_, f);
            s.used_vars = std::move(f.uses);
            s.calls = std::move(f.calls);
            s.is_return = kw == "return";
            s.kind = kw == "del" ? StatementKind::other : StatementKind::expression;
            add_statement(std::move(s));
            return;
        }

        // Locate top-level assignment operators.
        std::vector<size_t> eq_pos;
        size_t aug_pos = toks.size();
        size_t annot_pos = toks.size();
        int depth = 0;
        for (size_t i = 0; i < toks.size(); ++i) {
            const auto& t = toks[i];
            if (is_open_bracket(t)) ++depth;
            else if (is_close_bracket(t)) depth = std::max(0, depth - 1);
            else if (depth == 0 && t.kind == TokKind::op) {
                if (t.text == "=") eq_pos.push_back(i);
                else if (t.text != ":=" && is_assign_op(t.text) && aug_pos == toks.size()) aug_pos = i;
                else if (t.text == ":" && annot_pos == toks.size() && eq_pos.empty()) annot_pos = i;
            }
            if (depth == 0 && t.is("lambda")) break;
        }

        if (!eq_pos.empty()) {
            size_t start = 0;
            for (size_t k = 0; k < eq_pos.size(); ++k) {
                size_t end = eq_pos[k];
                TokenSpan target = toks.subspan(start, end - start);
                if (k == 0 && annot_pos < end) target = toks.subspan(0, annot_pos);
                analyze_targets(target, s);
                start = end + 1;
            }
            TokenSpan value = toks.subspan(eq_pos.back() + 1);
            ExprFacts f;
            analyze_expr(value, Language::python, source_, f);
            s.used_vars.insert(f.uses.begin(), f.uses.end());
            for (auto& c : f.calls) s.calls.push_back(std::move(c));
            s.defined_vars.insert(f.walrus_defs.begin(), f.walrus_defs.end());
            s.value_chain = dotted_chain(value);
            s.kind = s.defined_vars.empty() ? StatementKind::expression : StatementKind::assignment;
        } else if (aug_pos < toks.size()) {
            analyze_targets(toks.subspan(0, aug_pos), s);
            for (const auto& d : s.defined_vars) s.used_vars.insert(d);
            ExprFacts f;
            analyze_expr(toks.subspan(aug_pos + 1), Language::python, source_, f);
            s.used_vars.insert(f.uses.begin(), f.uses.end());
            for (auto& c : f.calls) s.calls.push_back(std::move(c));
            s.kind = s.defined_vars.empty() ? StatementKind::expression : StatementKind::assignment;
        } else if (annot_pos < toks.size() && annot_pos > 0) {
            s.kind = StatementKind::other;  // bare annotation `x: int`
        } else {
            ExprFacts f;
            analyze_expr(toks, Language::python, source_, f);
            s.used_vars = std::move(f.uses);
            s.calls = std::move(f.calls);
            s.defined_vars = std::move(f.walrus_defs);
            if (!s.defined_vars.empty()) {
                s.kind = StatementKind::assignment;
            } else if (is_load_call_statement(s)) {
                s.kind = StatementKind::load_decl;
            } else {
                s.kind = (s.used_vars.empty() && s.calls.empty()) ? StatementKind::other : StatementKind::expression;
            }
        }
        add_statement(std::move(s));
    }

    static bool is_load_call_statement(const Statement& s) {
        for (const auto& c : s.calls) {
            if (c.callee == "CDLL" || c.callee == "WinDLL" || c.callee == "OleDLL" || c.callee == "PyDLL" ||
                c.callee == "LoadLibrary" || c.callee == "dlopen")
                return true;
        }
        return false;
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
        std::stable_sort(unit_.functions.begin(), unit_.functions.end(), [](const auto& a, const auto& b) {
            return std::pair(a.start_line, -a.end_line) < std::pair(b.start_line, -b.end_line);
        });
        for (auto& fn : unit_.functions) {
            fn.end_line = std::min(fn.end_line, std::max(unit_.line_count, fn.start_line));
            fn.body_text = slice_lines(source_, fn.start_line, fn.end_line);
        }
    }
};

}  // namespace

SourceUnit parse_python(std::string_view path, std::string_view source) {
    return PythonParser(path, source).run();
}

}  // namespace xlb::detail
