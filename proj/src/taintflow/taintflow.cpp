#include "xlb/taintflow.hpp"

#include <algorithm>
#include <map>

#include "xlb/error.hpp"

namespace xlb {
namespace {

struct Taint {
    int depth;
    const CrossLangSite* origin;
};

using TaintState = std::map<std::string, Taint>;

bool earlier(const CrossLangSite* a, const CrossLangSite* b) {
    return std::tie(a->line, a->column) < std::tie(b->line, b->column);
}

// Keeps the smaller depth; ties go to the earlier origin.
void keep_min(std::optional<Taint>& best, const Taint& t) {
    if (!best || t.depth < best->depth || (t.depth == best->depth && earlier(t.origin, best->origin))) best = t;
}

TaintState merge(const std::vector<const TaintState*>& states) {
    TaintState out;
    for (const auto* s : states)
        for (const auto& [v, t] : *s) {
            auto it = out.find(v);
            if (it == out.end()) {
                out.emplace(v, t);
            } else {
                std::optional<Taint> best = it->second;
                keep_min(best, t);
                it->second = *best;
            }
        }
    return out;
}

// One open branch group while walking a function body.
struct GroupFrame {
    int group;
    int arm;
    int arm_count;
    bool exhaustive;
    TaintState entry;
    std::vector<TaintState> finished;
    std::set<int> observed;
};

struct FlowMark {
    Taint taint;
    std::optional<std::string> var;
};

// Function name -> (return depth, origin), from the first pass.
using ReturnTable = std::map<std::string, Taint>;

class Propagator {
public:
    Propagator(const SourceUnit& unit, const std::vector<CrossLangSite>& sites, int max_transfers)
        : unit_(unit), sites_(sites), max_(max_transfers) {
        for (const auto& st : unit.statements) {
            const FunctionSpan* fn = function_at(unit, st.line);
            scopes_[fn].push_back(&st);
        }
        for (const auto& site : sites_) {
            const Statement* owner = owning_statement(site);
            if (owner && site.kind == SiteKind::call) seeds_[owner].push_back(&site);
        }
    }

    std::vector<TaintMark> run() {
        // Pass 1: return depths of every function in the unit.
        for (const auto& fn : unit_.functions) {
            std::optional<Taint> ret;
            walk_scope(&fn, ReturnTable{}, &ret, false);
            if (ret) {
                auto it = returns_.find(fn.name);
                std::optional<Taint> best;
                if (it != returns_.end()) best = it->second;
                keep_min(best, *ret);
                returns_[fn.name] = *best;
            }
        }
        // Pass 2: marks, with calls to tainted-return functions as reads.
        for (const auto& [fn, _] : scopes_) walk_scope(fn, returns_, nullptr, true);

        std::vector<TaintMark> out;
        std::map<int, const CrossLangSite*> site_lines;
        for (const auto& s : sites_) {
            auto it = site_lines.find(s.line);
            if (it == site_lines.end() || earlier(&s, it->second)) site_lines[s.line] = &s;
        }
        for (const auto& [line, origin] : site_lines)
            out.push_back(TaintMark{unit_.path, line, 0, *origin, std::nullopt});
        for (const auto& [line, fm] : flow_)
            out.push_back(TaintMark{unit_.path, line, fm.taint.depth, *fm.taint.origin, fm.var});
        std::sort(out.begin(), out.end(),
                  [](const auto& a, const auto& b) { return std::tie(a.line, a.depth) < std::tie(b.line, b.depth); });
        return out;
    }

private:
    const SourceUnit& unit_;
    const std::vector<CrossLangSite>& sites_;
    int max_;
    std::map<const FunctionSpan*, std::vector<const Statement*>> scopes_;
    std::map<const Statement*, std::vector<const CrossLangSite*>> seeds_;
    ReturnTable returns_;
    std::map<int, FlowMark> flow_;

    const Statement* owning_statement(const CrossLangSite& site) const {
        for (const auto& st : unit_.statements) {
            if (site.line < st.line || site.line > st.end_line) continue;
            for (const auto& c : st.calls)
                if (c.line == site.call.line && c.column == site.call.column && c.callee == site.call.callee)
                    return &st;
        }
        return nullptr;
    }

    // Calls in `st` that resolve to functions of this unit with a tainted return.
    std::optional<Taint> call_read(const Statement& st, const ReturnTable& returns) const {
        std::optional<Taint> best;
        if (returns.empty()) return best;
        for (const auto& c : st.calls) {
            bool local = !c.receiver || *c.receiver == "self" || *c.receiver == "this";
            if (!local || c.is_constructor) continue;
            if (auto it = returns.find(c.callee); it != returns.end()) keep_min(best, it->second);
        }
        return best;
    }

    void record_flow(int line, Taint t, std::optional<std::string> var) {
        auto it = flow_.find(line);
        if (it == flow_.end()) {
            flow_.emplace(line, FlowMark{t, std::move(var)});
            return;
        }
        std::optional<Taint> best = it->second.taint;
        keep_min(best, t);
        if (best->depth != it->second.taint.depth || best->origin != it->second.taint.origin) {
            it->second = FlowMark{*best, std::move(var)};
        }
    }

    void apply(const Statement& st, TaintState& state, const ReturnTable& returns, std::optional<Taint>* ret,
               bool emit) {
        // Minimum-depth tainted read, with the variable it came from.
        std::optional<Taint> read;
        std::optional<std::string> read_var;
        for (const auto& v : st.used_vars) {
            auto it = state.find(v);
            if (it == state.end()) continue;
            auto before = read;
            keep_min(read, it->second);
            if (!before || read->depth != before->depth || read->origin != before->origin) read_var = v;
        }
        if (auto f = call_read(st, returns)) {
            auto before = read;
            keep_min(read, *f);
            if (!before || read->depth != before->depth || read->origin != before->origin) read_var.reset();
        }

        std::optional<Taint> seeded;
        if (auto it = seeds_.find(&st); it != seeds_.end()) seeded = Taint{1, it->second.front()};

        if (st.is_return && ret) {
            if (seeded) keep_min(*ret, *seeded);
            else if (read) keep_min(*ret, *read);
        }

        if (!st.defined_vars.empty()) {
            std::optional<Taint> result = seeded;
            if (read && read->depth < max_) keep_min(result, Taint{read->depth + 1, read->origin});
            for (const auto& d : st.defined_vars) {
                if (result) state[d] = *result;
                else state.erase(d);
            }
            if (result && emit) {
                std::optional<std::string> name;
                if (st.defined_vars.size() == 1) name = *st.defined_vars.begin();
                record_flow(st.line, *result, name);
            }
            return;
        }
        if (read && emit) record_flow(st.line, *read, read_var);
    }

    void close_group(std::vector<GroupFrame>& stack, TaintState& state) {
        GroupFrame& top = stack.back();
        top.finished.push_back(state);
        std::vector<const TaintState*> parts;
        for (const auto& s : top.finished) parts.push_back(&s);
        bool all_arms = static_cast<int>(top.observed.size()) >= top.arm_count;
        if (!top.exhaustive || !all_arms) parts.push_back(&top.entry);
        state = merge(parts);
        stack.pop_back();
    }

    void walk_scope(const FunctionSpan* fn, const ReturnTable& returns, std::optional<Taint>* ret, bool emit) {
        auto it = scopes_.find(fn);
        if (it == scopes_.end()) return;
        TaintState state;
        std::vector<GroupFrame> stack;
        for (const Statement* st : it->second) {
            const auto& path = st->arms;
            size_t k = 0;
            while (k < stack.size() && k < path.size() && stack[k].group == path[k].group &&
                   stack[k].arm == path[k].arm)
                ++k;
            while (stack.size() > k) {
                size_t depth = stack.size() - 1;
                if (depth == k && k < path.size() && stack[k].group == path[k].group) {
                    // Same group, next arm: restart from the group's entry state.
                    GroupFrame& g = stack.back();
                    g.finished.push_back(state);
                    state = g.entry;
                    g.arm = path[k].arm;
                    g.observed.insert(g.arm);
                    ++k;
                    break;
                }
                close_group(stack, state);
            }
            for (size_t i = stack.size(); i < path.size(); ++i) {
                const ArmRef& a = path[i];
                stack.push_back(GroupFrame{a.group, a.arm, a.arm_count, a.exhaustive, state, {}, {a.arm}});
            }
            apply(*st, state, returns, ret, emit);
        }
        while (!stack.empty()) close_group(stack, state);
    }
};

}  // namespace

std::vector<TaintMark> propagate(const SourceUnit& unit, const std::vector<CrossLangSite>& sites,
                                 int max_transfers) {
    if (max_transfers < 1) throw Error(ErrorKind::invalid_config, "max_transfers must be at least 1");
    for (const auto& s : sites) {
        if (s.file != unit.path)
            throw Error(ErrorKind::site_not_in_unit, "site from " + s.file + " passed with unit " + unit.path);
        if (s.line < 1 || s.line > unit.line_count)
            throw Error(ErrorKind::site_not_in_unit,
                        "site line " + std::to_string(s.line) + " outside " + unit.path);
    }
    return Propagator(unit, sites, max_transfers).run();
}

FunctionSpan module_span(const SourceUnit& unit) {
    FunctionSpan m;
    m.name = "<module>";
    m.qualified_name = "<module>";
    m.start_line = 1;
    m.end_line = std::max(1, unit.line_count);
    return m;
}

std::vector<FunctionSpan> cross_language_functions(const SourceUnit& unit, const std::vector<TaintMark>& marks) {
    std::set<const FunctionSpan*> hit;
    bool module = false;
    for (const auto& m : marks) {
        if (const FunctionSpan* fn = function_at(unit, m.line)) hit.insert(fn);
        else module = true;
    }
    std::vector<FunctionSpan> out;
    for (const auto* fn : hit) out.push_back(*fn);
    if (module) out.push_back(module_span(unit));
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return std::tie(a.start_line, a.end_line, a.qualified_name) < std::tie(b.start_line, b.end_line, b.qualified_name);
    });
    return out;
}

}  // namespace xlb
