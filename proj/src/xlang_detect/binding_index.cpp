#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "xlb/error.hpp"
#include "xlb/xlang_detect.hpp"

namespace xlb {
namespace {

bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

int line_of(std::string_view text, size_t offset) {
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

size_t skip_space(std::string_view t, size_t i) {
    while (i < t.size() && std::isspace(static_cast<unsigned char>(t[i]))) ++i;
    return i;
}

std::string read_ident(std::string_view t, size_t& i) {
    size_t b = i;
    while (i < t.size() && is_ident_char(t[i])) ++i;
    return std::string(t.substr(b, i - b));
}

// Word-bounded occurrences of `word` in `text`.
std::vector<size_t> find_word(std::string_view text, std::string_view word) {
    std::vector<size_t> out;
    size_t pos = 0;
    while ((pos = text.find(word, pos)) != std::string_view::npos) {
        bool left = pos == 0 || !is_ident_char(text[pos - 1]);
        bool right = pos + word.size() >= text.size() || !is_ident_char(text[pos + word.size()]);
        if (left && right) out.push_back(pos);
        pos += word.size();
    }
    return out;
}

struct ModuleHit {
    std::string module;
    Mechanism mechanism;
    Evidence evidence;
};

std::string line_text(std::string_view text, size_t offset) {
    size_t b = text.rfind('\n', offset);
    b = b == std::string_view::npos ? 0 : b + 1;
    size_t e = text.find('\n', offset);
    if (e == std::string_view::npos) e = text.size();
    std::string s(text.substr(b, e - b));
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    size_t lead = s.find_first_not_of(" \t");
    return lead == std::string::npos ? std::string{} : s.substr(lead);
}

void scan_native_file(const NativeFile& f, const PatternConfig& patterns, std::vector<ModuleHit>& hits) {
    std::string_view t = f.content;
    auto hit = [&](std::string module, Mechanism m, size_t offset) {
        if (module.empty()) return;
        hits.push_back(ModuleHit{std::move(module), m, Evidence{f.path, line_of(t, offset), line_text(t, offset)}});
    };

    // MACRO(name ...) and MACRO("name" ...)
    for (auto m : {Mechanism::pybind11, Mechanism::boost_python, Mechanism::python_c_api, Mechanism::swig}) {
        for (const auto& macro : patterns.get(m, "macros")) {
            for (size_t pos : find_word(t, macro)) {
                size_t i = skip_space(t, pos + macro.size());
                if (i >= t.size() || t[i] != '(') continue;
                i = skip_space(t, i + 1);
                if (i < t.size() && t[i] == '"') ++i;
                hit(read_ident(t, i), m, pos);
            }
        }
    }

    // SWIG: %module [(options)] name
    bool swig_file = f.path.ends_with(".i") || f.path.ends_with(".swg");
    if (swig_file) {
        size_t pos = 0;
        while ((pos = t.find("%module", pos)) != std::string_view::npos) {
            size_t i = skip_space(t, pos + 7);
            if (i < t.size() && t[i] == '(') {
                size_t close = t.find(')', i);
                if (close == std::string_view::npos) break;
                i = skip_space(t, close + 1);
            }
            if (i < t.size() && t[i] == '"') ++i;
            std::string name = read_ident(t, i);
            if (!name.empty()) {
                hit(name, Mechanism::swig, pos);
                hit("_" + name, Mechanism::swig, pos);
            }
            pos += 7;
        }
    }

    // Module initializers: PyInit_<name>(...) definitions and
    // `PyMODINIT_FUNC init<name>(...)` for the Python 2 API.
    for (size_t pos : find_word(t, "PyMODINIT_FUNC")) {
        size_t i = skip_space(t, pos + 14);
        std::string fn = read_ident(t, i);
        i = skip_space(t, i);
        if (i >= t.size() || t[i] != '(') continue;
        if (fn.starts_with("PyInit_")) hit(fn.substr(7), Mechanism::python_c_api, pos);
        else if (fn.starts_with("init") && fn.size() > 4) hit(fn.substr(4), Mechanism::python_c_api, pos);
    }
    size_t pos = 0;
    while ((pos = t.find("PyInit_", pos)) != std::string_view::npos) {
        size_t i = pos + 7;
        if (pos > 0 && is_ident_char(t[pos - 1])) {
            pos = i;
            continue;
        }
        std::string name = read_ident(t, i);
        i = skip_space(t, i);
        if (i < t.size() && t[i] == '(') hit(name, Mechanism::python_c_api, pos);
        pos = i;
    }
}

int precedence(Mechanism m) {
    switch (m) {
        case Mechanism::pybind11: return 4;
        case Mechanism::boost_python: return 3;
        case Mechanism::swig: return 2;
        case Mechanism::python_c_api: return 1;
        default: return 0;
    }
}

void add_evidence(BindingEntry& e, Evidence ev) {
    if (std::find(e.evidence.begin(), e.evidence.end(), ev) == e.evidence.end()) e.evidence.push_back(std::move(ev));
}

bool matches_loader(const CallExpr& c, const std::vector<std::string>& loaders) {
    if (!c.receiver) return false;
    for (const auto& l : loaders) {
        auto dot = l.rfind('.');
        if (dot == std::string::npos) continue;
        std::string_view recv(l.data(), dot);
        std::string_view callee = std::string_view(l).substr(dot + 1);
        if (c.callee != callee) continue;
        // Accept both `Native.load` and the qualified `com.sun.jna.Native.load`.
        const std::string& r = *c.receiver;
        if (r == recv || (r.size() > recv.size() && r.ends_with(recv) && r[r.size() - recv.size() - 1] == '.'))
            return true;
    }
    return false;
}

// `Foo.class` tokens inside call arguments.
std::vector<std::string> class_literals(std::string_view args) {
    std::vector<std::string> out;
    for (size_t pos : find_word(args, "class")) {
        if (pos < 2 || args[pos - 1] != '.') continue;
        size_t e = pos - 1;
        size_t b = e;
        while (b > 0 && is_ident_char(args[b - 1])) --b;
        if (b < e) out.emplace_back(args.substr(b, e - b));
    }
    return out;
}

}  // namespace

bool is_native_evidence_path(std::string_view path) {
    static constexpr std::array<std::string_view, 12> exts = {".c",  ".cc", ".cpp", ".cxx", ".c++", ".h",
                                                             ".hh", ".hpp", ".hxx", ".i",   ".swg", ".inl"};
    for (auto e : exts)
        if (path.size() > e.size() && path.ends_with(e)) return true;
    return false;
}

NativeBindingIndex build_binding_index(const std::vector<NativeFile>& native_files,
                                       const std::vector<SourceUnit>& units, const PatternConfig& patterns) {
    NativeBindingIndex index;

    // (d) extension modules from native build evidence
    std::vector<std::vector<ModuleHit>> per_file(native_files.size());
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < static_cast<long>(native_files.size()); ++i)
        scan_native_file(native_files[static_cast<size_t>(i)], patterns, per_file[static_cast<size_t>(i)]);
    for (auto& hits : per_file) {
        for (auto& h : hits) {
            auto it = index.python_modules.find(h.module);
            if (it == index.python_modules.end()) {
                BindingEntry e;
                e.mechanism = h.mechanism;
                e.evidence.push_back(std::move(h.evidence));
                index.python_modules.emplace(h.module, std::move(e));
            } else if (precedence(h.mechanism) > precedence(it->second.mechanism)) {
                it->second.mechanism = h.mechanism;
                it->second.evidence = {std::move(h.evidence)};
            } else if (h.mechanism == it->second.mechanism) {
                add_evidence(it->second, std::move(h.evidence));
            }
        }
    }

    // Java side
    const auto jni_loaders = patterns.get(Mechanism::jni, "loaders");
    const auto jna_loaders = patterns.get(Mechanism::jna, "loaders");
    const auto jna_supers = patterns.get(Mechanism::jna, "supertypes");
    const auto jython_prefixes = patterns.get(Mechanism::jython, "imports");
    const auto jython_types = patterns.get(Mechanism::jython, "types");

    bool has_jni_load = false;
    for (const auto& u : units) {
        if (u.language != Language::java) continue;
        for (const auto& s : u.statements)
            for (const auto& c : s.calls)
                if (matches_loader(c, jni_loaders)) has_jni_load = true;
    }

    std::map<std::string, std::vector<std::string>> supertypes;  // interface -> supertypes
    std::map<std::string, Evidence> interface_at;
    for (const auto& u : units) {
        if (u.language != Language::java) continue;

        // (a) classes declaring native methods
        if (has_jni_load) {
            for (const auto& fn : u.functions) {
                if (!fn.is_native_decl || fn.owner_type.empty()) continue;
                auto& e = index.java_types[fn.owner_type];
                if (e.evidence.empty()) e.mechanism = Mechanism::jni;
                if (e.mechanism != Mechanism::jni) continue;
                e.native_methods.insert(fn.name);
                add_evidence(e, Evidence{u.path, fn.start_line, "native method " + fn.qualified_name});
            }
        }

        // (b) JNA library interfaces and Native.load(..., X.class)
        for (const auto& td : u.types) {
            if (td.kind != "interface") continue;
            supertypes[td.name] = td.supertypes;
            interface_at.emplace(td.name, Evidence{u.path, td.start_line, "interface " + td.qualified_name});
        }
        for (const auto& s : u.statements)
            for (const auto& c : s.calls)
                if (matches_loader(c, jna_loaders))
                    for (const auto& cls : class_literals(c.args_text)) {
                        auto& e = index.java_types[cls];
                        if (!e.evidence.empty() && e.mechanism != Mechanism::jna) continue;
                        e.mechanism = Mechanism::jna;
                        add_evidence(e, Evidence{u.path, c.line, s.text});
                    }

        // (c) Jython types
        for (const auto& imp : u.imports) {
            bool jython = std::any_of(jython_prefixes.begin(), jython_prefixes.end(),
                                      [&](const auto& p) { return imp.module_or_type.starts_with(p); });
            if (!jython) continue;
            std::vector<std::string> names;
            if (imp.wildcard) {
                names = jython_types;
            } else {
                auto dot = imp.module_or_type.rfind('.');
                names.push_back(imp.module_or_type.substr(dot + 1));
            }
            for (const auto& n : names) {
                auto& e = index.java_types[n];
                if (!e.evidence.empty() && e.mechanism != Mechanism::jython) continue;
                e.mechanism = Mechanism::jython;
                add_evidence(e, Evidence{u.path, imp.line, "import " + imp.module_or_type});
            }
        }
    }

    // Interfaces extending a JNA base, transitively.
    std::set<std::string> jna(jna_supers.begin(), jna_supers.end());
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& [name, supers] : supertypes) {
            if (jna.count(name)) continue;
            if (std::any_of(supers.begin(), supers.end(), [&](const auto& s) { return jna.count(s) > 0; })) {
                jna.insert(name);
                changed = true;
                auto& e = index.java_types[name];
                if (!e.evidence.empty() && e.mechanism != Mechanism::jna) continue;
                e.mechanism = Mechanism::jna;
                add_evidence(e, interface_at.at(name));
            }
        }
    }

    for (auto& [_, e] : index.java_types) std::sort(e.evidence.begin(), e.evidence.end());
    for (auto& [_, e] : index.python_modules) std::sort(e.evidence.begin(), e.evidence.end());
    return index;
}

NativeBindingIndex build_binding_index(const std::filesystem::path& project_root,
                                       const std::vector<SourceUnit>& units, const PatternConfig& patterns) {
    namespace fs = std::filesystem;
    std::vector<NativeFile> files;
    std::error_code ec;
    if (fs::is_directory(project_root, ec)) {
        fs::recursive_directory_iterator it(project_root, fs::directory_options::skip_permission_denied, ec), end;
        for (; it != end; it.increment(ec)) {
            if (ec) break;
            if (it->is_directory() && it->path().filename() == ".git") {
                it.disable_recursion_pending();
                continue;
            }
            if (!it->is_regular_file()) continue;
            auto rel = fs::relative(it->path(), project_root, ec).generic_string();
            if (!is_native_evidence_path(rel)) continue;
            std::ifstream in(it->path(), std::ios::binary);
            if (!in) {
                spdlog::warn("skipping unreadable native file {}", rel);
                continue;
            }
            std::ostringstream ss;
            ss << in.rdbuf();
            files.push_back(NativeFile{rel, ss.str()});
        }
    }
    std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    return build_binding_index(files, units, patterns);
}

}  // namespace xlb
