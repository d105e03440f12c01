#include <algorithm>
#include <cctype>

#include "xlb/xlang_detect.hpp"

namespace xlb {
namespace {

bool contains(const std::vector<std::string>& v, std::string_view s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

std::string first_component(std::string_view chain) {
    auto dot = chain.find('.');
    return std::string(chain.substr(0, dot));
}

std::string last_component(std::string_view chain) {
    auto dot = chain.rfind('.');
    return std::string(dot == std::string_view::npos ? chain : chain.substr(dot + 1));
}

std::string describe_call(const CallExpr& c) {
    return (c.receiver ? *c.receiver + "." : std::string{}) + c.callee + "(" + c.args_text + ")";
}

CrossLangSite make_site(const SourceUnit& u, Mechanism m, SiteKind kind, const CallExpr& c,
                        std::optional<std::string> handle, std::string evidence) {
    CrossLangSite s;
    s.mechanism = m;
    s.kind = kind;
    s.file = u.path;
    s.line = c.line;
    s.column = c.column;
    s.call = c;
    s.handle_var = std::move(handle);
    s.evidence = std::move(evidence);
    return s;
}

// ---------------------------------------------------------------- Python

struct Handle {
    Mechanism mechanism;
    int line;
    const FunctionSpan* scope;  // nullptr: module level or attribute chain
    std::string via;            // handle the value was derived from
};

struct FunctionAlias {
    Handle handle;
    std::string handle_var;
    std::string callee;
};

struct ModuleRef {
    std::string module;
    const BindingEntry* entry;
};

class PythonDetector {
public:
    PythonDetector(const SourceUnit& u, const NativeBindingIndex& index, const PatternConfig& p)
        : u_(u), index_(index), ctypes_loaders_(p.get(Mechanism::ctypes, "loaders")),
          cffi_loaders_(p.get(Mechanism::cffi, "loaders")) {
        scan_imports(p);
    }

    std::vector<CrossLangSite> run() {
        collect_handles();
        for (const auto& s : u_.statements) visit(s);
        return std::move(sites_);
    }

private:
    const SourceUnit& u_;
    const NativeBindingIndex& index_;
    std::vector<std::string> ctypes_loaders_;
    std::vector<std::string> cffi_loaders_;
    std::vector<CrossLangSite> sites_;

    std::set<std::string> ctypes_roots_;  // names bound to the ctypes module
    std::set<std::string> ctypes_names_;  // names imported from ctypes
    std::set<std::string> cffi_roots_;
    std::set<std::string> cffi_names_;
    std::map<std::string, ModuleRef> modules_;    // local name -> extension module
    std::map<std::string, ModuleRef> functions_;  // from-imported extension functions
    std::vector<std::pair<int, ModuleRef>> import_lines_;
    std::map<std::string, Handle> handles_;
    std::map<std::string, FunctionAlias> aliases_;
    std::set<std::string> ffi_objects_;

    void scan_imports(const PatternConfig& p) {
        auto ctypes_mods = p.get(Mechanism::ctypes, "imports");
        auto cffi_mods = p.get(Mechanism::cffi, "imports");
        for (const auto& imp : u_.imports) {
            const std::string& m = imp.module_or_type;
            if (!imp.from_import) {
                if (contains(ctypes_mods, m)) ctypes_roots_.insert(imp.alias ? *imp.alias : m);
                if (contains(cffi_mods, m)) cffi_roots_.insert(imp.alias ? *imp.alias : m);
                // `import pkg.ext` binds `pkg`; calls then go through `pkg.ext`.
                if (auto e = lookup_module(m)) {
                    std::string bound = imp.alias ? *imp.alias : m;
                    modules_[bound] = *e;
                    import_lines_.push_back({imp.line, *e});
                }
                continue;
            }
            std::string parent = m.substr(0, m.rfind('.') == std::string::npos ? 0 : m.rfind('.'));
            std::string name = last_component(m);
            std::string local = imp.alias ? *imp.alias : name;
            if (contains(ctypes_mods, parent) || contains(ctypes_mods, first_component(m))) {
                if (imp.wildcard) ctypes_names_.insert({"CDLL", "WinDLL", "OleDLL", "PyDLL", "cdll", "windll",
                                                        "oledll", "pydll"});
                else ctypes_names_.insert(local);
                ctypes_roots_.insert("ctypes");  // the module is in use; qualified forms resolve too
            }
            if (contains(cffi_mods, parent) || contains(cffi_mods, first_component(m))) {
                cffi_names_.insert(imp.wildcard ? "FFI" : local);
            }
            if (imp.wildcard) continue;
            // `from pkg import ext` binds a module; `from ext import fn` binds a function.
            if (auto e = lookup_module(m)) {
                modules_[local] = *e;
                import_lines_.push_back({imp.line, *e});
            } else if (auto e2 = lookup_module(parent)) {
                functions_[local] = *e2;
                import_lines_.push_back({imp.line, *e2});
            }
        }
    }

    std::optional<ModuleRef> lookup_module(const std::string& dotted) const {
        if (dotted.empty()) return std::nullopt;
        auto it = index_.python_modules.find(dotted);
        if (it == index_.python_modules.end()) it = index_.python_modules.find(last_component(dotted));
        if (it == index_.python_modules.end()) return std::nullopt;
        return ModuleRef{it->first, &it->second};
    }

    bool is_ctypes_loader(const CallExpr& c) const {
        if (ctypes_roots_.empty() && ctypes_names_.empty()) return false;
        if (!contains(ctypes_loaders_, c.callee)) return false;
        if (!c.receiver) return ctypes_names_.count(c.callee) > 0;
        const std::string& r = *c.receiver;
        if (ctypes_roots_.count(r)) return true;
        // cdll.LoadLibrary / ctypes.cdll.LoadLibrary / windll.kernel32 style roots
        std::string last = last_component(r);
        bool lib_loader = last == "cdll" || last == "windll" || last == "oledll" || last == "pydll";
        if (!lib_loader) return false;
        std::string root = first_component(r);
        return ctypes_roots_.count(root) || ctypes_names_.count(root);
    }

    // ctypes.cdll.libc / cdll.msvcrt: attribute access that loads a library.
    bool is_ctypes_attr_library(std::string_view chain) const {
        if (ctypes_roots_.empty() && ctypes_names_.empty()) return false;
        std::vector<std::string> parts;
        size_t b = 0;
        while (true) {
            size_t d = chain.find('.', b);
            parts.emplace_back(chain.substr(b, d == std::string_view::npos ? std::string_view::npos : d - b));
            if (d == std::string_view::npos) break;
            b = d + 1;
        }
        auto is_loader_obj = [](const std::string& s) {
            return s == "cdll" || s == "windll" || s == "oledll" || s == "pydll";
        };
        if (parts.size() == 2 && is_loader_obj(parts[0]) && ctypes_names_.count(parts[0])) return true;
        if (parts.size() == 3 && ctypes_roots_.count(parts[0]) && is_loader_obj(parts[1])) return true;
        return false;
    }

    bool is_ffi_ctor(const CallExpr& c) const {
        if (c.callee != "FFI") return false;
        if (!c.receiver) return cffi_names_.count("FFI") > 0;
        return cffi_roots_.count(*c.receiver) > 0;
    }

    bool is_cffi_loader(const CallExpr& c) const {
        return c.receiver && contains(cffi_loaders_, c.callee) && ffi_objects_.count(*c.receiver) > 0;
    }

    bool visible(const Handle& h, int line) const {
        if (!h.scope) return true;
        return h.scope->start_line <= line && line <= h.scope->end_line;
    }

    const FunctionSpan* scope_of(const Statement& s, const std::string& target) const {
        if (target.find('.') != std::string::npos) return nullptr;  // attribute chains are file-wide
        return function_at(u_, s.line);
    }

    const Handle* find_handle(const std::string& name, int line) const {
        auto it = handles_.find(name);
        if (it == handles_.end() || !visible(it->second, line)) return nullptr;
        return &it->second;
    }

    void collect_handles() {
        // FFI objects first; dlopen needs them.
        for (const auto& s : u_.statements)
            for (const auto& c : s.calls)
                if (is_ffi_ctor(c))
                    for (const auto& t : s.targets) ffi_objects_.insert(t);
        // Handles and aliases in statement order; a second round picks up
        // aliases defined textually before their source handle.
        for (int round = 0; round < 2; ++round) {
            for (const auto& s : u_.statements) {
                if (s.targets.empty()) continue;
                std::optional<Mechanism> loaded;
                for (const auto& c : s.calls) {
                    if (is_ctypes_loader(c)) loaded = Mechanism::ctypes;
                    else if (is_cffi_loader(c)) loaded = Mechanism::cffi;
                }
                if (!loaded && s.value_chain && is_ctypes_attr_library(*s.value_chain)) loaded = Mechanism::ctypes;
                if (loaded) {
                    for (const auto& t : s.targets)
                        handles_.insert_or_assign(t, Handle{*loaded, s.line, scope_of(s, t), t});
                    continue;
                }
                if (!s.value_chain) continue;
                const std::string& v = *s.value_chain;
                if (const Handle* h = find_handle(v, s.line)) {
                    Handle copy = *h;
                    for (const auto& t : s.targets) {
                        copy.scope = scope_of(s, t);
                        handles_.insert_or_assign(t, copy);
                    }
                    continue;
                }
                auto dot = v.rfind('.');
                if (dot == std::string::npos) continue;
                std::string recv = v.substr(0, dot);
                if (const Handle* h = find_handle(recv, s.line)) {
                    for (const auto& t : s.targets)
                        if (t.find('.') == std::string::npos)
                            aliases_.insert_or_assign(t, FunctionAlias{*h, recv, v.substr(dot + 1)});
                } else if (auto m = modules_.find(recv); m != modules_.end()) {
                    for (const auto& t : s.targets)
                        if (t.find('.') == std::string::npos) functions_[t] = m->second;
                }
            }
        }
    }

    void visit(const Statement& s) {
        for (const auto& [line, ref] : import_lines_) {
            if (line != s.line) continue;
            CallExpr c;
            c.callee = last_component(ref.module);
            c.line = s.line;
            c.column = s.column;
            c.args_text = ref.module;
            sites_.push_back(make_site(u_, ref.entry->mechanism, SiteKind::load_decl, c, ref.module,
                                       "import of extension module " + ref.module + " (" +
                                           ref.entry->evidence.front().file + ":" +
                                           std::to_string(ref.entry->evidence.front().line) + ")"));
        }

        int loader_column = -1;
        Mechanism loader_mech = Mechanism::ctypes;
        for (const auto& c : s.calls) {
            if (is_ctypes_loader(c) || is_cffi_loader(c)) {
                Mechanism m = is_ctypes_loader(c) ? Mechanism::ctypes : Mechanism::cffi;
                std::optional<std::string> handle;
                if (!s.targets.empty()) handle = s.targets.front();
                sites_.push_back(make_site(u_, m, SiteKind::load_decl, c, handle, "library load " + describe_call(c)));
                if (loader_column < 0 || c.column < loader_column) {
                    loader_column = c.column;
                    loader_mech = m;
                }
            }
        }

        for (const auto& c : s.calls) {
            if (is_ctypes_loader(c) || is_cffi_loader(c) || is_ffi_ctor(c)) continue;
            if (c.receiver) {
                const std::string& r = *c.receiver;
                if (const Handle* h = find_handle(r, c.line)) {
                    sites_.push_back(make_site(u_, h->mechanism, SiteKind::call, c, r,
                                               "call through " + std::string(to_string(h->mechanism)) + " handle " +
                                                   r + " bound at line " + std::to_string(h->line)));
                    continue;
                }
                if (is_ctypes_attr_library(r)) {
                    sites_.push_back(make_site(u_, Mechanism::ctypes, SiteKind::call, c, r,
                                               "call into ctypes library " + r));
                    continue;
                }
                if (auto m = modules_.find(r); m != modules_.end()) {
                    module_site(c, m->second, r);
                    continue;
                }
                if (r == "<expr>" && loader_column >= 0 && c.column > loader_column) {
                    sites_.push_back(make_site(u_, loader_mech, SiteKind::call, c, std::nullopt,
                                               "call on freshly loaded library " + describe_call(c)));
                    continue;
                }
                continue;
            }
            if (auto a = aliases_.find(c.callee); a != aliases_.end() && visible(a->second.handle, c.line)) {
                sites_.push_back(make_site(u_, a->second.handle.mechanism, SiteKind::call, c, a->second.handle_var,
                                           c.callee + " aliases " + a->second.handle_var + "." + a->second.callee));
                continue;
            }
            if (auto f = functions_.find(c.callee); f != functions_.end()) {
                module_site(c, f->second, std::nullopt);
            }
        }
    }

    void module_site(const CallExpr& c, const ModuleRef& ref, std::optional<std::string> handle) {
        const auto& ev = ref.entry->evidence.front();
        sites_.push_back(make_site(u_, ref.entry->mechanism, SiteKind::call, c, std::move(handle),
                                   std::string(to_string(ref.entry->mechanism)) + " module " + ref.module +
                                       " defined at " + ev.file + ":" + std::to_string(ev.line)));
    }
};

// ---------------------------------------------------------------- Java

bool matches_qualified(const CallExpr& c, const std::vector<std::string>& loaders) {
    if (!c.receiver) return false;
    for (const auto& l : loaders) {
        auto dot = l.rfind('.');
        if (dot == std::string::npos) continue;
        std::string_view recv(l.data(), dot);
        if (c.callee != std::string_view(l).substr(dot + 1)) continue;
        const std::string& r = *c.receiver;
        if (r == recv || (r.size() > recv.size() && r.ends_with(recv) && r[r.size() - recv.size() - 1] == '.'))
            return true;
    }
    return false;
}

std::optional<std::string> class_literal(std::string_view args) {
    auto pos = args.find(".class");
    if (pos == std::string_view::npos) return std::nullopt;
    size_t b = pos;
    while (b > 0 && (std::isalnum(static_cast<unsigned char>(args[b - 1])) || args[b - 1] == '_')) --b;
    if (b == pos) return std::nullopt;
    return std::string(args.substr(b, pos - b));
}

bool is_object_method(std::string_view m) {
    return m == "toString" || m == "equals" || m == "hashCode" || m == "getClass" || m == "notify" ||
           m == "notifyAll" || m == "wait";
}

class JavaDetector {
public:
    JavaDetector(const SourceUnit& u, const NativeBindingIndex& index, const PatternConfig& p)
        : u_(u), index_(index), jni_loaders_(p.get(Mechanism::jni, "loaders")),
          jna_loaders_(p.get(Mechanism::jna, "loaders")), jython_methods_(p.get(Mechanism::jython, "methods")) {
        auto prefixes = p.get(Mechanism::jython, "imports");
        for (const auto& imp : u.imports)
            for (const auto& pre : prefixes)
                if (imp.module_or_type.starts_with(pre)) jython_import_ = true;
        for (const auto& [name, e] : index.java_types)
            if (e.mechanism == Mechanism::jni)
                for (const auto& m : e.native_methods) native_owners_[m].push_back(name);
        for (const auto& s : u.statements) {
            const FunctionSpan* fn = function_at(u, s.line);
            if (!fn) {
                record_types(s, fields_);
                continue;
            }
            std::map<std::string, std::string> one;
            record_types(s, one);
            for (auto& [v, t] : one) locals_[fn][v].emplace_back(s.line, t);
        }
    }

    std::vector<CrossLangSite> run() {
        for (const auto& s : u_.statements) visit(s);
        return std::move(sites_);
    }

private:
    const SourceUnit& u_;
    const NativeBindingIndex& index_;
    std::vector<std::string> jni_loaders_, jna_loaders_, jython_methods_;
    bool jython_import_ = false;
    std::map<std::string, std::vector<std::string>> native_owners_;
    std::map<std::string, std::string> fields_;
    // innermost function -> variable -> (line, type) in statement order
    std::map<const FunctionSpan*, std::map<std::string, std::vector<std::pair<int, std::string>>>> locals_;
    std::vector<CrossLangSite> sites_;

    void record_types(const Statement& s, std::map<std::string, std::string>& out) const {
        for (const auto& [v, t] : s.declared_types) out[v] = t;
        // `Object lib = Native.load("c", CLib.class)` binds lib to CLib.
        for (const auto& c : s.calls)
            if (matches_qualified(c, jna_loaders_))
                if (auto cls = class_literal(c.args_text))
                    for (const auto& d : s.defined_vars) out[d] = *cls;
    }

    const BindingEntry* entry(const std::string& type) const {
        auto it = index_.java_types.find(type);
        return it == index_.java_types.end() ? nullptr : &it->second;
    }

    std::optional<std::string> type_of(const std::string& var, int line) const {
        // Innermost enclosing function outwards: locals, then parameters.
        std::vector<const FunctionSpan*> chain;
        for (const auto& fn : u_.functions)
            if (fn.start_line <= line && line <= fn.end_line) chain.push_back(&fn);
        std::sort(chain.begin(), chain.end(), [](const auto* a, const auto* b) {
            return a->end_line - a->start_line < b->end_line - b->start_line;
        });
        for (const auto* fn : chain) {
            // Locals of this function or of functions nested in it.
            std::optional<std::string> before, any;
            for (const auto& [owner, vars] : locals_) {
                if (owner->start_line < fn->start_line || owner->end_line > fn->end_line) continue;
                auto it = vars.find(var);
                if (it == vars.end()) continue;
                for (const auto& [l, t] : it->second) {
                    if (!any) any = t;
                    if (l <= line) before = t;
                }
            }
            if (before) return before;
            if (any) return any;
            if (auto it = fn->param_types.find(var); it != fn->param_types.end()) return it->second;
        }
        if (auto it = fields_.find(var); it != fields_.end()) return it->second;
        return std::nullopt;
    }

    std::string owner_at(int line) const {
        const FunctionSpan* fn = function_at(u_, line);
        return fn ? fn->owner_type : std::string{};
    }

    std::optional<std::string> receiver_type(const CallExpr& c) const {
        if (!c.receiver) return owner_at(c.line).empty() ? std::nullopt : std::optional(owner_at(c.line));
        const std::string& r = *c.receiver;
        if (r == "<expr>") return std::nullopt;
        if (r == "this") return owner_at(c.line).empty() ? std::nullopt : std::optional(owner_at(c.line));
        if (r.starts_with("this.") && r.find('.', 5) == std::string::npos) {
            if (auto it = fields_.find(r.substr(5)); it != fields_.end()) return it->second;
            return std::nullopt;
        }
        if (r.find('.') == std::string::npos) {
            if (auto t = type_of(r, c.line)) return t;
            if (entry(r)) return r;  // static call on an indexed class
            return std::nullopt;
        }
        // `CLib.INSTANCE.puts(..)`: static member of a JNA interface.
        std::string head = first_component(r);
        if (const auto* e = entry(head); e && e->mechanism == Mechanism::jna) return head;
        return std::nullopt;
    }

    void visit(const Statement& s) {
        for (const auto& c : s.calls) {
            if (matches_qualified(c, jni_loaders_)) {
                sites_.push_back(make_site(u_, Mechanism::jni, SiteKind::load_decl, c, std::nullopt,
                                           "native library load " + describe_call(c)));
                continue;
            }
            if (matches_qualified(c, jna_loaders_)) {
                std::optional<std::string> handle;
                if (!s.targets.empty()) handle = s.targets.front();
                sites_.push_back(make_site(u_, Mechanism::jna, SiteKind::load_decl, c, handle,
                                           "JNA library load " + describe_call(c)));
                continue;
            }
            if (c.is_constructor) {
                if (const auto* e = entry(c.callee);
                    e && e->mechanism == Mechanism::jython && jython_import_ && c.callee.ends_with("Interpreter")) {
                    std::optional<std::string> handle;
                    if (!s.targets.empty()) handle = s.targets.front();
                    sites_.push_back(make_site(u_, Mechanism::jython, SiteKind::load_decl, c, handle,
                                               "Python interpreter created via " + c.callee));
                }
                continue;
            }

            auto type = receiver_type(c);
            std::optional<std::string> handle;
            if (c.receiver && *c.receiver != "<expr>") handle = *c.receiver;
            if (type) {
                const auto* e = entry(*type);
                if (!e) continue;  // resolved to a non-indexed class: no fallback
                switch (e->mechanism) {
                    case Mechanism::jni:
                        if (e->native_methods.count(c.callee))
                            sites_.push_back(make_site(u_, Mechanism::jni, SiteKind::call, c, handle,
                                                       "native method " + *type + "." + c.callee + " declared at " +
                                                           e->evidence.front().file + ":" +
                                                           std::to_string(e->evidence.front().line)));
                        break;
                    case Mechanism::jna:
                        if (!is_object_method(c.callee))
                            sites_.push_back(make_site(u_, Mechanism::jna, SiteKind::call, c, handle,
                                                       "call on JNA library interface " + *type));
                        break;
                    case Mechanism::jython:
                        if (jython_import_ && contains(jython_methods_, c.callee))
                            sites_.push_back(make_site(u_, Mechanism::jython, SiteKind::call, c, handle,
                                                       "Jython " + *type + "." + c.callee));
                        break;
                    default: break;
                }
                continue;
            }
            // Unknown receiver type: project-wide fallback when exactly one
            // indexed class declares this native method.
            if (auto it = native_owners_.find(c.callee); it != native_owners_.end() && it->second.size() == 1) {
                const auto* e = entry(it->second.front());
                sites_.push_back(make_site(u_, Mechanism::jni, SiteKind::call, c, handle,
                                           "native method " + it->second.front() + "." + c.callee +
                                               " (unique project-wide) declared at " + e->evidence.front().file +
                                               ":" + std::to_string(e->evidence.front().line)));
            }
        }
    }
};

}  // namespace

std::vector<CrossLangSite> detect_sites(const SourceUnit& unit, const NativeBindingIndex& index,
                                        const PatternConfig& patterns) {
    std::vector<CrossLangSite> sites = unit.language == Language::python
                                           ? PythonDetector(unit, index, patterns).run()
                                           : JavaDetector(unit, index, patterns).run();
    std::stable_sort(sites.begin(), sites.end(), [](const auto& a, const auto& b) {
        return std::tie(a.file, a.line, a.column) < std::tie(b.file, b.line, b.column);
    });
    return sites;
}

}  // namespace xlb
