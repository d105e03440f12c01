#pragma once

// Cross-language interaction sites for the nine FFI mechanisms.
//
// Detection happens in two steps. build_binding_index collects project-wide
// evidence (native method declarations, JNA library interfaces, Jython
// imports, extension-module macros in C/C++ sources). detect_sites then
// resolves every call of one unit against that index and against file-local
// ctypes/cffi handle tracking.

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "xlb/source_model.hpp"

namespace xlb {

enum class Mechanism { python_c_api, ctypes, boost_python, cffi, swig, pybind11, jni, jna, jython };

inline constexpr std::array<Mechanism, 9> kAllMechanisms = {
    Mechanism::python_c_api, Mechanism::ctypes, Mechanism::boost_python, Mechanism::cffi,   Mechanism::swig,
    Mechanism::pybind11,     Mechanism::jni,    Mechanism::jna,          Mechanism::jython};

enum class LanguagePair { python_c, java_c, java_python };

std::string_view to_string(Mechanism m);
std::optional<Mechanism> mechanism_from_name(std::string_view name);
std::string_view to_string(LanguagePair p);
// Accepts python_c, java_c, java_python and the python+c style spellings.
std::optional<LanguagePair> language_pair_from_name(std::string_view name);
LanguagePair language_pair(Mechanism m);
// Language of the calling side for a pair (python for python_c, java otherwise).
Language calling_language(LanguagePair p);

enum class SiteKind { call, load_decl };

std::string_view to_string(SiteKind k);

struct CrossLangSite {
    Mechanism mechanism = Mechanism::ctypes;
    SiteKind kind = SiteKind::call;
    std::string file;
    int line = 0;
    int column = 0;
    CallExpr call;
    std::optional<std::string> handle_var;
    std::string evidence;

    bool operator==(const CrossLangSite&) const = default;
};

struct Evidence {
    std::string file;
    int line = 0;
    std::string text;

    bool operator==(const Evidence&) const = default;
    auto operator<=>(const Evidence&) const = default;
};

struct BindingEntry {
    Mechanism mechanism = Mechanism::jni;
    std::vector<Evidence> evidence;
    // jni only: names of the class's native methods.
    std::set<std::string> native_methods;

    bool operator==(const BindingEntry&) const = default;
};

struct NativeBindingIndex {
    // Java class / interface simple names (jni, jna, jython).
    std::map<std::string, BindingEntry> java_types;
    // Python extension module names (pybind11, boost_python, swig, python_c_api).
    std::map<std::string, BindingEntry> python_modules;

    bool empty() const { return java_types.empty() && python_modules.empty(); }
    size_t size() const { return java_types.size() + python_modules.size(); }
    bool operator==(const NativeBindingIndex&) const = default;
};

// Extra detection patterns, keyed by mechanism then by pattern kind:
//   loaders     ctypes/cffi handle constructors, jni/jna "Receiver.method" load calls
//   imports     ctypes/cffi enabling modules, jython package prefixes
//   types       jython receiver types
//   methods     jython interpreter methods
//   supertypes  jna library base interfaces
//   macros      extension-module macros whose first argument is the module name
class PatternConfig {
public:
    PatternConfig() = default;

    // Throws Error(invalid_config) for unknown mechanisms/keys or non-string lists.
    static PatternConfig from_json(std::string_view text);
    static PatternConfig load(const std::filesystem::path& path);

    // Built-in defaults followed by configured extras.
    std::vector<std::string> get(Mechanism m, std::string_view key) const;
    void add(Mechanism m, std::string_view key, std::string value);

    bool operator==(const PatternConfig&) const = default;

private:
    std::map<Mechanism, std::map<std::string, std::vector<std::string>>> extra_;
};

const PatternConfig& default_patterns();

struct NativeFile {
    std::string path;
    std::string content;
};

// True for C/C++ sources and headers and SWIG interface files.
bool is_native_evidence_path(std::string_view path);

NativeBindingIndex build_binding_index(const std::vector<NativeFile>& native_files,
                                       const std::vector<SourceUnit>& units,
                                       const PatternConfig& patterns = default_patterns());

// Reads native evidence files under `project_root` (skipping .git).
NativeBindingIndex build_binding_index(const std::filesystem::path& project_root,
                                       const std::vector<SourceUnit>& units,
                                       const PatternConfig& patterns = default_patterns());

// Sites ordered by (file, line, column).
std::vector<CrossLangSite> detect_sites(const SourceUnit& unit, const NativeBindingIndex& index,
                                        const PatternConfig& patterns = default_patterns());

}  // namespace xlb
