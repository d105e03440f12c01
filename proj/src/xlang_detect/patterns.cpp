#include <fstream>
#include <sstream>

#include <json.hpp>

#include "xlb/error.hpp"
#include "xlb/xlang_detect.hpp"

namespace xlb {
namespace {

using Defaults = std::map<std::string, std::vector<std::string>>;

const std::map<Mechanism, Defaults>& builtin() {
    static const std::map<Mechanism, Defaults> table = {
        {Mechanism::ctypes,
         {{"loaders", {"CDLL", "WinDLL", "OleDLL", "PyDLL", "LoadLibrary"}}, {"imports", {"ctypes"}}}},
        {Mechanism::cffi, {{"loaders", {"dlopen"}}, {"imports", {"cffi"}}}},
        {Mechanism::jni, {{"loaders", {"System.loadLibrary", "System.load"}}}},
        {Mechanism::jna,
         {{"loaders", {"Native.load", "Native.loadLibrary"}}, {"supertypes", {"Library", "StdCallLibrary"}}}},
        {Mechanism::jython,
         {{"imports", {"org.python."}},
          {"types",
           {"PythonInterpreter", "InteractiveInterpreter", "InteractiveConsole", "PyObject", "PyFunction",
            "PyCode", "PyModule", "PySystemState", "PyString", "PyInteger", "PyLong", "PyFloat", "PyList",
            "PyTuple", "PyDictionary", "PyType"}},
          {"methods", {"exec", "eval", "get", "invoke", "__call__"}}}},
        {Mechanism::pybind11, {{"macros", {"PYBIND11_MODULE", "PYBIND11_PLUGIN"}}}},
        {Mechanism::boost_python, {{"macros", {"BOOST_PYTHON_MODULE"}}}},
        {Mechanism::swig, {{"macros", {}}}},
        {Mechanism::python_c_api, {{"macros", {"Py_InitModule", "Py_InitModule3", "Py_InitModule4"}}}},
    };
    return table;
}

}  // namespace

std::string_view to_string(Mechanism m) {
    switch (m) {
        case Mechanism::python_c_api: return "python_c_api";
        case Mechanism::ctypes: return "ctypes";
        case Mechanism::boost_python: return "boost_python";
        case Mechanism::cffi: return "cffi";
        case Mechanism::swig: return "swig";
        case Mechanism::pybind11: return "pybind11";
        case Mechanism::jni: return "jni";
        case Mechanism::jna: return "jna";
        case Mechanism::jython: return "jython";
    }
    return "unknown";
}

std::optional<Mechanism> mechanism_from_name(std::string_view name) {
    for (auto m : kAllMechanisms)
        if (to_string(m) == name) return m;
    return std::nullopt;
}

std::string_view to_string(LanguagePair p) {
    switch (p) {
        case LanguagePair::python_c: return "python_c";
        case LanguagePair::java_c: return "java_c";
        case LanguagePair::java_python: return "java_python";
    }
    return "unknown";
}

std::optional<LanguagePair> language_pair_from_name(std::string_view name) {
    if (name == "python_c" || name == "python+c" || name == "python+c/c++") return LanguagePair::python_c;
    if (name == "java_c" || name == "java+c" || name == "java+c/c++") return LanguagePair::java_c;
    if (name == "java_python" || name == "java+python") return LanguagePair::java_python;
    return std::nullopt;
}

LanguagePair language_pair(Mechanism m) {
    switch (m) {
        case Mechanism::jni:
        case Mechanism::jna: return LanguagePair::java_c;
        case Mechanism::jython: return LanguagePair::java_python;
        default: return LanguagePair::python_c;
    }
}

Language calling_language(LanguagePair p) { return p == LanguagePair::python_c ? Language::python : Language::java; }

std::string_view to_string(SiteKind k) { return k == SiteKind::call ? "call" : "load_decl"; }

std::vector<std::string> PatternConfig::get(Mechanism m, std::string_view key) const {
    std::vector<std::string> out;
    if (auto it = builtin().find(m); it != builtin().end())
        if (auto k = it->second.find(std::string(key)); k != it->second.end()) out = k->second;
    if (auto it = extra_.find(m); it != extra_.end())
        if (auto k = it->second.find(std::string(key)); k != it->second.end())
            out.insert(out.end(), k->second.begin(), k->second.end());
    return out;
}

void PatternConfig::add(Mechanism m, std::string_view key, std::string value) {
    const auto& defaults = builtin().at(m);
    if (!defaults.count(std::string(key)))
        throw Error(ErrorKind::invalid_config,
                    "pattern key '" + std::string(key) + "' is not valid for " + std::string(to_string(m)));
    extra_[m][std::string(key)].push_back(std::move(value));
}

PatternConfig PatternConfig::from_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::invalid_config, std::string("pattern config is not JSON: ") + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorKind::invalid_config, "pattern config must be a JSON object");
    PatternConfig cfg;
    for (const auto& [name, keys] : doc.items()) {
        auto m = mechanism_from_name(name);
        if (!m) throw Error(ErrorKind::invalid_config, "unknown mechanism '" + name + "'");
        if (!keys.is_object())
            throw Error(ErrorKind::invalid_config, "patterns for " + name + " must be an object");
        for (const auto& [key, values] : keys.items()) {
            if (!values.is_array())
                throw Error(ErrorKind::invalid_config, name + "." + key + " must be a list of strings");
            for (const auto& v : values) {
                if (!v.is_string() || v.get<std::string>().empty())
                    throw Error(ErrorKind::invalid_config, name + "." + key + " must be a list of strings");
                cfg.add(*m, key, v.get<std::string>());
            }
        }
    }
    return cfg;
}

PatternConfig PatternConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::invalid_config, "cannot read pattern config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

const PatternConfig& default_patterns() {
    static const PatternConfig cfg;
    return cfg;
}

}  // namespace xlb
