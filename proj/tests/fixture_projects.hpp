#pragma once

// Minimal per-mechanism projects with the expected call-site line, plus
// matched control projects that use no FFI at all.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xlb/xlang_detect.hpp"

namespace fixtures {

struct Project {
    std::string name;
    std::map<std::string, std::string> files;
    std::optional<xlb::Mechanism> mechanism;  // nullopt for controls
    std::string site_file;
    int site_line = 0;
    std::optional<xlb::Mechanism> control_for;
};

inline const char* kNativeMethod = R"(public class NativeMethod {
    //Native method declaration
    public native void sayHello();

    // Load local C library
    static {
        System.loadLibrary("nativeMethod");
    }
}
)";

inline const char* kNativeCaller = R"(public class NativeCaller {
    public static void main(String[] args) {
        NativeMethod nativeMethod = new NativeMethod();
        nativeMethod.sayHello();
    }
}
)";

inline const char* kNativeMethodValue = R"(public class NativeMethod {
    //Native method declaration
    public native int getValue();

    // Load local C library
    static {
        System.loadLibrary("nativeMethod");
    }
}
)";

// The second caller listing with its elided lines filled in as plain
// declarations so the file compiles.
inline const char* kNativeCallerChain = R"(public class NativeCaller {
    public static void main(String[] args) {
        NativeMethod nativeMethod = new NativeMethod();
        int x = 7;
        int var_c = 1;
        int var_a = nativeMethod.getValue();
        int var_b = x / var_a;
        var_c = var_c + var_b;
        int var_d = func(var_c);
    }

    static int func(int v) {
        return v * 2;
    }
}
)";

inline std::vector<Project> mechanism_projects() {
    using xlb::Mechanism;
    std::vector<Project> out;
    out.push_back({"jni",
                   {{"NativeMethod.java", kNativeMethod}, {"NativeCaller.java", kNativeCaller}},
                   Mechanism::jni,
                   "NativeCaller.java",
                   4,
                   std::nullopt});
    out.push_back({"jna",
                   {{"CLib.java", R"(import com.sun.jna.Library;
import com.sun.jna.Native;

public interface CLib extends Library {
    CLib INSTANCE = Native.load("c", CLib.class);
    int puts(String s);
}
)"},
                    {"Hello.java", R"(public class Hello {
    public static void main(String[] args) {
        CLib lib = CLib.INSTANCE;
        lib.puts("hello");
    }
}
)"}},
                   Mechanism::jna,
                   "Hello.java",
                   4,
                   std::nullopt});
    out.push_back({"jython",
                   {{"Embed.java", R"(import org.python.util.PythonInterpreter;
import org.python.core.PyObject;

public class Embed {
    public static void main(String[] args) {
        PythonInterpreter interp = new PythonInterpreter();
        interp.exec("x = 1 + 2");
        PyObject x = interp.get("x");
        System.out.println(x);
    }
}
)"}},
                   Mechanism::jython,
                   "Embed.java",
                   7,
                   std::nullopt});
    out.push_back({"ctypes",
                   {{"wrap.py", R"(import ctypes

lib = ctypes.CDLL("libdemo.so")


def add(a, b):
    r = lib.add(a, b)
    return r
)"}},
                   Mechanism::ctypes,
                   "wrap.py",
                   7,
                   std::nullopt});
    out.push_back({"cffi",
                   {{"wrap.py", R"(from cffi import FFI

ffi = FFI()
ffi.cdef("int add(int, int);")
lib = ffi.dlopen("libdemo.so")


def add(a, b):
    return lib.add(a, b)
)"}},
                   Mechanism::cffi,
                   "wrap.py",
                   9,
                   std::nullopt});
    out.push_back({"pybind11",
                   {{"src/fastmath.cpp", R"(#include <pybind11/pybind11.h>

int add(int a, int b) { return a + b; }

PYBIND11_MODULE(fastmath, m) {
    m.def("add", &add);
}
)"},
                    {"use.py", R"(import fastmath


def total(xs):
    acc = 0
    for x in xs:
        acc = fastmath.add(acc, x)
    return acc
)"}},
                   Mechanism::pybind11,
                   "use.py",
                   7,
                   std::nullopt});
    out.push_back({"boost_python",
                   {{"src/greet.cpp", R"(#include <boost/python.hpp>

char const* hello() { return "hello"; }

BOOST_PYTHON_MODULE(greet)
{
    boost::python::def("hello", hello);
}
)"},
                    {"app.py", R"(import greet


def main():
    print(greet.hello())
)"}},
                   Mechanism::boost_python,
                   "app.py",
                   5,
                   std::nullopt});
    out.push_back({"swig",
                   {{"example.i", R"(%module example
%{
#include "example.h"
%}
int fact(int n);
)"},
                    {"example.c", "int fact(int n) { return n <= 1 ? 1 : n * fact(n - 1); }\n"},
                    {"run.py", R"(import example

print(example.fact(5))
)"}},
                   Mechanism::swig,
                   "run.py",
                   3,
                   std::nullopt});
    out.push_back({"python_c_api",
                   {{"spam.c", R"(#define PY_SSIZE_T_CLEAN
#include <Python.h>

static PyObject* spam_system(PyObject* self, PyObject* args) {
    const char* command;
    if (!PyArg_ParseTuple(args, "s", &command)) return NULL;
    return PyLong_FromLong(system(command));
}

static PyMethodDef SpamMethods[] = {{"system", spam_system, METH_VARARGS, "Run a command."}, {NULL, NULL, 0, NULL}};
static struct PyModuleDef spammodule = {PyModuleDef_HEAD_INIT, "spam", NULL, -1, SpamMethods};

PyMODINIT_FUNC PyInit_spam(void) { return PyModule_Create(&spammodule); }
)"},
                    {"tool.py", R"(import spam


def run(cmd):
    status = spam.system(cmd)
    return status
)"}},
                   Mechanism::python_c_api,
                   "tool.py",
                   5,
                   std::nullopt});
    return out;
}

// One control per mechanism, in the same order as mechanism_projects(). Each
// keeps the shape of its partner (same receivers, imports or declarations)
// without anything that binds to native code.
inline std::vector<Project> control_projects() {
    using xlb::Mechanism;
    std::vector<Project> out;
    auto add = [&](std::string name, std::map<std::string, std::string> files, Mechanism m) {
        out.push_back({std::move(name), std::move(files), std::nullopt, "", 0, m});
    };
    add("java-native-no-load", {{"Decl.java", R"(public class Decl {
    public native int stub();

    int value() {
        return 42;
    }
}
)"}},
        Mechanism::jni);
    add("java-plain-interface", {{"CLib.java", R"(public interface CLib {
    int puts(String s);
}
)"},
                                 {"Hello.java", R"(public class Hello {
    public static void main(String[] args) {
        CLib lib = s -> s.length();
        lib.puts("hello");
    }
}
)"}},
        Mechanism::jna);
    add("java-plain", {{"Greeter.java", R"(public class Greeter {
    private final String name;

    public Greeter(String name) {
        this.name = name;
    }

    public String greet() {
        return "hello " + name;
    }

    public static void main(String[] args) {
        Greeter g = new Greeter("x");
        System.out.println(g.greet());
    }
}
)"}},
        Mechanism::jython);
    add("python-plain", {{"calc.py", R"(import math
import os


def add(a, b):
    return a + b


def main():
    lib = os.path.join("a", "b")
    r = lib.upper()
    print(math.sqrt(add(1, 2)), r)
)"}},
        Mechanism::ctypes);
    add("python-local-ffi-name", {{"wrap.py", R"(class FFI:
    def dlopen(self, name):
        return {"name": name}


ffi = FFI()
lib = ffi.dlopen("libdemo.so")


def add(a, b):
    return lib.get(a, b)
)"}},
        Mechanism::cffi);
    add("python-pure-module", {{"fastmath.py", "def add(a, b):\n    return a + b\n"},
                               {"use.py", R"(import fastmath


def total(xs):
    acc = 0
    for x in xs:
        acc = fastmath.add(acc, x)
    return acc
)"}},
        Mechanism::pybind11);
    add("python-cpp-unbound", {{"src/greet.cpp", "char const* hello() { return \"hello\"; }\n"},
                               {"greet.py", "def hello():\n    return \"hello\"\n"},
                               {"app.py", R"(import greet


def main():
    print(greet.hello())
)"}},
        Mechanism::boost_python);
    add("python-native-unrelated", {{"util.c", "int helper(void) { return 1; }\n"},
                                    {"use.py", R"(import json


def load(path):
    with open(path) as fh:
        return json.load(fh)
)"}},
        Mechanism::swig);
    add("python-c-no-module", {{"spam.c", R"(#include <stdlib.h>

int spam_system(const char* command) { return system(command); }
)"},
                               {"spam.py", "import os\n\n\ndef system(cmd):\n    return os.system(cmd)\n"},
                               {"tool.py", R"(import spam


def run(cmd):
    status = spam.system(cmd)
    return status
)"}},
        Mechanism::python_c_api);
    return out;
}

}  // namespace fixtures
