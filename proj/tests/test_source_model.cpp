#include <doctest.h>

#include <random>

#include "xlb/error.hpp"
#include "xlb/source_model.hpp"

using namespace xlb;

namespace {

const char* kNativeMethod = R"(public class NativeMethod {
    //Native method declaration
    public native void sayHello();

    // Load local C library
    static {
        System.loadLibrary("nativeMethod");
    }
}
)";

const char* kNativeCaller = R"(public class NativeCaller {
    public static void main(String[] args) {
        NativeMethod nativeMethod = new NativeMethod();
        nativeMethod.sayHello();
    }
}
)";

const Statement* statement_at(const SourceUnit& u, int line) {
    for (const auto& s : u.statements)
        if (s.line == line) return &s;
    return nullptr;
}

void check_invariants(const SourceUnit& u, std::string_view source) {
    for (const auto& fn : u.functions) {
        CHECK(fn.start_line >= 1);
        CHECK(fn.start_line <= fn.end_line);
        CHECK(fn.end_line <= u.line_count);
        CHECK(fn.body_text == slice_lines(source, fn.start_line, fn.end_line));
        if (fn.is_native_decl) {
            CHECK(u.language == Language::java);
            CHECK_FALSE(fn.has_body);
        }
    }
    // spans nest; siblings may only share a boundary line
    for (const auto& a : u.functions)
        for (const auto& b : u.functions) {
            bool a_in_b = b.start_line <= a.start_line && a.end_line <= b.end_line;
            bool b_in_a = a.start_line <= b.start_line && b.end_line <= a.end_line;
            bool apart = a.end_line <= b.start_line || b.end_line <= a.start_line;
            CHECK_MESSAGE((a_in_b || b_in_a || apart), a.qualified_name << " vs " << b.qualified_name);
        }
    for (size_t i = 1; i < u.statements.size(); ++i) {
        const auto& p = u.statements[i - 1];
        const auto& s = u.statements[i];
        CHECK(std::pair(p.line, p.column) < std::pair(s.line, s.column));
    }
    for (const auto& s : u.statements) {
        if (s.kind == StatementKind::assignment) CHECK_FALSE(s.defined_vars.empty());
        for (const auto& c : s.calls) CHECK_FALSE(c.callee.empty());
    }
    for (const auto& i : u.imports) CHECK_FALSE(i.module_or_type.empty());
}

}  // namespace

TEST_CASE("native declaration and static initializer") {
    auto u = parse_unit("NativeMethod.java", kNativeMethod);
    check_invariants(u, kNativeMethod);
    REQUIRE(u.functions.size() == 2);
    const auto& say = u.functions[0];
    CHECK(say.name == "sayHello");
    CHECK(say.qualified_name == "NativeMethod.sayHello");
    CHECK(say.is_native_decl);
    CHECK_FALSE(say.has_body);
    CHECK(say.start_line == 3);
    CHECK(u.functions[1].name == "<static_init>");
    CHECK(u.functions[1].start_line == 6);
    CHECK(u.functions[1].end_line == 8);

    int loads = 0;
    for (const auto& s : u.statements)
        if (s.kind == StatementKind::load_decl) {
            ++loads;
            CHECK(s.line == 7);
            REQUIRE(s.calls.size() == 1);
            CHECK(s.calls[0].receiver == "System");
            CHECK(s.calls[0].callee == "loadLibrary");
        }
    CHECK(loads == 1);
    REQUIRE(u.types.size() == 1);
    CHECK(u.types[0].name == "NativeMethod");
}

TEST_CASE("empty source") {
    for (auto lang : {Language::python, Language::java}) {
        auto u = parse_unit("x", "", lang);
        CHECK(u.functions.empty());
        CHECK(u.statements.empty());
        CHECK(u.line_count == 0);
    }
}

TEST_CASE("nested python functions") {
    const char* src = "def outer(a):\n    x = a\n    def inner(b):\n        return b + x\n    return inner(x)\n";
    auto u = parse_unit("m.py", src);
    check_invariants(u, src);
    REQUIRE(u.functions.size() == 2);
    CHECK(u.functions[0].qualified_name == "outer");
    CHECK(u.functions[1].qualified_name == "outer.inner");
    CHECK(u.functions[0].start_line == 1);
    CHECK(u.functions[0].end_line == 5);
    CHECK(u.functions[1].start_line == 3);
    CHECK(u.functions[1].end_line == 4);
    REQUIRE(function_at(u, 4) != nullptr);
    CHECK(function_at(u, 4)->qualified_name == "outer.inner");
    CHECK(function_at(u, 5)->qualified_name == "outer");
    CHECK(function_at(u, 2)->qualified_name == "outer");
}

TEST_CASE("function_at on the caller listing") {
    auto u = parse_unit("NativeCaller.java", kNativeCaller);
    check_invariants(u, kNativeCaller);
    const auto* fn = function_at(u, 4);
    REQUIRE(fn != nullptr);
    CHECK(fn->name == "main");
    CHECK(fn->param_types.at("args") == "String");
    CHECK(function_at(u, 100) == nullptr);
    CHECK(function_at(u, 0) == nullptr);

    const auto* decl = statement_at(u, 3);
    REQUIRE(decl != nullptr);
    CHECK(decl->kind == StatementKind::assignment);
    CHECK(decl->defined_vars == std::set<std::string>{"nativeMethod"});
    CHECK(decl->declared_types.at("nativeMethod") == "NativeMethod");
    const auto* call = statement_at(u, 4);
    REQUIRE(call != nullptr);
    CHECK(call->kind == StatementKind::expression);
    REQUIRE(call->calls.size() == 1);
    CHECK(call->calls[0].receiver == "nativeMethod");
    CHECK(call->calls[0].callee == "sayHello");
    CHECK(call->used_vars == std::set<std::string>{"nativeMethod"});
}

TEST_CASE("java assignment chain") {
    const char* src = R"(public class NativeCaller {
    public static void main(String[] args) {
        NativeMethod nativeMethod = new NativeMethod();
        int x = 7;
        int var_c = 1;
        var_a = nativeMethod.getValue();
        var_b = x / var_a;
        var_c = var_c + var_b;
        var_d = func(var_c);
    }
}
)";
    auto u = parse_unit("NativeCaller.java", src);
    check_invariants(u, src);
    const auto* c = statement_at(u, 8);
    REQUIRE(c != nullptr);
    CHECK(c->kind == StatementKind::assignment);
    CHECK(c->defined_vars == std::set<std::string>{"var_c"});
    CHECK(c->used_vars == std::set<std::string>{"var_b", "var_c"});
    const auto* d = statement_at(u, 9);
    REQUIRE(d != nullptr);
    CHECK(d->used_vars == std::set<std::string>{"var_c"});
    REQUIRE(d->calls.size() == 1);
    CHECK_FALSE(d->calls[0].receiver.has_value());
    CHECK(d->calls[0].arg_vars == std::set<std::string>{"var_c"});
}

TEST_CASE("python statements and imports") {
    const char* src = R"(import ctypes
from os import path as p
import numpy as np, sys

@decorator
def f(a, b=1):
    lib = ctypes.CDLL("libdemo.so")
    r = lib.add(a, b)
    total += r
    self.handle = lib
    print(f"{r} done")
    if r > 0:
        y = r
    else:
        y = 0
    return y
)";
    auto u = parse_unit("w.py", src);
    check_invariants(u, src);
    REQUIRE(u.imports.size() == 4);
    CHECK(u.imports[0].module_or_type == "ctypes");
    CHECK(u.imports[1].from_import);
    CHECK(u.imports[1].alias == "p");
    CHECK(u.imports[2].alias == "np");
    REQUIRE(u.functions.size() == 1);
    CHECK(u.functions[0].start_line == 5);
    CHECK(u.functions[0].end_line == 16);

    const auto* lib = statement_at(u, 7);
    REQUIRE(lib);
    CHECK(lib->kind == StatementKind::assignment);
    CHECK(lib->calls.at(0).receiver == "ctypes");
    CHECK(lib->calls.at(0).callee == "CDLL");
    const auto* r = statement_at(u, 8);
    REQUIRE(r);
    CHECK(r->used_vars == std::set<std::string>{"a", "b", "lib"});
    const auto* aug = statement_at(u, 9);
    REQUIRE(aug);
    CHECK(aug->defined_vars.count("total"));
    CHECK(aug->used_vars.count("total"));
    const auto* attr = statement_at(u, 10);
    REQUIRE(attr);
    CHECK(attr->targets == std::vector<std::string>{"self.handle"});
    CHECK(attr->value_chain == "lib");
    const auto* pr = statement_at(u, 11);
    REQUIRE(pr);
    CHECK(pr->used_vars.count("r"));
    const auto* y1 = statement_at(u, 13);
    const auto* y2 = statement_at(u, 15);
    REQUIRE(y1);
    REQUIRE(y2);
    REQUIRE(y1->arms.size() == 1);
    REQUIRE(y2->arms.size() == 1);
    CHECK(y1->arms[0].group == y2->arms[0].group);
    CHECK(y1->arms[0].arm != y2->arms[0].arm);
    CHECK(y1->arms[0].exhaustive);
    const auto* ret = statement_at(u, 16);
    REQUIRE(ret);
    CHECK(ret->is_return);
    CHECK(ret->arms.empty());
}

TEST_CASE("errors") {
    CHECK_THROWS_AS(parse_unit("a.c", "int x;"), Error);
    try {
        parse_unit("a.c", "int x;");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::unsupported_language);
    }
    try {
        parse_unit("a.py", std::string_view("x = 1\0", 6));
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::unreadable_source);
    }
    try {
        parse_unit("a.py", "x = '\xff'");
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::unreadable_source);
    }
}

TEST_CASE("broken code degrades instead of failing") {
    const char* py = "def f(:\n    x = (1,\n  y = ]\n\tclass\n'''unterminated\n";
    auto u = parse_unit("b.py", py);
    check_invariants(u, py);
    const char* java = "class A { void f() { int x = ; if ( { } } } } }\n/* open";
    auto j = parse_unit("b.java", java);
    check_invariants(j, java);
    CHECK_FALSE(j.warnings.empty());
}

TEST_CASE("property: random token soup keeps invariants and is deterministic") {
    std::mt19937_64 rng(7);
    const std::vector<std::string> py_pieces = {"def f(x):\n", "    ", "x = y\n", "if a:\n", "else:\n",  "(", ")",
                                                "class C:\n", "return z\n", "'s'", "#c\n", "\n", "lib.f(a)\n",
                                                "@d\n", "]", "[", "        ", "try:\n", "except E:\n"};
    const std::vector<std::string> java_pieces = {"class A {", "}", "{", "void m(int a) {", "x = y;", "if (a)",
                                                  "else", "native int n();", "static {", "for (int i=0;i<n;i++)",
                                                  "new T() {", "(", ")", ";", "/*c*/", "\"s\"", "\n", "a.b(c);"};
    for (int round = 0; round < 300; ++round) {
        bool py = round % 2 == 0;
        const auto& pieces = py ? py_pieces : java_pieces;
        std::string src;
        int n = static_cast<int>(rng() % 40);
        for (int i = 0; i < n; ++i) src += pieces[rng() % pieces.size()];
        auto lang = py ? Language::python : Language::java;
        auto u = parse_unit("p", src, lang);
        check_invariants(u, src);
        CHECK(u == parse_unit("p", src, lang));
        for (int line = 1; line <= u.line_count + 1; ++line) {
            const auto* fn = function_at(u, line);
            if (fn) CHECK((fn->start_line <= line && line <= fn->end_line));
        }
    }
}
