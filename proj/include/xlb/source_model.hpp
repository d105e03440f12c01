#pragma once

// Uniform syntactic view of Python and Java source files.
//
// The front ends are token-level and best-effort: they recover function
// spans, statements (with def/use sets and call sites), imports and type
// declarations without building a full AST. Anything they cannot make
// sense of degrades to `StatementKind::other` instead of failing.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace xlb {

enum class Language { python, java };

std::string_view to_string(Language lang);
std::optional<Language> language_from_name(std::string_view name);
// Maps ".py" / ".java" file extensions; anything else is unsupported.
std::optional<Language> language_from_path(std::string_view path);

struct CallExpr {
    // Dotted identifier chain in front of the callee ("lib", "self.handle").
    // "<expr>" when the receiver is a computed expression, e.g. `f().g()`.
    std::optional<std::string> receiver;
    std::string callee;
    std::set<std::string> arg_vars;
    std::string args_text;
    int line = 0;
    int column = 0;
    bool is_constructor = false;  // Java `new T(...)`

    bool operator==(const CallExpr&) const = default;
};

enum class StatementKind { assignment, expression, load_decl, other };

std::string_view to_string(StatementKind kind);

// One arm of a branching construct that encloses a statement. Paths are
// relative to the innermost enclosing function.
struct ArmRef {
    int group = 0;
    int arm = 0;
    int arm_count = 1;
    bool exhaustive = false;  // some arm always runs (if/else, try/except/else ...)

    bool operator==(const ArmRef&) const = default;
};

struct Statement {
    int line = 0;
    int column = 0;
    int end_line = 0;
    StatementKind kind = StatementKind::other;
    std::set<std::string> defined_vars;
    std::set<std::string> used_vars;
    std::vector<CallExpr> calls;

    // Assignment targets as written, including attribute chains (`self.lib`).
    std::vector<std::string> targets;
    // Right-hand side when it is a bare dotted name (`f = lib.add`).
    std::optional<std::string> value_chain;
    // Java declared types of variables introduced here (name -> simple type).
    std::map<std::string, std::string> declared_types;
    bool is_return = false;
    std::vector<ArmRef> arms;
    std::string text;

    bool operator==(const Statement&) const = default;
};

struct FunctionSpan {
    std::string name;
    std::string qualified_name;
    int start_line = 0;
    int end_line = 0;
    bool is_native_decl = false;
    bool has_body = true;
    std::string body_text;
    // Enclosing type name for methods ("" for free functions).
    std::string owner_type;
    std::map<std::string, std::string> param_types;

    bool operator==(const FunctionSpan&) const = default;
};

struct ImportDecl {
    std::string module_or_type;
    std::optional<std::string> alias;
    int line = 0;
    bool from_import = false;  // python `from a import b`
    bool wildcard = false;
    bool is_static = false;    // java `import static`

    bool operator==(const ImportDecl&) const = default;
};

struct TypeDecl {
    std::string name;
    std::string qualified_name;
    std::string kind;  // class, interface, enum, record
    std::vector<std::string> supertypes;
    int start_line = 0;
    int end_line = 0;

    bool operator==(const TypeDecl&) const = default;
};

struct SourceUnit {
    std::string path;
    Language language = Language::python;
    int line_count = 0;
    std::vector<FunctionSpan> functions;
    std::vector<Statement> statements;
    std::vector<ImportDecl> imports;
    std::vector<TypeDecl> types;
    std::vector<std::string> warnings;

    bool operator==(const SourceUnit&) const = default;
};

// Throws Error(unreadable_source) for non-text input (NUL bytes or invalid
// UTF-8). Never throws on syntactically broken code.
SourceUnit parse_unit(std::string_view path, std::string_view source, Language language);

// Resolves the language from `path` and throws Error(unsupported_language)
// when the extension is not handled.
SourceUnit parse_unit(std::string_view path, std::string_view source);

// Innermost function whose line range contains `line`.
const FunctionSpan* function_at(const SourceUnit& unit, int line);

// Source lines [first, last] (1-based, inclusive) joined with '\n'.
std::string slice_lines(std::string_view source, int first, int last);

std::vector<std::string_view> split_lines(std::string_view source);

bool is_valid_utf8(std::string_view text);

}  // namespace xlb
