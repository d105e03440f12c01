#pragma once

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lexer.hpp"
#include "xlb/source_model.hpp"

namespace xlb::detail {

using lex::Token;
using TokenSpan = std::span<const Token>;

struct ExprFacts {
    std::set<std::string> uses;
    std::set<std::string> walrus_defs;
    std::vector<CallExpr> calls;
};

// Collects variable reads and call sites in a token range.
void analyze_expr(TokenSpan toks, Language lang, std::string_view source, ExprFacts& out);

// Index of the token closing the bracket opened at `open`, or toks.size().
size_t match_bracket(TokenSpan toks, size_t open);

// Splits at `sep` tokens that sit at bracket depth 0.
std::vector<TokenSpan> split_top_level(TokenSpan toks, std::string_view sep);

// "a.b.c" when the range is exactly a dotted name chain.
std::optional<std::string> dotted_chain(TokenSpan toks);

std::string source_text(std::string_view source, TokenSpan toks);

bool is_open_bracket(const Token& t);
bool is_close_bracket(const Token& t);

bool is_assign_op(std::string_view op);

}  // namespace xlb::detail
