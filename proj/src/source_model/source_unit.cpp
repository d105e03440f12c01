#include <algorithm>
#include <cstdint>

#include "front_ends.hpp"
#include "xlb/error.hpp"
#include "xlb/source_model.hpp"

namespace xlb {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::unreadable_source: return "unreadable_source";
        case ErrorKind::unsupported_language: return "unsupported_language";
        case ErrorKind::site_not_in_unit: return "site_not_in_unit";
        case ErrorKind::invalid_config: return "invalid_config";
        case ErrorKind::api_auth: return "api_auth";
        case ErrorKind::rate_limited: return "rate_limited";
        case ErrorKind::api_unavailable: return "api_unavailable";
        case ErrorKind::checkout_failed: return "checkout_failed";
        case ErrorKind::file_vanished: return "file_vanished";
        case ErrorKind::root_commit: return "root_commit";
        case ErrorKind::empty_after_stripping: return "empty_after_stripping";
        case ErrorKind::already_split: return "already_split";
        case ErrorKind::empty_dataset: return "empty_dataset";
        case ErrorKind::malformed_input: return "malformed_input";
        case ErrorKind::interrupted: return "interrupted";
    }
    return "unknown";
}

std::string_view to_string(Language lang) { return lang == Language::python ? "python" : "java"; }

std::optional<Language> language_from_name(std::string_view name) {
    if (name == "python") return Language::python;
    if (name == "java") return Language::java;
    return std::nullopt;
}

std::optional<Language> language_from_path(std::string_view path) {
    auto ends_with = [&](std::string_view ext) {
        return path.size() > ext.size() && path.substr(path.size() - ext.size()) == ext;
    };
    if (ends_with(".py")) return Language::python;
    if (ends_with(".java")) return Language::java;
    return std::nullopt;
}

std::string_view to_string(StatementKind kind) {
    switch (kind) {
        case StatementKind::assignment: return "assignment";
        case StatementKind::expression: return "expression";
        case StatementKind::load_decl: return "load_decl";
        case StatementKind::other: return "other";
    }
    return "other";
}

bool is_valid_utf8(std::string_view s) {
    size_t i = 0;
    while (i < s.size()) {
        auto c = static_cast<unsigned char>(s[i]);
        size_t n;
        uint32_t cp;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            n = 1;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            n = 2;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            n = 3;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + n >= s.size()) return false;
        for (size_t k = 1; k <= n; ++k) {
            auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        if ((n == 1 && cp < 0x80) || (n == 2 && cp < 0x800) || (n == 3 && cp < 0x10000)) return false;
        if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
        i += n + 1;
    }
    return true;
}

std::vector<std::string_view> split_lines(std::string_view source) {
    std::vector<std::string_view> lines;
    size_t start = 0;
    while (start < source.size()) {
        size_t nl = source.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.push_back(source.substr(start));
            break;
        }
        std::string_view line = source.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = nl + 1;
    }
    return lines;
}

std::string slice_lines(std::string_view source, int first, int last) {
    auto lines = split_lines(source);
    std::string out;
    first = std::max(first, 1);
    last = std::min(last, static_cast<int>(lines.size()));
    for (int l = first; l <= last; ++l) {
        if (l > first) out += '\n';
        out += lines[static_cast<size_t>(l - 1)];
    }
    return out;
}

SourceUnit parse_unit(std::string_view path, std::string_view source, Language language) {
    if (source.find('\0') != std::string_view::npos)
        throw Error(ErrorKind::unreadable_source, std::string(path) + ": contains NUL bytes");
    if (!is_valid_utf8(source))
        throw Error(ErrorKind::unreadable_source, std::string(path) + ": not valid UTF-8");
    if (source.starts_with("\xEF\xBB\xBF")) source.remove_prefix(3);
    return language == Language::python ? detail::parse_python(path, source) : detail::parse_java(path, source);
}

SourceUnit parse_unit(std::string_view path, std::string_view source) {
    auto lang = language_from_path(path);
    if (!lang) throw Error(ErrorKind::unsupported_language, "unsupported file type: " + std::string(path));
    return parse_unit(path, source, *lang);
}

const FunctionSpan* function_at(const SourceUnit& unit, int line) {
    const FunctionSpan* best = nullptr;
    for (const auto& fn : unit.functions) {
        if (line < fn.start_line || line > fn.end_line) continue;
        if (!best || fn.end_line - fn.start_line < best->end_line - best->start_line ||
            (fn.end_line - fn.start_line == best->end_line - best->start_line && fn.start_line > best->start_line))
            best = &fn;
    }
    return best;
}

}  // namespace xlb
