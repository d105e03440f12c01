#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "xlb/source_model.hpp"
#include "xlb/xlang_detect.hpp"

namespace xlb {

// A buggy function (fix parent) and its fixed version.
struct FunctionPair {
    std::string pair_id;
    std::string repo;
    std::string sha;
    std::string parent_sha;
    std::string file;
    Language language = Language::python;
    std::string qualified_name;
    std::vector<Mechanism> mechanisms;  // sorted, unique
    std::string buggy_code;
    std::string clean_code;
    bool is_security = false;

    bool operator==(const FunctionPair&) const = default;
};

// First 16 hex digits of sha256(repo \0 sha \0 file \0 qualified_name).
std::string make_pair_id(const std::string& repo, const std::string& sha, const std::string& file,
                         const std::string& qualified_name);

nlohmann::ordered_json to_json(const FunctionPair& p);
// Throws Error(malformed_input).
FunctionPair pair_from_json(const nlohmann::json& j);

std::string pairs_to_jsonl(const std::vector<FunctionPair>& pairs);
// Throws Error(malformed_input) naming the 1-based line.
std::vector<FunctionPair> pairs_from_jsonl(std::string_view text);

}  // namespace xlb
