#include "xlb/function_pair.hpp"

#include <algorithm>

#include "xlb/error.hpp"
#include "xlb/io.hpp"

namespace xlb {

std::string make_pair_id(const std::string& repo, const std::string& sha, const std::string& file,
                         const std::string& qualified_name) {
    std::string key = repo;
    key += '\0';
    key += sha;
    key += '\0';
    key += file;
    key += '\0';
    key += qualified_name;
    return sha256_hex(key).substr(0, 16);
}

nlohmann::ordered_json to_json(const FunctionPair& p) {
    nlohmann::ordered_json j;
    j["pair_id"] = p.pair_id;
    j["repo"] = p.repo;
    j["sha"] = p.sha;
    j["parent_sha"] = p.parent_sha;
    j["file"] = p.file;
    j["language"] = std::string(to_string(p.language));
    j["qualified_name"] = p.qualified_name;
    auto mechs = nlohmann::ordered_json::array();
    for (auto m : p.mechanisms) mechs.push_back(std::string(to_string(m)));
    j["mechanisms"] = mechs;
    j["buggy_code"] = p.buggy_code;
    j["clean_code"] = p.clean_code;
    j["is_security"] = p.is_security;
    return j;
}

FunctionPair pair_from_json(const nlohmann::json& j) {
    try {
        FunctionPair p;
        p.pair_id = j.at("pair_id").get<std::string>();
        p.repo = j.at("repo").get<std::string>();
        p.sha = j.at("sha").get<std::string>();
        p.parent_sha = j.at("parent_sha").get<std::string>();
        p.file = j.at("file").get<std::string>();
        auto lang = language_from_name(j.at("language").get<std::string>());
        if (!lang) throw Error(ErrorKind::malformed_input, "unknown language");
        p.language = *lang;
        p.qualified_name = j.at("qualified_name").get<std::string>();
        for (const auto& m : j.at("mechanisms")) {
            auto mech = mechanism_from_name(m.get<std::string>());
            if (!mech) throw Error(ErrorKind::malformed_input, "unknown mechanism " + m.get<std::string>());
            p.mechanisms.push_back(*mech);
        }
        std::sort(p.mechanisms.begin(), p.mechanisms.end());
        p.mechanisms.erase(std::unique(p.mechanisms.begin(), p.mechanisms.end()), p.mechanisms.end());
        p.buggy_code = j.at("buggy_code").get<std::string>();
        p.clean_code = j.at("clean_code").get<std::string>();
        p.is_security = j.at("is_security").get<bool>();
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::malformed_input, e.what());
    }
}

std::string pairs_to_jsonl(const std::vector<FunctionPair>& pairs) {
    std::string out;
    for (const auto& p : pairs) {
        out += to_json(p).dump();
        out += '\n';
    }
    return out;
}

std::vector<FunctionPair> pairs_from_jsonl(std::string_view text) {
    std::vector<FunctionPair> out;
    int lineno = 0;
    for (auto line : split_lines(text)) {
        ++lineno;
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
        try {
            out.push_back(pair_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::malformed_input, "line " + std::to_string(lineno) + ": " + e.what());
        } catch (const Error& e) {
            throw Error(ErrorKind::malformed_input, "line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace xlb
