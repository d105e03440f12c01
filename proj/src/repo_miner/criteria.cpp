#include <algorithm>
#include <cctype>
#include <regex>

#include <spdlog/spdlog.h>

#include "xlb/error.hpp"
#include "xlb/repo_miner.hpp"

namespace xlb {
namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Case-insensitive whole-word occurrence; `text` is already lowercase.
bool contains_word(const std::string& text, const std::string& word) {
    if (word.empty()) return false;
    for (size_t pos = text.find(word); pos != std::string::npos; pos = text.find(word, pos + 1)) {
        bool left = pos == 0 || !word_char(text[pos - 1]);
        size_t end = pos + word.size();
        bool right = end >= text.size() || !word_char(text[end]);
        if (left && right) return true;
    }
    return false;
}

bool any_word(const std::string& text, const std::vector<std::string>& words) {
    return std::any_of(words.begin(), words.end(), [&](const auto& w) { return contains_word(text, lower(w)); });
}

// Host language name -> side of a pair.
std::optional<Language> side_of(const std::string& host_language) {
    if (host_language == "Python") return Language::python;
    if (host_language == "Java") return Language::java;
    return std::nullopt;
}

bool is_c_family(const std::string& host_language) { return host_language == "C" || host_language == "C++"; }

}  // namespace

void MiningCriteria::validate() const {
    if (min_stars < 0) throw Error(ErrorKind::invalid_config, "min_stars must be >= 0");
    if (!(min_language_share > 0.0 && min_language_share < 1.0))
        throw Error(ErrorKind::invalid_config, "min_language_share must lie in (0, 1)");
    if (language_pairs.empty()) throw Error(ErrorKind::invalid_config, "language_pairs is empty");
    if (bug_keywords.empty()) throw Error(ErrorKind::invalid_config, "bug_keywords is empty");
    if (security_keywords.empty()) throw Error(ErrorKind::invalid_config, "security_keywords is empty");
    if (issue_id_patterns.empty()) throw Error(ErrorKind::invalid_config, "issue_id_patterns is empty");
    for (const auto& p : issue_id_patterns) {
        try {
            std::regex re(p);
            if (re.mark_count() < 1) throw Error(ErrorKind::invalid_config, "pattern needs a capture group: " + p);
        } catch (const std::regex_error& e) {
            throw Error(ErrorKind::invalid_config, "bad issue_id_pattern " + p + ": " + e.what());
        }
    }
}

nlohmann::ordered_json MiningCriteria::to_json() const {
    nlohmann::ordered_json j;
    j["min_stars"] = min_stars;
    auto pairs = nlohmann::ordered_json::array();
    for (auto p : language_pairs) pairs.push_back(std::string(to_string(p)));
    j["language_pairs"] = pairs;
    j["min_language_share"] = min_language_share;
    j["bug_keywords"] = bug_keywords;
    j["security_keywords"] = security_keywords;
    j["issue_id_patterns"] = issue_id_patterns;
    j["excluded_repos"] = excluded_repos;
    return j;
}

MiningCriteria MiningCriteria::from_json(const nlohmann::json& j) {
    static const std::set<std::string> keys = {"min_stars",         "language_pairs",    "min_language_share",
                                               "bug_keywords",      "security_keywords", "issue_id_patterns",
                                               "excluded_repos"};
    if (!j.is_object()) throw Error(ErrorKind::invalid_config, "criteria must be an object");
    MiningCriteria c;
    try {
        for (const auto& [k, v] : j.items())
            if (!keys.count(k)) throw Error(ErrorKind::invalid_config, "unknown criteria key " + k);
        if (j.contains("min_stars")) c.min_stars = j["min_stars"].get<int>();
        if (j.contains("min_language_share")) c.min_language_share = j["min_language_share"].get<double>();
        if (j.contains("language_pairs")) {
            c.language_pairs.clear();
            for (const auto& p : j["language_pairs"]) {
                auto lp = language_pair_from_name(p.get<std::string>());
                if (!lp) throw Error(ErrorKind::invalid_config, "unknown language pair " + p.get<std::string>());
                c.language_pairs.insert(*lp);
            }
        }
        if (j.contains("bug_keywords")) c.bug_keywords = j["bug_keywords"].get<std::vector<std::string>>();
        if (j.contains("security_keywords")) c.security_keywords = j["security_keywords"].get<std::vector<std::string>>();
        if (j.contains("issue_id_patterns")) c.issue_id_patterns = j["issue_id_patterns"].get<std::vector<std::string>>();
        if (j.contains("excluded_repos")) c.excluded_repos = j["excluded_repos"].get<std::set<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::invalid_config, std::string("criteria: ") + e.what());
    }
    c.validate();
    return c;
}

std::optional<LanguagePair> match_language_pair(const std::map<std::string, int64_t>& language_bytes,
                                                const MiningCriteria& criteria) {
    int64_t total = 0, python = 0, java = 0, c = 0;
    for (const auto& [lang, bytes] : language_bytes) {
        total += bytes;
        if (is_c_family(lang)) c += bytes;
        else if (auto side = side_of(lang)) (*side == Language::python ? python : java) += bytes;
    }
    if (total <= 0) return std::nullopt;
    auto passes = [&](int64_t bytes) {
        return static_cast<double>(bytes) / static_cast<double>(total) > criteria.min_language_share;
    };
    for (auto pair : criteria.language_pairs) {
        bool ok = false;
        switch (pair) {
            case LanguagePair::python_c: ok = passes(python) && passes(c); break;
            case LanguagePair::java_c: ok = passes(java) && passes(c); break;
            case LanguagePair::java_python: ok = passes(java) && passes(python); break;
        }
        if (ok) return pair;
    }
    return std::nullopt;
}

std::vector<RepoRecord> filter_repositories(HostingApi& api, const MiningCriteria& criteria,
                                            std::vector<RepoRecord>* review) {
    criteria.validate();
    std::set<std::string> search_languages;
    for (auto p : criteria.language_pairs) search_languages.insert(p == LanguagePair::python_c ? "Python" : "Java");

    std::map<std::string, RepoSummary> candidates;
    for (const auto& lang : search_languages)
        for (auto& s : api.search_repositories(lang, criteria.min_stars)) candidates.emplace(s.full_name, s);

    std::vector<RepoRecord> out;
    for (const auto& [name, s] : candidates) {
        if (s.stars < criteria.min_stars) continue;
        auto bytes = api.repository_languages(name);
        auto pair = match_language_pair(bytes, criteria);
        if (!pair) continue;
        RepoRecord r;
        r.full_name = name;
        r.stars = s.stars;
        r.language_bytes = std::move(bytes);
        r.matched_pair = *pair;
        r.default_branch = s.default_branch;
        r.description = s.description;
        r.clone_url = s.clone_url;
        if (review) review->push_back(r);
        if (criteria.excluded_repos.count(name)) {
            spdlog::info("excluding {} after review", name);
            continue;
        }
        out.push_back(std::move(r));
    }
    return out;
}

IssueRecord classify_issue(IssueRecord issue, const MiningCriteria& criteria) {
    std::string text = lower(issue.title) + "\n" + lower(issue.body);
    for (const auto& l : issue.labels) text += "\n" + lower(l);
    bool security = any_word(text, criteria.security_keywords);
    issue.is_security = false;
    issue.is_bug = issue.state == IssueState::closed && (security || any_word(text, criteria.bug_keywords));
    issue.is_security = issue.is_bug && security;
    return issue;
}

std::vector<IssueRecord> filter_bug_issues(HostingApi& api, const RepoRecord& repo, const MiningCriteria& criteria) {
    std::vector<IssueRecord> out;
    for (auto& issue : api.list_issues(repo.full_name)) {
        issue.repo = repo.full_name;
        auto c = classify_issue(std::move(issue), criteria);
        if (c.is_bug) out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.number < b.number; });
    return out;
}

std::vector<int64_t> issue_numbers_in_title(const std::string& title, const MiningCriteria& criteria) {
    std::set<int64_t> found;
    for (const auto& p : criteria.issue_id_patterns) {
        std::regex re(p);
        for (auto it = std::sregex_iterator(title.begin(), title.end(), re); it != std::sregex_iterator(); ++it) {
            const auto& m = *it;
            for (size_t g = 1; g < m.size(); ++g) {
                if (!m[g].matched) continue;
                try {
                    found.insert(std::stoll(m[g].str()));
                } catch (const std::exception&) {
                }
                break;
            }
        }
    }
    return {found.begin(), found.end()};
}

std::vector<CommitMatch> match_fix_commits(const RepoRecord& repo, const std::vector<IssueRecord>& issues,
                                           const std::vector<GitCommit>& commits, const MiningCriteria& criteria) {
    std::map<int64_t, const IssueRecord*> bugs;
    for (const auto& i : issues)
        if (i.is_bug) bugs[i.number] = &i;
    std::vector<CommitMatch> out;
    for (const auto& c : commits) {
        CommitMatch m;
        for (auto n : issue_numbers_in_title(c.title, criteria)) {
            auto it = bugs.find(n);
            if (it == bugs.end()) continue;
            m.issue_numbers.push_back(n);
            m.is_security = m.is_security || it->second->is_security;
        }
        if (m.issue_numbers.empty()) continue;
        if (c.parents.empty()) {
            spdlog::info("{}: root commit {} references a bug issue; skipped", repo.full_name, c.sha);
            continue;
        }
        if (c.parents.size() > 1) {
            spdlog::debug("{}: merge commit {} skipped", repo.full_name, c.sha);
            continue;
        }
        m.repo = repo.full_name;
        m.sha = c.sha;
        m.parent_sha = c.parents.front();
        m.title = c.title;
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace xlb
