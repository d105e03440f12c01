#pragma once

// Mining pipeline: candidate repositories, bug issues, fix commits and
// buggy/clean cross-language function pairs.

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "xlb/function_pair.hpp"
#include "xlb/xlang_detect.hpp"

namespace xlb {

struct MiningCriteria {
    int min_stars = 500;  // inclusive
    std::set<LanguagePair> language_pairs = {LanguagePair::python_c, LanguagePair::java_c, LanguagePair::java_python};
    double min_language_share = 0.05;  // strict
    std::vector<std::string> bug_keywords = {"bug",   "fix",  "error", "fault", "defect",
                                             "crash", "leak", "wrong", "broken"};
    std::vector<std::string> security_keywords = {"security", "vulnerability", "cve",
                                                  "overflow", "exploit",       "injection"};
    std::vector<std::string> issue_id_patterns = {R"((?:^|[^\w])#(\d+)\b)", R"(\bGH-(\d+)\b)", R"(\bgh-(\d+)\b)"};
    // Repositories named here are dropped after the manual review step.
    std::set<std::string> excluded_repos;

    // Throws Error(invalid_config).
    void validate() const;
    nlohmann::ordered_json to_json() const;
    // Missing keys keep their defaults. Throws Error(invalid_config).
    static MiningCriteria from_json(const nlohmann::json& j);
};

struct RepoSummary {
    std::string full_name;
    int64_t stars = 0;
    std::string description;
    std::string default_branch = "main";
    std::string clone_url;

    bool operator==(const RepoSummary&) const = default;
};

struct RepoRecord {
    std::string full_name;
    int64_t stars = 0;
    std::map<std::string, int64_t> language_bytes;  // host language names
    LanguagePair matched_pair = LanguagePair::python_c;
    std::string default_branch = "main";
    std::string description;
    std::string clone_url;

    bool operator==(const RepoRecord&) const = default;
};

enum class IssueState { open, closed };

struct IssueRecord {
    std::string repo;
    int64_t number = 0;
    IssueState state = IssueState::open;
    std::vector<std::string> labels;
    std::string title;
    std::string body;
    bool is_bug = false;
    bool is_security = false;

    bool operator==(const IssueRecord&) const = default;
};

struct CommitMatch {
    std::string repo;
    std::string sha;
    std::string parent_sha;
    std::string title;
    std::vector<int64_t> issue_numbers;
    bool is_security = false;

    bool operator==(const CommitMatch&) const = default;
};

// Remote code-hosting operations the pipeline needs.
class HostingApi {
public:
    virtual ~HostingApi() = default;
    // Repositories written mainly in `language` with at least `min_stars`.
    virtual std::vector<RepoSummary> search_repositories(const std::string& language, int min_stars) = 0;
    virtual std::map<std::string, int64_t> repository_languages(const std::string& full_name) = 0;
    // Issues of every state; pull requests excluded.
    virtual std::vector<IssueRecord> list_issues(const std::string& full_name) = 0;
};

struct GithubApiOptions {
    std::string base_url = "https://api.github.com";
    std::string token;
    std::filesystem::path cache_dir;  // empty disables the cache
    // Longest wait the rate gate will sleep before raising RateLimited.
    long max_wait_seconds = 60;
    int retries = 3;
};

// Serializes requests through one gate that honours the server-reported
// quota. Throws RateLimitedError when the wait would exceed the limit.
class RateGate {
public:
    explicit RateGate(long max_wait_seconds) : max_wait_(max_wait_seconds) {}

    void before_request();
    void update(std::optional<long> remaining, std::optional<long> reset_epoch);
    long max_wait_seconds() const { return max_wait_; }

private:
    std::mutex mu_;
    long max_wait_;
    std::optional<long> remaining_;
    std::optional<long> reset_epoch_;
};

class GithubApi : public HostingApi {
public:
    explicit GithubApi(GithubApiOptions options);
    // Reads XLB_GITHUB_TOKEN. Throws Error(api_auth) when it is unset.
    static GithubApiOptions options_from_env(std::filesystem::path cache_dir);

    std::vector<RepoSummary> search_repositories(const std::string& language, int min_stars) override;
    std::map<std::string, int64_t> repository_languages(const std::string& full_name) override;
    std::vector<IssueRecord> list_issues(const std::string& full_name) override;

    // GET with pagination and caching; one JSON value per page.
    std::vector<nlohmann::json> get_pages(const std::string& path_and_query, size_t max_pages = 1000);

private:
    struct Response {
        std::string body;
        std::string next;
    };
    Response get(const std::string& path_and_query);

    GithubApiOptions opt_;
    RateGate gate_;
};

// Offline universe: a universe.json describing repositories whose clone_url
// points at local git repositories (relative to the file).
class FixtureApi : public HostingApi {
public:
    explicit FixtureApi(const std::filesystem::path& universe_dir);

    std::vector<RepoSummary> search_repositories(const std::string& language, int min_stars) override;
    std::map<std::string, int64_t> repository_languages(const std::string& full_name) override;
    std::vector<IssueRecord> list_issues(const std::string& full_name) override;

private:
    struct Repo {
        RepoSummary summary;
        std::map<std::string, int64_t> languages;
        std::vector<IssueRecord> issues;
    };
    std::map<std::string, Repo> repos_;
};

// Language pair whose sides each hold more than the minimum share, or
// nullopt. C and C++ bytes count together.
std::optional<LanguagePair> match_language_pair(const std::map<std::string, int64_t>& language_bytes,
                                                const MiningCriteria& criteria);

// Repositories passing the star and language checks, minus excluded ones,
// sorted by full_name. When `review` is given it receives every passing
// repository (before exclusion) for the manual review step.
std::vector<RepoRecord> filter_repositories(HostingApi& api, const MiningCriteria& criteria,
                                            std::vector<RepoRecord>* review = nullptr);

// Sets is_bug / is_security on one issue.
IssueRecord classify_issue(IssueRecord issue, const MiningCriteria& criteria);

std::vector<IssueRecord> filter_bug_issues(HostingApi& api, const RepoRecord& repo, const MiningCriteria& criteria);

// Issue numbers referenced by a commit title.
std::vector<int64_t> issue_numbers_in_title(const std::string& title, const MiningCriteria& criteria);

struct GitCommit {
    std::string sha;
    std::vector<std::string> parents;
    std::string title;
};

// Every commit reachable from HEAD of the local clone at `git_dir`.
std::vector<GitCommit> list_commits(const std::filesystem::path& git_dir);

std::vector<CommitMatch> match_fix_commits(const RepoRecord& repo, const std::vector<IssueRecord>& issues,
                                           const std::vector<GitCommit>& commits,
                                           const MiningCriteria& criteria = {});

struct ExtractOptions {
    PatternConfig patterns;
    int max_transfers = 3;
    int jobs = 0;
};

// Pairs from one fix commit in the clone at `git_dir`, sorted by pair_id.
// Throws Error(checkout_failed) when either commit cannot be read.
std::vector<FunctionPair> extract_pairs(const RepoRecord& repo, const CommitMatch& match,
                                        const std::filesystem::path& git_dir, const ExtractOptions& options = {});

struct PipelineOptions {
    bool resume = false;
    // Stop after this many newly processed work units (0 = no limit).
    size_t max_units = 0;
    ExtractOptions extract;
};

struct PipelineResult {
    std::vector<FunctionPair> pairs;  // deduplicated, sorted by pair_id
    bool complete = true;
    size_t repositories = 0;
    size_t units_processed = 0;
    size_t units_skipped = 0;
};

// State layout under `state_dir`:
//   review.jsonl       repositories passing step 1, for manual review
//   checkpoint.jsonl   one line per completed (repo, commit) unit
//   units/<id>.jsonl   pairs of each completed unit
//   repos/             local clones
// Without `resume`, previous checkpoints are discarded.
PipelineResult run_pipeline(HostingApi& api, const MiningCriteria& criteria, const std::filesystem::path& state_dir,
                            const PipelineOptions& options = {});

}  // namespace xlb
