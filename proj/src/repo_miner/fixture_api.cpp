#include "xlb/error.hpp"
#include "xlb/io.hpp"
#include "xlb/repo_miner.hpp"

namespace xlb {
namespace {

IssueState state_from(const std::string& s) {
    if (s == "closed") return IssueState::closed;
    if (s == "open") return IssueState::open;
    throw Error(ErrorKind::malformed_input, "unknown issue state " + s);
}

}  // namespace

FixtureApi::FixtureApi(const std::filesystem::path& universe_dir) {
    auto file = universe_dir / "universe.json";
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(file));
        for (const auto& r : j.at("repositories")) {
            Repo repo;
            repo.summary.full_name = r.at("full_name").get<std::string>();
            repo.summary.stars = r.at("stars").get<int64_t>();
            repo.summary.description = r.value("description", "");
            repo.summary.default_branch = r.value("default_branch", "main");
            std::string url = r.value("clone_url", "");
            if (!url.empty() && std::filesystem::path(url).is_relative())
                url = std::filesystem::absolute(universe_dir / url).lexically_normal().string();
            repo.summary.clone_url = url;
            repo.languages = r.value("languages", std::map<std::string, int64_t>{});
            for (const auto& i : r.value("issues", nlohmann::json::array())) {
                IssueRecord issue;
                issue.repo = repo.summary.full_name;
                issue.number = i.at("number").get<int64_t>();
                issue.state = state_from(i.at("state").get<std::string>());
                issue.labels = i.value("labels", std::vector<std::string>{});
                issue.title = i.value("title", "");
                issue.body = i.value("body", "");
                repo.issues.push_back(std::move(issue));
            }
            repos_[repo.summary.full_name] = std::move(repo);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::malformed_input, file.string() + ": " + e.what());
    }
}

std::vector<RepoSummary> FixtureApi::search_repositories(const std::string& language, int min_stars) {
    std::vector<RepoSummary> out;
    for (const auto& [name, r] : repos_)
        if (r.summary.stars >= min_stars && r.languages.count(language)) out.push_back(r.summary);
    return out;
}

std::map<std::string, int64_t> FixtureApi::repository_languages(const std::string& full_name) {
    auto it = repos_.find(full_name);
    if (it == repos_.end()) throw Error(ErrorKind::api_unavailable, "no repository " + full_name);
    return it->second.languages;
}

std::vector<IssueRecord> FixtureApi::list_issues(const std::string& full_name) {
    auto it = repos_.find(full_name);
    if (it == repos_.end()) throw Error(ErrorKind::api_unavailable, "no repository " + full_name);
    return it->second.issues;
}

}  // namespace xlb
