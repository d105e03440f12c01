#include <algorithm>

#include <spdlog/spdlog.h>

#include "git.hpp"
#include "xlb/error.hpp"
#include "xlb/io.hpp"
#include "xlb/repo_miner.hpp"

namespace xlb {
namespace {

namespace fs = std::filesystem;

using UnitKey = std::pair<std::string, std::string>;

std::string unit_id(const UnitKey& k) {
    std::string s = k.first;
    s += '\0';
    s += k.second;
    return sha256_hex(s).substr(0, 16);
}

std::string clone_dir_name(const std::string& full_name) {
    std::string out = full_name;
    std::replace(out.begin(), out.end(), '/', '_');
    return out + ".git";
}

class Checkpoint {
public:
    explicit Checkpoint(fs::path path) : path_(std::move(path)) {
        if (!fs::exists(path_)) return;
        text_ = read_file(path_);
        int lineno = 0;
        for (auto line : split_lines(text_)) {
            ++lineno;
            if (line.empty()) continue;
            try {
                auto j = nlohmann::json::parse(line);
                done_.insert({j.at("repo").get<std::string>(), j.at("sha").get<std::string>()});
            } catch (const nlohmann::json::exception& e) {
                // A torn final line cannot happen with atomic writes; anything
                // else means the file was edited by hand.
                throw Error(ErrorKind::malformed_input,
                            path_.string() + " line " + std::to_string(lineno) + ": " + e.what());
            }
        }
    }

    bool done(const UnitKey& k) const { return done_.count(k) > 0; }

    void record(const UnitKey& k, size_t pairs) {
        nlohmann::ordered_json j;
        j["repo"] = k.first;
        j["sha"] = k.second;
        j["pairs"] = pairs;
        j["ts"] = utc_timestamp();
        text_ += j.dump() + "\n";
        write_file_atomic(path_, text_);
        done_.insert(k);
    }

private:
    fs::path path_;
    std::string text_;
    std::set<UnitKey> done_;
};

void write_review(const fs::path& path, const std::vector<RepoRecord>& review) {
    std::string text;
    for (const auto& r : review) {
        nlohmann::ordered_json j;
        j["full_name"] = r.full_name;
        j["stars"] = r.stars;
        j["description"] = r.description;
        j["matched_pair"] = std::string(to_string(r.matched_pair));
        j["language_bytes"] = r.language_bytes;
        text += j.dump() + "\n";
    }
    write_file_atomic(path, text);
}

}  // namespace

PipelineResult run_pipeline(HostingApi& api, const MiningCriteria& criteria, const fs::path& state_dir,
                            const PipelineOptions& options) {
    criteria.validate();
    fs::create_directories(state_dir);
    const fs::path units_dir = state_dir / "units";
    const fs::path checkpoint_path = state_dir / "checkpoint.jsonl";
    if (!options.resume) {
        fs::remove(checkpoint_path);
        fs::remove_all(units_dir);
    }
    fs::create_directories(units_dir);
    Checkpoint checkpoint(checkpoint_path);

    std::vector<RepoRecord> review;
    auto repos = filter_repositories(api, criteria, &review);
    write_review(state_dir / "review.jsonl", review);

    PipelineResult result;
    result.repositories = repos.size();
    std::map<std::string, FunctionPair> pairs;
    bool stop = false;
    for (const auto& repo : repos) {
        if (stop) break;
        try {
            auto issues = filter_bug_issues(api, repo, criteria);
            if (issues.empty()) continue;
            fs::path git_dir = state_dir / "repos" / clone_dir_name(repo.full_name);
            git::clone_or_open(repo.clone_url, git_dir);
            auto matches = match_fix_commits(repo, issues, list_commits(git_dir), criteria);
            for (const auto& m : matches) {
                UnitKey key{repo.full_name, m.sha};
                fs::path unit_file = units_dir / (unit_id(key) + ".jsonl");
                if (checkpoint.done(key) && fs::exists(unit_file)) {
                    for (auto& p : pairs_from_jsonl(read_file(unit_file))) pairs.emplace(p.pair_id, std::move(p));
                    ++result.units_skipped;
                    continue;
                }
                if (options.max_units && result.units_processed >= options.max_units) {
                    result.complete = false;
                    stop = true;
                    break;
                }
                std::vector<FunctionPair> found;
                try {
                    found = extract_pairs(repo, m, git_dir, options.extract);
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::checkout_failed) throw;
                    spdlog::warn("{}@{}: {}", repo.full_name, m.sha, e.what());
                    continue;
                }
                write_file_atomic(unit_file, pairs_to_jsonl(found));
                checkpoint.record(key, found.size());
                ++result.units_processed;
                spdlog::info("{}@{}: {} pair(s)", repo.full_name, m.sha.substr(0, 12), found.size());
                for (auto& p : found) pairs.emplace(p.pair_id, std::move(p));
            }
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::api_auth) throw;
            spdlog::warn("skipping {}: {}", repo.full_name, e.what());
        }
    }
    for (auto& [id, p] : pairs) result.pairs.push_back(std::move(p));
    return result;
}

}  // namespace xlb
