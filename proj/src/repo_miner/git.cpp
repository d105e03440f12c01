#include "git.hpp"

#include <spdlog/spdlog.h>

#include "xlb/error.hpp"
#include "xlb/process.hpp"
#include "xlb/repo_miner.hpp"

namespace xlb {
namespace git {
namespace {

std::string run_git(const std::filesystem::path& git_dir, std::vector<std::string> args, std::string_view input = {}) {
    std::vector<std::string> argv = {"git", "--git-dir=" + git_dir.string()};
    argv.insert(argv.end(), args.begin(), args.end());
    auto res = run_process(argv, {}, input);
    if (res.exit_code != 0)
        throw Error(ErrorKind::checkout_failed, "git " + args.front() + " failed in " + git_dir.string() + ": " + res.err);
    return res.out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start < s.size()) {
        size_t end = s.find(sep, start);
        if (end == std::string::npos) end = s.size();
        out.push_back(s.substr(start, end - start));
        start = end + 1;
    }
    return out;
}

}  // namespace

void clone_or_open(const std::string& url, const std::filesystem::path& dest) {
    namespace fs = std::filesystem;
    if (fs::exists(dest / "HEAD")) return;
    fs::create_directories(dest.parent_path());
    fs::path tmp = dest;
    tmp += ".partial";
    fs::remove_all(tmp);
    auto res = run_process({"git", "clone", "--quiet", "--bare", url, tmp.string()});
    if (res.exit_code != 0) {
        fs::remove_all(tmp);
        throw Error(ErrorKind::checkout_failed, "git clone " + url + " failed: " + res.err);
    }
    fs::rename(tmp, dest);
}

std::vector<Change> changed_files(const std::filesystem::path& git_dir, const std::string& parent,
                                  const std::string& sha) {
    auto out = run_git(git_dir, {"diff-tree", "-r", "--no-renames", "--name-status", "-z", parent, sha});
    auto fields = split(out, '\0');
    std::vector<Change> changes;
    for (size_t i = 0; i + 1 < fields.size(); i += 2)
        if (!fields[i].empty()) changes.push_back(Change{fields[i][0], fields[i + 1]});
    return changes;
}

std::vector<std::string> tree_files(const std::filesystem::path& git_dir, const std::string& sha) {
    auto out = run_git(git_dir, {"ls-tree", "-r", "-z", "--name-only", sha});
    auto files = split(out, '\0');
    std::erase_if(files, [](const auto& f) { return f.empty(); });
    return files;
}

std::map<std::string, std::string> read_blobs(const std::filesystem::path& git_dir, const std::string& sha,
                                              const std::vector<std::string>& paths) {
    std::string input;
    std::vector<const std::string*> asked;
    for (const auto& p : paths) {
        if (p.find('\n') != std::string::npos) continue;
        input += sha + ":" + p + "\n";
        asked.push_back(&p);
    }
    std::map<std::string, std::string> out;
    if (asked.empty()) return out;
    std::string raw = run_git(git_dir, {"cat-file", "--batch"}, input);
    size_t pos = 0;
    for (const std::string* p : asked) {
        size_t nl = raw.find('\n', pos);
        if (nl == std::string::npos) throw Error(ErrorKind::checkout_failed, "truncated cat-file output");
        std::string header = raw.substr(pos, nl - pos);
        pos = nl + 1;
        if (header.ends_with(" missing") || header.ends_with(" ambiguous")) continue;
        auto parts = split(header, ' ');
        if (parts.size() != 3) throw Error(ErrorKind::checkout_failed, "unexpected cat-file header: " + header);
        size_t size = std::stoull(parts[2]);
        if (parts[1] == "blob") out[*p] = raw.substr(pos, size);
        pos += size + 1;
    }
    return out;
}

bool commit_exists(const std::filesystem::path& git_dir, const std::string& sha) {
    auto res = run_process({"git", "--git-dir=" + git_dir.string(), "cat-file", "-e", sha + "^{commit}"});
    return res.exit_code == 0;
}

}  // namespace git

std::vector<GitCommit> list_commits(const std::filesystem::path& git_dir) {
    std::string out;
    try {
        out = git::run_git(git_dir, {"log", "--format=%H%x1f%P%x1f%s%x1e", "HEAD"});
    } catch (const Error& e) {
        // An empty repository has no HEAD commit.
        if (std::string(e.what()).find("does not have any commits") != std::string::npos) return {};
        throw;
    }
    std::vector<GitCommit> commits;
    for (auto& rec : git::split(out, '\x1e')) {
        while (!rec.empty() && (rec.front() == '\n' || rec.front() == '\r')) rec.erase(rec.begin());
        if (rec.empty()) continue;
        auto f = git::split(rec + "\x1f", '\x1f');
        f.resize(3);
        GitCommit c;
        c.sha = f[0];
        for (auto& p : git::split(f[1], ' '))
            if (!p.empty()) c.parents.push_back(p);
        c.title = f[2];
        commits.push_back(std::move(c));
    }
    return commits;
}

}  // namespace xlb
