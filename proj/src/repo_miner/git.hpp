#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace xlb::git {

struct Change {
    char status;  // A, M, D, T ...
    std::string path;
};

// Bare clone into `dest` unless a repository is already there.
// Throws Error(checkout_failed).
void clone_or_open(const std::string& url, const std::filesystem::path& dest);

std::vector<Change> changed_files(const std::filesystem::path& git_dir, const std::string& parent,
                                  const std::string& sha);

std::vector<std::string> tree_files(const std::filesystem::path& git_dir, const std::string& sha);

// Contents of `paths` at `sha`; missing paths are absent from the result.
std::map<std::string, std::string> read_blobs(const std::filesystem::path& git_dir, const std::string& sha,
                                              const std::vector<std::string>& paths);

bool commit_exists(const std::filesystem::path& git_dir, const std::string& sha);

}  // namespace xlb::git
