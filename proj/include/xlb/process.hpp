#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace xlb {

struct ProcessResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

// Runs argv[0] from PATH with `input` on stdin. Extra environment entries
// are added to the inherited environment.
ProcessResult run_process(const std::vector<std::string>& argv, const std::filesystem::path& cwd = {},
                          std::string_view input = {}, const std::map<std::string, std::string>& env = {});

}  // namespace xlb
