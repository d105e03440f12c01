#pragma once

#include <filesystem>
#include <random>
#include <string>

namespace fixtures {

// Directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "xlb") {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / (tag + "_" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace fixtures
