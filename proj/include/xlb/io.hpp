#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace xlb {

// Throws Error(unreadable_source).
std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temp file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view data);

// Current UTC time as 2026-01-31T12:00:00Z.
std::string utc_timestamp();

}  // namespace xlb
