#pragma once

// Whole-project analysis: parse every Python/Java file, build the binding
// index, then detect sites, propagate taint and collect cross-language
// functions per file.

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xlb/source_model.hpp"
#include "xlb/taintflow.hpp"
#include "xlb/xlang_detect.hpp"

namespace xlb {

struct ProjectFile {
    std::string path;  // project-relative, '/'-separated
    std::string content;
};

struct FileAnalysis {
    std::string path;
    std::optional<SourceUnit> unit;
    std::vector<CrossLangSite> sites;
    std::vector<TaintMark> marks;
    std::vector<FunctionSpan> functions;
    std::optional<std::string> error;  // set when the file could not be parsed

    bool operator==(const FileAnalysis&) const = default;
};

struct ProjectAnalysis {
    NativeBindingIndex index;
    std::vector<FileAnalysis> files;  // source files in path order

    bool operator==(const ProjectAnalysis&) const = default;
};

struct AnalyzeOptions {
    int max_transfers = kDefaultMaxTransfers;
    // Report only these mechanisms; empty keeps all.
    std::set<Mechanism> mechanisms;
    PatternConfig patterns;
    // Worker threads for the parallel kernel; 0 uses the OpenMP default.
    int jobs = 0;
    // When non-empty, only these paths get sites and marks. Every file still
    // feeds the binding index.
    std::set<std::string> focus;
};

// Source (.py/.java) and native evidence files under `root`, sorted by
// path. `.git` is skipped. Throws Error(unreadable_source) when `root`
// is missing.
std::vector<ProjectFile> load_project_files(const std::filesystem::path& root);

// OpenMP kernel.
ProjectAnalysis analyze_project(const std::vector<ProjectFile>& files, const AnalyzeOptions& options = {});

// Serial reference; results are identical to analyze_project.
ProjectAnalysis analyze_project_serial(const std::vector<ProjectFile>& files, const AnalyzeOptions& options = {});

}  // namespace xlb
