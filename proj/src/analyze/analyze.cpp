#include "xlb/analyze.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <omp.h>
#include <spdlog/spdlog.h>

#include "xlb/error.hpp"

namespace xlb {
namespace {

struct Split {
    std::vector<const ProjectFile*> sources;
    std::vector<NativeFile> native;
};

Split split_files(const std::vector<ProjectFile>& files) {
    Split s;
    for (const auto& f : files) {
        if (language_from_path(f.path)) s.sources.push_back(&f);
        else if (is_native_evidence_path(f.path)) s.native.push_back(NativeFile{f.path, f.content});
    }
    std::sort(s.sources.begin(), s.sources.end(), [](auto* a, auto* b) { return a->path < b->path; });
    return s;
}

FileAnalysis parse_one(const ProjectFile& f) {
    FileAnalysis fa;
    fa.path = f.path;
    try {
        fa.unit = parse_unit(f.path, f.content);
    } catch (const Error& e) {
        fa.error = e.what();
    }
    return fa;
}

void analyze_one(FileAnalysis& fa, const NativeBindingIndex& index, const AnalyzeOptions& opt) {
    if (!fa.unit) return;
    if (!opt.focus.empty() && !opt.focus.count(fa.path)) return;
    fa.sites = detect_sites(*fa.unit, index, opt.patterns);
    if (!opt.mechanisms.empty())
        std::erase_if(fa.sites, [&](const auto& s) { return !opt.mechanisms.count(s.mechanism); });
    fa.marks = propagate(*fa.unit, fa.sites, opt.max_transfers);
    fa.functions = cross_language_functions(*fa.unit, fa.marks);
}

std::vector<SourceUnit> collect_units(const std::vector<FileAnalysis>& files) {
    std::vector<SourceUnit> units;
    for (const auto& f : files)
        if (f.unit) units.push_back(*f.unit);
    return units;
}

void log_errors(const std::vector<FileAnalysis>& files) {
    for (const auto& f : files)
        if (f.error) spdlog::warn("skipping {}: {}", f.path, *f.error);
}

}  // namespace

std::vector<ProjectFile> load_project_files(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    std::error_code ec;
    std::vector<ProjectFile> out;
    if (fs::is_regular_file(root, ec)) {
        std::ifstream in(root, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        out.push_back(ProjectFile{root.filename().generic_string(), ss.str()});
        return out;
    }
    if (!fs::is_directory(root, ec)) throw Error(ErrorKind::unreadable_source, "no such path: " + root.string());
    fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec), end;
    if (ec) throw Error(ErrorKind::unreadable_source, "cannot read " + root.string() + ": " + ec.message());
    for (; it != end; it.increment(ec)) {
        if (ec) throw Error(ErrorKind::unreadable_source, "cannot read " + root.string() + ": " + ec.message());
        if (it->is_directory() && it->path().filename() == ".git") {
            it.disable_recursion_pending();
            continue;
        }
        if (!it->is_regular_file()) continue;
        std::string rel = fs::relative(it->path(), root, ec).generic_string();
        if (!language_from_path(rel) && !is_native_evidence_path(rel)) continue;
        std::ifstream in(it->path(), std::ios::binary);
        if (!in) {
            spdlog::warn("skipping unreadable file {}", rel);
            continue;
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        out.push_back(ProjectFile{rel, ss.str()});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    return out;
}

ProjectAnalysis analyze_project_serial(const std::vector<ProjectFile>& files, const AnalyzeOptions& options) {
    Split split = split_files(files);
    ProjectAnalysis out;
    for (const auto* f : split.sources) out.files.push_back(parse_one(*f));
    log_errors(out.files);
    out.index = build_binding_index(split.native, collect_units(out.files), options.patterns);
    for (auto& fa : out.files) analyze_one(fa, out.index, options);
    return out;
}

ProjectAnalysis analyze_project(const std::vector<ProjectFile>& files, const AnalyzeOptions& options) {
    Split split = split_files(files);
    ProjectAnalysis out;
    out.files.resize(split.sources.size());
    const long n = static_cast<long>(split.sources.size());
    const int threads = options.jobs > 0 ? options.jobs : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long i = 0; i < n; ++i) out.files[static_cast<size_t>(i)] = parse_one(*split.sources[static_cast<size_t>(i)]);
    log_errors(out.files);

    out.index = build_binding_index(split.native, collect_units(out.files), options.patterns);

#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (long i = 0; i < n; ++i) analyze_one(out.files[static_cast<size_t>(i)], out.index, options);
    return out;
}

}  // namespace xlb
