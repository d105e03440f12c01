#include <algorithm>

#include <spdlog/spdlog.h>

#include "git.hpp"
#include "xlb/analyze.hpp"
#include "xlb/error.hpp"
#include "xlb/repo_miner.hpp"

namespace xlb {
namespace {

// Function identity across versions: qualified name plus occurrence index,
// so Java overloads pair up by declaration order.
std::map<std::string, const FunctionSpan*> keyed_functions(const SourceUnit& unit) {
    std::map<std::string, const FunctionSpan*> out;
    std::map<std::string, int> seen;
    for (const auto& f : unit.functions) {
        int k = ++seen[f.qualified_name];
        out[k == 1 ? f.qualified_name : f.qualified_name + "#" + std::to_string(k)] = &f;
    }
    return out;
}

bool same_span(const FunctionSpan& a, const FunctionSpan& b) {
    return a.start_line == b.start_line && a.end_line == b.end_line && a.qualified_name == b.qualified_name;
}

}  // namespace

std::vector<FunctionPair> extract_pairs(const RepoRecord& repo, const CommitMatch& match,
                                        const std::filesystem::path& git_dir, const ExtractOptions& options) {
    for (const auto* sha : {&match.parent_sha, &match.sha})
        if (!git::commit_exists(git_dir, *sha))
            throw Error(ErrorKind::checkout_failed, repo.full_name + ": commit " + *sha + " not found");

    std::set<std::string> modified;
    for (const auto& c : git::changed_files(git_dir, match.parent_sha, match.sha)) {
        if (!language_from_path(c.path)) continue;
        if (c.status == 'M') modified.insert(c.path);
        else spdlog::debug("{}@{}: {} has status {}; no function pairs", repo.full_name, match.sha, c.path, c.status);
    }
    if (modified.empty()) return {};

    // The binding index comes from the parent snapshot.
    std::vector<std::string> wanted;
    for (auto& p : git::tree_files(git_dir, match.parent_sha))
        if (language_from_path(p) || is_native_evidence_path(p)) wanted.push_back(std::move(p));
    auto parent_blobs = git::read_blobs(git_dir, match.parent_sha, wanted);
    std::vector<ProjectFile> snapshot;
    for (auto& [path, content] : parent_blobs) snapshot.push_back(ProjectFile{path, std::move(content)});

    AnalyzeOptions aopt;
    aopt.max_transfers = options.max_transfers;
    aopt.patterns = options.patterns;
    aopt.jobs = options.jobs;
    aopt.focus = modified;
    ProjectAnalysis analysis = analyze_project(snapshot, aopt);

    auto fixed_blobs = git::read_blobs(git_dir, match.sha, {modified.begin(), modified.end()});

    std::vector<FunctionPair> out;
    for (const auto& fa : analysis.files) {
        if (!modified.count(fa.path)) continue;
        if (!fa.unit) {
            spdlog::warn("{}@{}: {} unparsable at parent; skipped", repo.full_name, match.parent_sha, fa.path);
            continue;
        }
        auto fixed_it = fixed_blobs.find(fa.path);
        if (fixed_it == fixed_blobs.end()) {
            spdlog::warn("{}@{}: {} vanished; skipped", repo.full_name, match.sha, fa.path);
            continue;
        }
        std::optional<SourceUnit> fixed;
        try {
            fixed = parse_unit(fa.path, fixed_it->second);
        } catch (const Error& e) {
            spdlog::warn("{}@{}: {} unreadable after fix: {}", repo.full_name, match.sha, fa.path, e.what());
            continue;
        }
        const SourceUnit& parent = *fa.unit;
        auto parent_fns = keyed_functions(parent);
        auto fixed_fns = keyed_functions(*fixed);

        for (const auto& [key, fn] : parent_fns) {
            bool cross = std::any_of(fa.functions.begin(), fa.functions.end(),
                                     [&](const FunctionSpan& f) { return same_span(f, *fn); });
            if (!cross) continue;
            auto fit = fixed_fns.find(key);
            if (fit == fixed_fns.end()) continue;  // deleted or renamed at the fix
            if (fit->second->body_text == fn->body_text) continue;

            std::set<Mechanism> mechs;
            for (const auto& m : fa.marks) {
                const FunctionSpan* at = function_at(parent, m.line);
                if (at && same_span(*at, *fn)) mechs.insert(m.origin.mechanism);
            }
            FunctionPair p;
            p.repo = repo.full_name;
            p.sha = match.sha;
            p.parent_sha = match.parent_sha;
            p.file = fa.path;
            p.language = parent.language;
            p.qualified_name = key;
            p.pair_id = make_pair_id(p.repo, p.sha, p.file, p.qualified_name);
            p.mechanisms.assign(mechs.begin(), mechs.end());
            p.buggy_code = fn->body_text;
            p.clean_code = fit->second->body_text;
            p.is_security = match.is_security;
            out.push_back(std::move(p));
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.pair_id < b.pair_id; });
    return out;
}

}  // namespace xlb
