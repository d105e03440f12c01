#include "cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "xlb/analyze.hpp"
#include "xlb/corpus.hpp"
#include "xlb/error.hpp"
#include "xlb/io.hpp"
#include "xlb/repo_miner.hpp"
#include "xlb/version.hpp"

namespace xlb::cli {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// Values from --config fill in options that were not given as flags.
class Config {
public:
    void load(const std::string& path) {
        if (path.empty()) return;
        try {
            json_ = nlohmann::json::parse(read_file(path));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::invalid_config, path + ": " + e.what());
        }
        if (!json_.is_object()) throw Error(ErrorKind::invalid_config, path + ": config must be a JSON object");
    }

    template <typename T>
    void fill(const CLI::Option* flag, const char* key, T& value) const {
        if (flag->count() > 0 || !json_.contains(key)) return;
        try {
            value = json_.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::invalid_config, std::string("config key ") + key + ": " + e.what());
        }
    }

    const nlohmann::json* get(const char* key) const { return json_.contains(key) ? &json_.at(key) : nullptr; }

private:
    nlohmann::json json_ = nlohmann::json::object();
};

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") out << text;
    else write_file_atomic(path, text);
}

SplitRatios parse_ratios(const std::string& text) {
    SplitRatios r{};
    std::stringstream ss(text);
    std::string part;
    size_t i = 0;
    while (std::getline(ss, part, ',')) {
        if (i >= 3) throw Error(ErrorKind::invalid_config, "ratios need exactly three values");
        try {
            size_t used = 0;
            r[i++] = std::stod(part, &used);
            if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception&) {
            throw Error(ErrorKind::invalid_config, "bad ratio '" + part + "'");
        }
    }
    if (i != 3) throw Error(ErrorKind::invalid_config, "ratios need exactly three values");
    return r;
}

std::optional<DatasetManifest> read_manifest(const std::string& data_path) {
    fs::path p = manifest_path_for(data_path);
    if (!fs::exists(p)) return std::nullopt;
    try {
        return manifest_from_json(nlohmann::json::parse(read_file(p)));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::malformed_input, p.string() + ": " + e.what());
    }
}

void write_manifest(const std::string& data_path, const DatasetManifest& m) {
    write_file_atomic(manifest_path_for(data_path), to_json(m).dump(2) + "\n");
}

// ---- scan ----------------------------------------------------------------

struct ScanOptions {
    std::vector<std::string> paths;
    std::vector<std::string> mechanisms;
    std::string patterns;
    int max_transfers = kDefaultMaxTransfers;
    int jobs = 0;
    bool fail_on_found = false;
    std::string output;
    std::string config;
};

ojson site_json(const CrossLangSite& s) {
    ojson j;
    j["mechanism"] = std::string(to_string(s.mechanism));
    j["kind"] = std::string(to_string(s.kind));
    j["line"] = s.line;
    j["column"] = s.column;
    j["callee"] = s.call.callee;
    j["receiver"] = s.call.receiver ? ojson(*s.call.receiver) : ojson(nullptr);
    j["handle_var"] = s.handle_var ? ojson(*s.handle_var) : ojson(nullptr);
    j["evidence"] = s.evidence;
    return j;
}

ojson mark_json(const TaintMark& m) {
    ojson j;
    j["line"] = m.line;
    j["depth"] = m.depth;
    j["var"] = m.var ? ojson(*m.var) : ojson(nullptr);
    j["origin"] = {{"line", m.origin.line},
                   {"column", m.origin.column},
                   {"mechanism", std::string(to_string(m.origin.mechanism))}};
    return j;
}

ojson function_json(const FunctionSpan& f) {
    return {{"name", f.name}, {"qualified_name", f.qualified_name}, {"start_line", f.start_line}, {"end_line", f.end_line}};
}

ojson index_json(const NativeBindingIndex& index) {
    auto entries = [](const std::map<std::string, BindingEntry>& m) {
        auto arr = ojson::array();
        for (const auto& [name, e] : m) {
            auto ev = ojson::array();
            for (const auto& x : e.evidence) ev.push_back({{"file", x.file}, {"line", x.line}, {"text", x.text}});
            arr.push_back({{"name", name},
                           {"mechanism", std::string(to_string(e.mechanism))},
                           {"evidence", ev},
                           {"native_methods", e.native_methods}});
        }
        return arr;
    };
    return {{"java_types", entries(index.java_types)}, {"python_modules", entries(index.python_modules)}};
}

int cmd_scan(const ScanOptions& o_in, const CLI::App& sub, std::ostream& out, std::ostream& err) {
    ScanOptions o = o_in;
    Config cfg;
    cfg.load(o.config);
    cfg.fill(sub.get_option("--mechanisms"), "mechanisms", o.mechanisms);
    cfg.fill(sub.get_option("--patterns"), "patterns", o.patterns);
    cfg.fill(sub.get_option("--max-transfers"), "max_transfers", o.max_transfers);
    cfg.fill(sub.get_option("--jobs"), "jobs", o.jobs);

    AnalyzeOptions aopt;
    aopt.max_transfers = o.max_transfers;
    aopt.jobs = o.jobs;
    if (o.max_transfers < 1) throw Error(ErrorKind::invalid_config, "--max-transfers must be at least 1");
    for (const auto& name : o.mechanisms) {
        auto m = mechanism_from_name(name);
        if (!m) throw Error(ErrorKind::invalid_config, "unknown mechanism '" + name + "'");
        aopt.mechanisms.insert(*m);
    }
    if (!o.patterns.empty()) aopt.patterns = PatternConfig::load(o.patterns);

    ojson report;
    report["tool"] = "xlb";
    report["version"] = std::string(kToolVersion);
    report["max_transfers"] = o.max_transfers;
    auto mechs = ojson::array();
    for (auto m : aopt.mechanisms) mechs.push_back(std::string(to_string(m)));
    report["mechanisms"] = mechs;
    report["projects"] = ojson::array();
    size_t n_files = 0, n_sites = 0, n_marks = 0, n_functions = 0;
    for (const auto& root : o.paths) {
        auto files = load_project_files(root);
        auto analysis = analyze_project(files, aopt);
        ojson proj;
        proj["root"] = root;
        proj["index"] = index_json(analysis.index);
        proj["files"] = ojson::array();
        for (const auto& f : analysis.files) {
            ojson fj;
            fj["path"] = f.path;
            fj["language"] = f.unit ? ojson(std::string(to_string(f.unit->language))) : ojson(nullptr);
            fj["error"] = f.error ? ojson(*f.error) : ojson(nullptr);
            fj["warnings"] = f.unit ? ojson(f.unit->warnings) : ojson::array();
            fj["sites"] = ojson::array();
            for (const auto& s : f.sites) fj["sites"].push_back(site_json(s));
            fj["marks"] = ojson::array();
            for (const auto& m : f.marks) fj["marks"].push_back(mark_json(m));
            fj["functions"] = ojson::array();
            for (const auto& fn : f.functions) fj["functions"].push_back(function_json(fn));
            if (f.error) spdlog::warn("{}: {}", f.path, *f.error);
            ++n_files;
            n_sites += f.sites.size();
            n_marks += f.marks.size();
            n_functions += f.functions.size();
            proj["files"].push_back(std::move(fj));
        }
        report["projects"].push_back(std::move(proj));
    }
    report["summary"] = {{"files", n_files}, {"sites", n_sites}, {"marks", n_marks}, {"functions", n_functions}};
    write_output(o.output, report.dump(2) + "\n", out);
    if (o.fail_on_found && n_sites > 0) {
        err << "found " << n_sites << " cross-language site(s)\n";
        return kFindings;
    }
    return kOk;
}

// ---- mine ----------------------------------------------------------------

struct MineOptions {
    std::string state_dir;
    std::string output;
    std::string offline_fixture;
    bool resume = false;
    size_t max_units = 0;
    int jobs = 0;
    int max_transfers = kDefaultMaxTransfers;
    std::string patterns;
    std::string exclude;
    std::optional<int> min_stars;
    std::optional<double> min_share;
    std::string config;
};

int cmd_mine(const MineOptions& o_in, const CLI::App& sub, std::ostream& out, std::ostream& err) {
    MineOptions o = o_in;
    Config cfg;
    cfg.load(o.config);
    cfg.fill(sub.get_option("--state-dir"), "state_dir", o.state_dir);
    cfg.fill(sub.get_option("--output"), "output", o.output);
    cfg.fill(sub.get_option("--jobs"), "jobs", o.jobs);
    cfg.fill(sub.get_option("--max-transfers"), "max_transfers", o.max_transfers);
    cfg.fill(sub.get_option("--patterns"), "patterns", o.patterns);
    cfg.fill(sub.get_option("--exclude"), "exclude", o.exclude);
    if (o.state_dir.empty()) throw Error(ErrorKind::invalid_config, "--state-dir is required");
    if (o.output.empty()) throw Error(ErrorKind::invalid_config, "--output is required");

    MiningCriteria criteria;
    if (const auto* c = cfg.get("criteria")) criteria = MiningCriteria::from_json(*c);
    if (o.min_stars) criteria.min_stars = *o.min_stars;
    if (o.min_share) criteria.min_language_share = *o.min_share;
    if (!o.exclude.empty()) {
        std::istringstream in(read_file(o.exclude));
        for (std::string line; std::getline(in, line);) {
            while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
            if (!line.empty() && line[0] != '#') criteria.excluded_repos.insert(line);
        }
    }
    criteria.validate();

    PipelineOptions popt;
    popt.resume = o.resume;
    popt.max_units = o.max_units;
    popt.extract.jobs = o.jobs;
    popt.extract.max_transfers = o.max_transfers;
    if (!o.patterns.empty()) popt.extract.patterns = PatternConfig::load(o.patterns);

    std::unique_ptr<HostingApi> api;
    if (!o.offline_fixture.empty()) api = std::make_unique<FixtureApi>(o.offline_fixture);
    else api = std::make_unique<GithubApi>(GithubApi::options_from_env(fs::path(o.state_dir) / "cache"));

    auto result = run_pipeline(*api, criteria, o.state_dir, popt);
    if (!result.complete) {
        err << "stopped after " << result.units_processed << " work unit(s); rerun with --resume to continue\n";
        return kOk;
    }
    write_file_atomic(o.output, pairs_to_jsonl(result.pairs));
    DatasetManifest m;
    m.criteria = criteria.to_json();
    m.tool_version = std::string(kToolVersion);
    m.pair_count = result.pairs.size();
    m.run_config = {{"command", "mine"},
                    {"state_dir", o.state_dir},
                    {"output", o.output},
                    {"resume", o.resume},
                    {"offline_fixture", o.offline_fixture.empty() ? nlohmann::json(nullptr) : nlohmann::json(o.offline_fixture)},
                    {"max_transfers", o.max_transfers},
                    {"patterns", o.patterns.empty() ? nlohmann::json(nullptr) : nlohmann::json(o.patterns)}};
    write_manifest(o.output, m);
    out << "mined " << result.pairs.size() << " pair(s) from " << result.repositories << " repositories\n";
    return kOk;
}

// ---- build / split / stats / score --------------------------------------

struct BuildOptions {
    std::string input;
    std::string output;
    bool no_comments = false;
    std::string config;
};

int cmd_build(const BuildOptions& o_in, const CLI::App& sub, std::ostream& out) {
    BuildOptions o = o_in;
    Config cfg;
    cfg.load(o.config);
    bool with_comments = !o.no_comments;
    cfg.fill(sub.get_option("--no-comments"), "with_comments", with_comments);
    auto pairs = pairs_from_jsonl(read_file(o.input));
    BuildReport rep;
    auto records = build_dataset(pairs, with_comments, &rep);
    write_file_atomic(o.output, records_to_jsonl(records));
    DatasetManifest m;
    if (auto in = read_manifest(o.input)) m.criteria = in->criteria;
    m.with_comments = with_comments;
    m.tool_version = std::string(kToolVersion);
    m.pair_count = rep.pairs;
    m.run_config = {{"command", "build"}, {"input", o.input}, {"output", o.output}, {"with_comments", with_comments}};
    write_manifest(o.output, m);
    out << "built " << records.size() << " record(s) from " << rep.pairs << " pair(s); dropped " << rep.duplicates
        << " duplicate, " << rep.empty_after_stripping << " empty, " << rep.identical_after_stripping
        << " comment-only\n";
    return kOk;
}

struct SplitOptions {
    std::string input;
    std::string output;
    uint64_t seed = 0;
    std::string ratios = "0.8,0.1,0.1";
    std::string config;
};

int cmd_split(const SplitOptions& o_in, const CLI::App& sub, std::ostream& out) {
    SplitOptions o = o_in;
    Config cfg;
    cfg.load(o.config);
    cfg.fill(sub.get_option("--seed"), "seed", o.seed);
    if (const auto* r = cfg.get("ratios"); r && sub.get_option("--ratios")->count() == 0) {
        try {
            auto v = r->get<std::vector<double>>();
            if (v.size() != 3) throw Error(ErrorKind::invalid_config, "config ratios need three values");
            o.ratios = std::to_string(v[0]) + "," + std::to_string(v[1]) + "," + std::to_string(v[2]);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::invalid_config, std::string("config ratios: ") + e.what());
        }
    }
    SplitRatios ratios = parse_ratios(o.ratios);
    auto records = split_dataset(records_from_jsonl(read_file(o.input)), o.seed, ratios);
    write_file_atomic(o.output, records_to_jsonl(records));

    DatasetManifest m;
    if (auto in = read_manifest(o.input)) m = *in;
    m.seed = o.seed;
    m.ratios = ratios;
    m.tool_version = std::string(kToolVersion);
    std::set<std::string> ids;
    for (const auto& r : records) ids.insert(r.pair_id);
    m.pair_count = ids.size();
    m.run_config = {{"command", "split"}, {"input", o.input}, {"output", o.output}, {"seed", o.seed}, {"ratios", ratios}};
    write_manifest(o.output, m);
    auto sizes = split_sizes(ids.size(), ratios);
    out << "split " << ids.size() << " pair(s): train " << sizes.train << ", valid " << sizes.valid << ", test "
        << sizes.test << "\n";
    return kOk;
}

struct StatsOptions {
    std::string input;
    std::string json_out;
    bool json = false;
};

int cmd_stats(const StatsOptions& o, std::ostream& out) {
    auto st = compute_stats(records_from_jsonl(read_file(o.input)));
    auto j = stats_to_json(st);
    if (!o.json_out.empty()) write_file_atomic(o.json_out, j.dump(2) + "\n");
    if (o.json) out << j.dump(2) << "\n";
    else out << format_stats_table(st);
    return kOk;
}

struct ScoreOptions {
    std::string input;
    double threshold = 0.5;
    std::string output;
};

int cmd_score(const ScoreOptions& o, std::ostream& out) {
    std::vector<int> labels;
    std::vector<double> scores;
    int lineno = 0;
    std::string text = read_file(o.input);
    for (auto line : split_lines(text)) {
        ++lineno;
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
        try {
            auto j = nlohmann::json::parse(line);
            if (!j.at("label").is_number_integer()) throw Error(ErrorKind::malformed_input, "label must be 0 or 1");
            labels.push_back(j.at("label").get<int>());
            scores.push_back(j.at("score").get<double>());
        } catch (const std::exception& e) {
            throw Error(ErrorKind::malformed_input, "line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    auto m = score(labels, scores, o.threshold);
    if (!m.auc) spdlog::warn("labels contain a single class; AUC is undefined");
    auto j = metrics_to_json(m);
    j["threshold"] = o.threshold;
    write_output(o.output, j.dump(2) + "\n", out);
    return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cross-language code finder, repository miner and dataset builder", "xlb"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);
    bool quiet = false, verbose = false;
    app.add_flag("-q,--quiet", quiet, "Only log warnings and errors");
    app.add_flag("-v,--verbose", verbose, "Log debug detail");

    ScanOptions scan;
    auto* s = app.add_subcommand("scan", "Report cross-language sites, marked lines and functions as JSON");
    s->add_option("paths", scan.paths, "Project directories or files")->required()->check(CLI::ExistingPath);
    s->add_option("--mechanisms", scan.mechanisms, "Only report these mechanisms")->delimiter(',');
    s->add_option("--patterns", scan.patterns, "Extra detection patterns (JSON)");
    s->add_option("--max-transfers", scan.max_transfers, "Transfer bound for propagation");
    s->add_option("--jobs", scan.jobs, "Worker threads (default: logical cores)");
    s->add_flag("--fail-on-found", scan.fail_on_found, "Exit 3 when any site is found");
    s->add_option("-o,--output", scan.output, "Write the report here instead of stdout");
    s->add_option("--config", scan.config, "JSON config file; flags take precedence");

    MineOptions mine;
    auto* mi = app.add_subcommand("mine", "Mine bug-fix function pairs");
    mi->add_option("--state-dir", mine.state_dir, "Checkpoints, cache and clones");
    mi->add_option("-o,--output", mine.output, "Pairs JSONL output");
    mi->add_option("--offline-fixture", mine.offline_fixture, "Use a local fixture universe instead of the API")
        ->check(CLI::ExistingDirectory);
    mi->add_flag("--resume", mine.resume, "Skip work units recorded in the checkpoint");
    mi->add_option("--max-units", mine.max_units, "Stop after this many new work units");
    mi->add_option("--jobs", mine.jobs, "Worker threads (default: logical cores)");
    mi->add_option("--max-transfers", mine.max_transfers, "Transfer bound for propagation");
    mi->add_option("--patterns", mine.patterns, "Extra detection patterns (JSON)");
    mi->add_option("--exclude", mine.exclude, "Repositories to drop after review, one per line");
    mi->add_option("--min-stars", mine.min_stars, "Star threshold (inclusive)");
    mi->add_option("--min-share", mine.min_share, "Minimum share of each language (exclusive)");
    mi->add_option("--config", mine.config, "JSON config file; flags take precedence");

    BuildOptions build;
    auto* b = app.add_subcommand("build", "Turn pairs into labeled dataset records");
    b->add_option("-i,--input", build.input, "Pairs JSONL")->required();
    b->add_option("-o,--output", build.output, "Dataset JSONL")->required();
    b->add_flag("--no-comments", build.no_comments, "Strip comments, docstrings and blank lines");
    b->add_option("--config", build.config, "JSON config file; flags take precedence");

    SplitOptions split;
    auto* sp = app.add_subcommand("split", "Assign pairs to train/valid/test");
    sp->add_option("-i,--input", split.input, "Dataset JSONL")->required();
    sp->add_option("-o,--output", split.output, "Split dataset JSONL")->required();
    sp->add_option("--seed", split.seed, "Shuffle seed");
    sp->add_option("--ratios", split.ratios, "train,valid,test fractions");
    sp->add_option("--config", split.config, "JSON config file; flags take precedence");

    StatsOptions stats;
    auto* st = app.add_subcommand("stats", "Dataset statistics");
    st->add_option("-i,--input", stats.input, "Dataset JSONL")->required();
    st->add_option("--json-out", stats.json_out, "Also write the statistics as JSON here");
    st->add_flag("--json", stats.json, "Print JSON instead of the table");

    ScoreOptions sc;
    auto* so = app.add_subcommand("score", "Classification metrics from label/score JSONL");
    so->add_option("-i,--input", sc.input, "JSONL lines with label and score")->required();
    so->add_option("--threshold", sc.threshold, "Positive when score >= threshold");
    so->add_option("-o,--output", sc.output, "Write the metrics here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kToolVersion << "\n";
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    }

    auto logger = spdlog::get("xlb");
    if (!logger) logger = spdlog::stderr_color_mt("xlb");
    spdlog::set_default_logger(logger);
    spdlog::set_level(quiet ? spdlog::level::warn : verbose ? spdlog::level::debug : spdlog::level::info);

    try {
        if (s->parsed()) return cmd_scan(scan, *s, out, err);
        if (mi->parsed()) return cmd_mine(mine, *mi, out, err);
        if (b->parsed()) return cmd_build(build, *b, out);
        if (sp->parsed()) return cmd_split(split, *sp, out);
        if (st->parsed()) return cmd_stats(stats, out);
        if (so->parsed()) return cmd_score(sc, out);
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
        return kUsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsageError;
    }
    return kUsageError;
}

}  // namespace xlb::cli
