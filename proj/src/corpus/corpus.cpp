#include "xlb/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "xlb/error.hpp"

namespace xlb {
namespace {

std::string normalize_line_endings(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\r') {
            out += '\n';
            if (i + 1 < s.size() && s[i + 1] == '\n') ++i;
        } else {
            out += s[i];
        }
    }
    return out;
}

bool is_blank(std::string_view s) { return s.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos; }

// Unbiased draw in [0, bound) from raw 64-bit outputs.
uint64_t draw_below(std::mt19937_64& rng, uint64_t bound) {
    const uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        uint64_t x = rng();
        if (x >= threshold) return x % bound;
    }
}

size_t count_lines(std::string_view text) {
    if (text.empty()) return 0;
    return static_cast<size_t>(std::count(text.begin(), text.end(), '\n')) + 1;
}

size_t count_tokens(std::string_view text) {
    size_t n = 0;
    bool in_token = false;
    for (char c : text) {
        bool space = std::isspace(static_cast<unsigned char>(c));
        if (!space && !in_token) ++n;
        in_token = !space;
    }
    return n;
}

std::string grouped(size_t n) {
    std::string digits = std::to_string(n);
    std::string out;
    int k = 0;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it, ++k) {
        if (k && k % 3 == 0) out += ',';
        out += *it;
    }
    return {out.rbegin(), out.rend()};
}

const std::array<std::string_view, 13> kRecordKeys = {"id",   "pair_id",       "repo",       "commit", "parent_commit",
                                                      "file", "language",      "function_name", "mechanisms",
                                                      "label", "code",         "security",   "split"};

}  // namespace

std::string_view to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::valid: return "valid";
        case Split::test: return "test";
    }
    return "?";
}

std::optional<Split> split_from_name(std::string_view name) {
    if (name == "train") return Split::train;
    if (name == "valid") return Split::valid;
    if (name == "test") return Split::test;
    return std::nullopt;
}

std::vector<DatasetRecord> build_dataset(const std::vector<FunctionPair>& pairs, bool with_comments,
                                         BuildReport* report) {
    BuildReport rep;
    rep.input_pairs = pairs.size();
    std::vector<const FunctionPair*> order;
    for (const auto& p : pairs) order.push_back(&p);
    std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->pair_id < b->pair_id; });

    std::set<std::string> seen_ids;
    std::set<std::pair<std::string, std::string>> seen_text;
    std::vector<DatasetRecord> out;
    for (const FunctionPair* p : order) {
        std::string buggy = normalize_line_endings(p->buggy_code);
        std::string clean = normalize_line_endings(p->clean_code);
        if (!seen_ids.insert(p->pair_id).second || !seen_text.emplace(buggy, clean).second) {
            ++rep.duplicates;
            continue;
        }
        if (!with_comments) {
            buggy = strip_comments(buggy, p->language);
            clean = strip_comments(clean, p->language);
        }
        if (is_blank(buggy) || is_blank(clean)) {
            ++rep.empty_after_stripping;
            spdlog::warn("pair {} ({}:{}) is empty after stripping; dropped", p->pair_id, p->file, p->qualified_name);
            continue;
        }
        if (buggy == clean) {
            ++rep.identical_after_stripping;
            spdlog::info("pair {} differs only in comments or blank lines; dropped", p->pair_id);
            continue;
        }
        DatasetRecord base;
        base.pair_id = p->pair_id;
        base.repo = p->repo;
        base.commit = p->sha;
        base.parent_commit = p->parent_sha;
        base.file = p->file;
        base.language = std::string(to_string(p->language));
        base.function_name = p->qualified_name;
        for (auto m : p->mechanisms) base.mechanisms.emplace_back(to_string(m));
        base.security = p->is_security;

        DatasetRecord b = base;
        b.id = p->pair_id + "_1";
        b.label = 1;
        b.code = std::move(buggy);
        DatasetRecord c = std::move(base);
        c.id = p->pair_id + "_0";
        c.label = 0;
        c.code = std::move(clean);
        out.push_back(std::move(b));
        out.push_back(std::move(c));
        ++rep.pairs;
    }
    if (report) *report = rep;
    return out;
}

SplitSizes split_sizes(size_t pair_count, const SplitRatios& ratios) {
    // The epsilon keeps exact products such as 0.8 * 10 from flooring to 7.
    auto part = [&](double r) { return static_cast<size_t>(std::floor(r * static_cast<double>(pair_count) + 1e-9)); };
    SplitSizes s;
    s.train = std::min(part(ratios[0]), pair_count);
    s.valid = std::min(part(ratios[1]), pair_count - s.train);
    s.test = pair_count - s.train - s.valid;
    return s;
}

std::vector<DatasetRecord> split_dataset(std::vector<DatasetRecord> records, uint64_t seed, const SplitRatios& ratios) {
    double sum = 0;
    for (double r : ratios) {
        if (!(r >= 0.0) || r > 1.0) throw Error(ErrorKind::invalid_config, "split ratios must lie in [0, 1]");
        sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorKind::invalid_config, "split ratios must sum to 1");
    for (const auto& r : records)
        if (r.split) throw Error(ErrorKind::already_split, "record " + r.id + " already has split " + std::string(to_string(*r.split)));

    std::vector<std::string> ids;
    for (const auto& r : records) ids.push_back(r.pair_id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

    std::mt19937_64 rng(seed);
    for (size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[draw_below(rng, i)]);

    SplitSizes sizes = split_sizes(ids.size(), ratios);
    std::map<std::string, Split> assignment;
    for (size_t i = 0; i < ids.size(); ++i) {
        Split s = i < sizes.train ? Split::train : i < sizes.train + sizes.valid ? Split::valid : Split::test;
        assignment[ids[i]] = s;
    }
    for (auto& r : records) r.split = assignment.at(r.pair_id);
    return records;
}

LineBuckets& add_line_count(LineBuckets& b, size_t lines) {
    if (lines < 60) ++b.under_60;
    else if (lines <= 200) ++b.from_60_to_200;
    else ++b.over_200;
    return b;
}

TokenBuckets& add_token_count(TokenBuckets& b, size_t tokens) {
    if (tokens <= 128) ++b.up_to_128;
    else if (tokens <= 256) ++b.from_129_to_256;
    else if (tokens <= 512) ++b.from_257_to_512;
    else ++b.over_512;
    return b;
}

DatasetStats compute_stats(const std::vector<DatasetRecord>& records) {
    if (records.empty()) throw Error(ErrorKind::empty_dataset, "dataset has no records");
    DatasetStats st;
    st.record_count = records.size();

    std::map<std::string, const DatasetRecord*> pairs;
    for (const auto& r : records) pairs.emplace(r.pair_id, &r);
    st.pair_count = pairs.size();

    std::set<std::pair<std::string, std::string>> commits, security_commits;
    for (const auto& [id, r] : pairs) {
        ++st.languages[r->language].pairs;
        commits.emplace(r->repo, r->commit);
        if (r->security) {
            ++st.security_pairs;
            security_commits.emplace(r->repo, r->commit);
        }
        ++st.split_pairs[r->split ? std::string(to_string(*r->split)) : "unsplit"];
    }
    for (auto& [lang, share] : st.languages)
        share.percent = 100.0 * static_cast<double>(share.pairs) / static_cast<double>(st.pair_count);
    st.commits = commits.size();
    st.security_commits = security_commits.size();

    for (const auto& r : records) {
        auto lang = language_from_name(r.language);
        std::string stripped = lang ? strip_comments(r.code, *lang) : r.code;
        bool buggy = r.label == 1;
        add_line_count(buggy ? st.buggy_lines : st.clean_lines, count_lines(stripped));
        add_token_count(buggy ? st.buggy_tokens : st.clean_tokens, count_tokens(r.code));
    }
    return st;
}

std::string format_stats_table(const DatasetStats& st) {
    std::ostringstream os;
    os << fmt::format("{:<24}{:>10}\n", "Function pairs", grouped(st.pair_count));
    os << fmt::format("{:<24}{:>10}\n", "Function instances", grouped(st.record_count));
    os << fmt::format("{:<24}{:>10}\n", "Source commits", grouped(st.commits));
    os << fmt::format("{:<24}{:>10}\n", "Security pairs", grouped(st.security_pairs));
    os << fmt::format("{:<24}{:>10}\n", "Security commits", grouped(st.security_commits));
    os << "\n" << fmt::format("{:<12}{:>10}{:>10}\n", "Language", "Pairs", "Share");
    for (const auto& [lang, share] : st.languages)
        os << fmt::format("{:<12}{:>10}{:>9.2f}%\n", lang, grouped(share.pairs), share.percent);
    os << "\n" << fmt::format("{:<18}{:>8}{:>8}{:>8}\n", "Lines (stripped)", "<60", "60-200", ">200");
    for (auto [name, b] : {std::pair{"buggy", st.buggy_lines}, std::pair{"clean", st.clean_lines}})
        os << fmt::format("{:<18}{:>8}{:>8}{:>8}\n", name, b.under_60, b.from_60_to_200, b.over_200);
    os << "\n" << fmt::format("{:<18}{:>8}{:>8}{:>8}{:>8}\n", "Tokens", "<=128", "<=256", "<=512", ">512");
    for (auto [name, b] : {std::pair{"buggy", st.buggy_tokens}, std::pair{"clean", st.clean_tokens}})
        os << fmt::format("{:<18}{:>8}{:>8}{:>8}{:>8}\n", name, b.up_to_128, b.from_129_to_256, b.from_257_to_512,
                          b.over_512);
    os << "\n" << fmt::format("{:<12}{:>10}\n", "Split", "Pairs");
    for (const auto& [name, n] : st.split_pairs) os << fmt::format("{:<12}{:>10}\n", name, grouped(n));
    return os.str();
}

nlohmann::ordered_json stats_to_json(const DatasetStats& st) {
    nlohmann::ordered_json j;
    j["pair_count"] = st.pair_count;
    j["record_count"] = st.record_count;
    j["commits"] = st.commits;
    j["security_pairs"] = st.security_pairs;
    j["security_commits"] = st.security_commits;
    auto langs = nlohmann::ordered_json::object();
    for (const auto& [lang, share] : st.languages)
        langs[lang] = {{"pairs", share.pairs}, {"percent", std::round(share.percent * 100.0) / 100.0}};
    j["languages"] = langs;
    auto lines = [](const LineBuckets& b) {
        return nlohmann::ordered_json{{"lt_60", b.under_60}, {"60_200", b.from_60_to_200}, {"gt_200", b.over_200}};
    };
    auto tokens = [](const TokenBuckets& b) {
        return nlohmann::ordered_json{{"le_128", b.up_to_128},
                                      {"129_256", b.from_129_to_256},
                                      {"257_512", b.from_257_to_512},
                                      {"gt_512", b.over_512}};
    };
    j["lines"] = {{"buggy", lines(st.buggy_lines)}, {"clean", lines(st.clean_lines)}};
    j["tokens"] = {{"buggy", tokens(st.buggy_tokens)}, {"clean", tokens(st.clean_tokens)}};
    auto splits = nlohmann::ordered_json::object();
    for (const auto& [name, n] : st.split_pairs) splits[name] = n;
    j["splits"] = splits;
    return j;
}

MetricReport score(const std::vector<int>& labels, const std::vector<double>& scores, double threshold) {
    if (labels.size() != scores.size())
        throw Error(ErrorKind::invalid_config, "labels and scores differ in length");
    if (labels.empty()) throw Error(ErrorKind::invalid_config, "nothing to score");
    MetricReport m;
    for (size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) throw Error(ErrorKind::invalid_config, "labels must be 0 or 1");
        if (std::isnan(scores[i])) throw Error(ErrorKind::invalid_config, "score is NaN");
        bool predicted = scores[i] >= threshold;
        if (labels[i] == 1) (predicted ? m.tp : m.fn)++;
        else (predicted ? m.fp : m.tn)++;
    }
    auto ratio = [](size_t a, size_t b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); };
    m.accuracy = ratio(m.tp + m.tn, labels.size());
    m.precision = ratio(m.tp, m.tp + m.fp);
    m.recall = ratio(m.tp, m.tp + m.fn);
    m.f1 = m.precision + m.recall == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);

    const uint64_t pos = m.tp + m.fn;
    const uint64_t neg = m.tn + m.fp;
    if (pos == 0 || neg == 0) return m;
    // Mann-Whitney U with mid-ranks; everything is doubled to stay integral.
    std::vector<size_t> idx(labels.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return scores[a] < scores[b]; });
    uint64_t rank_sum2 = 0;
    for (size_t i = 0; i < idx.size();) {
        size_t j = i;
        while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
        uint64_t mid2 = (i + 1) + j;
        for (size_t k = i; k < j; ++k)
            if (labels[idx[k]] == 1) rank_sum2 += mid2;
        i = j;
    }
    uint64_t u2 = rank_sum2 - pos * (pos + 1);
    m.auc = static_cast<double>(u2) / static_cast<double>(2 * pos * neg);
    return m;
}

nlohmann::ordered_json metrics_to_json(const MetricReport& m) {
    nlohmann::ordered_json j;
    j["accuracy"] = m.accuracy;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    j["f1"] = m.f1;
    j["auc"] = m.auc ? nlohmann::ordered_json(*m.auc) : nlohmann::ordered_json(nullptr);
    j["tp"] = m.tp;
    j["tn"] = m.tn;
    j["fp"] = m.fp;
    j["fn"] = m.fn;
    return j;
}

nlohmann::ordered_json to_json(const DatasetRecord& r) {
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["pair_id"] = r.pair_id;
    j["repo"] = r.repo;
    j["commit"] = r.commit;
    j["parent_commit"] = r.parent_commit;
    j["file"] = r.file;
    j["language"] = r.language;
    j["function_name"] = r.function_name;
    j["mechanisms"] = r.mechanisms;
    j["label"] = r.label;
    j["code"] = r.code;
    j["security"] = r.security;
    j["split"] = r.split ? nlohmann::ordered_json(std::string(to_string(*r.split))) : nlohmann::ordered_json(nullptr);
    return j;
}

DatasetRecord record_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorKind::malformed_input, "record is not an object");
    if (j.size() != kRecordKeys.size()) throw Error(ErrorKind::malformed_input, "record must have exactly the dataset keys");
    for (auto k : kRecordKeys)
        if (!j.contains(k)) throw Error(ErrorKind::malformed_input, "missing key " + std::string(k));
    try {
        DatasetRecord r;
        r.id = j.at("id").get<std::string>();
        r.pair_id = j.at("pair_id").get<std::string>();
        r.repo = j.at("repo").get<std::string>();
        r.commit = j.at("commit").get<std::string>();
        r.parent_commit = j.at("parent_commit").get<std::string>();
        r.file = j.at("file").get<std::string>();
        r.language = j.at("language").get<std::string>();
        r.function_name = j.at("function_name").get<std::string>();
        r.mechanisms = j.at("mechanisms").get<std::vector<std::string>>();
        r.label = j.at("label").get<int>();
        if (!j.at("label").is_number_integer() || (r.label != 0 && r.label != 1))
            throw Error(ErrorKind::malformed_input, "label must be 0 or 1");
        r.code = j.at("code").get<std::string>();
        r.security = j.at("security").get<bool>();
        if (!j.at("split").is_null()) {
            auto s = split_from_name(j.at("split").get<std::string>());
            if (!s) throw Error(ErrorKind::malformed_input, "unknown split " + j.at("split").get<std::string>());
            r.split = *s;
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::malformed_input, e.what());
    }
}

std::string records_to_jsonl(const std::vector<DatasetRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += to_json(r).dump();
        out += '\n';
    }
    return out;
}

std::vector<DatasetRecord> records_from_jsonl(std::string_view text) {
    std::vector<DatasetRecord> out;
    int lineno = 0;
    for (auto line : split_lines(text)) {
        ++lineno;
        if (is_blank(line)) continue;
        try {
            out.push_back(record_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorKind::malformed_input, "line " + std::to_string(lineno) + ": " + e.what());
        } catch (const Error& e) {
            throw Error(ErrorKind::malformed_input, "line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

nlohmann::ordered_json to_json(const DatasetManifest& m) {
    nlohmann::ordered_json j;
    j["seed"] = m.seed ? nlohmann::ordered_json(*m.seed) : nlohmann::ordered_json(nullptr);
    j["ratios"] = m.ratios ? nlohmann::ordered_json(*m.ratios) : nlohmann::ordered_json(nullptr);
    j["with_comments"] = m.with_comments ? nlohmann::ordered_json(*m.with_comments) : nlohmann::ordered_json(nullptr);
    j["criteria"] = m.criteria;
    j["tool_version"] = m.tool_version;
    j["pair_count"] = m.pair_count;
    j["run_config"] = m.run_config;
    return j;
}

DatasetManifest manifest_from_json(const nlohmann::json& j) {
    try {
        DatasetManifest m;
        if (j.contains("seed") && !j["seed"].is_null()) m.seed = j["seed"].get<uint64_t>();
        if (j.contains("ratios") && !j["ratios"].is_null()) m.ratios = j["ratios"].get<SplitRatios>();
        if (j.contains("with_comments") && !j["with_comments"].is_null()) m.with_comments = j["with_comments"].get<bool>();
        if (j.contains("criteria")) m.criteria = j["criteria"];
        m.tool_version = j.value("tool_version", "");
        m.pair_count = j.value("pair_count", size_t{0});
        if (j.contains("run_config")) m.run_config = j["run_config"];
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::malformed_input, std::string("manifest: ") + e.what());
    }
}

std::string manifest_path_for(const std::string& output) { return output + ".manifest.json"; }

}  // namespace xlb
