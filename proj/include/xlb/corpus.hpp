#pragma once

// Labeled, balanced, split dataset built from function pairs, plus
// statistics and the classification scoring utility.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xlb/function_pair.hpp"
#include "xlb/source_model.hpp"

namespace xlb {

// Removes line and block comments, standalone Python docstrings and blank
// lines; trailing whitespace outside string literals is trimmed. Idempotent.
// The result has no trailing newline.
std::string strip_comments(std::string_view code, Language language);

enum class Split { train, valid, test };

std::string_view to_string(Split s);
std::optional<Split> split_from_name(std::string_view name);

struct DatasetRecord {
    std::string id;
    std::string pair_id;
    std::string repo;
    std::string commit;
    std::string parent_commit;
    std::string file;
    std::string language;
    std::string function_name;
    std::vector<std::string> mechanisms;
    int label = 0;  // 1 buggy, 0 clean
    std::string code;
    bool security = false;
    std::optional<Split> split;  // unset until split_dataset

    bool operator==(const DatasetRecord&) const = default;
};

struct BuildReport {
    size_t input_pairs = 0;
    size_t duplicates = 0;
    size_t empty_after_stripping = 0;
    size_t identical_after_stripping = 0;
    size_t pairs = 0;
};

// Two records per surviving pair, ordered by pair_id with the buggy record
// first. Duplicate pairs (same pair_id, or same buggy and clean text after
// line-ending normalization) keep the smallest pair_id.
std::vector<DatasetRecord> build_dataset(const std::vector<FunctionPair>& pairs, bool with_comments,
                                         BuildReport* report = nullptr);

using SplitRatios = std::array<double, 3>;
inline constexpr SplitRatios kDefaultRatios = {0.8, 0.1, 0.1};

struct SplitSizes {
    size_t train = 0;
    size_t valid = 0;
    size_t test = 0;

    bool operator==(const SplitSizes&) const = default;
};

// floor(r * P) train and valid pairs, remainder to test.
SplitSizes split_sizes(size_t pair_count, const SplitRatios& ratios = kDefaultRatios);

// Throws Error(already_split) if any record carries a split, and
// Error(invalid_config) for ratios that are negative or do not sum to 1.
std::vector<DatasetRecord> split_dataset(std::vector<DatasetRecord> records, uint64_t seed,
                                         const SplitRatios& ratios = kDefaultRatios);

struct LineBuckets {
    size_t under_60 = 0;
    size_t from_60_to_200 = 0;
    size_t over_200 = 0;

    bool operator==(const LineBuckets&) const = default;
};

struct TokenBuckets {
    size_t up_to_128 = 0;
    size_t from_129_to_256 = 0;
    size_t from_257_to_512 = 0;
    size_t over_512 = 0;

    bool operator==(const TokenBuckets&) const = default;
};

struct LanguageShare {
    size_t pairs = 0;
    double percent = 0.0;

    bool operator==(const LanguageShare&) const = default;
};

struct DatasetStats {
    size_t pair_count = 0;
    size_t record_count = 0;
    std::map<std::string, LanguageShare> languages;
    size_t security_pairs = 0;
    size_t security_commits = 0;
    size_t commits = 0;
    LineBuckets buggy_lines;
    LineBuckets clean_lines;
    TokenBuckets buggy_tokens;
    TokenBuckets clean_tokens;
    std::map<std::string, size_t> split_pairs;

    bool operator==(const DatasetStats&) const = default;
};

LineBuckets& add_line_count(LineBuckets& b, size_t lines);
TokenBuckets& add_token_count(TokenBuckets& b, size_t tokens);

// Throws Error(empty_dataset).
DatasetStats compute_stats(const std::vector<DatasetRecord>& records);

std::string format_stats_table(const DatasetStats& stats);
nlohmann::ordered_json stats_to_json(const DatasetStats& stats);

struct MetricReport {
    size_t tp = 0;
    size_t tn = 0;
    size_t fp = 0;
    size_t fn = 0;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::optional<double> auc;  // absent when labels hold one class

    bool operator==(const MetricReport&) const = default;
};

// Prediction is score >= threshold. AUC is the exact rank statistic with
// ties counted one half. Throws Error(invalid_config) for length mismatch,
// empty input or labels other than 0/1.
MetricReport score(const std::vector<int>& labels, const std::vector<double>& scores, double threshold = 0.5);

nlohmann::ordered_json metrics_to_json(const MetricReport& m);

// JSONL with exactly the dataset keys, one record per line.
nlohmann::ordered_json to_json(const DatasetRecord& r);
DatasetRecord record_from_json(const nlohmann::json& j);
std::string records_to_jsonl(const std::vector<DatasetRecord>& records);
// Throws Error(malformed_input) naming the 1-based line.
std::vector<DatasetRecord> records_from_jsonl(std::string_view text);

struct DatasetManifest {
    std::optional<uint64_t> seed;
    std::optional<SplitRatios> ratios;
    std::optional<bool> with_comments;
    nlohmann::json criteria;  // null when not mined by this run
    std::string tool_version;
    size_t pair_count = 0;
    nlohmann::json run_config;  // materialized command options
};

nlohmann::ordered_json to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const nlohmann::json& j);
std::string manifest_path_for(const std::string& output);

}  // namespace xlb
