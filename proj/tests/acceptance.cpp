// Acceptance checks, one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>
#include <spdlog/fmt/fmt.h>

#include "cli.hpp"
#include "comment_oracle.hpp"
#include "fixture_projects.hpp"
#include "support/fixture_universe.hpp"
#include "taint_oracle.hpp"
#include "temp_dir.hpp"
#include "xlb/corpus.hpp"
#include "xlb/io.hpp"

namespace fs = std::filesystem;
using namespace xlb;
using json = nlohmann::json;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond && pass) {
            pass = false;
            detail = what;
        }
    }
};

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult xlb_cli(std::vector<std::string> args) {
    args.insert(args.begin(), {"xlb", "-q"});
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

void write_project(const fs::path& root, const std::map<std::string, std::string>& files) {
    fs::create_directories(root);
    for (const auto& [rel, text] : files) {
        fs::create_directories((root / rel).parent_path());
        write_file_atomic(root / rel, text);
    }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- 1 ------------------------------------------------------------------

Outcome mechanism_coverage() {
    Outcome o;
    fixtures::TempDir tmp("xlb_acc1");
    auto mechs = fixtures::mechanism_projects();
    auto controls = fixtures::control_projects();
    o.require(mechs.size() == 9 && controls.size() == 9, "expected 9 + 9 fixtures");
    std::set<Mechanism> covered, paired;
    auto t0 = std::chrono::steady_clock::now();
    for (const auto& p : mechs) {
        write_project(tmp.path() / p.name, p.files);
        auto r = xlb_cli({"scan", (tmp.path() / p.name).string()});
        o.require(r.code == 0, p.name + ": scan exit " + std::to_string(r.code));
        if (r.code != 0) continue;
        auto report = json::parse(r.out);
        bool at_line = false, only_this = true;
        for (const auto& f : report["projects"][0]["files"])
            for (const auto& s : f["sites"]) {
                only_this = only_this && s["mechanism"] == std::string(to_string(*p.mechanism));
                if (f["path"] == p.site_file && s["line"] == p.site_line) at_line = true;
            }
        o.require(at_line, p.name + ": no site at " + p.site_file + ":" + std::to_string(p.site_line));
        o.require(only_this, p.name + ": site of another mechanism");
        covered.insert(*p.mechanism);
    }
    for (const auto& p : controls) {
        write_project(tmp.path() / p.name, p.files);
        auto r = xlb_cli({"scan", (tmp.path() / p.name).string()});
        o.require(r.code == 0, p.name + ": scan exit " + std::to_string(r.code));
        if (r.code != 0) continue;
        auto report = json::parse(r.out);
        o.require(report["summary"]["sites"] == 0, p.name + ": control has sites");
        if (p.control_for) paired.insert(*p.control_for);
    }
    double secs = seconds_since(t0);
    o.require(covered.size() == 9, "not every mechanism covered");
    o.require(paired.size() == 9, "not every mechanism has a control");
    o.require(secs < 5.0, "runtime " + std::to_string(secs) + " s");
    if (o.pass) o.detail = "18 fixtures, " + fmt::format("{:.2f}", secs) + " s";
    return o;
}

// ---- 2 ------------------------------------------------------------------

Outcome listing_fidelity() {
    Outcome o;
    fixtures::TempDir tmp("xlb_acc2");
    write_project(tmp.path() / "l12",
                  {{"NativeMethod.java", fixtures::kNativeMethod}, {"NativeCaller.java", fixtures::kNativeCaller}});
    write_project(tmp.path() / "l4", {{"NativeMethod.java", fixtures::kNativeMethodValue},
                                      {"NativeCaller.java", fixtures::kNativeCallerChain}});

    auto r = xlb_cli({"scan", (tmp.path() / "l12").string()});
    o.require(r.code == 0, "scan failed");
    if (!o.pass) return o;
    auto report = json::parse(r.out);
    std::vector<std::pair<std::string, int>> calls;
    std::set<std::string> functions;
    for (const auto& f : report["projects"][0]["files"]) {
        for (const auto& s : f["sites"])
            if (s["kind"] == "call") calls.emplace_back(f["path"].get<std::string>() + ":" + s["mechanism"].get<std::string>(), s["line"]);
        if (f["path"] == "NativeCaller.java")
            for (const auto& fn : f["functions"]) functions.insert(fn["name"].get<std::string>());
    }
    o.require(calls == std::vector<std::pair<std::string, int>>{{"NativeCaller.java:jni", 4}}, "listing 2: call sites differ");
    o.require(functions == std::set<std::string>{"main"}, "listing 2: functions differ");

    r = xlb_cli({"scan", (tmp.path() / "l4").string()});
    o.require(r.code == 0, "scan failed");
    if (!o.pass) return o;
    report = json::parse(r.out);
    std::set<int> marked;
    for (const auto& f : report["projects"][0]["files"])
        if (f["path"] == "NativeCaller.java")
            for (const auto& m : f["marks"]) marked.insert(m["line"].get<int>());
    // var_a = line 6, var_b = 7, var_c = 8, var_d = 9.
    o.require(marked == std::set<int>{6, 7, 8}, "listing 4: marked lines differ");
    if (o.pass) o.detail = "jni site NativeCaller.java:4 in main; marks {6,7,8}, var_d unmarked";
    return o;
}

// ---- 3 ------------------------------------------------------------------

Outcome taint_oracle() {
    Outcome o;
    std::mt19937_64 rng(1000);
    auto t0 = std::chrono::steady_clock::now();
    int agree = 0;
    for (int i = 0; i < 1000; ++i) {
        auto p = oracle::generate(rng, 30, 8);
        if (oracle::run_propagate(p, 3) == oracle::chain_marks(p, 3)) ++agree;
    }
    double secs = seconds_since(t0);
    o.require(agree == 1000, std::to_string(1000 - agree) + " mismatches");
    o.require(secs < 30.0, "runtime " + std::to_string(secs) + " s");
    if (o.pass) o.detail = "1000/1000 programs, " + fmt::format("{:.2f}", secs) + " s";
    return o;
}

// ---- 4 ------------------------------------------------------------------

Outcome mining_fixture() {
    Outcome o;
    fixtures::TempDir tmp("xlb_acc4");
    auto u = fixtures::build_universe(tmp.path() / "universe");
    auto full = tmp.path() / "full.jsonl";
    auto r = xlb_cli({"mine", "--offline-fixture", u.dir.string(), "--state-dir", (tmp.path() / "s1").string(), "-o", full.string()});
    o.require(r.code == 0, "mine failed: " + r.err);
    if (!o.pass) return o;
    auto pairs = pairs_from_jsonl(read_file(full));
    std::set<std::tuple<std::string, std::string, std::string, std::string, bool>> got, want;
    for (const auto& p : pairs) got.emplace(p.repo, p.sha, p.file, p.qualified_name, p.is_security);
    for (const auto& e : u.expected) want.emplace(e.repo, e.sha, e.file, e.qualified_name, e.is_security);
    o.require(got == want, "pairs differ from the constructed set");
    for (const auto& p : pairs) {
        o.require(p.sha != u.added_function_sha, "added function yielded a pair");
        o.require(p.sha != u.merge_sha, "merge commit yielded a pair");
        o.require(p.sha != u.plain_function_sha, "plain function yielded a pair");
    }

    auto resumed = tmp.path() / "resumed.jsonl";
    auto state = (tmp.path() / "s2").string();
    r = xlb_cli({"mine", "--offline-fixture", u.dir.string(), "--state-dir", state, "-o", resumed.string(), "--max-units", "2"});
    o.require(r.code == 0 && !fs::exists(resumed), "interrupted run wrote output");
    r = xlb_cli({"mine", "--offline-fixture", u.dir.string(), "--state-dir", state, "-o", resumed.string(), "--resume"});
    o.require(r.code == 0 && fs::exists(resumed), "resume failed");
    if (o.pass) o.require(read_file(resumed) == read_file(full), "resumed output differs");
    if (o.pass) o.detail = std::to_string(pairs.size()) + " expected pairs; resume byte-identical";
    return o;
}

// ---- 5 ------------------------------------------------------------------

std::vector<FunctionPair> synthetic_pairs(size_t n, const std::function<Language(size_t)>& lang = nullptr) {
    std::vector<FunctionPair> out;
    for (size_t i = 0; i < n; ++i) {
        FunctionPair p;
        p.repo = "syn/r" + std::to_string(i % 37);
        p.sha = fmt::format("{:040x}", i + 1);
        p.parent_sha = fmt::format("{:040x}", i + 100000);
        p.language = lang ? lang(i) : (i % 3 ? Language::python : Language::java);
        p.file = p.language == Language::python ? "m.py" : "M.java";
        p.qualified_name = "f" + std::to_string(i);
        p.mechanisms = {p.language == Language::python ? Mechanism::ctypes : Mechanism::jni};
        if (p.language == Language::python) {
            p.buggy_code = "def f" + std::to_string(i) + "(x):\n    return lib.g(x)  # unchecked\n";
            p.clean_code = "def f" + std::to_string(i) + "(x):\n    r = lib.g(x)\n    return r if r else 0\n";
        } else {
            p.buggy_code = "int f" + std::to_string(i) + "(int x) {\n    return lib.g(x); // unchecked\n}\n";
            p.clean_code = "int f" + std::to_string(i) + "(int x) {\n    int r = lib.g(x);\n    return r < 0 ? 0 : r;\n}\n";
        }
        p.pair_id = make_pair_id(p.repo, p.sha, p.file, p.qualified_name);
        out.push_back(std::move(p));
    }
    return out;
}

Outcome dataset_invariants() {
    Outcome o;
    o.require(split_sizes(10, kDefaultRatios) == SplitSizes{8, 1, 1}, "P=10 sizes");
    o.require(split_sizes(5563, kDefaultRatios) == SplitSizes{4450, 556, 557}, "P=5563 sizes");
    for (size_t n : {size_t{10}, size_t{5563}}) {
        auto recs = split_dataset(build_dataset(synthetic_pairs(n), true), 7, kDefaultRatios);
        size_t ones = 0, zeros = 0;
        std::map<std::string, std::set<Split>> splits;
        std::map<std::string, std::multiset<int>> labels;
        for (const auto& r : recs) {
            (r.label == 1 ? ones : zeros)++;
            splits[r.pair_id].insert(*r.split);
            labels[r.pair_id].insert(r.label);
        }
        o.require(ones == zeros && ones == n, "label balance P=" + std::to_string(n));
        std::array<size_t, 3> per{};
        for (const auto& [id, s] : splits) {
            o.require(s.size() == 1, "pair " + id + " crosses splits");
            ++per[static_cast<size_t>(*s.begin())];
        }
        for (const auto& [id, l] : labels) o.require(l == std::multiset<int>{0, 1}, "pair " + id + " labels");
        auto want = split_sizes(n, kDefaultRatios);
        o.require(per[0] == want.train && per[1] == want.valid && per[2] == want.test, "split sizes P=" + std::to_string(n));
    }

    fixtures::TempDir tmp("xlb_acc5");
    auto pairs = tmp.path() / "pairs.jsonl";
    auto ds = tmp.path() / "ds.jsonl";
    write_file_atomic(pairs, pairs_to_jsonl(synthetic_pairs(10)));
    o.require(xlb_cli({"build", "-i", pairs.string(), "-o", ds.string()}).code == 0, "build failed");
    for (auto name : {"a.jsonl", "b.jsonl"})
        o.require(xlb_cli({"split", "-i", ds.string(), "-o", (tmp.path() / name).string(), "--seed", "7"}).code == 0,
                  "split failed");
    if (o.pass) o.require(read_file(tmp.path() / "a.jsonl") == read_file(tmp.path() / "b.jsonl"), "same seed differs");
    if (o.pass) o.detail = "balance exact, no leakage, 8/1/1 and 4450/556/557, seed 7 byte-identical";
    return o;
}

// ---- 6 ------------------------------------------------------------------

std::string lines_of(int n) {
    std::string s = "def f():\n";
    for (int i = 1; i < n; ++i) s += "    x" + std::to_string(i) + " = " + std::to_string(i) + "\n";
    return s;
}

Outcome comment_stripping() {
    Outcome o;
    // Every Python and Java source among the fixtures.
    std::vector<std::pair<std::string, Language>> corpus;
    for (const auto& set : {fixtures::mechanism_projects(), fixtures::control_projects()})
        for (const auto& p : set)
            for (const auto& [path, text] : p.files) {
                if (path.ends_with(".py")) corpus.emplace_back(text, Language::python);
                if (path.ends_with(".java")) corpus.emplace_back(text, Language::java);
            }
    corpus.emplace_back(fixtures::kNativeMethodValue, Language::java);
    corpus.emplace_back(fixtures::kNativeCallerChain, Language::java);
    std::mt19937_64 rng(6);
    for (int i = 0; i < 50; ++i) corpus.emplace_back(oracle::generate(rng, 30, 8).source, Language::python);
    for (const auto& p : synthetic_pairs(20)) {
        corpus.emplace_back(p.buggy_code, p.language);
        corpus.emplace_back(p.clean_code, p.language);
    }
    fixtures::TempDir tmp("xlb_acc6");
    auto u = fixtures::build_universe(tmp.path() / "universe");
    auto mined = tmp.path() / "mined.jsonl";
    o.require(xlb_cli({"mine", "--offline-fixture", u.dir.string(), "--state-dir", (tmp.path() / "s").string(), "-o", mined.string()}).code == 0,
              "mine failed");
    std::vector<FunctionPair> all = synthetic_pairs(20);
    for (auto& p : pairs_from_jsonl(read_file(mined))) {
        corpus.emplace_back(p.buggy_code, p.language);
        corpus.emplace_back(p.clean_code, p.language);
        all.push_back(std::move(p));
    }
    for (const auto& [text, lang] : corpus) {
        auto once = strip_comments(text, lang);
        o.require(strip_comments(once, lang) == once, "not idempotent on:\n" + text);
    }

    auto pairs = tmp.path() / "pairs.jsonl";
    auto ds = tmp.path() / "ds.jsonl";
    write_file_atomic(pairs, pairs_to_jsonl(all));
    o.require(xlb_cli({"build", "-i", pairs.string(), "-o", ds.string(), "--no-comments"}).code == 0, "build failed");
    size_t records = 0;
    if (o.pass)
        for (const auto& r : records_from_jsonl(read_file(ds))) {
            ++records;
            o.require(!oracle::has_comment_token(r.code, r.language == "python"), "comment left in " + r.id);
        }

    std::vector<DatasetRecord> recs;
    for (int n : {10, 59, 60, 201}) {
        DatasetRecord r;
        r.pair_id = "p" + std::to_string(n);
        r.id = r.pair_id + "_1";
        r.language = "python";
        r.label = 1;
        r.code = lines_of(n);
        recs.push_back(r);
        r.id = r.pair_id + "_0";
        r.label = 0;
        recs.push_back(r);
    }
    auto st = compute_stats(recs);
    o.require(st.buggy_lines.under_60 == 2 && st.buggy_lines.from_60_to_200 == 1 && st.buggy_lines.over_200 == 1,
              "line buckets");
    if (o.pass)
        o.detail = "idempotent on " + std::to_string(corpus.size()) + " sources; " + std::to_string(records) +
                   " stripped records comment-free; buckets {2,1,1}";
    return o;
}

// ---- 7 ------------------------------------------------------------------

std::pair<std::vector<int>, std::vector<double>> from_counts(int tp, int fn, int fp, int tn) {
    std::vector<int> l;
    std::vector<double> s;
    auto add = [&](int n, int label, double score) {
        for (int i = 0; i < n; ++i) {
            l.push_back(label);
            s.push_back(score);
        }
    };
    add(tp, 1, 0.9);
    add(fn, 1, 0.1);
    add(fp, 0, 0.9);
    add(tn, 0, 0.1);
    return {l, s};
}

Outcome metrics() {
    Outcome o;
    // Hand-worked: accuracy, precision, recall, F1, AUC.
    //   tp=3 fn=1 fp=2 tn=4: 7/10, 3/5, 3/4, 2/3, 17/24
    //   tp=5 fn=0 fp=0 tn=5: all 1
    //   tp=0 fn=4 fp=3 tn=3: 3/10, 0, 0, 0, 6/24
    struct Case {
        size_t tp, fn, fp, tn;
        double acc, prec, rec, f1, auc;
    };
    const Case cases[] = {{3, 1, 2, 4, 0.7, 0.6, 0.75, 2.0 / 3.0, 17.0 / 24.0},
                          {5, 0, 0, 5, 1.0, 1.0, 1.0, 1.0, 1.0},
                          {0, 4, 3, 3, 0.3, 0.0, 0.0, 0.0, 0.25}};
    for (const auto& c : cases) {
        auto [l, s] = from_counts(int(c.tp), int(c.fn), int(c.fp), int(c.tn));
        auto m = score(l, s, 0.5);
        auto near = [](double a, double b) { return std::fabs(a - b) <= 1e-9; };
        o.require(m.tp == c.tp && m.fn == c.fn && m.fp == c.fp && m.tn == c.tn, "confusion counts");
        o.require(near(m.accuracy, c.acc) && near(m.precision, c.prec) && near(m.recall, c.rec) && near(m.f1, c.f1),
                  "threshold metrics");
        o.require(m.auc && near(*m.auc, c.auc), "hand AUC");
    }
    std::mt19937_64 rng(50);
    for (int set = 0; set < 50; ++set) {
        std::vector<int> l(200);
        std::vector<double> s(200);
        for (int i = 0; i < 200; ++i) {
            l[i] = static_cast<int>(rng() % 2);
            s[i] = static_cast<double>(rng() % 21) / 20.0;  // coarse grid forces ties
        }
        if (set == 0) l.assign(200, 1), l[0] = 0;
        int64_t doubled = 0, pos = 0, neg = 0;
        for (int i = 0; i < 200; ++i) (l[i] ? pos : neg)++;
        for (int i = 0; i < 200; ++i)
            for (int j = 0; j < 200; ++j)
                if (l[i] == 1 && l[j] == 0) doubled += s[i] > s[j] ? 2 : s[i] == s[j] ? 1 : 0;
        double brute = static_cast<double>(doubled) / static_cast<double>(2 * pos * neg);
        auto m = score(l, s, 0.5);
        o.require(m.auc && *m.auc == brute, "AUC differs from brute force on set " + std::to_string(set));
    }
    if (o.pass) o.detail = "3 hand matrices within 1e-9; AUC exact on 50 x 200 points";
    return o;
}

// ---- 8 ------------------------------------------------------------------

Outcome report_format() {
    Outcome o;
    // 4,464 Python and 1,137 Java pairs; 934 security pairs over 233 commits.
    std::vector<DatasetRecord> recs;
    for (int i = 0; i < 4464 + 1137; ++i) {
        DatasetRecord r;
        r.pair_id = fmt::format("{:016x}", i);
        r.repo = "syn/r" + std::to_string(i % 233 % 190);
        r.language = i < 4464 ? "python" : "java";
        r.security = i < 934;
        r.commit = r.security ? fmt::format("{:040x}", i % 233) : fmt::format("{:040x}", 1000 + i);
        r.code = "x = 1";
        r.label = 1;
        r.id = r.pair_id + "_1";
        recs.push_back(r);
        r.label = 0;
        r.id = r.pair_id + "_0";
        recs.push_back(r);
    }
    auto st = compute_stats(recs);
    auto table = format_stats_table(st);
    o.require(std::fabs(st.languages["python"].percent - 79.70) <= 0.01, "python share");
    o.require(std::fabs(st.languages["java"].percent - 20.30) <= 0.01, "java share");
    o.require(table.find("79.70%") != std::string::npos && table.find("20.30%") != std::string::npos,
              "table percentages");
    o.require(st.record_count == 11202 && st.security_pairs == 934 && st.security_commits == 233, "counts");
    o.require(table.find("4,464") != std::string::npos && table.find("1,137") != std::string::npos, "table counts");
    if (o.pass)
        o.detail = fmt::format("python {:.2f}%, java {:.2f}%, 934 security pairs / 233 commits",
                               st.languages["python"].percent, st.languages["java"].percent);
    return o;
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"mechanism coverage", mechanism_coverage}, {"listing fidelity", listing_fidelity},
        {"taint oracle equivalence", taint_oracle}, {"mining fixture", mining_fixture},
        {"dataset invariants", dataset_invariants}, {"comment stripping", comment_stripping},
        {"metrics", metrics},                       {"report format", report_format},
    };
    int failed = 0, n = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failed += !o.pass;
        std::cout << "criterion " << ++n << " " << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail
                  << std::endl;
    }
    return failed;
}
