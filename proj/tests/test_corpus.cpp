#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "comment_oracle.hpp"
#include "fixture_projects.hpp"
#include "xlb/corpus.hpp"
#include "xlb/error.hpp"

using namespace xlb;

namespace {

FunctionPair make_pair(const std::string& id, Language lang, std::string buggy, std::string clean,
                       bool security = false) {
    FunctionPair p;
    p.pair_id = id;
    p.repo = "o/r";
    p.sha = "s" + id;
    p.parent_sha = "p" + id;
    p.file = lang == Language::python ? "a.py" : "A.java";
    p.language = lang;
    p.qualified_name = "f" + id;
    p.mechanisms = {lang == Language::python ? Mechanism::ctypes : Mechanism::jni};
    p.buggy_code = std::move(buggy);
    p.clean_code = std::move(clean);
    p.is_security = security;
    return p;
}

std::string lines_of(int n) {
    std::string s;
    for (int i = 0; i < n; ++i) s += "x = " + std::to_string(i) + "\n";
    return s;
}

// Every fixture text plus hand-written comment-heavy snippets.
std::vector<std::pair<std::string, Language>> strip_corpus() {
    std::vector<std::pair<std::string, Language>> out;
    for (const auto& set : {fixtures::mechanism_projects(), fixtures::control_projects()})
        for (const auto& p : set)
            for (const auto& [path, text] : p.files) {
                if (path.ends_with(".py")) out.emplace_back(text, Language::python);
                else if (path.ends_with(".java")) out.emplace_back(text, Language::java);
            }
    out.emplace_back("'''mod'''\n\"\"\"second\"\"\"\nimport os  # c\n\n\nclass A:\n    \"doc\"\n    def f(self):\n"
                     "        r'''raw'''\n        s = '# not a comment'\n        t = \"\"\"\n\n  keep  \n\"\"\"\n"
                     "        return s  # trailing\n",
                     Language::python);
    out.emplace_back("/** doc */\nclass A {\n  /* multi\n     line */\n  String s = \"// no\"; // yes\n"
                     "  char c = '\\''; int x = 1/*a*//*b*/+2;\n  String t = \"\"\"\n\n  /* kept */\n  \"\"\";\n}\n",
                     Language::java);
    out.emplace_back("int a = b//*c*/\n/ 2;\nint d = e/*x*//f;\n", Language::java);
    out.emplace_back("async def g():\n    'doc'\n    # only comment\n\n    pass\n", Language::python);
    out.emplace_back("x = 1 /* never closed\n y = 2\n", Language::java);
    return out;
}

}  // namespace

TEST_CASE("strip_comments: spec examples") {
    CHECK(strip_comments("# c\nx = 1\n\n", Language::python) == "x = 1");
    CHECK(strip_comments("int a; /* k */ int b; // t", Language::java) == "int a;  int b;");
}

TEST_CASE("strip_comments: docstrings") {
    std::string src =
        "def f(a):\n"
        "    \"\"\"Adds one.\n"
        "\n"
        "    Longer text.\n"
        "    \"\"\"\n"
        "    doc = \"\"\"kept\n"
        "\n"
        "literal\"\"\"\n"
        "    return a + 1\n";
    std::string want =
        "def f(a):\n"
        "    doc = \"\"\"kept\n"
        "\n"
        "literal\"\"\"\n"
        "    return a + 1";
    CHECK(strip_comments(src, Language::python) == want);

    // Class and module docstrings, but not strings after other statements.
    CHECK(strip_comments("'''m'''\nclass A:\n    'd'\n    x = 1\n    'not doc'\n", Language::python) ==
          "class A:\n    x = 1\n    'not doc'");
    // f-strings are never documentation.
    CHECK(strip_comments("def f():\n    f'{x}'\n", Language::python) == "def f():\n    f'{x}'");
}

TEST_CASE("strip_comments: strings and edges") {
    CHECK(strip_comments("s = '#x'  # y", Language::python) == "s = '#x'");
    CHECK(strip_comments("String s = \"/* x */\"; // y", Language::java) == "String s = \"/* x */\";");
    CHECK(strip_comments("a/*c*/b", Language::java) == "a b");
    CHECK(strip_comments("x = 1; /* open\nmore", Language::java) == "x = 1;");
    CHECK(strip_comments("", Language::python).empty());
    CHECK(strip_comments("\r\nx = 1\r\n", Language::python) == "x = 1");
    CHECK(strip_comments("t = '''a  \n\n'''  \n", Language::python) == "t = '''a  \n\n'''");
}

TEST_CASE("property: strip_comments is idempotent and leaves no comments or blank lines") {
    auto corpus = strip_corpus();
    std::mt19937_64 rng(17);
    const std::vector<std::string> py = {"x = 1", "# c", "", "  ", "'''d'''", "s = '#'", "y = x  # t",
                                         "def f():", "    \"doc\"", "    return 2", "t = \"\"\"\n\n\"\"\""};
    const std::vector<std::string> jv = {"int x = 1;", "// c", "", "/* a\n b */", "String s = \"//\";",
                                         "y = x; /* t */", "void f() {", "}", "char c = '/';", "a = b/*c*//d;"};
    for (int i = 0; i < 300; ++i) {
        bool python = i % 2 == 0;
        const auto& pool = python ? py : jv;
        std::string s;
        int n = 1 + static_cast<int>(rng() % 12);
        for (int k = 0; k < n; ++k) s += pool[rng() % pool.size()] + (rng() % 4 ? "\n" : " ");
        corpus.emplace_back(s, python ? Language::python : Language::java);
    }
    for (const auto& [text, lang] : corpus) {
        std::string once = strip_comments(text, lang);
        CHECK(strip_comments(once, lang) == once);
        bool python = lang == Language::python;
        INFO(text);
        CHECK_FALSE(oracle::has_comment_token(once, python));
        if (!once.empty() && once.find("\"\"\"") == std::string::npos && once.find("'''") == std::string::npos)
            CHECK_FALSE(oracle::has_blank_line(once));
        CHECK_FALSE(once.ends_with("\n"));
    }
}

TEST_CASE("build_dataset") {
    SUBCASE("one pair gives two records") {
        auto recs = build_dataset({make_pair("a", Language::python, "x = 1", "x = 2")}, true);
        REQUIRE(recs.size() == 2);
        CHECK(recs[0].label == 1);
        CHECK(recs[0].code == "x = 1");
        CHECK(recs[0].id == "a_1");
        CHECK(recs[1].label == 0);
        CHECK(recs[1].code == "x = 2");
        CHECK(recs[1].id == "a_0");
        CHECK(recs[0].pair_id == recs[1].pair_id);
        CHECK_FALSE(recs[0].split.has_value());
    }
    SUBCASE("identical pairs are deduplicated") {
        auto a = make_pair("a", Language::python, "x = 1\r\n", "x = 2");
        auto b = make_pair("b", Language::python, "x = 1\n", "x = 2");
        BuildReport rep;
        auto recs = build_dataset({b, a, a}, true, &rep);
        REQUIRE(recs.size() == 2);
        CHECK(recs[0].pair_id == "a");
        CHECK(rep.duplicates == 2);
    }
    SUBCASE("five distinct pairs without comments") {
        std::vector<FunctionPair> pairs;
        for (int i = 0; i < 5; ++i) {
            std::string id = "p" + std::to_string(i);
            if (i % 2)
                pairs.push_back(make_pair(id, Language::java, "int f() { // c\n  return " + std::to_string(i) + "; /* b */\n}",
                                          "int f() {\n  return -" + std::to_string(i) + ";\n}"));
            else
                pairs.push_back(make_pair(id, Language::python, "def f():\n    '''d'''\n    return " + std::to_string(i) + "  # c",
                                          "def f():\n    # fixed\n    return -" + std::to_string(i)));
        }
        auto recs = build_dataset(pairs, false);
        REQUIRE(recs.size() == 10);
        for (const auto& r : recs) CHECK_FALSE(oracle::has_comment_token(r.code, r.language == "python"));
    }
    SUBCASE("comment-only changes and empty code are dropped") {
        BuildReport rep;
        auto recs = build_dataset({make_pair("a", Language::python, "x = 1  # old", "x = 1  # new"),
                                   make_pair("b", Language::python, "# only", "y = 2")},
                                  false, &rep);
        CHECK(recs.empty());
        CHECK(rep.identical_after_stripping == 1);
        CHECK(rep.empty_after_stripping == 1);
        CHECK(build_dataset({make_pair("a", Language::python, "x = 1  # old", "x = 1  # new")}, true).size() == 2);
    }
}

TEST_CASE("split arithmetic") {
    CHECK(split_sizes(10) == SplitSizes{8, 1, 1});
    CHECK(split_sizes(5563) == SplitSizes{4450, 556, 557});
    CHECK(split_sizes(0) == SplitSizes{0, 0, 0});
    CHECK(split_sizes(1) == SplitSizes{0, 0, 1});
    // Integer oracle for the default ratios.
    for (size_t p = 0; p < 3000; ++p) {
        SplitSizes s = split_sizes(p);
        CHECK(s.train == p * 8 / 10);
        CHECK(s.valid == p / 10);
        CHECK(s.train + s.valid + s.test == p);
    }
}

namespace {

std::vector<DatasetRecord> dataset_of(size_t pairs) {
    std::vector<FunctionPair> ps;
    for (size_t i = 0; i < pairs; ++i)
        ps.push_back(make_pair("id" + std::to_string(i), Language::python, "x = " + std::to_string(i), "y = 0"));
    return build_dataset(ps, true);
}

void check_split_invariants(const std::vector<DatasetRecord>& recs, size_t pairs) {
    std::map<std::string, std::set<Split>> by_pair;
    std::map<Split, std::array<size_t, 2>> labels;
    for (const auto& r : recs) {
        REQUIRE(r.split.has_value());
        by_pair[r.pair_id].insert(*r.split);
        ++labels[*r.split][static_cast<size_t>(r.label)];
    }
    for (const auto& [id, splits] : by_pair) CHECK(splits.size() == 1);
    for (const auto& [s, l] : labels) CHECK(l[0] == l[1]);
    SplitSizes want = split_sizes(pairs);
    CHECK(labels[Split::train][1] == want.train);
    CHECK(labels[Split::valid][1] == want.valid);
    CHECK(labels[Split::test][1] == want.test);
}

}  // namespace

TEST_CASE("split_dataset") {
    auto recs = dataset_of(10);
    auto a = split_dataset(recs, 7);
    check_split_invariants(a, 10);
    CHECK(split_dataset(recs, 7) == a);
    CHECK_THROWS_AS(split_dataset(a, 7), Error);
    try {
        split_dataset(a, 7);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::already_split);
    }
    CHECK_THROWS_AS(split_dataset(recs, 1, {0.5, 0.5, 0.5}), Error);

    auto big = dataset_of(5563);
    auto b = split_dataset(big, 1);
    check_split_invariants(b, 5563);
}

TEST_CASE("property: seed changes assignment, never sizes") {
    auto recs = dataset_of(97);
    auto base = split_dataset(recs, 0);
    int differing = 0;
    for (uint64_t seed = 1; seed < 40; ++seed) {
        auto s = split_dataset(recs, seed);
        check_split_invariants(s, 97);
        differing += s != base;
    }
    CHECK(differing > 30);
}

TEST_CASE("compute_stats") {
    SUBCASE("language shares") {
        std::vector<FunctionPair> ps;
        for (int i = 0; i < 8; ++i) ps.push_back(make_pair("p" + std::to_string(i), Language::python, "a = " + std::to_string(i), "a = -1", i < 3));
        for (int i = 0; i < 2; ++i) ps.push_back(make_pair("j" + std::to_string(i), Language::java, "a(" + std::to_string(i) + ");", "b();"));
        auto st = compute_stats(build_dataset(ps, true));
        CHECK(st.pair_count == 10);
        CHECK(st.record_count == 20);
        CHECK(st.languages["python"].percent == doctest::Approx(80.0).epsilon(1e-12));
        CHECK(st.languages["java"].percent == doctest::Approx(20.0).epsilon(1e-12));
        CHECK(st.security_pairs == 3);
        CHECK(st.security_commits == 3);
        auto table = format_stats_table(st);
        CHECK(table.find("80.00%") != std::string::npos);
        CHECK(table.find("20.00%") != std::string::npos);
    }
    SUBCASE("line buckets on stripped code") {
        std::vector<FunctionPair> ps;
        int k = 0;
        for (int n : {10, 59, 60, 201}) {
            // Comments and blank lines do not count.
            std::string buggy = "# header\n\n" + lines_of(n) + "\n# tail\n";
            ps.push_back(make_pair("b" + std::to_string(k++), Language::python, buggy, lines_of(n) + "z = 0\n"));
        }
        auto st = compute_stats(build_dataset(ps, true));
        CHECK(st.buggy_lines == LineBuckets{2, 1, 1});
        CHECK(st.clean_lines == LineBuckets{1, 2, 1});
        size_t total = st.buggy_lines.under_60 + st.buggy_lines.from_60_to_200 + st.buggy_lines.over_200;
        CHECK(total == 4);
    }
    SUBCASE("paper-scale presentation") {
        std::vector<DatasetRecord> recs;
        for (int i = 0; i < 5601; ++i) {
            DatasetRecord r;
            r.pair_id = std::to_string(i);
            r.language = i < 4464 ? "python" : "java";
            r.code = "x";
            for (int label : {1, 0}) {
                r.label = label;
                recs.push_back(r);
            }
        }
        auto st = compute_stats(recs);
        CHECK(std::abs(st.languages["python"].percent - 79.70) < 0.01);
        CHECK(std::abs(st.languages["java"].percent - 20.30) < 0.01);
        double sum = 0;
        for (const auto& [l, s] : st.languages) sum += s.percent;
        CHECK(std::abs(sum - 100.0) < 0.01);
        auto table = format_stats_table(st);
        CHECK(table.find("79.70%") != std::string::npos);
        CHECK(table.find("20.30%") != std::string::npos);
        CHECK(table.find("4,464") != std::string::npos);
    }
    CHECK_THROWS_AS(compute_stats({}), Error);
}

TEST_CASE("score: hand-worked cases") {
    auto m = score({1, 0}, {0.9, 0.1});
    CHECK(m.accuracy == 1.0);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
    CHECK(*m.auc == 1.0);

    // tp=1 fp=1 fn=0 tn=0
    m = score({1, 0}, {0.8, 0.6});
    CHECK(m.tp == 1);
    CHECK(m.fp == 1);
    CHECK(m.precision == 0.5);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

    // Single class: no AUC, other metrics present.
    m = score({1, 1}, {0.2, 0.7});
    CHECK_FALSE(m.auc.has_value());
    CHECK(m.recall == 0.5);

    // Nothing predicted positive.
    m = score({1, 0, 0}, {0.1, 0.2, 0.3});
    CHECK(m.precision == 0.0);
    CHECK(m.f1 == 0.0);
    CHECK(*m.auc == 0.0);

    // Threshold is inclusive.
    CHECK(score({1, 0}, {0.5, 0.4}).tp == 1);
    CHECK_THROWS_AS(score({1}, {0.1, 0.2}), Error);
    CHECK_THROWS_AS(score({}, {}), Error);
    CHECK_THROWS_AS(score({2}, {0.1}), Error);
}

namespace {

double brute_auc(const std::vector<int>& labels, const std::vector<double>& scores) {
    uint64_t num2 = 0, pairs = 0;
    for (size_t i = 0; i < labels.size(); ++i)
        for (size_t j = 0; j < labels.size(); ++j)
            if (labels[i] == 1 && labels[j] == 0) {
                ++pairs;
                num2 += scores[i] > scores[j] ? 2 : scores[i] == scores[j] ? 1 : 0;
            }
    return static_cast<double>(num2) / static_cast<double>(2 * pairs);
}

}  // namespace

TEST_CASE("property: rank AUC equals pairwise enumeration; metrics follow counts") {
    std::mt19937_64 rng(99);
    for (int round = 0; round < 200; ++round) {
        std::vector<int> labels(200);
        std::vector<double> scores(200);
        for (size_t i = 0; i < 200; ++i) {
            labels[i] = static_cast<int>(rng() % 2);
            // Coarse grid so ties are common.
            scores[i] = static_cast<double>(rng() % 21) / 20.0;
        }
        labels[0] = 1;
        labels[1] = 0;
        auto m = score(labels, scores);
        REQUIRE(m.auc.has_value());
        CHECK(*m.auc == brute_auc(labels, scores));
        CHECK(*m.auc >= 0.0);
        CHECK(*m.auc <= 1.0);

        std::vector<int> flipped(labels.size());
        std::vector<double> negated(scores.size());
        for (size_t i = 0; i < labels.size(); ++i) {
            flipped[i] = 1 - labels[i];
            negated[i] = -scores[i];
        }
        CHECK(*score(flipped, negated).auc == doctest::Approx(*m.auc).epsilon(1e-15));
        CHECK(*score(labels, negated).auc == doctest::Approx(1.0 - *m.auc).epsilon(1e-12));

        double n = static_cast<double>(m.tp + m.tn + m.fp + m.fn);
        CHECK(m.accuracy == static_cast<double>(m.tp + m.tn) / n);
        double p = m.tp + m.fp ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 0.0;
        double r = m.tp + m.fn ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
        CHECK(m.precision == p);
        CHECK(m.recall == r);
        CHECK(m.f1 == (p + r == 0.0 ? 0.0 : 2 * p * r / (p + r)));
    }
}

TEST_CASE("JSONL round trip and strict keys") {
    auto recs = split_dataset(dataset_of(3), 4);
    std::string text = records_to_jsonl(recs);
    CHECK(records_from_jsonl(text) == recs);
    auto j = nlohmann::json::parse(text.substr(0, text.find('\n')));
    CHECK(j.size() == 13);
    for (auto key : {"id", "pair_id", "repo", "commit", "parent_commit", "file", "language", "function_name",
                     "mechanisms", "label", "code", "security", "split"})
        CHECK(j.contains(key));

    try {
        records_from_jsonl(text + "{\"id\": 1}\n");
        FAIL("expected malformed_input");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::malformed_input);
        CHECK(std::string(e.what()).find("line 7") != std::string::npos);
    }
    j["extra"] = 1;
    CHECK_THROWS_AS(record_from_json(j), Error);

    std::vector<FunctionPair> ps = {make_pair("q", Language::java, "a();", "b();", true)};
    CHECK(pairs_from_jsonl(pairs_to_jsonl(ps)) == ps);
}

TEST_CASE("pair ids") {
    auto a = make_pair_id("o/r", "abc", "x.py", "f");
    CHECK(a.size() == 16);
    CHECK(a == make_pair_id("o/r", "abc", "x.py", "f"));
    CHECK(a != make_pair_id("o/r", "abc", "x.py", "g"));
    // Field boundaries matter.
    CHECK(make_pair_id("a", "bc", "d", "e") != make_pair_id("ab", "c", "d", "e"));
}
