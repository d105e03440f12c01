#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "xlb/analyze.hpp"

namespace {

// A project of `n` Python and `n` Java files, each with a foreign call whose
// result flows through a short chain of assignments.
std::vector<xlb::ProjectFile> synthetic_project(int n) {
    std::vector<xlb::ProjectFile> files;
    files.push_back({"native/Lib.java", R"(public class Lib {
    public native int value(int x);
    static {
        System.loadLibrary("lib");
    }
}
)"});
    for (int i = 0; i < n; ++i) {
        std::string py = "import ctypes\n\nlib = ctypes.CDLL(\"libm.so.6\")\n\n";
        std::string java = "public class Use" + std::to_string(i) + " {\n";
        for (int f = 0; f < 20; ++f) {
            std::string fn = "f" + std::to_string(f);
            py += "\ndef " + fn + "(x):\n    a = lib.cos(x)\n    b = a + 1\n    if b > 0:\n        c = b * 2\n"
                  "    else:\n        c = 0\n    d = c - b\n    return d\n\n";
            java += "    int " + fn + "(Lib lib, int x) {\n        int a = lib.value(x);\n        int b = a + 1;\n"
                    "        int c = b > 0 ? b * 2 : 0;\n        for (int k = 0; k < c; k++) {\n"
                    "            b += k;\n        }\n        return b;\n    }\n";
        }
        java += "}\n";
        files.push_back({"py/mod" + std::to_string(i) + ".py", py});
        files.push_back({"java/Use" + std::to_string(i) + ".java", java});
    }
    return files;
}

void BM_analyze_serial(benchmark::State& state) {
    auto files = synthetic_project(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(xlb::analyze_project_serial(files));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(files.size()));
}

void BM_analyze_parallel(benchmark::State& state) {
    auto files = synthetic_project(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(xlb::analyze_project(files));
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(files.size()));
}

}  // namespace

BENCHMARK(BM_analyze_serial)->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_analyze_parallel)->Arg(8)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
