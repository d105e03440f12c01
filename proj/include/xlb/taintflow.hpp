#pragma once

// Transfer-bounded propagation of cross-language provenance.
//
// A value returned by a cross-language call is depth 1; each assignment that
// reads it adds one transfer. Lines are marked while the depth stays within
// max_transfers. Analysis is forward, flow-sensitive and per function; the
// only interprocedural step is that calling a function of the same unit
// whose return value is tainted at depth d reads like a depth-d variable.

#include <optional>
#include <string>
#include <vector>

#include "xlb/source_model.hpp"
#include "xlb/xlang_detect.hpp"

namespace xlb {

struct TaintMark {
    std::string file;
    int line = 0;
    // 0 for the line holding a site; k >= 1 for the k-th transfer.
    int depth = 0;
    CrossLangSite origin;
    std::optional<std::string> var;

    bool operator==(const TaintMark&) const = default;
};

inline constexpr int kDefaultMaxTransfers = 3;

// Marks sorted by (line, depth). A line carries at most one depth-0 mark and
// at most one flow mark (the minimum depth reaching it).
// Throws Error(site_not_in_unit) for sites from another file or outside the
// unit's line range, and Error(invalid_config) when max_transfers < 1.
std::vector<TaintMark> propagate(const SourceUnit& unit, const std::vector<CrossLangSite>& sites,
                                 int max_transfers = kDefaultMaxTransfers);

// Synthetic span covering the whole unit, used for module-level marks.
FunctionSpan module_span(const SourceUnit& unit);

// Innermost functions holding at least one mark, ordered by start line.
// Marks outside any function are reported under `<module>`.
std::vector<FunctionSpan> cross_language_functions(const SourceUnit& unit, const std::vector<TaintMark>& marks);

}  // namespace xlb
