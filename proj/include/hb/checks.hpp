#pragma once

#include "hb/scene.hpp"

#include <string>
#include <vector>

namespace hb {

struct CheckEntry {
    std::string id;
    double residual = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct CheckReport {
    std::vector<CheckEntry> entries;

    bool all_pass() const;
    /// One JSON object per line: {"id": ..., "residual": ..., "threshold": ..., "pass": ...}
    std::string to_jsonl() const;
};

/// Runs the named invariant suite against the scene with the scene's seed.
/// Suites: metric, bending, groups, volume, hyperbolicity, all.
CheckReport run_checks(const Scene& scene, const std::string& suite);

} // namespace hb
