#pragma once

#include <string>
#include <vector>

namespace fsk {

struct CheckResult {
    std::string module;
    std::string name;
    bool passed = false;
    std::string detail;  // failure reason, empty on success
    double wall_ms = 0.0;
};

struct VerifyOptions {
    /// Suggestion corpus for the self-retrieval check; empty uses a small
    /// built-in corpus.
    std::string corpus_path;
    /// Restrict to one module ("geomcore", "imageops", "strokes", "coarse",
    /// "idgmm", "suggest", "session"); empty runs all.
    std::string module;
};

/// Fast invariant checks over every library module on fixed synthetic
/// inputs. An exception inside a check counts as its failure.
std::vector<CheckResult> run_invariant_suite(const VerifyOptions& options = {});

std::vector<std::string> invariant_modules();

}  // namespace fsk
