#pragma once

// Desk-scale acceptance suite. Every tolerance lives in acceptance.cpp.

#include <functional>
#include <string>
#include <vector>

namespace sgd {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;      // measured values behind the verdict
    double seconds = 0.0;
};

inline constexpr int kCriterionCount = 12;

/// Runs one criterion (1..kCriterionCount). Library errors count as failure
/// and are reported in `detail`.
CriterionResult run_criterion(int id, unsigned threads = 1);

/// Runs every criterion in order, calling `progress` after each.
std::vector<CriterionResult> run_acceptance(unsigned threads = 1,
                                            const std::function<void(const CriterionResult&)>& progress = {});

}  // namespace sgd
