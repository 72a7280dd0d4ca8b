#pragma once
// Strict nested k-fold-by-seed cross-validation: family selection on
// outer-train via inner CV, refit on outer-train, single evaluation on
// outer-test. All row materialization flows through an observable access
// point so strictness can be audited.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "regime/classes.hpp"
#include "regime/loss.hpp"
#include "regime/matrix.hpp"
#include "regime/pool.hpp"

namespace regime {

// seeded permutation split into kappa near-equal parts
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t kappa,
                                                 std::uint64_t seed);

// Test instrumentation: observes every row materialization with its phase.
struct AccessProbe {
    enum class Phase { InnerSelect, Refit, Evaluate };
    virtual ~AccessProbe() = default;
    virtual void on_rows(Phase phase, const std::vector<std::size_t>& rows) = 0;
};

struct CvConfig {
    std::size_t outer_folds = 5;
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
    std::size_t inner_folds = 5;
    std::vector<FamilySpec> pool;  // empty -> canonical_pool()
};

struct FamilyOutcome {
    RegimeClass tag = RegimeClass::Pi0;
    double mean = 0.0;
    double seed_sd = 0.0;
    bool class_best = false;  // lowest mean within its class tag
    std::vector<double> per_seed_mean;
};

struct CvReport {
    std::vector<std::string> family_order;
    std::map<std::string, FamilyOutcome> per_family;
    double auto_pick_mean = 0.0;
    double auto_pick_sd = 0.0;
    std::map<std::string, std::size_t> pick_counts;  // sums to folds x seeds
    double selection_bound_value = 0.0;
    std::optional<RegimeClass> predicted_class_from_diagnostics;
    std::size_t outer_folds = 0;
    std::size_t num_seeds = 0;
    std::vector<std::string> warnings;
};

// mean held-out inner-CV loss per family; returns the pool index of the
// argmin (ties by pool order). Families that fail to fit score +inf.
std::size_t inner_select(const std::vector<FamilySpec>& pool, const Matrix& X,
                         const LossMatrix& L, const std::vector<double>& prior,
                         std::size_t inner_folds, std::uint64_t seed,
                         std::vector<std::string>* warnings = nullptr);

CvReport strict_nested_cv(const CvConfig& config, const Matrix& X, const LossMatrix& L,
                          const std::vector<double>& prior = {},
                          AccessProbe* probe = nullptr);

// Table-1-style per-class rendering: best family per class, winner flag,
// deltas against the overall winner.
std::string per_class_table(const CvReport& report);

}  // namespace regime
