#pragma once
// Combined task loss: action set, loss components, per-sample loss matrices,
// and the selective-subproblem constants (L_r, L_w, L_a, alpha_min).

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "regime/matrix.hpp"

namespace regime {

// Ordered action labels. Order is fixed at construction and used for all
// tie-breaking (lowest index wins).
struct ActionSet {
    std::vector<std::string> labels;

    static ActionSet canonical();  // direct, retrieve, defer, abstain
    static ActionSet two_action(); // direct, defer (synthetics)

    std::size_t size() const { return labels.size(); }
    // index of a named action, or nullopt
    std::optional<std::size_t> find(const std::string& name) const;
    void validate() const;  // unique labels, size >= 2
};

struct Weights {
    double w_c = 1.0;
    double w_h = 1.0;
    double w_k = 0.05;
    void validate() const;
};

// Correctness c in {0,1}, semantic risk h in [0,1], operational cost k >= 0.
struct LossComponents {
    Matrix c;
    Matrix h;
    Matrix k;
    void validate() const;
};

struct LossMatrix {
    Matrix values;      // n x |A|
    ActionSet actions;
    double l_max = 0.0;

    std::size_t n() const { return values.rows; }
    std::size_t num_actions() const { return values.cols; }
    void validate() const;
    LossMatrix gather_rows(const std::vector<std::size_t>& idx) const;
};

struct SelectiveConstants {
    double l_r = 0.0;        // mean direct loss on direct-correct samples
    double l_w = 0.0;        // mean direct loss on direct-wrong samples
    double l_a = 0.0;        // mean fallback loss
    double alpha_min = 0.0;  // (l_a - l_r) / (l_w - l_r)
};

// ell(x,a) = w_c (1-c) + w_h h + w_k k; l_max = w_c + w_h + w_k max(k)
LossMatrix assemble_loss(const LossComponents& comp, const Weights& w,
                         const ActionSet& actions);

// argmin over actions of column mean; ties broken by lowest action index
std::pair<std::size_t, double> best_fixed_action(const LossMatrix& L);

// mean over rows of values[i][assignment[i]]
double policy_risk(const LossMatrix& L, const std::vector<int>& assignment);

// Global (never per-fold) constants of the selective subproblem.
// direct_action / fallback_action default to "direct" / "abstain" by name
// (fallback falls back to the last action when "abstain" is absent).
SelectiveConstants selective_constants(const LossMatrix& L,
                                       const std::vector<int>& direct_correct,
                                       int direct_action = -1,
                                       int fallback_action = -1);

}  // namespace regime
