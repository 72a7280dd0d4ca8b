#pragma once
// Regime diagnostics: residual mass/bound, AUC margin, Bernstein viability
// threshold, partition diagnostics and ceilings, predicted class, and the
// held-out selection bound.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "regime/classes.hpp"
#include "regime/loss.hpp"
#include "regime/matrix.hpp"

namespace regime {

struct ResidualReport {
    double residual_mass = 0.0;  // P(R)
    double sup_gap = 0.0;        // largest per-input improvement on R
    double bound = 0.0;          // residual_mass * sup_gap
};

struct ViabilityReport {
    double alpha_emp = 0.0;
    double alpha_min = 0.0;
    double beta = 0.0;  // alpha_emp - alpha_min
    double q = 0.3;
    double delta = 0.05;
    std::optional<long long> n_min;  // absent when beta <= 0 (rendered "---")
    long long n = 0;
    bool viable = false;  // n >= n_min and beta > 0
    double mu_w_q = 0.0;  // bottom-q precision at the operating q
};

struct PartitionCell {
    double mass = 0.0;          // p_g
    double gap = 0.0;           // gamma_g >= 0
    std::size_t best_action = 0;
    long long n_req = 0;        // per-cell sample requirement (saturating)
};

struct PartitionDiagnostics {
    std::vector<PartitionCell> cells;
    double total_gain = 0.0;     // sum p_g gamma_g
    double max_cell_gain = 0.0;  // max_g p_g gamma_g
};

enum class Rationale { ResidualBounded, VarianceBounded, CeilingComparison, PriorChannel };

std::string to_string(Rationale r);

struct RegimeDiagnostics {
    ResidualReport residual;
    ViabilityReport viability;
    double c_pi1 = 0.0;
    double c_pi2 = 0.0;
    RegimeClass predicted_class = RegimeClass::Pi0;
    Rationale rationale = Rationale::ResidualBounded;
    bool pi3_eligible = false;  // prior channel present; lattice prediction unchanged
};

// ---- operations -----------------------------------------------------------

ResidualReport residual_report(const LossMatrix& L);

// rank-based AUC with average-rank tie handling; labels: 1 = positive
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

// out-of-fold AUC ceiling estimate via the Pi2 logistic plug-in learner,
// standardized per training fold; concatenated held-out scores.
double estimate_alpha_emp(const Matrix& features, const std::vector<int>& direct_correct,
                          std::size_t folds, std::uint64_t seed,
                          std::string* warning = nullptr);

struct AlphaEmpResult {
    double alpha_emp = 0.0;
    std::vector<double> oof_scores;  // P(direct correct), one per sample
    std::size_t folds_used = 0;
    std::string warning;
};

AlphaEmpResult estimate_alpha_emp_scores(const Matrix& features,
                                         const std::vector<int>& direct_correct,
                                         std::size_t folds, std::uint64_t seed);

// fraction of direct-wrong among the floor(n q) lowest-score samples
// (score ties broken by sample index)
double bottom_q_precision(const std::vector<double>& scores,
                          const std::vector<int>& direct_wrong, double q);

// ceil(2 a (1-a) log(2/delta) / (q b^2)); requires 1/2 <= a < 1, b > 0
long long bernstein_n_min(double alpha, double beta, double q, double delta);

PartitionDiagnostics partition_diagnostics(const LossMatrix& L,
                                           const std::vector<int>& cell_assignment,
                                           std::size_t kappa = 5, double delta = 0.05);

// max over candidate partitions of total_gain
double ceiling_pi1(const LossMatrix& L, const std::vector<std::vector<int>>& candidates,
                   std::size_t kappa = 5, double delta = 0.05);

struct Pi2Ceiling {
    double exact = 0.0;      // max_q q (mu_w(q) - alpha_min) (l_w - l_r), clamped at 0
    double q_star = 0.0;
    double proxy = 0.0;      // q_star * beta * (l_w - l_r), clamped at 0
    double alpha_emp = 0.0;  // AUC of the supplied scores
    double beta = 0.0;
};

Pi2Ceiling ceiling_pi2(const SelectiveConstants& constants, const std::vector<double>& scores,
                       const std::vector<int>& direct_wrong, const std::vector<double>& q_grid);

// Lattice decision procedure. has_prior_channel only flags Pi3
// eligibility; it does not override the lattice prediction.
RegimeDiagnostics classify_regime(const ResidualReport& res, const ViabilityReport& via,
                                  double c1, double c2, double residual_threshold = 0.02,
                                  bool has_prior_channel = false);

// 4 l_max sqrt(log(2 M) / n_in)
double selection_bound(std::size_t num_classes, std::size_t n_in, double l_max);

// assemble a ViabilityReport from precomputed pieces
ViabilityReport make_viability_report(double alpha_emp, double alpha_min, double q,
                                      double delta, long long n, double mu_w_q);

}  // namespace regime
