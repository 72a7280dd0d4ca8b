#include "regime/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "regime/learners.hpp"
#include "regime/rng.hpp"
#include "regime/nested_cv.hpp"

namespace regime {

std::string to_string(Rationale r) {
    switch (r) {
        case Rationale::ResidualBounded: return "residual-bounded";
        case Rationale::VarianceBounded: return "variance-bounded";
        case Rationale::CeilingComparison: return "ceiling-comparison";
        case Rationale::PriorChannel: return "prior-channel";
    }
    return "?";
}

ResidualReport residual_report(const LossMatrix& L) {
    auto [astar, astar_risk] = best_fixed_action(L);
    (void)astar_risk;
    ResidualReport out;
    std::size_t residual = 0;
    for (std::size_t i = 0; i < L.n(); ++i) {
        double base = L.values(i, astar);
        double row_min = base;
        for (std::size_t a = 0; a < L.num_actions(); ++a)
            row_min = std::min(row_min, L.values(i, a));
        if (row_min < base) {
            ++residual;
            out.sup_gap = std::max(out.sup_gap, base - row_min);
        }
    }
    out.residual_mass = static_cast<double>(residual) / static_cast<double>(L.n());
    out.bound = out.residual_mass * out.sup_gap;
    return out;
}

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw std::invalid_argument("auc: length mismatch");
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (int y : labels) n_pos += (y != 0);
    std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw std::invalid_argument("auc: both classes must be present");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // average ranks over ties (1-based)
    std::vector<double> rank(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        double avg = 0.5 * static_cast<double>(i + 1 + j + 1);
        for (std::size_t t = i; t <= j; ++t) rank[order[t]] = avg;
        i = j + 1;
    }
    double rank_sum_pos = 0.0;
    for (std::size_t t = 0; t < n; ++t)
        if (labels[t] != 0) rank_sum_pos += rank[t];
    double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

AlphaEmpResult estimate_alpha_emp_scores(const Matrix& features,
                                         const std::vector<int>& direct_correct,
                                         std::size_t folds, std::uint64_t seed) {
    if (features.rows != direct_correct.size())
        throw std::invalid_argument("estimate_alpha_emp: label length mismatch");
    if (features.rows < 2 * folds)
        throw std::invalid_argument("estimate_alpha_emp: need n >= 2*folds");
    {
        bool any0 = false, any1 = false;
        for (int y : direct_correct) (y ? any1 : any0) = true;
        if (!any0 || !any1)
            throw std::invalid_argument("estimate_alpha_emp: both classes must be present");
    }

    AlphaEmpResult result;
    for (std::size_t kappa = folds; kappa >= 2; --kappa) {
        auto fold_sets = make_folds(features.rows, kappa, seed);
        // every training split must contain both classes
        bool ok = true;
        for (std::size_t f = 0; f < kappa && ok; ++f) {
            bool any0 = false, any1 = false;
            for (std::size_t g = 0; g < kappa; ++g) {
                if (g == f) continue;
                for (auto i : fold_sets[g]) (direct_correct[i] ? any1 : any0) = true;
            }
            ok = any0 && any1;
        }
        if (!ok) {
            result.warning = "estimate_alpha_emp: single-class training fold at kappa=" +
                             std::to_string(kappa) + ", reducing fold count";
            continue;
        }

        std::vector<double> oof(features.rows, 0.0);
        for (std::size_t f = 0; f < kappa; ++f) {
            std::vector<std::size_t> train;
            for (std::size_t g = 0; g < kappa; ++g)
                if (g != f) train.insert(train.end(), fold_sets[g].begin(), fold_sets[g].end());
            Matrix Xtr = features.gather_rows(train);
            auto ytr = gather(direct_correct, train);

            Standardizer st = Standardizer::fit(Xtr);
            Matrix Xtr_s = st.transform(Xtr);
            LogisticModel lr = multinomial_logistic(Xtr_s, ytr, 0.3, {},
                                                    mix_seed(seed, 0x41c, f));
            Matrix Xte_s = st.transform(features.gather_rows(fold_sets[f]));
            Matrix proba = lr.predict_proba(Xte_s);
            // score = probability of class 1 (direct correct)
            std::size_t col1 = 0;
            for (std::size_t c = 0; c < lr.classes.size(); ++c)
                if (lr.classes[c] == 1) col1 = c;
            for (std::size_t t = 0; t < fold_sets[f].size(); ++t)
                oof[fold_sets[f][t]] = lr.classes.size() > 1 ? proba(t, col1)
                                       : (lr.classes[0] == 1 ? 1.0 : 0.0);
        }
        result.alpha_emp = auc(oof, direct_correct);
        result.oof_scores = std::move(oof);
        result.folds_used = kappa;
        return result;
    }
    throw std::runtime_error("estimate_alpha_emp: could not form two-class training folds");
}

double estimate_alpha_emp(const Matrix& features, const std::vector<int>& direct_correct,
                          std::size_t folds, std::uint64_t seed, std::string* warning) {
    auto res = estimate_alpha_emp_scores(features, direct_correct, folds, seed);
    if (warning && !res.warning.empty()) *warning = res.warning;
    return res.alpha_emp;
}

double bottom_q_precision(const std::vector<double>& scores,
                          const std::vector<int>& direct_wrong, double q) {
    if (scores.size() != direct_wrong.size())
        throw std::invalid_argument("bottom_q_precision: length mismatch");
    if (!(q > 0.0 && q <= 1.0))
        throw std::invalid_argument("bottom_q_precision: q must be in (0,1]");
    const std::size_t n = scores.size();
    const std::size_t m = static_cast<std::size_t>(std::floor(static_cast<double>(n) * q));
    if (m < 1) throw std::invalid_argument("bottom_q_precision: floor(n q) = 0");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    std::size_t wrong = 0;
    for (std::size_t t = 0; t < m; ++t) wrong += (direct_wrong[order[t]] != 0);
    return static_cast<double>(wrong) / static_cast<double>(m);
}

long long bernstein_n_min(double alpha, double beta, double q, double delta) {
    if (!(alpha >= 0.5 && alpha < 1.0))
        throw std::invalid_argument("bernstein_n_min: alpha must be in [1/2, 1)");
    if (!(beta > 0.0))
        throw std::domain_error("bernstein_n_min: beta <= 0 (no asymptotic margin; report ---)");
    if (!(q > 0.0 && q <= 1.0))
        throw std::invalid_argument("bernstein_n_min: q must be in (0,1]");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("bernstein_n_min: delta must be in (0,1)");
    double v = 2.0 * alpha * (1.0 - alpha) * std::log(2.0 / delta) / (q * beta * beta);
    double c = std::ceil(v);
    if (c >= 9.2e18) return std::numeric_limits<long long>::max();
    return static_cast<long long>(c);
}

PartitionDiagnostics partition_diagnostics(const LossMatrix& L,
                                           const std::vector<int>& cell_assignment,
                                           std::size_t kappa, double delta) {
    if (cell_assignment.size() != L.n())
        throw std::invalid_argument("partition_diagnostics: assignment length mismatch");
    int k_max = -1;
    for (int c : cell_assignment) {
        if (c < 0) throw std::invalid_argument("partition_diagnostics: negative cell index");
        k_max = std::max(k_max, c);
    }
    const std::size_t K = static_cast<std::size_t>(k_max + 1);
    const std::size_t A = L.num_actions();

    std::vector<std::size_t> counts(K, 0);
    Matrix cell_sums(K, A);
    for (std::size_t i = 0; i < L.n(); ++i) {
        auto g = static_cast<std::size_t>(cell_assignment[i]);
        ++counts[g];
        for (std::size_t a = 0; a < A; ++a) cell_sums(g, a) += L.values(i, a);
    }
    for (std::size_t g = 0; g < K; ++g)
        if (counts[g] == 0)
            throw std::invalid_argument("partition_diagnostics: empty cell " + std::to_string(g));

    auto [astar, astar_risk] = best_fixed_action(L);
    (void)astar_risk;

    PartitionDiagnostics out;
    out.cells.resize(K);
    const double n = static_cast<double>(L.n());
    for (std::size_t g = 0; g < K; ++g) {
        auto& cell = out.cells[g];
        cell.mass = static_cast<double>(counts[g]) / n;
        cell.best_action = 0;
        for (std::size_t a = 1; a < A; ++a)
            if (cell_sums(g, a) < cell_sums(g, cell.best_action)) cell.best_action = a;
        double m = static_cast<double>(counts[g]);
        cell.gap = (cell_sums(g, astar) - cell_sums(g, cell.best_action)) / m;
        if (cell.gap < 0.0) cell.gap = 0.0;  // guard fp noise; a_g* minimizes by construction

        // empirical max per-action within-cell variance
        double sigma2 = 0.0;
        for (std::size_t a = 0; a < A; ++a) {
            double mean = cell_sums(g, a) / m;
            double ss = 0.0;
            for (std::size_t i = 0; i < L.n(); ++i)
                if (static_cast<std::size_t>(cell_assignment[i]) == g) {
                    double d = L.values(i, a) - mean;
                    ss += d * d;
                }
            sigma2 = std::max(sigma2, ss / m);
        }

        double occupancy = 8.0 * std::log(2.0 / delta) / cell.mass;
        double bern = 0.0;
        if (cell.gap > 0.0)
            bern = (16.0 * sigma2 + (8.0 / 3.0) * L.l_max * cell.gap) *
                   std::log(4.0 * static_cast<double>(A) / delta) /
                   (cell.mass * cell.gap * cell.gap);
        double req = static_cast<double>(kappa) / static_cast<double>(kappa - 1) *
                     std::max(occupancy, bern);
        double c = std::ceil(req);
        cell.n_req = c >= 9.2e18 ? std::numeric_limits<long long>::max()
                                 : static_cast<long long>(c);

        out.total_gain += cell.mass * cell.gap;
        out.max_cell_gain = std::max(out.max_cell_gain, cell.mass * cell.gap);
    }
    return out;
}

double ceiling_pi1(const LossMatrix& L, const std::vector<std::vector<int>>& candidates,
                   std::size_t kappa, double delta) {
    if (candidates.empty())
        throw std::invalid_argument("ceiling_pi1: empty candidate list");
    double best = 0.0;
    for (const auto& cells : candidates)
        best = std::max(best, partition_diagnostics(L, cells, kappa, delta).total_gain);
    return best;
}

Pi2Ceiling ceiling_pi2(const SelectiveConstants& constants, const std::vector<double>& scores,
                       const std::vector<int>& direct_wrong,
                       const std::vector<double>& q_grid) {
    if (!(constants.l_w > constants.l_r))
        throw std::domain_error("ceiling_pi2: degenerate constants (l_w <= l_r)");
    if (q_grid.empty()) throw std::invalid_argument("ceiling_pi2: empty q grid");

    Pi2Ceiling out;
    std::vector<int> direct_correct(direct_wrong.size());
    for (std::size_t i = 0; i < direct_wrong.size(); ++i)
        direct_correct[i] = direct_wrong[i] ? 0 : 1;
    out.alpha_emp = auc(scores, direct_correct);
    out.beta = out.alpha_emp - constants.alpha_min;

    double scale = constants.l_w - constants.l_r;
    double best_gain = -std::numeric_limits<double>::infinity();
    double best_q = *std::min_element(q_grid.begin(), q_grid.end());
    for (double q : q_grid) {
        double mu = bottom_q_precision(scores, direct_wrong, q);
        double gain = q * (mu - constants.alpha_min) * scale;
        if (gain > best_gain + 1e-15) {
            best_gain = gain;
            best_q = q;
        }
    }
    if (best_gain <= 0.0) {
        out.exact = 0.0;
        out.q_star = *std::min_element(q_grid.begin(), q_grid.end());
    } else {
        out.exact = best_gain;
        out.q_star = best_q;
    }
    out.proxy = std::max(0.0, out.q_star * out.beta * scale);
    return out;
}

RegimeDiagnostics classify_regime(const ResidualReport& res, const ViabilityReport& via,
                                  double c1, double c2, double residual_threshold,
                                  bool has_prior_channel) {
    RegimeDiagnostics out;
    out.residual = res;
    out.viability = via;
    out.c_pi1 = c1;
    out.c_pi2 = c2;
    out.pi3_eligible = has_prior_channel;

    if (res.residual_mass < residual_threshold || (via.beta <= 0.0 && c1 <= 0.0)) {
        out.predicted_class = RegimeClass::Pi0;
        out.rationale = Rationale::ResidualBounded;
    } else if (via.beta > 0.0 && via.n_min && via.n < *via.n_min) {
        out.predicted_class = c1 > 0.0 ? RegimeClass::Pi1 : RegimeClass::Pi0;
        out.rationale = Rationale::VarianceBounded;
    } else {
        out.predicted_class = c2 > c1 ? RegimeClass::Pi2 : RegimeClass::Pi1;
        out.rationale = Rationale::CeilingComparison;
    }
    return out;
}

double selection_bound(std::size_t num_classes, std::size_t n_in, double l_max) {
    if (num_classes < 1) throw std::invalid_argument("selection_bound: num_classes >= 1");
    if (n_in < 1) throw std::invalid_argument("selection_bound: n_in >= 1");
    return 4.0 * l_max *
           std::sqrt(std::log(2.0 * static_cast<double>(num_classes)) /
                     static_cast<double>(n_in));
}

ViabilityReport make_viability_report(double alpha_emp, double alpha_min, double q,
                                      double delta, long long n, double mu_w_q) {
    ViabilityReport v;
    v.alpha_emp = alpha_emp;
    v.alpha_min = alpha_min;
    v.beta = alpha_emp - alpha_min;
    v.q = q;
    v.delta = delta;
    v.n = n;
    v.mu_w_q = mu_w_q;
    if (v.beta > 0.0 && alpha_emp >= 0.5 && alpha_emp < 1.0)
        v.n_min = bernstein_n_min(alpha_emp, v.beta, q, delta);
    v.viable = v.beta > 0.0 && v.n_min && n >= *v.n_min;
    return v;
}

}  // namespace regime
