#include "regime/loss.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace regime {

ActionSet ActionSet::canonical() {
    return ActionSet{{"direct", "retrieve", "defer", "abstain"}};
}

ActionSet ActionSet::two_action() {
    return ActionSet{{"direct", "defer"}};
}

std::optional<std::size_t> ActionSet::find(const std::string& name) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == name) return i;
    return std::nullopt;
}

void ActionSet::validate() const {
    if (labels.size() < 2) throw std::invalid_argument("ActionSet: need at least 2 actions");
    std::set<std::string> seen(labels.begin(), labels.end());
    if (seen.size() != labels.size())
        throw std::invalid_argument("ActionSet: duplicate action labels");
}

void Weights::validate() const {
    if (w_c < 0.0 || w_h < 0.0 || w_k < 0.0)
        throw std::invalid_argument("Weights: negative weight");
    if (!std::isfinite(w_c) || !std::isfinite(w_h) || !std::isfinite(w_k))
        throw std::invalid_argument("Weights: non-finite weight");
}

void LossComponents::validate() const {
    if (c.rows != h.rows || c.rows != k.rows || c.cols != h.cols || c.cols != k.cols)
        throw std::invalid_argument("LossComponents: component shapes disagree");
    for (std::size_t i = 0; i < c.rows; ++i)
        for (std::size_t j = 0; j < c.cols; ++j) {
            double cv = c(i, j), hv = h(i, j), kv = k(i, j);
            if (cv != 0.0 && cv != 1.0)
                throw std::invalid_argument("LossComponents: c must be binary at row " +
                                            std::to_string(i));
            if (hv < 0.0 || hv > 1.0 || !std::isfinite(hv))
                throw std::invalid_argument("LossComponents: h outside [0,1] at row " +
                                            std::to_string(i));
            if (kv < 0.0 || !std::isfinite(kv))
                throw std::invalid_argument("LossComponents: negative cost at row " +
                                            std::to_string(i));
        }
}

void LossMatrix::validate() const {
    actions.validate();
    if (values.rows < 1) throw std::invalid_argument("LossMatrix: empty matrix");
    if (values.cols != actions.size())
        throw std::invalid_argument("LossMatrix: column count does not match action set");
    for (std::size_t i = 0; i < values.rows; ++i)
        for (std::size_t j = 0; j < values.cols; ++j) {
            double v = values(i, j);
            if (!(v >= 0.0) || v > l_max + 1e-12)
                throw std::invalid_argument("LossMatrix: entry outside [0, l_max] at row " +
                                            std::to_string(i));
        }
}

LossMatrix LossMatrix::gather_rows(const std::vector<std::size_t>& idx) const {
    return LossMatrix{values.gather_rows(idx), actions, l_max};
}

LossMatrix assemble_loss(const LossComponents& comp, const Weights& w,
                         const ActionSet& actions) {
    comp.validate();
    w.validate();
    actions.validate();
    if (comp.c.cols != actions.size())
        throw std::invalid_argument("assemble_loss: component width does not match action set");

    double k_max = 0.0;
    for (double v : comp.k.data) k_max = std::max(k_max, v);

    LossMatrix L;
    L.actions = actions;
    L.l_max = w.w_c + w.w_h + w.w_k * k_max;
    L.values = Matrix(comp.c.rows, comp.c.cols);
    for (std::size_t i = 0; i < comp.c.rows; ++i)
        for (std::size_t j = 0; j < comp.c.cols; ++j)
            L.values(i, j) = w.w_c * (1.0 - comp.c(i, j)) + w.w_h * comp.h(i, j) +
                             w.w_k * comp.k(i, j);
    return L;
}

std::pair<std::size_t, double> best_fixed_action(const LossMatrix& L) {
    if (L.n() < 1) throw std::invalid_argument("best_fixed_action: empty matrix");
    auto means = L.values.col_means();
    std::size_t best = 0;
    for (std::size_t a = 1; a < means.size(); ++a)
        if (means[a] < means[best]) best = a;
    return {best, means[best]};
}

double policy_risk(const LossMatrix& L, const std::vector<int>& assignment) {
    if (assignment.size() != L.n())
        throw std::invalid_argument("policy_risk: assignment length mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < L.n(); ++i) {
        int a = assignment[i];
        if (a < 0 || static_cast<std::size_t>(a) >= L.num_actions())
            throw std::invalid_argument("policy_risk: action index out of range at row " +
                                        std::to_string(i));
        total += L.values(i, static_cast<std::size_t>(a));
    }
    return total / static_cast<double>(L.n());
}

SelectiveConstants selective_constants(const LossMatrix& L,
                                       const std::vector<int>& direct_correct,
                                       int direct_action, int fallback_action) {
    if (direct_correct.size() != L.n())
        throw std::invalid_argument("selective_constants: label length mismatch");
    if (direct_action < 0)
        direct_action = static_cast<int>(L.actions.find("direct").value_or(0));
    if (fallback_action < 0) {
        auto ab = L.actions.find("abstain");
        fallback_action = static_cast<int>(ab.value_or(L.num_actions() - 1));
    }
    auto da = static_cast<std::size_t>(direct_action);
    auto fa = static_cast<std::size_t>(fallback_action);
    if (da >= L.num_actions() || fa >= L.num_actions())
        throw std::invalid_argument("selective_constants: action index out of range");

    double sum_r = 0.0, sum_w = 0.0, sum_a = 0.0;
    std::size_t n_r = 0, n_w = 0;
    for (std::size_t i = 0; i < L.n(); ++i) {
        if (direct_correct[i]) {
            sum_r += L.values(i, da);
            ++n_r;
        } else {
            sum_w += L.values(i, da);
            ++n_w;
        }
        sum_a += L.values(i, fa);
    }
    if (n_r == 0 || n_w == 0)
        throw std::invalid_argument(
            "selective_constants: need at least one correct and one wrong sample");

    SelectiveConstants out;
    out.l_r = sum_r / static_cast<double>(n_r);
    out.l_w = sum_w / static_cast<double>(n_w);
    out.l_a = sum_a / static_cast<double>(L.n());
    if (out.l_w <= out.l_r)
        throw std::domain_error(
            "selective_constants: L_w <= L_r, break-even undefined (degenerate selective "
            "subproblem)");
    out.alpha_min = (out.l_a - out.l_r) / (out.l_w - out.l_r);
    return out;
}

}  // namespace regime
