#include "regime/policies.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "regime/rng.hpp"

namespace regime {

namespace {

std::string trim_zeros(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

// expected-loss argmin given class probabilities and per-class action losses
std::vector<int> expected_loss_argmin(const Matrix& proba, const Matrix& class_loss) {
    std::vector<int> out(proba.rows);
    for (std::size_t i = 0; i < proba.rows; ++i) {
        std::size_t best = 0;
        double best_v = 0.0;
        for (std::size_t a = 0; a < class_loss.cols; ++a) {
            double v = 0.0;
            for (std::size_t k = 0; k < proba.cols; ++k)
                v += proba(i, k) * class_loss(k, a);
            if (a == 0 || v < best_v) {
                best = a;
                best_v = v;
            }
        }
        out[i] = static_cast<int>(best);
    }
    return out;
}

// per-class (by argmin label) mean loss per action over the fit rows
Matrix per_class_mean_losses(const LossMatrix& L, const std::vector<int>& labels,
                             const std::vector<int>& classes) {
    Matrix out(classes.size(), L.num_actions());
    for (std::size_t k = 0; k < classes.size(); ++k) {
        std::size_t count = 0;
        for (std::size_t i = 0; i < L.n(); ++i) {
            if (labels[i] != classes[k]) continue;
            ++count;
            for (std::size_t a = 0; a < L.num_actions(); ++a) out(k, a) += L.values(i, a);
        }
        for (std::size_t a = 0; a < L.num_actions(); ++a)
            out(k, a) /= static_cast<double>(count ? count : 1);
    }
    return out;
}

}  // namespace

std::vector<int> loss_argmin_labels(const LossMatrix& L) {
    std::vector<int> labels(L.n());
    for (std::size_t i = 0; i < L.n(); ++i) {
        std::size_t best = 0;
        for (std::size_t a = 1; a < L.num_actions(); ++a)
            if (L.values(i, a) < L.values(i, best)) best = a;
        labels[i] = static_cast<int>(best);
    }
    return labels;
}

// ---- FixedPolicy ------------------------------------------------------------

FixedPolicy::FixedPolicy(std::string action_name) : name_(std::move(action_name)) {}
FixedPolicy::FixedPolicy(int action_index) : action_(action_index) {}

std::string FixedPolicy::family_name() const {
    if (!name_.empty()) return name_ == "direct" ? "always_direct" : "always_" + name_;
    return "fixed_a" + std::to_string(action_);
}

void FixedPolicy::fit(const Matrix&, const LossMatrix& L, std::uint64_t) {
    if (!name_.empty()) {
        auto idx = L.actions.find(name_);
        if (!idx) throw std::invalid_argument("FixedPolicy: unknown action " + name_);
        action_ = static_cast<int>(*idx);
    }
    if (action_ < 0 || static_cast<std::size_t>(action_) >= L.num_actions())
        throw std::invalid_argument("FixedPolicy: action index out of range");
}

std::vector<int> FixedPolicy::predict(const Matrix& X) const {
    if (action_ < 0) throw std::logic_error("FixedPolicy: predict before fit");
    return std::vector<int>(X.rows, action_);
}

// ---- FairFixedPolicy ---------------------------------------------------------

void FairFixedPolicy::fit(const Matrix&, const LossMatrix& L, std::uint64_t) {
    action_ = static_cast<int>(best_fixed_action(L).first);
}

std::vector<int> FairFixedPolicy::predict(const Matrix& X) const {
    if (action_ < 0) throw std::logic_error("FairFixedPolicy: predict before fit");
    return std::vector<int>(X.rows, action_);
}

// ---- KmeansRouterPolicy ------------------------------------------------------

void KmeansRouterPolicy::fit(const Matrix& X, const LossMatrix& L, std::uint64_t seed) {
    st_ = Standardizer::fit(X);
    Matrix Xs = st_.transform(X);
    KmeansResult km = kmeans(Xs, k_, seed);
    centroids_ = km.centroids;

    int global_best = static_cast<int>(best_fixed_action(L).first);
    cell_actions_.assign(k_, global_best);
    for (std::size_t c = 0; c < k_; ++c) {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < X.rows; ++i)
            if (km.assignment[i] == static_cast<int>(c)) rows.push_back(i);
        if (rows.size() < min_cell_) continue;
        LossMatrix sub = L.gather_rows(rows);
        cell_actions_[c] = static_cast<int>(best_fixed_action(sub).first);
    }
}

std::vector<int> KmeansRouterPolicy::predict(const Matrix& X) const {
    if (cell_actions_.empty()) throw std::logic_error("KmeansRouterPolicy: predict before fit");
    auto cells = kmeans_assign(st_.transform(X), centroids_);
    std::vector<int> out(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i)
        out[i] = cell_actions_[static_cast<std::size_t>(cells[i])];
    return out;
}

// ---- CartRouterPolicy --------------------------------------------------------

void CartRouterPolicy::fit(const Matrix& X, const LossMatrix& L, std::uint64_t) {
    auto labels = loss_argmin_labels(L);
    tree_ = cart_tree(X, labels, max_depth_, min_leaf_);

    int global_best = static_cast<int>(best_fixed_action(L).first);
    leaf_actions_.assign(tree_.num_leaves, global_best);
    auto leaves = tree_.apply(X);
    for (std::size_t leaf = 0; leaf < tree_.num_leaves; ++leaf) {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < X.rows; ++i)
            if (leaves[i] == static_cast<int>(leaf)) rows.push_back(i);
        if (rows.size() < min_cell_) continue;
        leaf_actions_[leaf] = static_cast<int>(best_fixed_action(L.gather_rows(rows)).first);
    }
}

std::vector<int> CartRouterPolicy::predict(const Matrix& X) const {
    if (leaf_actions_.empty()) throw std::logic_error("CartRouterPolicy: predict before fit");
    auto leaves = tree_.apply(X);
    std::vector<int> out(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i)
        out[i] = leaf_actions_[static_cast<std::size_t>(leaves[i])];
    return out;
}

// ---- SelectivePluginPolicy ---------------------------------------------------

std::string SelectivePluginPolicy::family_name() const {
    return "selective_c" + trim_zeros(l2_c_);
}

void SelectivePluginPolicy::fit(const Matrix& X, const LossMatrix& L, std::uint64_t seed) {
    auto labels = loss_argmin_labels(L);
    st_ = Standardizer::fit(X);
    Matrix Xs = st_.transform(X);

    const std::size_t n = X.rows;
    const std::size_t n_cal = n / 5;
    if (n_cal >= kMinCalRows) {
        Rng rng(mix_seed(seed, 0xca1));
        auto perm = rng.permutation(n);
        std::vector<std::size_t> cal(perm.begin(), perm.begin() + n_cal);
        std::vector<std::size_t> train(perm.begin() + n_cal, perm.end());
        auto y_train = gather(labels, train);
        model_ = multinomial_logistic(Xs.gather_rows(train), y_train, l2_c_, {}, seed);
        if (model_.classes.size() > 1) {
            // temperature on the held-in split; rows with classes unseen in
            // training are skipped
            std::vector<std::size_t> usable;
            std::vector<int> y_idx;
            for (auto i : cal) {
                auto it = std::lower_bound(model_.classes.begin(), model_.classes.end(),
                                           labels[i]);
                if (it != model_.classes.end() && *it == labels[i]) {
                    usable.push_back(i);
                    y_idx.push_back(static_cast<int>(it - model_.classes.begin()));
                }
            }
            if (y_idx.size() >= 2)
                model_.temperature = fit_temperature(model_.logits(Xs.gather_rows(usable)),
                                                     y_idx);
        }
    } else {
        model_ = multinomial_logistic(Xs, labels, l2_c_, {}, seed);
    }
    class_loss_ = per_class_mean_losses(L, labels, model_.classes);
}

std::vector<int> SelectivePluginPolicy::predict(const Matrix& X) const {
    if (class_loss_.rows == 0)
        throw std::logic_error("SelectivePluginPolicy: predict before fit");
    return expected_loss_argmin(model_.predict_proba(st_.transform(X)), class_loss_);
}

// ---- HgbcPolicy --------------------------------------------------------------

void HgbcPolicy::fit(const Matrix& X, const LossMatrix& L, std::uint64_t seed) {
    auto labels = loss_argmin_labels(L);
    GbdtOptions opt;
    opt.max_depth = max_depth_;
    model_ = gradient_boosted_classifier(X, labels, opt, seed);
    class_loss_ = per_class_mean_losses(L, labels, model_.classes);
}

std::vector<int> HgbcPolicy::predict(const Matrix& X) const {
    if (class_loss_.rows == 0) throw std::logic_error("HgbcPolicy: predict before fit");
    return expected_loss_argmin(model_.predict_proba(X), class_loss_);
}

// ---- MozannarPolicy ----------------------------------------------------------

std::string MozannarPolicy::family_name() const { return "mozannar_c" + trim_zeros(l2_c_); }

void MozannarPolicy::fit(const Matrix& X, const LossMatrix& L, std::uint64_t seed) {
    st_ = Standardizer::fit(X);
    Matrix Xs = st_.transform(X);
    const std::size_t A = L.num_actions();

    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < X.rows; ++i) {
        double row_max = L.values(i, 0), row_min = L.values(i, 0);
        for (std::size_t a = 1; a < A; ++a) {
            row_max = std::max(row_max, L.values(i, a));
            row_min = std::min(row_min, L.values(i, a));
        }
        if (row_max > row_min) kept.push_back(i);
    }
    if (kept.empty())
        throw std::runtime_error("MozannarPolicy: every row has all-equal losses");

    Matrix Xrep(kept.size() * A, X.cols);
    std::vector<int> labels(kept.size() * A);
    std::vector<double> weights(kept.size() * A);
    std::size_t r = 0;
    for (auto i : kept) {
        double row_max = L.values(i, 0);
        for (std::size_t a = 1; a < A; ++a) row_max = std::max(row_max, L.values(i, a));
        for (std::size_t a = 0; a < A; ++a, ++r) {
            for (std::size_t j = 0; j < X.cols; ++j) Xrep(r, j) = Xs(i, j);
            labels[r] = static_cast<int>(a);
            weights[r] = row_max - L.values(i, a);
        }
    }
    model_ = multinomial_logistic(Xrep, labels, l2_c_, weights, seed);
}

std::vector<int> MozannarPolicy::predict(const Matrix& X) const {
    if (model_.classes.empty()) throw std::logic_error("MozannarPolicy: predict before fit");
    return model_.predict(st_.transform(X));
}

// ---- NarasimhanPolicy --------------------------------------------------------

void NarasimhanPolicy::fit(const Matrix& X, const LossMatrix& L, std::uint64_t seed) {
    GbdtOptions opt;
    opt.max_depth = max_depth_;
    per_action_.clear();
    for (std::size_t a = 0; a < L.num_actions(); ++a) {
        std::vector<double> y(L.n());
        for (std::size_t i = 0; i < L.n(); ++i) y[i] = L.values(i, a);
        per_action_.push_back(gradient_boosted_regressor(X, y, opt, mix_seed(seed, a)));
    }
}

std::vector<int> NarasimhanPolicy::predict(const Matrix& X) const {
    if (per_action_.empty()) throw std::logic_error("NarasimhanPolicy: predict before fit");
    std::vector<std::vector<double>> preds;
    preds.reserve(per_action_.size());
    for (const auto& m : per_action_) preds.push_back(m.predict(X));
    std::vector<int> out(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) {
        std::size_t best = 0;
        for (std::size_t a = 1; a < preds.size(); ++a)
            if (preds[a][i] < preds[best][i]) best = a;
        out[i] = static_cast<int>(best);
    }
    return out;
}

// ---- PriorGatedPolicy --------------------------------------------------------

PriorGatedPolicy::PriorGatedPolicy(ThresholdGate gate, std::unique_ptr<Policy> fallback)
    : gate_(std::move(gate)), fallback_(std::move(fallback)) {
    if (!fallback_) throw std::invalid_argument("PriorGatedPolicy: null fallback");
    if (fallback_->class_tag() == RegimeClass::Pi3)
        throw std::invalid_argument("PriorGatedPolicy: fallback must be from a lower class");
}

std::string PriorGatedPolicy::family_name() const {
    return "prior_gated(" + fallback_->family_name() + ")";
}

void PriorGatedPolicy::fit(const Matrix&, const LossMatrix&, std::uint64_t) {
    throw std::runtime_error("PriorGatedPolicy: prior channel required for fit");
}

std::vector<int> PriorGatedPolicy::predict(const Matrix&) const {
    throw std::runtime_error("PriorGatedPolicy: prior channel required for predict");
}

void PriorGatedPolicy::fit_with_prior(const Matrix& X, const LossMatrix& L,
                                      const std::vector<double>& z, std::uint64_t seed) {
    if (z.size() != X.rows)
        throw std::invalid_argument("PriorGatedPolicy: prior length mismatch");
    auto hi = L.actions.find(gate_.high_action);
    auto lo = L.actions.find(gate_.low_action);
    if (!hi || !lo)
        throw std::invalid_argument("PriorGatedPolicy: gate action not in action set");
    high_idx_ = static_cast<int>(*hi);
    low_idx_ = static_cast<int>(*lo);

    std::vector<std::size_t> pass;  // rows the gate leaves to the fallback
    for (std::size_t i = 0; i < X.rows; ++i)
        if (std::abs(z[i]) <= gate_.tau) pass.push_back(i);
    if (pass.empty())
        throw std::runtime_error("PriorGatedPolicy: gate fires on every training row");
    fallback_->fit(X.gather_rows(pass), L.gather_rows(pass), seed);
}

std::vector<int> PriorGatedPolicy::predict_with_prior(const Matrix& X,
                                                      const std::vector<double>& z) const {
    if (z.size() != X.rows)
        throw std::invalid_argument("PriorGatedPolicy: prior length mismatch");
    if (high_idx_ < 0) throw std::logic_error("PriorGatedPolicy: predict before fit");
    std::vector<int> out = fallback_->predict(X);
    for (std::size_t i = 0; i < X.rows; ++i) {
        if (z[i] > gate_.tau)
            out[i] = high_idx_;
        else if (z[i] < -gate_.tau)
            out[i] = low_idx_;
    }
    return out;
}

}  // namespace regime
