#pragma once
// The four-class controller lattice as concrete fit/predict policies:
// fixed actions, partition routers (kmeans / CART), instance-level plug-ins
// (logistic, boosted), the two cost-sensitive deferral adaptations, and the
// prior-gated controller.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "regime/classes.hpp"
#include "regime/learners.hpp"
#include "regime/loss.hpp"
#include "regime/matrix.hpp"

namespace regime {

// Label-free prediction-time channel, kept disjoint from the feature block.
struct PriorChannel {
    std::vector<double> z;
    double tau = 1.0;

    bool present() const { return !z.empty(); }
};

class Policy {
public:
    virtual ~Policy() = default;
    virtual std::string family_name() const = 0;
    virtual RegimeClass class_tag() const = 0;

    virtual void fit(const Matrix& X, const LossMatrix& L, std::uint64_t seed) = 0;
    virtual std::vector<int> predict(const Matrix& X) const = 0;

    // Prior-channel-aware entry points; non-gated families ignore the channel.
    virtual bool wants_prior() const { return false; }
    virtual void fit_with_prior(const Matrix& X, const LossMatrix& L,
                                const std::vector<double>& z, std::uint64_t seed) {
        (void)z;
        fit(X, L, seed);
    }
    virtual std::vector<int> predict_with_prior(const Matrix& X,
                                                const std::vector<double>& z) const {
        (void)z;
        return predict(X);
    }
};

// pi_a(x) == a; the action may be named and is then resolved at fit time
class FixedPolicy : public Policy {
public:
    explicit FixedPolicy(std::string action_name);
    explicit FixedPolicy(int action_index);

    std::string family_name() const override;
    RegimeClass class_tag() const override { return RegimeClass::Pi0; }
    void fit(const Matrix& X, const LossMatrix& L, std::uint64_t seed) override;
    std::vector<int> predict(const Matrix& X) const override;

private:
    std::string name_;
    int action_ = -1;
};

// predicts the training-set best fixed action everywhere
class FairFixedPolicy : public Policy {
public:
    std::string family_name() const override { return "fair_fixed"; }
    RegimeClass class_tag() const override { return RegimeClass::Pi0; }
    void fit(const Matrix& X, const LossMatrix& L, std::uint64_t seed) override;
    std::vector<int> predict(const Matrix& X) const override;

private:
    int action_ = -1;
};

// KMeans partition router with per-cell loss-argmin actions and a
// global-best fallback for cells with fewer than min_cell training samples.
class KmeansRouterPolicy : public Policy {
public:
    explicit KmeansRouterPolicy(std::size_t k, std::size_t min_cell = 3)
        : k_(k), min_cell_(min_cell) {}

    std::string family_name() const override { return "kmeans_k" + std::to_string(k_); }
    RegimeClass class_tag() const override { return RegimeClass::Pi1; }
    void fit(const Matrix& X, const LossMatrix& L, std::uint64_t seed) override;
    std::vector<int> predict(const Matrix& X) const override;

private:
    std::size_t k_;
    std::size_t min_cell_;
    Standardizer st_;
    Matrix centroids_;
    std::vector<int> cell_actions_;
};

// CART partition router: tree on per-sample loss-argmin labels, leaves
// re-assigned the cell-wise loss-argmin action at fit time.
class CartRouterPolicy : public Policy {
public:
    explicit CartRouterPolicy(std::size_t max_depth, std::size_t min_samples_leaf = 5,
                              std::size_t min_cell = 3)
        : max_depth_(max_depth), min_leaf_(min_samples_leaf), min_cell_(min_cell) {}

    std::string family_name() const override { return "cart_d" + std::to_string(max_depth_); }
    RegimeClass class_tag() const override { return RegimeClass::Pi1; }
    void fit(const Matrix& X, const LossMatrix& L, std::uint64_t seed) override;
    std::vector<int> predict(const Matrix& X) const override;

private:
    std::size_t max_depth_;
    std::size_t min_leaf_;
    std::size_t min_cell_;
    CartTree tree_;
    std::vector<int> leaf_actions_;
};

// Calibrated logistic plug-in predicting an expected-loss argmin from the
// feature block. Temperature scaling runs on a 20% held-in split when that
// split has at least kMinCalRows rows; below that the model trains on all
// fit rows at unit temperature.
class SelectivePluginPolicy : public Policy {
public:
    static constexpr std::size_t kMinCalRows = 128;

    explicit SelectivePluginPolicy(double l2_c = 0.3) : l2_c_(l2_c) {}

    std::string family_name() const override;
    RegimeClass class_tag() const override { return RegimeClass::Pi2; }
    void fit(const Matrix& X, const LossMatrix& L, std::uint64_t seed) override;
    std::vector<int> predict(const Matrix& X) const override;

private:
    double l2_c_;
    Standardizer st_;
    LogisticModel model_;
    Matrix class_loss_;  // K x |A|, per argmin-class mean loss per action
};

// Boosted-classifier plug-in; same decision rule, no temperature step.
class HgbcPolicy : public Policy {
public:
    explicit HgbcPolicy(std::size_t max_depth) : max_depth_(max_depth) {}

    std::string family_name() const override { return "hgbc_md" + std::to_string(max_depth_); }
    RegimeClass class_tag() const override { return RegimeClass::Pi2; }
    void fit(const Matrix& X, const LossMatrix& L, std::uint64_t seed) override;
    std::vector<int> predict(const Matrix& X) const override;

private:
    std::size_t max_depth_;
    GbdtClassifier model_;
    Matrix class_loss_;
};

// Row-replicated cost-sensitive softmax: each row replicated once per action
// with weight L_max,i - L[i,a]; all-zero-weight rows are dropped.
class MozannarPolicy : public Policy {
public:
    explicit MozannarPolicy(double l2_c) : l2_c_(l2_c) {}

    std::string family_name() const override;
    RegimeClass class_tag() const override { return RegimeClass::Pi2; }
    void fit(const Matrix& X, const LossMatrix& L, std::uint64_t seed) override;
    std::vector<int> predict(const Matrix& X) const override;

private:
    double l2_c_;
    Standardizer st_;
    LogisticModel model_;
};

// Post-hoc plug-in: one boosted regressor per action on its loss column;
// the policy is the per-row argmin of predicted losses.
class NarasimhanPolicy : public Policy {
public:
    explicit NarasimhanPolicy(std::size_t max_depth) : max_depth_(max_depth) {}

    std::string family_name() const override {
        return "narasimhan_md" + std::to_string(max_depth_);
    }
    RegimeClass class_tag() const override { return RegimeClass::Pi2; }
    void fit(const Matrix& X, const LossMatrix& L, std::uint64_t seed) override;
    std::vector<int> predict(const Matrix& X) const override;

private:
    std::size_t max_depth_;
    std::vector<GbdtRegressor> per_action_;
};

// Deterministic two-sided gate on the prior scalar: z > tau plays
// high_action, z < -tau plays low_action, otherwise the fallback controller.
// The fallback is fit only on training rows the gate leaves alone.
struct ThresholdGate {
    double tau = 1.0;
    std::string high_action = "direct";
    std::string low_action = "defer";
};

class PriorGatedPolicy : public Policy {
public:
    PriorGatedPolicy(ThresholdGate gate, std::unique_ptr<Policy> fallback);

    std::string family_name() const override;
    RegimeClass class_tag() const override { return RegimeClass::Pi3; }
    bool wants_prior() const override { return true; }

    void fit(const Matrix& X, const LossMatrix& L, std::uint64_t seed) override;
    std::vector<int> predict(const Matrix& X) const override;
    void fit_with_prior(const Matrix& X, const LossMatrix& L, const std::vector<double>& z,
                        std::uint64_t seed) override;
    std::vector<int> predict_with_prior(const Matrix& X,
                                        const std::vector<double>& z) const override;

private:
    ThresholdGate gate_;
    std::unique_ptr<Policy> fallback_;
    int high_idx_ = -1;
    int low_idx_ = -1;
};

// per-row loss-argmin labels (canonical tie-break)
std::vector<int> loss_argmin_labels(const LossMatrix& L);

}  // namespace regime
