#pragma once
// From-scratch learning primitives used by the controller families:
// per-fold standardizer, Lloyd's k-means with greedy farthest-point init,
// softmax regression, Gini CART, and histogram gradient boosting.

#include <cstdint>
#include <vector>

#include "regime/matrix.hpp"

namespace regime {

// ---- standardizer ----------------------------------------------------------

struct Standardizer {
    std::vector<double> mean;
    std::vector<double> std;  // floored at kStdFloor

    static constexpr double kStdFloor = 1e-8;

    static Standardizer fit(const Matrix& X);
    Matrix transform(const Matrix& X) const;
};

// ---- k-means ---------------------------------------------------------------

struct KmeansResult {
    Matrix centroids;            // k x d
    std::vector<int> assignment; // nearest centroid, index tie-break
    double sse = 0.0;
};

// Lloyd's algorithm, seeded greedy farthest-point initialization,
// <= 100 iterations or centroid shift < 1e-6.
KmeansResult kmeans(const Matrix& X, std::size_t k, std::uint64_t seed);

std::vector<int> kmeans_assign(const Matrix& X, const Matrix& centroids);

// ---- multinomial logistic --------------------------------------------------

// Softmax regression: sum of weighted cross-entropy + (1/(2 C)) ||coef||^2
// (intercepts unpenalized). Full-batch gradient descent with backtracking;
// stops at gradient norm < 1e-6 or 500 epochs.
struct LogisticModel {
    std::vector<int> classes;  // original label values, ascending
    Matrix coef;               // K x d
    std::vector<double> intercept;
    double temperature = 1.0;  // applied to logits at predict time

    Matrix logits(const Matrix& X) const;        // n x K (temperature NOT applied)
    Matrix predict_proba(const Matrix& X) const; // softmax(logits / temperature)
    std::vector<int> predict(const Matrix& X) const;
};

LogisticModel multinomial_logistic(const Matrix& X, const std::vector<int>& labels,
                                   double l2_c, const std::vector<double>& sample_weights,
                                   std::uint64_t seed);

// objective + gradient of the softmax regression at the given parameters;
// exposed for the finite-difference check
double logistic_objective(const Matrix& X, const std::vector<int>& labels_idx,
                          std::size_t num_classes, const std::vector<double>& weights,
                          double l2_c, const Matrix& coef,
                          const std::vector<double>& intercept, Matrix* grad_coef,
                          std::vector<double>* grad_intercept);

// NLL-minimizing softmax temperature on held-in logits, golden-section search
// over log t clamped to [-log 4, log 4].
double fit_temperature(const Matrix& logits, const std::vector<int>& labels_idx);

// ---- CART ------------------------------------------------------------------

struct CartNode {
    bool leaf = true;
    std::size_t feature = 0;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = 0;       // majority class at the node
    int leaf_id = -1;    // dense id over leaves, assigned after fit
};

struct CartTree {
    std::vector<CartNode> nodes;  // nodes[0] is the root
    std::size_t num_leaves = 0;

    int apply_row(const double* x) const;            // leaf id
    std::vector<int> apply(const Matrix& X) const;   // leaf ids
    std::vector<int> predict(const Matrix& X) const; // leaf labels
};

// Binary axis-aligned splits greedily minimizing Gini impurity; split
// candidates at midpoints of sorted unique feature values; stops on
// depth / leaf size / purity.
CartTree cart_tree(const Matrix& X, const std::vector<int>& labels, std::size_t max_depth,
                   std::size_t min_samples_leaf);

// ---- histogram gradient boosting --------------------------------------------

struct GbdtOptions {
    std::size_t max_depth = 3;
    std::size_t n_rounds = 200;
    double learning_rate = 0.05;
    std::size_t max_bins = 64;
    std::size_t min_samples_leaf = 5;
    double lambda = 1e-3;  // leaf-weight ridge
};

struct GbdtTreeNode {
    bool leaf = true;
    std::size_t feature = 0;
    std::uint8_t bin_threshold = 0;  // go left when bin <= threshold
    double raw_threshold = 0.0;      // for unbinned prediction
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct GbdtTree {
    std::vector<GbdtTreeNode> nodes;
    double predict_row(const double* x) const;
};

// One-vs-rest boosting of depth-limited regression trees on logistic loss;
// features pre-binned into quantile bins.
struct GbdtClassifier {
    std::vector<int> classes;
    std::vector<double> base_score;            // per class, log-odds
    std::vector<std::vector<GbdtTree>> trees;  // per class
    GbdtOptions opt;

    Matrix decision(const Matrix& X) const;       // per-class raw scores
    Matrix predict_proba(const Matrix& X) const;  // normalized OvR sigmoids
    std::vector<int> predict(const Matrix& X) const;
};

GbdtClassifier gradient_boosted_classifier(const Matrix& X, const std::vector<int>& labels,
                                           const GbdtOptions& opt, std::uint64_t seed);

// squared-loss variant
struct GbdtRegressor {
    double base_score = 0.0;
    std::vector<GbdtTree> trees;
    GbdtOptions opt;

    std::vector<double> predict(const Matrix& X) const;
};

GbdtRegressor gradient_boosted_regressor(const Matrix& X, const std::vector<double>& targets,
                                         const GbdtOptions& opt, std::uint64_t seed);

}  // namespace regime
