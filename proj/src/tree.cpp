#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "regime/learners.hpp"

namespace regime {

namespace {

int majority_label(const std::vector<int>& labels, const std::vector<std::size_t>& rows) {
    std::map<int, std::size_t> counts;
    for (auto i : rows) ++counts[labels[i]];
    int best = counts.begin()->first;
    std::size_t best_n = counts.begin()->second;
    for (const auto& [lab, n] : counts)
        if (n > best_n) {
            best = lab;
            best_n = n;
        }
    return best;  // std::map iterates ascending, so ties keep the lowest label
}

double gini(const std::map<int, std::size_t>& counts, std::size_t total) {
    double g = 1.0;
    for (const auto& [lab, n] : counts) {
        (void)lab;
        double p = static_cast<double>(n) / static_cast<double>(total);
        g -= p * p;
    }
    return g;
}

struct SplitChoice {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double impurity = 0.0;  // weighted child Gini
};

SplitChoice best_split(const Matrix& X, const std::vector<int>& labels,
                       const std::vector<std::size_t>& rows, std::size_t min_leaf) {
    SplitChoice best;
    const std::size_t m = rows.size();
    for (std::size_t f = 0; f < X.cols; ++f) {
        std::vector<std::size_t> order = rows;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return X(a, f) < X(b, f);
        });
        std::map<int, std::size_t> left, right;
        for (auto i : order) ++right[labels[i]];
        std::size_t nl = 0;
        for (std::size_t t = 0; t + 1 < m; ++t) {
            auto i = order[t];
            ++left[labels[i]];
            auto it = right.find(labels[i]);
            if (--it->second == 0) right.erase(it);
            ++nl;
            if (X(order[t + 1], f) == X(i, f)) continue;  // midpoint needs distinct values
            if (nl < min_leaf || m - nl < min_leaf) continue;
            double imp = (static_cast<double>(nl) * gini(left, nl) +
                          static_cast<double>(m - nl) * gini(right, m - nl)) /
                         static_cast<double>(m);
            if (!best.found || imp < best.impurity - 1e-12) {
                best.found = true;
                best.feature = f;
                best.threshold = 0.5 * (X(i, f) + X(order[t + 1], f));
                best.impurity = imp;
            }
        }
    }
    return best;
}

void grow(CartTree& tree, int node_id, const Matrix& X, const std::vector<int>& labels,
          std::vector<std::size_t> rows, std::size_t depth, std::size_t max_depth,
          std::size_t min_leaf) {
    tree.nodes[node_id].label = majority_label(labels, rows);

    bool pure = true;
    for (auto i : rows)
        if (labels[i] != labels[rows[0]]) {
            pure = false;
            break;
        }
    if (pure || depth >= max_depth || rows.size() < 2 * min_leaf) return;

    SplitChoice split = best_split(X, labels, rows, min_leaf);
    if (!split.found) return;

    std::vector<std::size_t> lrows, rrows;
    for (auto i : rows)
        (X(i, split.feature) <= split.threshold ? lrows : rrows).push_back(i);
    if (lrows.size() < min_leaf || rrows.size() < min_leaf) return;

    // emplace_back may reallocate; index-address the node, never hold a reference
    int l = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    int r = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[node_id].leaf = false;
    tree.nodes[node_id].feature = split.feature;
    tree.nodes[node_id].threshold = split.threshold;
    tree.nodes[node_id].left = l;
    tree.nodes[node_id].right = r;
    grow(tree, l, X, labels, std::move(lrows), depth + 1, max_depth, min_leaf);
    grow(tree, r, X, labels, std::move(rrows), depth + 1, max_depth, min_leaf);
}

}  // namespace

int CartTree::apply_row(const double* x) const {
    int id = 0;
    while (!nodes[id].leaf)
        id = x[nodes[id].feature] <= nodes[id].threshold ? nodes[id].left : nodes[id].right;
    return nodes[id].leaf_id;
}

std::vector<int> CartTree::apply(const Matrix& X) const {
    std::vector<int> out(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) out[i] = apply_row(X.row(i));
    return out;
}

std::vector<int> CartTree::predict(const Matrix& X) const {
    std::vector<int> out(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) {
        int id = 0;
        while (!nodes[id].leaf)
            id = X(i, nodes[id].feature) <= nodes[id].threshold ? nodes[id].left
                                                                : nodes[id].right;
        out[i] = nodes[id].label;
    }
    return out;
}

CartTree cart_tree(const Matrix& X, const std::vector<int>& labels, std::size_t max_depth,
                   std::size_t min_samples_leaf) {
    if (labels.size() != X.rows)
        throw std::invalid_argument("cart_tree: label length mismatch");
    if (X.rows < min_samples_leaf)
        throw std::invalid_argument("cart_tree: fewer rows than min_samples_leaf");

    CartTree tree;
    tree.nodes.emplace_back();
    std::vector<std::size_t> rows(X.rows);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    grow(tree, 0, X, labels, std::move(rows), 0, max_depth, min_samples_leaf);

    tree.num_leaves = 0;
    for (auto& nd : tree.nodes)
        if (nd.leaf) nd.leaf_id = static_cast<int>(tree.num_leaves++);
    return tree;
}

}  // namespace regime
