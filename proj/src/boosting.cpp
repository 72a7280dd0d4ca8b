#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "regime/learners.hpp"

namespace regime {

namespace {

// per-column quantile cut points (strictly increasing); code(v) = #edges <= v
std::vector<std::vector<double>> quantile_edges(const Matrix& X, std::size_t max_bins) {
    std::vector<std::vector<double>> edges(X.cols);
    std::vector<double> col(X.rows);
    for (std::size_t j = 0; j < X.cols; ++j) {
        for (std::size_t i = 0; i < X.rows; ++i) col[i] = X(i, j);
        std::sort(col.begin(), col.end());
        auto& e = edges[j];
        for (std::size_t t = 1; t < max_bins; ++t) {
            double pos = static_cast<double>(t) / static_cast<double>(max_bins) *
                         static_cast<double>(X.rows - 1);
            double v = col[static_cast<std::size_t>(pos)];
            if (e.empty() || v > e.back()) e.push_back(v);
        }
    }
    return edges;
}

std::vector<std::vector<std::uint8_t>> bin_columns(
    const Matrix& X, const std::vector<std::vector<double>>& edges) {
    std::vector<std::vector<std::uint8_t>> binned(X.cols,
                                                  std::vector<std::uint8_t>(X.rows));
    for (std::size_t j = 0; j < X.cols; ++j)
        for (std::size_t i = 0; i < X.rows; ++i) {
            const auto& e = edges[j];
            auto it = std::upper_bound(e.begin(), e.end(), X(i, j));
            binned[j][i] = static_cast<std::uint8_t>(it - e.begin());
        }
    return binned;
}

struct HistSplit {
    bool found = false;
    std::size_t feature = 0;
    std::uint8_t bin = 0;
    double gain = 0.0;
};

void grow_gbdt(GbdtTree& tree, int node_id, const std::vector<std::vector<std::uint8_t>>& binned,
               const std::vector<std::vector<double>>& edges, const std::vector<double>& g,
               const std::vector<double>& h, std::vector<std::size_t> rows, std::size_t depth,
               const GbdtOptions& opt) {
    double G = 0.0, H = 0.0;
    for (auto i : rows) {
        G += g[i];
        H += h[i];
    }
    tree.nodes[node_id].value = -G / (H + opt.lambda);
    if (depth >= opt.max_depth || rows.size() < 2 * opt.min_samples_leaf) return;

    const double parent_score = G * G / (H + opt.lambda);
    HistSplit best;
    for (std::size_t f = 0; f < binned.size(); ++f) {
        const std::size_t nb = edges[f].size() + 1;
        if (nb < 2) continue;
        std::vector<double> hg(nb, 0.0), hh(nb, 0.0);
        std::vector<std::size_t> hc(nb, 0);
        for (auto i : rows) {
            auto b = binned[f][i];
            hg[b] += g[i];
            hh[b] += h[i];
            ++hc[b];
        }
        double GL = 0.0, HL = 0.0;
        std::size_t CL = 0;
        for (std::size_t b = 0; b + 1 < nb; ++b) {
            GL += hg[b];
            HL += hh[b];
            CL += hc[b];
            if (CL < opt.min_samples_leaf || rows.size() - CL < opt.min_samples_leaf) continue;
            double GR = G - GL, HR = H - HL;
            double gain = GL * GL / (HL + opt.lambda) + GR * GR / (HR + opt.lambda) -
                          parent_score;
            if (gain > best.gain + 1e-12) {
                best.found = true;
                best.feature = f;
                best.bin = static_cast<std::uint8_t>(b);
                best.gain = gain;
            }
        }
    }
    if (!best.found || best.gain <= 1e-12) return;

    std::vector<std::size_t> lrows, rrows;
    for (auto i : rows)
        (binned[best.feature][i] <= best.bin ? lrows : rrows).push_back(i);

    // emplace_back may reallocate; index-address the node, never hold a reference
    int l = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    int r = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[node_id].leaf = false;
    tree.nodes[node_id].feature = best.feature;
    tree.nodes[node_id].bin_threshold = best.bin;
    tree.nodes[node_id].raw_threshold = edges[best.feature][best.bin];
    tree.nodes[node_id].left = l;
    tree.nodes[node_id].right = r;
    grow_gbdt(tree, l, binned, edges, g, h, std::move(lrows), depth + 1, opt);
    grow_gbdt(tree, r, binned, edges, g, h, std::move(rrows), depth + 1, opt);
}

GbdtTree build_tree(const std::vector<std::vector<std::uint8_t>>& binned,
                    const std::vector<std::vector<double>>& edges, const std::vector<double>& g,
                    const std::vector<double>& h, const GbdtOptions& opt) {
    GbdtTree tree;
    tree.nodes.emplace_back();
    std::vector<std::size_t> rows(g.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    grow_gbdt(tree, 0, binned, edges, g, h, std::move(rows), 0, opt);
    return tree;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

double GbdtTree::predict_row(const double* x) const {
    int id = 0;
    while (!nodes[id].leaf)
        id = x[nodes[id].feature] < nodes[id].raw_threshold ? nodes[id].left
                                                            : nodes[id].right;
    return nodes[id].value;
}

Matrix GbdtClassifier::decision(const Matrix& X) const {
    const std::size_t K = classes.size();
    Matrix F(X.rows, K);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t i = 0; i < X.rows; ++i) {
            double f = base_score[k];
            for (const auto& t : trees[k]) f += opt.learning_rate * t.predict_row(X.row(i));
            F(i, k) = f;
        }
    return F;
}

Matrix GbdtClassifier::predict_proba(const Matrix& X) const {
    const std::size_t K = classes.size();
    if (K == 1) return Matrix(X.rows, 1, 1.0);
    Matrix F = decision(X);
    for (std::size_t i = 0; i < X.rows; ++i) {
        double sum = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            F(i, k) = sigmoid(F(i, k));
            sum += F(i, k);
        }
        if (sum < 1e-12)
            for (std::size_t k = 0; k < K; ++k) F(i, k) = 1.0 / static_cast<double>(K);
        else
            for (std::size_t k = 0; k < K; ++k) F(i, k) /= sum;
    }
    return F;
}

std::vector<int> GbdtClassifier::predict(const Matrix& X) const {
    Matrix P = predict_proba(X);
    std::vector<int> out(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < P.cols; ++k)
            if (P(i, k) > P(i, best)) best = k;
        out[i] = classes[best];
    }
    return out;
}

GbdtClassifier gradient_boosted_classifier(const Matrix& X, const std::vector<int>& labels,
                                           const GbdtOptions& opt, std::uint64_t seed) {
    (void)seed;  // no row/feature subsampling; fully deterministic
    if (labels.size() != X.rows)
        throw std::invalid_argument("gradient_boosted_classifier: label length mismatch");

    GbdtClassifier model;
    model.opt = opt;
    std::set<int> uniq(labels.begin(), labels.end());
    model.classes.assign(uniq.begin(), uniq.end());
    const std::size_t K = model.classes.size();
    model.trees.resize(K);
    model.base_score.resize(K);
    if (K == 1) {
        model.base_score[0] = 0.0;
        return model;
    }

    auto edges = quantile_edges(X, opt.max_bins);
    auto binned = bin_columns(X, edges);
    const std::size_t n = X.rows;

    for (std::size_t k = 0; k < K; ++k) {
        std::vector<double> y(n);
        double pos = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = labels[i] == model.classes[k] ? 1.0 : 0.0;
            pos += y[i];
        }
        double p0 = std::clamp(pos / static_cast<double>(n), 1e-6, 1.0 - 1e-6);
        model.base_score[k] = std::log(p0 / (1.0 - p0));

        std::vector<double> F(n, model.base_score[k]);
        std::vector<double> g(n), h(n);
        for (std::size_t round = 0; round < opt.n_rounds; ++round) {
            for (std::size_t i = 0; i < n; ++i) {
                double p = sigmoid(F[i]);
                g[i] = p - y[i];
                h[i] = std::max(p * (1.0 - p), 1e-12);
            }
            GbdtTree tree = build_tree(binned, edges, g, h, opt);
            if (tree.nodes.size() == 1 && std::abs(tree.nodes[0].value) < 1e-12) break;
            for (std::size_t i = 0; i < n; ++i)
                F[i] += opt.learning_rate * tree.predict_row(X.row(i));
            model.trees[k].push_back(std::move(tree));
        }
    }
    return model;
}

std::vector<double> GbdtRegressor::predict(const Matrix& X) const {
    std::vector<double> out(X.rows, base_score);
    for (std::size_t i = 0; i < X.rows; ++i)
        for (const auto& t : trees) out[i] += opt.learning_rate * t.predict_row(X.row(i));
    return out;
}

GbdtRegressor gradient_boosted_regressor(const Matrix& X, const std::vector<double>& targets,
                                         const GbdtOptions& opt, std::uint64_t seed) {
    (void)seed;
    if (targets.size() != X.rows)
        throw std::invalid_argument("gradient_boosted_regressor: target length mismatch");

    GbdtRegressor model;
    model.opt = opt;
    double sum = 0.0;
    for (double v : targets) sum += v;
    model.base_score = sum / static_cast<double>(X.rows);

    auto edges = quantile_edges(X, opt.max_bins);
    auto binned = bin_columns(X, edges);
    const std::size_t n = X.rows;
    std::vector<double> F(n, model.base_score);
    std::vector<double> g(n), h(n, 1.0);
    for (std::size_t round = 0; round < opt.n_rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) g[i] = F[i] - targets[i];
        GbdtTree tree = build_tree(binned, edges, g, h, opt);
        if (tree.nodes.size() == 1 && std::abs(tree.nodes[0].value) < 1e-12) break;
        for (std::size_t i = 0; i < n; ++i)
            F[i] += opt.learning_rate * tree.predict_row(X.row(i));
        model.trees.push_back(std::move(tree));
    }
    return model;
}

}  // namespace regime
