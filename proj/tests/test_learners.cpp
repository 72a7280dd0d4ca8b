#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "regime/learners.hpp"
#include "regime/rng.hpp"

using namespace regime;

namespace {

Matrix gaussian_blobs(std::size_t per_blob, const std::vector<std::vector<double>>& centers,
                      std::uint64_t seed, std::vector<int>* labels = nullptr) {
    Rng rng(seed);
    const std::size_t d = centers[0].size();
    Matrix X(per_blob * centers.size(), d);
    std::size_t r = 0;
    for (std::size_t b = 0; b < centers.size(); ++b)
        for (std::size_t i = 0; i < per_blob; ++i, ++r) {
            for (std::size_t j = 0; j < d; ++j) X(r, j) = centers[b][j] + 0.5 * rng.normal();
            if (labels) labels->push_back(static_cast<int>(b));
        }
    return X;
}

double kmeans_sse(const Matrix& X, const Matrix& centroids, const std::vector<int>& assign) {
    double sse = 0.0;
    for (std::size_t i = 0; i < X.rows; ++i)
        for (std::size_t j = 0; j < X.cols; ++j) {
            double diff = X(i, j) - centroids(static_cast<std::size_t>(assign[i]), j);
            sse += diff * diff;
        }
    return sse;
}

}  // namespace

TEST_CASE("standardizer round-trip") {
    Rng rng(1);
    Matrix X(50, 3);
    for (auto& v : X.data) v = 5.0 + 3.0 * rng.normal();
    auto st = Standardizer::fit(X);
    auto Xs = st.transform(X);
    for (std::size_t j = 0; j < 3; ++j) {
        double mean = 0.0, var = 0.0;
        for (std::size_t i = 0; i < 50; ++i) mean += Xs(i, j);
        mean /= 50.0;
        for (std::size_t i = 0; i < 50; ++i) var += (Xs(i, j) - mean) * (Xs(i, j) - mean);
        var /= 50.0;
        CHECK(std::abs(mean) < 1e-9);
        CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("constant column is floor-clamped, not divided by zero") {
        Matrix C(10, 1, 4.2);
        auto stc = Standardizer::fit(C);
        auto Cs = stc.transform(C);
        for (double v : Cs.data) CHECK(std::abs(v) < 1e-6);
    }
}

TEST_CASE("kmeans recovers well-separated blobs") {
    std::vector<int> truth;
    auto X = gaussian_blobs(40, {{0, 0}, {6, 0}, {0, 6}}, 17, &truth);
    auto km = kmeans(X, 3, 5);
    // majority-vote agreement
    std::map<std::pair<int, int>, int> ct;
    for (std::size_t i = 0; i < X.rows; ++i)
        ++ct[std::make_pair(truth[i], km.assignment[i])];
    int agree = 0;
    for (int b = 0; b < 3; ++b) {
        int best = 0;
        for (int c = 0; c < 3; ++c) best = std::max(best, ct[std::make_pair(b, c)]);
        agree += best;
    }
    CHECK(static_cast<double>(agree) / static_cast<double>(X.rows) >= 0.95);
}

TEST_CASE("kmeans edge cases") {
    Rng rng(2);
    Matrix X(8, 2);
    for (auto& v : X.data) v = rng.uniform();
    SUBCASE("k = 1 returns the column mean") {
        auto km = kmeans(X, 1, 3);
        auto means = X.col_means();
        CHECK(km.centroids(0, 0) == doctest::Approx(means[0]));
        CHECK(km.centroids(0, 1) == doctest::Approx(means[1]));
    }
    SUBCASE("k = n gives zero SSE") {
        auto km = kmeans(X, 8, 3);
        CHECK(km.sse == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("n < k throws") { CHECK_THROWS_AS(kmeans(X, 9, 3), std::invalid_argument); }
}

TEST_CASE("kmeans has converged: one more Lloyd step cannot improve") {
    auto X = gaussian_blobs(30, {{0, 0}, {5, 5}}, 23);
    auto km = kmeans(X, 2, 9);
    // recompute means of the returned assignment and reassign
    Matrix centroids(2, 2);
    std::vector<std::size_t> counts(2, 0);
    for (std::size_t i = 0; i < X.rows; ++i) {
        auto c = static_cast<std::size_t>(km.assignment[i]);
        ++counts[c];
        for (std::size_t j = 0; j < 2; ++j) centroids(c, j) += X(i, j);
    }
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t j = 0; j < 2; ++j) centroids(c, j) /= static_cast<double>(counts[c]);
    auto assign2 = kmeans_assign(X, centroids);
    CHECK(kmeans_sse(X, centroids, assign2) <= km.sse + 1e-9);
    CHECK(km.sse <= kmeans_sse(X, km.centroids, km.assignment) + 1e-9);
}

TEST_CASE("kmeans is deterministic given the seed") {
    auto X = gaussian_blobs(25, {{0, 0}, {4, 1}, {1, 4}}, 31);
    auto a = kmeans(X, 3, 77);
    auto b = kmeans(X, 3, 77);
    CHECK(a.assignment == b.assignment);
    CHECK(a.sse == b.sse);
}

TEST_CASE("multinomial_logistic separates a 1-d two-class problem") {
    Matrix X(20, 1);
    std::vector<int> y(20);
    for (std::size_t i = 0; i < 20; ++i) {
        y[i] = i < 10 ? 0 : 1;
        X(i, 0) = y[i] ? 1.0 + 0.05 * static_cast<double>(i) : -1.0 - 0.05 * static_cast<double>(i);
    }
    auto m = multinomial_logistic(X, y, 1.0, {}, 0);
    auto pred = m.predict(X);
    CHECK(pred == y);
    // probabilities monotone in the feature
    Matrix grid(3, 1);
    grid(0, 0) = -2.0;
    grid(1, 0) = 0.0;
    grid(2, 0) = 2.0;
    auto P = m.predict_proba(grid);
    std::size_t c1 = m.classes[0] == 1 ? 0 : 1;
    CHECK(P(0, c1) < P(1, c1));
    CHECK(P(1, c1) < P(2, c1));
}

TEST_CASE("multinomial_logistic with zero features returns class priors") {
    Matrix X(10, 1, 0.0);
    std::vector<int> y = {0, 0, 0, 0, 0, 0, 0, 1, 1, 1};
    auto m = multinomial_logistic(X, y, 1.0, {}, 0);
    auto P = m.predict_proba(X);
    std::size_t c0 = m.classes[0] == 0 ? 0 : 1;
    CHECK(P(0, c0) == doctest::Approx(0.7).epsilon(1e-3));
}

TEST_CASE("multinomial_logistic single-class degenerate case") {
    Matrix X(5, 2, 1.0);
    auto m = multinomial_logistic(X, std::vector<int>(5, 3), 1.0, {}, 0);
    auto pred = m.predict(X);
    for (int p : pred) CHECK(p == 3);
}

TEST_CASE("logistic gradient matches central finite differences") {
    Rng rng(6);
    Matrix X(30, 5);
    std::vector<int> y(30);
    std::vector<double> w(30);
    for (std::size_t i = 0; i < 30; ++i) {
        y[i] = static_cast<int>(rng.index(3));
        w[i] = 0.5 + rng.uniform();
        for (std::size_t j = 0; j < 5; ++j) X(i, j) = rng.normal();
    }
    Matrix coef(3, 5);
    std::vector<double> icpt(3);
    for (auto& v : coef.data) v = 0.3 * rng.normal();
    for (auto& v : icpt) v = 0.3 * rng.normal();

    Matrix grad;
    std::vector<double> gicpt;
    logistic_objective(X, y, 3, w, 0.7, coef, icpt, &grad, &gicpt);

    const double h = 1e-6;
    double max_dev = 0.0;
    for (std::size_t t = 0; t < coef.data.size(); ++t) {
        Matrix cp = coef, cm = coef;
        cp.data[t] += h;
        cm.data[t] -= h;
        double fp = logistic_objective(X, y, 3, w, 0.7, cp, icpt, nullptr, nullptr);
        double fm = logistic_objective(X, y, 3, w, 0.7, cm, icpt, nullptr, nullptr);
        max_dev = std::max(max_dev, std::abs((fp - fm) / (2 * h) - grad.data[t]));
    }
    for (std::size_t k = 0; k < 3; ++k) {
        auto ip = icpt, im = icpt;
        ip[k] += h;
        im[k] -= h;
        double fp = logistic_objective(X, y, 3, w, 0.7, coef, ip, nullptr, nullptr);
        double fm = logistic_objective(X, y, 3, w, 0.7, coef, im, nullptr, nullptr);
        max_dev = std::max(max_dev, std::abs((fp - fm) / (2 * h) - gicpt[k]));
    }
    CHECK(max_dev < 1e-5);
}

TEST_CASE("fit_temperature recovers a known scaling") {
    // logits drawn well-calibrated, then inflated by 3x: the NLL optimum
    // should bring the temperature back near 3
    Rng rng(14);
    Matrix logits(4000, 2);
    std::vector<int> y(4000);
    for (std::size_t i = 0; i < 4000; ++i) {
        double z = 2.0 * rng.normal();
        double p = 1.0 / (1.0 + std::exp(-z));
        y[i] = rng.bernoulli(p) ? 1 : 0;
        logits(i, 1) = 3.0 * z;
        logits(i, 0) = 0.0;
    }
    double t = fit_temperature(logits, y);
    CHECK(t == doctest::Approx(3.0).epsilon(0.15));
}

TEST_CASE("cart_tree on linearly separable labels") {
    Matrix X(20, 1);
    std::vector<int> y(20);
    for (std::size_t i = 0; i < 20; ++i) {
        X(i, 0) = static_cast<double>(i);
        y[i] = i < 10 ? 0 : 1;
    }
    auto tree = cart_tree(X, y, 3, 2);
    CHECK(tree.num_leaves == 2);
    CHECK(tree.predict(X) == y);
}

TEST_CASE("cart_tree with constant labels is a single leaf") {
    Matrix X(10, 2);
    Rng rng(3);
    for (auto& v : X.data) v = rng.uniform();
    auto tree = cart_tree(X, std::vector<int>(10, 5), 4, 2);
    CHECK(tree.num_leaves == 1);
    CHECK(tree.nodes[0].label == 5);
}

TEST_CASE("cart_tree matches an exhaustive split-search oracle at depth 2") {
    Rng rng(44);
    Matrix X(40, 2);
    std::vector<int> y(40);
    for (std::size_t i = 0; i < 40; ++i) {
        X(i, 0) = rng.uniform();
        X(i, 1) = rng.uniform();
        y[i] = (X(i, 0) > 0.5) || (X(i, 1) > 0.45) ? 1 : 0;
    }
    auto tree = cart_tree(X, y, 2, 1);

    // oracle: best Gini split at the root over all features and midpoints
    auto gini_of = [&](const std::vector<std::size_t>& rows) {
        std::map<int, double> counts;
        for (auto i : rows) counts[y[i]] += 1.0;
        double g = 1.0;
        for (auto& [lab, c] : counts) {
            (void)lab;
            double p = c / static_cast<double>(rows.size());
            g -= p * p;
        }
        return g;
    };
    double best_imp = 1e9, best_thr = 0.0;
    std::size_t best_feat = 0;
    for (std::size_t f = 0; f < 2; ++f) {
        std::vector<double> vals;
        for (std::size_t i = 0; i < 40; ++i) vals.push_back(X(i, f));
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (std::size_t t = 0; t + 1 < vals.size(); ++t) {
            double thr = 0.5 * (vals[t] + vals[t + 1]);
            std::vector<std::size_t> l, r;
            for (std::size_t i = 0; i < 40; ++i)
                (X(i, f) <= thr ? l : r).push_back(i);
            if (l.empty() || r.empty()) continue;
            double imp = (static_cast<double>(l.size()) * gini_of(l) +
                          static_cast<double>(r.size()) * gini_of(r)) /
                         40.0;
            if (imp < best_imp - 1e-12) {
                best_imp = imp;
                best_feat = f;
                best_thr = thr;
            }
        }
    }
    CHECK(tree.nodes[0].leaf == false);
    CHECK(tree.nodes[0].feature == best_feat);
    CHECK(tree.nodes[0].threshold == doctest::Approx(best_thr));
    // depth-2 separates the axis-aligned OR pattern perfectly
    auto pred = tree.predict(X);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < 40; ++i) correct += pred[i] == y[i];
    CHECK(correct == 40);
}

TEST_CASE("boosted classifier learns XOR where the linear model cannot") {
    Rng rng(50);
    Matrix X(200, 2);
    std::vector<int> y(200);
    for (std::size_t i = 0; i < 200; ++i) {
        X(i, 0) = rng.uniform();
        X(i, 1) = rng.uniform();
        y[i] = (X(i, 0) > 0.5) ^ (X(i, 1) > 0.5) ? 1 : 0;
    }
    GbdtOptions opt;
    opt.max_depth = 3;
    auto gbdt = gradient_boosted_classifier(X, y, opt, 1);
    auto pred = gbdt.predict(X);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < 200; ++i) hits += pred[i] == y[i];
    CHECK(static_cast<double>(hits) / 200.0 >= 0.95);

    auto lr = multinomial_logistic(X, y, 1.0, {}, 1);
    auto lr_pred = lr.predict(X);
    std::size_t lr_hits = 0;
    for (std::size_t i = 0; i < 200; ++i) lr_hits += lr_pred[i] == y[i];
    CHECK(static_cast<double>(lr_hits) / 200.0 < 0.8);
}

TEST_CASE("boosted classifier with constant labels predicts the constant") {
    Rng rng(51);
    Matrix X(30, 2);
    for (auto& v : X.data) v = rng.uniform();
    GbdtOptions opt;
    auto gbdt = gradient_boosted_classifier(X, std::vector<int>(30, 2), opt, 1);
    for (int p : gbdt.predict(X)) CHECK(p == 2);
}

TEST_CASE("boosted regressor fits a noiseless linear target") {
    Rng rng(52);
    Matrix X(300, 2);
    std::vector<double> y(300);
    for (std::size_t i = 0; i < 300; ++i) {
        X(i, 0) = rng.uniform();
        X(i, 1) = rng.uniform();
        y[i] = 2.0 * X(i, 0) - X(i, 1);
    }
    GbdtOptions opt;
    opt.max_depth = 3;
    auto gbdt = gradient_boosted_regressor(X, y, opt, 1);
    auto pred = gbdt.predict(X);
    double mse = 0.0;
    for (std::size_t i = 0; i < 300; ++i) mse += (pred[i] - y[i]) * (pred[i] - y[i]);
    CHECK(mse / 300.0 < 0.01);
}

TEST_CASE("boosting is deterministic given the seed") {
    Rng rng(53);
    Matrix X(60, 3);
    std::vector<int> y(60);
    for (std::size_t i = 0; i < 60; ++i) {
        for (std::size_t j = 0; j < 3; ++j) X(i, j) = rng.normal();
        y[i] = X(i, 0) + X(i, 1) > 0 ? 1 : 0;
    }
    GbdtOptions opt;
    auto a = gradient_boosted_classifier(X, y, opt, 9).predict(X);
    auto b = gradient_boosted_classifier(X, y, opt, 9).predict(X);
    CHECK(a == b);
}
