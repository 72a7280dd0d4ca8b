#include <cmath>
#include <limits>
#include <stdexcept>

#include "regime/learners.hpp"
#include "regime/rng.hpp"

namespace regime {

namespace {

double sq_dist(const double* a, const double* b, std::size_t d) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        double diff = a[j] - b[j];
        s += diff * diff;
    }
    return s;
}

}  // namespace

std::vector<int> kmeans_assign(const Matrix& X, const Matrix& centroids) {
    std::vector<int> out(X.rows, 0);
    for (std::size_t i = 0; i < X.rows; ++i) {
        double best = std::numeric_limits<double>::infinity();
        int arg = 0;
        for (std::size_t c = 0; c < centroids.rows; ++c) {
            double d = sq_dist(X.row(i), centroids.row(c), X.cols);
            if (d < best) {
                best = d;
                arg = static_cast<int>(c);
            }
        }
        out[i] = arg;
    }
    return out;
}

KmeansResult kmeans(const Matrix& X, std::size_t k, std::uint64_t seed) {
    if (k < 1) throw std::invalid_argument("kmeans: k >= 1");
    if (X.rows < k) throw std::invalid_argument("kmeans: n < k");
    const std::size_t d = X.cols;

    // seeded greedy k-means++ init: each new centroid is the best of a few
    // D^2-sampled candidates, scored by the potential it leaves behind
    // (farthest-point seeding chases outliers and merges tight clusters on
    // anisotropic data; plain D^2 sampling still strands Lloyd's in poor
    // local optima on a single init)
    Matrix centroids(k, d);
    Rng rng(seed);
    std::size_t first = rng.index(X.rows);
    for (std::size_t j = 0; j < d; ++j) centroids(0, j) = X(first, j);
    std::vector<double> min_d(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i)
        min_d[i] = sq_dist(X.row(i), centroids.row(0), d);
    const std::size_t trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));
    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (double v : min_d) total += v;
        std::size_t best_pick = rng.index(X.rows);
        double best_potential = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < trials; ++t) {
            std::size_t cand = best_pick;
            if (total > 0.0) {
                double u = rng.uniform() * total;
                double acc = 0.0;
                for (std::size_t i = 0; i < X.rows; ++i) {
                    acc += min_d[i];
                    if (u < acc) {
                        cand = i;
                        break;
                    }
                }
            }
            double potential = 0.0;
            for (std::size_t i = 0; i < X.rows; ++i)
                potential += std::min(min_d[i], sq_dist(X.row(i), X.row(cand), d));
            if (potential < best_potential) {
                best_potential = potential;
                best_pick = cand;
            }
        }
        for (std::size_t j = 0; j < d; ++j) centroids(c, j) = X(best_pick, j);
        for (std::size_t i = 0; i < X.rows; ++i)
            min_d[i] = std::min(min_d[i], sq_dist(X.row(i), centroids.row(c), d));
    }

    std::vector<int> assignment(X.rows, 0);
    for (std::size_t iter = 0; iter < 100; ++iter) {
        assignment = kmeans_assign(X, centroids);

        Matrix sums(k, d);
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < X.rows; ++i) {
            auto c = static_cast<std::size_t>(assignment[i]);
            ++counts[c];
            for (std::size_t j = 0; j < d; ++j) sums(c, j) += X(i, j);
        }
        // re-seed any emptied cluster at the point farthest from its centroid
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            std::size_t far = 0;
            double far_d = -1.0;
            for (std::size_t i = 0; i < X.rows; ++i) {
                auto ci = static_cast<std::size_t>(assignment[i]);
                if (counts[ci] <= 1) continue;
                double dist = sq_dist(X.row(i), centroids.row(ci), d);
                if (dist > far_d) {
                    far_d = dist;
                    far = i;
                }
            }
            auto old = static_cast<std::size_t>(assignment[far]);
            --counts[old];
            for (std::size_t j = 0; j < d; ++j) sums(old, j) -= X(far, j);
            assignment[far] = static_cast<int>(c);
            counts[c] = 1;
            for (std::size_t j = 0; j < d; ++j) sums(c, j) = X(far, j);
        }

        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            double sq = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                double next = sums(c, j) / static_cast<double>(counts[c]);
                double diff = next - centroids(c, j);
                sq += diff * diff;
                centroids(c, j) = next;
            }
            shift = std::max(shift, std::sqrt(sq));
        }
        if (shift < 1e-6) break;
    }

    KmeansResult res;
    res.centroids = centroids;
    res.assignment = kmeans_assign(X, centroids);
    for (std::size_t i = 0; i < X.rows; ++i)
        res.sse += sq_dist(X.row(i), centroids.row(static_cast<std::size_t>(res.assignment[i])), d);
    return res;
}

}  // namespace regime
