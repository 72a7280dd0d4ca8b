#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "regime/learners.hpp"
#include "regime/rng.hpp"

namespace regime {

namespace {

// row-wise softmax in place, numerically stable
void softmax_rows(Matrix& Z) {
    for (std::size_t i = 0; i < Z.rows; ++i) {
        double mx = Z(i, 0);
        for (std::size_t k = 1; k < Z.cols; ++k) mx = std::max(mx, Z(i, k));
        double sum = 0.0;
        for (std::size_t k = 0; k < Z.cols; ++k) {
            Z(i, k) = std::exp(Z(i, k) - mx);
            sum += Z(i, k);
        }
        for (std::size_t k = 0; k < Z.cols; ++k) Z(i, k) /= sum;
    }
}

}  // namespace

Matrix LogisticModel::logits(const Matrix& X) const {
    const std::size_t K = classes.size();
    Matrix Z(X.rows, K);
    for (std::size_t i = 0; i < X.rows; ++i)
        for (std::size_t k = 0; k < K; ++k) {
            double z = intercept[k];
            for (std::size_t j = 0; j < X.cols; ++j) z += coef(k, j) * X(i, j);
            Z(i, k) = z;
        }
    return Z;
}

Matrix LogisticModel::predict_proba(const Matrix& X) const {
    const std::size_t K = classes.size();
    if (K == 1) return Matrix(X.rows, 1, 1.0);
    Matrix Z = logits(X);
    for (auto& v : Z.data) v /= temperature;
    softmax_rows(Z);
    return Z;
}

std::vector<int> LogisticModel::predict(const Matrix& X) const {
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

double logistic_objective(const Matrix& X, const std::vector<int>& labels_idx,
                          std::size_t num_classes, const std::vector<double>& weights,
                          double l2_c, const Matrix& coef,
                          const std::vector<double>& intercept, Matrix* grad_coef,
                          std::vector<double>* grad_intercept) {
    const std::size_t n = X.rows, d = X.cols, K = num_classes;
    if (grad_coef) *grad_coef = Matrix(K, d);
    if (grad_intercept) grad_intercept->assign(K, 0.0);

    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double w = weights.empty() ? 1.0 : weights[i];
        double mx = -std::numeric_limits<double>::infinity();
        std::vector<double> z(K);
        for (std::size_t k = 0; k < K; ++k) {
            double v = intercept[k];
            for (std::size_t j = 0; j < d; ++j) v += coef(k, j) * X(i, j);
            z[k] = v;
            mx = std::max(mx, v);
        }
        double lse = 0.0;
        for (std::size_t k = 0; k < K; ++k) lse += std::exp(z[k] - mx);
        double log_z = mx + std::log(lse);
        auto y = static_cast<std::size_t>(labels_idx[i]);
        obj += w * (log_z - z[y]);
        if (grad_coef) {
            for (std::size_t k = 0; k < K; ++k) {
                double p = std::exp(z[k] - log_z);
                double g = w * (p - (k == y ? 1.0 : 0.0));
                (*grad_intercept)[k] += g;
                for (std::size_t j = 0; j < d; ++j) (*grad_coef)(k, j) += g * X(i, j);
            }
        }
    }
    double pen = 0.0;
    for (double v : coef.data) pen += v * v;
    obj += pen / (2.0 * l2_c);
    if (grad_coef)
        for (std::size_t t = 0; t < coef.data.size(); ++t)
            grad_coef->data[t] += coef.data[t] / l2_c;
    return obj;
}

LogisticModel multinomial_logistic(const Matrix& X, const std::vector<int>& labels,
                                   double l2_c, const std::vector<double>& sample_weights,
                                   std::uint64_t seed) {
    (void)seed;  // optimization is deterministic from a zero start
    if (labels.size() != X.rows)
        throw std::invalid_argument("multinomial_logistic: label length mismatch");
    if (!sample_weights.empty() && sample_weights.size() != X.rows)
        throw std::invalid_argument("multinomial_logistic: weight length mismatch");
    if (!(l2_c > 0.0)) throw std::invalid_argument("multinomial_logistic: C must be positive");

    std::set<int> uniq(labels.begin(), labels.end());
    LogisticModel m;
    m.classes.assign(uniq.begin(), uniq.end());
    const std::size_t K = m.classes.size();
    if (K == 1) {  // degenerate: predict the single class constantly
        m.coef = Matrix(1, X.cols);
        m.intercept.assign(1, 0.0);
        return m;
    }

    std::vector<int> labels_idx(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto it = std::lower_bound(m.classes.begin(), m.classes.end(), labels[i]);
        labels_idx[i] = static_cast<int>(it - m.classes.begin());
    }

    m.coef = Matrix(K, X.cols);
    m.intercept.assign(K, 0.0);

    Matrix grad_c;
    std::vector<double> grad_b;
    double obj = logistic_objective(X, labels_idx, K, sample_weights, l2_c, m.coef,
                                    m.intercept, &grad_c, &grad_b);
    double step = 1.0;
    for (std::size_t epoch = 0; epoch < 500; ++epoch) {
        double gnorm2 = 0.0;
        for (double v : grad_c.data) gnorm2 += v * v;
        for (double v : grad_b) gnorm2 += v * v;
        if (std::sqrt(gnorm2) < 1e-6) break;

        // Armijo backtracking from twice the last accepted step
        step = std::min(step * 2.0, 1e6);
        Matrix coef_try;
        std::vector<double> icpt_try;
        double obj_try = obj;
        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt) {
            coef_try = m.coef;
            icpt_try = m.intercept;
            for (std::size_t t = 0; t < coef_try.data.size(); ++t)
                coef_try.data[t] -= step * grad_c.data[t];
            for (std::size_t k = 0; k < K; ++k) icpt_try[k] -= step * grad_b[k];
            obj_try = logistic_objective(X, labels_idx, K, sample_weights, l2_c, coef_try,
                                         icpt_try, nullptr, nullptr);
            if (obj_try <= obj - 1e-4 * step * gnorm2) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
        m.coef = std::move(coef_try);
        m.intercept = std::move(icpt_try);
        obj = logistic_objective(X, labels_idx, K, sample_weights, l2_c, m.coef,
                                 m.intercept, &grad_c, &grad_b);
    }
    return m;
}

double fit_temperature(const Matrix& logits, const std::vector<int>& labels_idx) {
    if (logits.rows != labels_idx.size())
        throw std::invalid_argument("fit_temperature: length mismatch");
    const double lo = -1.3862943611198906, hi = 1.3862943611198906;  // +- log 4

    auto nll = [&](double log_t) {
        double t = std::exp(log_t);
        double total = 0.0;
        for (std::size_t i = 0; i < logits.rows; ++i) {
            double mx = -std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < logits.cols; ++k)
                mx = std::max(mx, logits(i, k) / t);
            double lse = 0.0;
            for (std::size_t k = 0; k < logits.cols; ++k)
                lse += std::exp(logits(i, k) / t - mx);
            auto y = static_cast<std::size_t>(labels_idx[i]);
            total += (mx + std::log(lse)) - logits(i, y) / t;
        }
        return total / static_cast<double>(logits.rows);
    };

    const double phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = nll(x1), f2 = nll(x2);
    for (int it = 0; it < 60; ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = nll(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = nll(x2);
        }
    }
    return std::exp(0.5 * (a + b));
}

}  // namespace regime
