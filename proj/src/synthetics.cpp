#include "regime/synthetics.hpp"

#include <cmath>
#include <stdexcept>

#include "regime/diagnostics.hpp"
#include "regime/nested_cv.hpp"
#include "regime/policies.hpp"
#include "regime/rng.hpp"

namespace regime {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

constexpr double kCenterScale = 2.8284271247461903;  // 4 / sqrt(2)
constexpr double kInvSqrt2 = 0.7071067811865476;

// plain strict k-fold CV mean loss for a set of policies on one sample
std::vector<double> cv_mean_losses(
    const ClusterSample& data, const std::vector<std::function<std::unique_ptr<Policy>()>>& arms,
    std::size_t folds, std::uint64_t seed) {
    auto fold_sets = make_folds(data.features.rows, folds, mix_seed(seed, 0xf01d));
    std::vector<double> totals(arms.size(), 0.0);
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<std::size_t> tr;
        for (std::size_t g = 0; g < folds; ++g)
            if (g != f) tr.insert(tr.end(), fold_sets[g].begin(), fold_sets[g].end());
        Matrix Xtr = data.features.gather_rows(tr);
        LossMatrix Ltr = data.losses.gather_rows(tr);
        auto ztr = gather(data.prior, tr);
        Matrix Xte = data.features.gather_rows(fold_sets[f]);
        LossMatrix Lte = data.losses.gather_rows(fold_sets[f]);
        auto zte = gather(data.prior, fold_sets[f]);
        for (std::size_t a = 0; a < arms.size(); ++a) {
            auto policy = arms[a]();
            policy->fit_with_prior(Xtr, Ltr, ztr, mix_seed(seed, a, f));
            totals[a] += policy_risk(Lte, policy->predict_with_prior(Xte, zte));
        }
    }
    for (auto& t : totals) t /= static_cast<double>(folds);
    return totals;
}

}  // namespace

void ClusterDgpSpec::validate() const {
    if (cluster_masses.size() != bump.size() ||
        cluster_masses.size() != signal_noise_sd.size())
        throw std::invalid_argument("ClusterDgpSpec: per-cluster field lengths disagree");
    double total = 0.0;
    for (double m : cluster_masses) {
        if (m <= 0.0) throw std::invalid_argument("ClusterDgpSpec: non-positive mass");
        total += m;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("ClusterDgpSpec: masses must sum to 1");
    if (dim < 1) throw std::invalid_argument("ClusterDgpSpec: dim >= 1");
    if (dim < cluster_masses.size() + 2)
        throw std::invalid_argument(
            "ClusterDgpSpec: dim must fit the cluster simplex plus the signal plane");
    if (n < 1) throw std::invalid_argument("ClusterDgpSpec: n >= 1");
    if (!(fallback_loss > 0.0 && fallback_loss < 1.0))
        throw std::invalid_argument("ClusterDgpSpec: fallback loss must be in (0,1)");
}

ClusterSample sample_cluster_dgp(const ClusterDgpSpec& spec) {
    spec.validate();
    const std::size_t G = spec.cluster_masses.size();
    const std::size_t s0 = G;      // the signal plane occupies dims G and G+1
    const std::size_t s1 = G + 1;

    std::vector<double> cum(G, 0.0);
    double acc = 0.0;
    for (std::size_t g = 0; g < G; ++g) {
        acc += spec.cluster_masses[g];
        cum[g] = acc;
    }

    Rng rng(spec.seed);
    ClusterSample out;
    out.features = Matrix(spec.n, spec.dim);
    out.prior.resize(spec.n);
    out.true_cells.resize(spec.n);
    Matrix losses(spec.n, 2);

    for (std::size_t i = 0; i < spec.n; ++i) {
        double u = rng.uniform();
        std::size_t g = 0;
        while (g + 1 < G && u >= cum[g]) ++g;
        out.true_cells[i] = static_cast<int>(g);

        for (std::size_t j = 0; j < spec.dim; ++j) {
            double sd = (j == s0 || j == s1) ? spec.signal_noise_sd[g] : 1.0;
            double center = j == g ? kCenterScale : 0.0;
            out.features(i, j) = center + sd * rng.normal();
        }
        double z = rng.normal();
        out.prior[i] = z;

        double s = kInvSqrt2 * (out.features(i, s0) + out.features(i, s1));
        double logit = spec.bk * s + spec.z_strength * z + spec.bump[g];
        int c = rng.bernoulli(sigmoid(logit)) ? 1 : 0;
        losses(i, 0) = 1.0 - static_cast<double>(c);
        losses(i, 1) = spec.fallback_loss;
    }
    out.losses = LossMatrix{std::move(losses), ActionSet::two_action(), 1.0};
    return out;
}

SweepResult bernstein_sweep(const BernsteinSweepSpec& spec) {
    if (spec.n_grid.empty() || spec.beta_grid.empty())
        throw std::invalid_argument("bernstein_sweep: empty grid");
    if (!(spec.alpha >= 0.5 && spec.alpha < 1.0))
        throw std::invalid_argument("bernstein_sweep: alpha must be in [1/2, 1)");

    SweepResult res;
    res.kind = "bernstein";
    for (std::size_t bi = 0; bi < spec.beta_grid.size(); ++bi) {
        double beta = spec.beta_grid[bi];
        double alpha_min = spec.alpha - beta;
        long long marker = bernstein_n_min(spec.alpha, beta, spec.q, spec.delta);
        res.summary["n_min_beta_" + std::to_string(bi)] = static_cast<double>(marker);

        for (std::size_t ni = 0; ni < spec.n_grid.size(); ++ni) {
            long long n = spec.n_grid[ni];
            auto m = static_cast<std::size_t>(
                std::floor(static_cast<double>(n) * spec.q));
            if (m < 1)
                throw std::invalid_argument("bernstein_sweep: floor(n q) = 0 at n = " +
                                            std::to_string(n));
            Rng rng(mix_seed(spec.seed, bi, ni));
            std::size_t correct = 0;
            for (std::size_t rep = 0; rep < spec.replications; ++rep) {
                std::size_t wrong = 0;
                for (std::size_t t = 0; t < m; ++t) wrong += rng.bernoulli(spec.alpha);
                double mu_hat = static_cast<double>(wrong) / static_cast<double>(m);
                // Delta_hat(q) = -q (L_w - L_r)(mu_hat - alpha_min); sign-correct
                // iff Delta_hat < 0, i.e. mu_hat > alpha_min
                correct += mu_hat > alpha_min;
            }
            SweepCell cell;
            cell.n = n;
            cell.knob = beta;
            cell.values["rate"] =
                static_cast<double>(correct) / static_cast<double>(spec.replications);
            cell.values["n_min"] = static_cast<double>(marker);
            res.cells.push_back(std::move(cell));
        }
    }
    return res;
}

SweepResult pi12_phase_sweep(const std::vector<long long>& n_grid,
                             const std::vector<double>& bk_grid, std::size_t seeds,
                             std::uint64_t master_seed, const ClusterDgpSpec& base) {
    if (n_grid.empty() || bk_grid.empty())
        throw std::invalid_argument("pi12_phase_sweep: empty grid");
    SweepResult res;
    res.kind = "pi12";
    std::vector<std::function<std::unique_ptr<Policy>()>> arms = {
        [] { return std::make_unique<KmeansRouterPolicy>(4); },
        [] { return std::make_unique<SelectivePluginPolicy>(0.3); },
    };
    for (std::size_t ki = 0; ki < bk_grid.size(); ++ki) {
        for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
            double pi1 = 0.0, pi2 = 0.0;
            for (std::size_t s = 0; s < seeds; ++s) {
                ClusterDgpSpec spec = base;
                spec.bk = bk_grid[ki];
                spec.z_strength = 0.0;
                spec.n = static_cast<std::size_t>(n_grid[ni]);
                spec.seed = mix_seed(master_seed, ki * 1000 + ni, s);
                auto data = sample_cluster_dgp(spec);
                auto losses = cv_mean_losses(data, arms, 5, mix_seed(spec.seed, 0xcf));
                pi1 += losses[0];
                pi2 += losses[1];
            }
            pi1 /= static_cast<double>(seeds);
            pi2 /= static_cast<double>(seeds);
            SweepCell cell;
            cell.n = n_grid[ni];
            cell.knob = bk_grid[ki];
            cell.values["pi1_loss"] = pi1;
            cell.values["pi2_loss"] = pi2;
            cell.winner = pi1 <= pi2 + 1e-6 ? "Pi1" : "Pi2";  // coarser wins ties
            cell.margin = std::abs(pi1 - pi2);
            res.cells.push_back(std::move(cell));
        }
    }
    std::size_t pi2_high = 0, high_total = 0, pi1_low = 0, low_total = 0;
    for (const auto& c : res.cells) {
        if (c.knob >= 1.0) {
            ++high_total;
            pi2_high += c.winner == "Pi2";
        } else {
            ++low_total;
            pi1_low += c.winner == "Pi1";
        }
    }
    res.summary["pi2_wins_bk_ge_1"] = static_cast<double>(pi2_high);
    res.summary["cells_bk_ge_1"] = static_cast<double>(high_total);
    res.summary["pi1_wins_bk_lt_1"] = static_cast<double>(pi1_low);
    res.summary["cells_bk_lt_1"] = static_cast<double>(low_total);
    return res;
}

SweepResult pi3_sweep(const std::vector<long long>& n_grid, const std::vector<double>& z_grid,
                      std::size_t seeds, std::uint64_t master_seed,
                      const ClusterDgpSpec& base) {
    if (n_grid.empty() || z_grid.empty())
        throw std::invalid_argument("pi3_sweep: empty grid");
    SweepResult res;
    res.kind = "pi3";
    std::vector<std::function<std::unique_ptr<Policy>()>> arms = {
        [] { return std::make_unique<SelectivePluginPolicy>(0.3); },
        [] {
            return std::make_unique<PriorGatedPolicy>(
                ThresholdGate{1.0, "direct", "defer"},
                std::make_unique<SelectivePluginPolicy>(0.3));
        },
    };
    for (std::size_t zi = 0; zi < z_grid.size(); ++zi) {
        for (std::size_t ni = 0; ni < n_grid.size(); ++ni) {
            double pi2 = 0.0, pi3 = 0.0;
            for (std::size_t s = 0; s < seeds; ++s) {
                ClusterDgpSpec spec = base;
                spec.bk = 1.6;
                spec.bump = {0.3, 0.3, 0.3, -0.3};
                spec.tau = 1.0;
                spec.z_strength = z_grid[zi];
                spec.n = static_cast<std::size_t>(n_grid[ni]);
                spec.seed = mix_seed(master_seed, 0x9000 + zi * 100 + ni, s);
                auto data = sample_cluster_dgp(spec);
                auto losses = cv_mean_losses(data, arms, 5, mix_seed(spec.seed, 0xcf));
                pi2 += losses[0];
                pi3 += losses[1];
            }
            pi2 /= static_cast<double>(seeds);
            pi3 /= static_cast<double>(seeds);
            SweepCell cell;
            cell.n = n_grid[ni];
            cell.knob = z_grid[zi];
            cell.values["pi2_loss"] = pi2;
            cell.values["pi3_loss"] = pi3;
            cell.winner = pi2 <= pi3 + 1e-6 ? "Pi2" : "Pi3";
            cell.margin = std::abs(pi2 - pi3);
            res.cells.push_back(std::move(cell));
        }
    }

    // loss-curve crossing at the largest n (linear interpolation in z)
    long long n_big = *std::max_element(n_grid.begin(), n_grid.end());
    std::vector<std::pair<double, double>> curve;  // (z, pi2 - pi3)
    for (const auto& c : res.cells)
        if (c.n == n_big)
            curve.emplace_back(c.knob, c.values.at("pi2_loss") - c.values.at("pi3_loss"));
    std::sort(curve.begin(), curve.end());
    for (std::size_t t = 0; t + 1 < curve.size(); ++t) {
        if (curve[t].second < 0.0 && curve[t + 1].second >= 0.0) {
            double z0 = curve[t].first, z1 = curve[t + 1].first;
            double d0 = curve[t].second, d1 = curve[t + 1].second;
            res.summary["crossing_z"] = z0 + (z1 - z0) * (-d0) / (d1 - d0);
            break;
        }
    }
    return res;
}

std::vector<long long> default_pi12_n_grid() { return {150, 300, 600, 1200, 2400, 4800}; }
std::vector<double> default_pi12_bk_grid() { return {0.0, 0.5, 1.0, 1.6, 2.4, 3.5}; }
std::vector<long long> default_pi3_n_grid() { return {300, 600, 1200, 2400, 4800}; }
std::vector<double> default_pi3_z_grid() { return {0.0, 0.5, 1.0, 1.5, 2.5, 4.0}; }

}  // namespace regime
