#pragma once
// The three controlled synthetic experiments: the bottom-q precision
// cross-threshold sweep, the four-cluster partition-vs-instance phase sweep,
// and the orthogonal prior-channel sweep.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "regime/loss.hpp"
#include "regime/matrix.hpp"

namespace regime {

struct BernsteinSweepSpec {
    double alpha = 0.75;
    double q = 0.3;
    double delta = 0.05;
    std::vector<long long> n_grid = {20,  30,   50,   80,   130,  200,  320,
                                     500, 800,  1300, 2000, 3200, 5000, 8000};
    std::vector<double> beta_grid = {0.05, 0.10, 0.20};
    std::size_t replications = 4000;
    std::uint64_t seed = 0;
};

// Four latent clusters in R^dim. The features are cluster centers plus
// Gaussian noise; the smooth signal s(X) is a fixed unit-norm functional
// orthogonal to the centers. Correctness follows
//   logit(c_direct = 1 | X, z) = bk * s(X) + z_strength * z + bump(g).
// Two actions: direct (loss 1 - c) and a constant-loss fallback.
// bump, fallback_loss, and the per-cluster signal-direction noise scales are
// frozen from a one-time calibration so the oracle partition gap at the
// defaults lands near 0.08.
struct ClusterDgpSpec {
    std::vector<double> cluster_masses = {0.35, 0.25, 0.20, 0.20};
    std::size_t dim = 6;
    double bk = 0.0;
    std::vector<double> bump = {1.75, 1.75, -0.8, -0.8};
    double fallback_loss = 0.27;
    std::vector<double> signal_noise_sd = {1.0, 0.7, 0.45, 0.45};
    std::size_t n = 0;
    std::uint64_t seed = 0;
    double z_strength = 0.0;  // 0 disables the prior channel
    double tau = 1.0;

    void validate() const;
};

struct ClusterSample {
    Matrix features;            // X only; z is never a feature column
    LossMatrix losses;          // actions: direct, defer
    std::vector<double> prior;  // z
    std::vector<int> true_cells;
};

ClusterSample sample_cluster_dgp(const ClusterDgpSpec& spec);

struct SweepCell {
    long long n = 0;
    double knob = 0.0;  // beta / bk / z_strength
    std::map<std::string, double> values;
    std::string winner;  // empty for the bernstein sweep
    double margin = 0.0;
};

struct SweepResult {
    std::string kind;
    std::vector<SweepCell> cells;
    std::map<std::string, double> summary;
};

// Per (n, beta): m = floor(n q) Bernoulli(alpha) draws per replication;
// sign-correct iff the empirical bottom-q precision exceeds alpha - beta.
SweepResult bernstein_sweep(const BernsteinSweepSpec& spec);

// KMeans-K=4 router vs the selective plug-in under plain strict 5-fold CV,
// winner by mean loss over seeds (ties < 1e-6 go to the coarser class).
SweepResult pi12_phase_sweep(const std::vector<long long>& n_grid,
                             const std::vector<double>& bk_grid, std::size_t seeds,
                             std::uint64_t master_seed,
                             const ClusterDgpSpec& base = ClusterDgpSpec{});

// Selective plug-in (X only) vs the prior-gated controller with the
// two-sided z gate and a logistic fallback fit on |z_train| <= tau.
SweepResult pi3_sweep(const std::vector<long long>& n_grid,
                      const std::vector<double>& z_grid, std::size_t seeds,
                      std::uint64_t master_seed,
                      const ClusterDgpSpec& base = ClusterDgpSpec{});

std::vector<long long> default_pi12_n_grid();
std::vector<double> default_pi12_bk_grid();
std::vector<long long> default_pi3_n_grid();
std::vector<double> default_pi3_z_grid();

}  // namespace regime
