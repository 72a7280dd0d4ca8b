#include "regime/nested_cv.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "regime/diagnostics.hpp"
#include "regime/rng.hpp"

namespace regime {

namespace {

struct Slice {
    Matrix X;
    LossMatrix L;
    std::vector<double> prior;
};

Slice materialize(const Matrix& X, const LossMatrix& L, const std::vector<double>& prior,
                  const std::vector<std::size_t>& rows, AccessProbe* probe,
                  AccessProbe::Phase phase) {
    if (probe) probe->on_rows(phase, rows);
    Slice s;
    s.X = X.gather_rows(rows);
    s.L = L.gather_rows(rows);
    if (!prior.empty()) s.prior = gather(prior, rows);
    return s;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.empty() ? 1 : v.size());
}

double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t kappa,
                                                 std::uint64_t seed) {
    if (kappa < 2) throw std::invalid_argument("make_folds: kappa >= 2");
    if (n < kappa) throw std::invalid_argument("make_folds: n >= kappa required");
    Rng rng(seed);
    auto perm = rng.permutation(n);
    std::vector<std::vector<std::size_t>> folds(kappa);
    std::size_t base = n / kappa, extra = n % kappa, pos = 0;
    for (std::size_t f = 0; f < kappa; ++f) {
        std::size_t sz = base + (f < extra ? 1 : 0);
        folds[f].assign(perm.begin() + pos, perm.begin() + pos + sz);
        pos += sz;
    }
    return folds;
}

std::size_t inner_select(const std::vector<FamilySpec>& pool, const Matrix& X,
                         const LossMatrix& L, const std::vector<double>& prior,
                         std::size_t inner_folds, std::uint64_t seed,
                         std::vector<std::string>* warnings) {
    if (pool.empty()) throw std::invalid_argument("inner_select: empty pool");
    auto folds = make_folds(X.rows, inner_folds, seed);

    std::vector<double> family_mean(pool.size(), 0.0);
    std::vector<bool> family_ok(pool.size(), true);
    for (std::size_t fam = 0; fam < pool.size(); ++fam) {
        double total = 0.0;
        for (std::size_t f = 0; f < inner_folds && family_ok[fam]; ++f) {
            std::vector<std::size_t> tr;
            for (std::size_t g = 0; g < inner_folds; ++g)
                if (g != f) tr.insert(tr.end(), folds[g].begin(), folds[g].end());
            Matrix Xtr = X.gather_rows(tr);
            LossMatrix Ltr = L.gather_rows(tr);
            Matrix Xval = X.gather_rows(folds[f]);
            LossMatrix Lval = L.gather_rows(folds[f]);
            try {
                auto policy = pool[fam].make();
                if (prior.empty()) {
                    policy->fit(Xtr, Ltr, mix_seed(seed, fam, f));
                    total += policy_risk(Lval, policy->predict(Xval));
                } else {
                    policy->fit_with_prior(Xtr, Ltr, gather(prior, tr),
                                           mix_seed(seed, fam, f));
                    total += policy_risk(
                        Lval, policy->predict_with_prior(Xval, gather(prior, folds[f])));
                }
            } catch (const std::exception& e) {
                family_ok[fam] = false;
                if (warnings)
                    warnings->push_back("inner_select: family " + pool[fam].name +
                                        " excluded: " + e.what());
            }
        }
        family_mean[fam] = family_ok[fam] ? total / static_cast<double>(inner_folds)
                                          : std::numeric_limits<double>::infinity();
    }
    std::size_t best = 0;
    for (std::size_t fam = 1; fam < pool.size(); ++fam)
        if (family_mean[fam] < family_mean[best]) best = fam;
    return best;
}

CvReport strict_nested_cv(const CvConfig& config, const Matrix& X, const LossMatrix& L,
                          const std::vector<double>& prior, AccessProbe* probe) {
    const auto pool = config.pool.empty() ? canonical_pool() : config.pool;
    if (config.outer_folds < 2) throw std::invalid_argument("strict_nested_cv: kappa >= 2");
    if (X.rows < 2 * config.outer_folds)
        throw std::invalid_argument("strict_nested_cv: n >= 2*kappa required");
    if (config.seeds.empty()) throw std::invalid_argument("strict_nested_cv: no seeds");

    // families that require a prior channel cannot run without one
    std::vector<std::size_t> usable;
    CvReport report;
    for (std::size_t fam = 0; fam < pool.size(); ++fam) {
        auto probe_policy = pool[fam].make();
        if (probe_policy->wants_prior() && prior.empty()) {
            report.warnings.push_back("family " + pool[fam].name +
                                      " skipped: no prior channel in dataset");
            continue;
        }
        usable.push_back(fam);
    }
    if (usable.empty()) throw std::invalid_argument("strict_nested_cv: no usable families");

    std::vector<FamilySpec> active;
    for (auto fam : usable) active.push_back(pool[fam]);

    report.outer_folds = config.outer_folds;
    report.num_seeds = config.seeds.size();
    report.family_order.reserve(active.size());
    for (const auto& f : active) report.family_order.push_back(f.name);

    // per family: per seed mean over folds
    std::map<std::string, std::vector<double>> per_seed;
    std::vector<double> auto_per_seed;

    for (auto seed : config.seeds) {
        auto folds = make_folds(X.rows, config.outer_folds, seed);
        std::map<std::string, double> fold_total;
        double auto_total = 0.0;

        for (std::size_t f = 0; f < config.outer_folds; ++f) {
            std::vector<std::size_t> outer_train;
            for (std::size_t g = 0; g < config.outer_folds; ++g)
                if (g != f)
                    outer_train.insert(outer_train.end(), folds[g].begin(), folds[g].end());
            const std::uint64_t cell_seed = mix_seed(seed, f);

            Slice train = materialize(X, L, prior, outer_train, probe,
                                      AccessProbe::Phase::InnerSelect);
            std::size_t winner = inner_select(active, train.X, train.L, train.prior,
                                              config.inner_folds, mix_seed(cell_seed, 0x1227),
                                              &report.warnings);
            ++report.pick_counts[active[winner].name];

            // refit every family on outer-train (the winner's refit is one of
            // these; identical seed, so the auto-pick loss is the winner's cell
            // loss and outer-test is read exactly once per family)
            Slice refit = materialize(X, L, prior, outer_train, probe,
                                      AccessProbe::Phase::Refit);
            for (std::size_t fam = 0; fam < active.size(); ++fam) {
                Slice test = materialize(X, L, prior, folds[f], probe,
                                         AccessProbe::Phase::Evaluate);
                double cell_loss = std::numeric_limits<double>::quiet_NaN();
                try {
                    auto policy = active[fam].make();
                    if (prior.empty()) {
                        policy->fit(refit.X, refit.L, mix_seed(cell_seed, fam));
                        cell_loss = policy_risk(test.L, policy->predict(test.X));
                    } else {
                        policy->fit_with_prior(refit.X, refit.L, refit.prior,
                                               mix_seed(cell_seed, fam));
                        cell_loss = policy_risk(
                            test.L, policy->predict_with_prior(test.X, test.prior));
                    }
                } catch (const std::exception& e) {
                    report.warnings.push_back("cell (seed=" + std::to_string(seed) +
                                              ", fold=" + std::to_string(f) + ") family " +
                                              active[fam].name + " failed: " + e.what());
                }
                fold_total[active[fam].name] += cell_loss;
                if (fam == winner) auto_total += cell_loss;
            }
        }
        for (const auto& fam : active)
            per_seed[fam.name].push_back(fold_total[fam.name] /
                                         static_cast<double>(config.outer_folds));
        auto_per_seed.push_back(auto_total / static_cast<double>(config.outer_folds));
    }

    for (const auto& fam : active) {
        FamilyOutcome out;
        out.tag = fam.tag;
        out.per_seed_mean = per_seed[fam.name];
        out.mean = mean_of(out.per_seed_mean);
        out.seed_sd = sample_sd(out.per_seed_mean);
        report.per_family[fam.name] = out;
    }
    report.auto_pick_mean = mean_of(auto_per_seed);
    report.auto_pick_sd = sample_sd(auto_per_seed);

    // class-best flags (ties by pool order, i.e. first minimum)
    std::map<RegimeClass, std::string> best_per_class;
    for (const auto& name : report.family_order) {
        const auto& out = report.per_family[name];
        auto it = best_per_class.find(out.tag);
        if (it == best_per_class.end() || out.mean < report.per_family[it->second].mean)
            best_per_class[out.tag] = name;
    }
    for (auto& [cls, name] : best_per_class) {
        (void)cls;
        report.per_family[name].class_best = true;
    }

    std::size_t outer_train_n = X.rows - X.rows / config.outer_folds;
    std::size_t n_in = std::max<std::size_t>(1, outer_train_n / config.inner_folds);
    report.selection_bound_value = selection_bound(active.size(), n_in, L.l_max);
    return report;
}

std::string per_class_table(const CvReport& report) {
    // best family per class
    std::vector<std::pair<RegimeClass, std::string>> rows;
    for (const auto& name : report.family_order) {
        const auto& out = report.per_family.at(name);
        if (out.class_best) rows.emplace_back(out.tag, name);
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return static_cast<int>(a.first) < static_cast<int>(b.first);
    });

    // overall winner: lowest mean, coarser class on ties (within 1e-6)
    std::string winner;
    for (const auto& [cls, name] : rows) {
        (void)cls;
        if (winner.empty()) {
            winner = name;
            continue;
        }
        const auto& cur = report.per_family.at(name);
        const auto& best = report.per_family.at(winner);
        if (cur.mean < best.mean - 1e-6) winner = name;
    }

    std::ostringstream os;
    os << std::left << std::setw(7) << "class" << std::setw(22) << "best family"
       << std::setw(22) << "loss (mean +- sd)" << std::setw(12) << "delta" << "winner\n";
    for (const auto& [cls, name] : rows) {
        const auto& out = report.per_family.at(name);
        std::ostringstream val;
        val << std::fixed << std::setprecision(4) << out.mean << " +- " << out.seed_sd;
        std::ostringstream delta;
        delta << std::showpos << std::fixed << std::setprecision(4)
              << out.mean - report.per_family.at(winner).mean;
        os << std::left << std::setw(7) << to_string(cls) << std::setw(22) << name
           << std::setw(22) << val.str() << std::setw(12) << delta.str()
           << (name == winner ? "*" : "") << "\n";
    }
    std::ostringstream ap;
    ap << std::fixed << std::setprecision(4) << report.auto_pick_mean << " +- "
       << report.auto_pick_sd;
    os << std::left << std::setw(7) << "auto" << std::setw(22) << "(inner-CV pick)"
       << std::setw(22) << ap.str() << "\n";
    return os.str();
}

}  // namespace regime
