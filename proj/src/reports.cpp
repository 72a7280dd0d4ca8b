#include "regime/reports.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "regime/learners.hpp"
#include "regime/rng.hpp"

namespace regime {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

json viability_to_json(const ViabilityReport& v) {
    json j;
    j["alpha_emp"] = v.alpha_emp;
    j["alpha_min"] = std::isfinite(v.alpha_min) ? json(v.alpha_min) : json();
    j["beta"] = v.beta;
    j["q"] = v.q;
    j["delta"] = v.delta;
    j["n"] = v.n;
    j["n_min"] = v.n_min ? json(*v.n_min) : json();
    j["viable"] = v.viable;
    j["mu_w_q"] = v.mu_w_q;
    return j;
}

json diagnostics_to_json(const RegimeDiagnostics& d) {
    json j;
    j["residual"] = {{"residual_mass", d.residual.residual_mass},
                     {"sup_gap", d.residual.sup_gap},
                     {"bound", d.residual.bound}};
    j["viability"] = viability_to_json(d.viability);
    j["c_pi1"] = d.c_pi1;
    j["c_pi2"] = d.c_pi2;
    j["predicted_class"] = to_string(d.predicted_class);
    j["rationale"] = to_string(d.rationale);
    j["pi3_eligible"] = d.pi3_eligible;
    return j;
}

std::string fixed(double v, int prec = 3) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(prec) << v;
    return os.str();
}

}  // namespace

DiagnoseResult run_diagnose(const Dataset& ds, const DiagnoseOptions& opt) {
    if (ds.direct_correct.empty())
        throw std::runtime_error(
            "diagnose: direct_correct labels required (c_direct column or direct_correct "
            "column in the loss file)");
    DiagnoseResult out;
    const auto& L = ds.losses;

    ResidualReport res = residual_report(L);

    auto alpha = estimate_alpha_emp_scores(ds.features.values, ds.direct_correct, opt.folds,
                                           opt.seed);
    if (!alpha.warning.empty()) out.warnings.push_back(alpha.warning);

    std::vector<int> direct_wrong(ds.direct_correct.size());
    for (std::size_t i = 0; i < direct_wrong.size(); ++i)
        direct_wrong[i] = ds.direct_correct[i] ? 0 : 1;

    // C_Pi1 over the candidate KMeans partition family on standardized features
    double c1 = 0.0;
    {
        Standardizer st = Standardizer::fit(ds.features.values);
        Matrix Xs = st.transform(ds.features.values);
        std::vector<std::vector<int>> partitions;
        for (auto k : opt.kmeans_ks)
            if (ds.n() >= k)
                partitions.push_back(kmeans(Xs, k, mix_seed(opt.seed, 0x42, k)).assignment);
        if (!partitions.empty())
            c1 = ceiling_pi1(L, partitions, opt.folds, opt.delta);
        else
            out.warnings.push_back("no candidate partitions (n below every K); C_Pi1 = 0");
    }

    // selective constants; a degenerate subproblem puts us on the beta <= 0 path
    double c2 = 0.0;
    ViabilityReport via;
    via.q = opt.q;
    via.delta = opt.delta;
    via.n = static_cast<long long>(ds.n());
    via.alpha_emp = alpha.alpha_emp;
    try {
        SelectiveConstants constants = selective_constants(L, ds.direct_correct);
        via = make_viability_report(alpha.alpha_emp, constants.alpha_min, opt.q, opt.delta,
                                    static_cast<long long>(ds.n()),
                                    bottom_q_precision(alpha.oof_scores, direct_wrong, opt.q));
        std::vector<double> q_grid = opt.q_grid;
        if (q_grid.empty())
            for (int t = 1; t <= 20; ++t) q_grid.push_back(0.05 * t);
        // drop grid coverages that select no samples at this n
        std::erase_if(q_grid, [&](double q) {
            return std::floor(q * static_cast<double>(ds.n())) < 1.0;
        });
        Pi2Ceiling ceil2 = ceiling_pi2(constants, alpha.oof_scores, direct_wrong, q_grid);
        c2 = ceil2.proxy;  // the predicted-class rule uses the AUC-proxy form
        out.c_pi2_exact = ceil2.exact;
        out.q_star = ceil2.q_star;
    } catch (const std::domain_error& e) {
        out.warnings.push_back(std::string("selective subproblem inapplicable: ") + e.what());
        via.alpha_min = std::numeric_limits<double>::quiet_NaN();
        via.beta = -1.0;  // beta <= 0 path; n_min reported absent
        via.mu_w_q = bottom_q_precision(alpha.oof_scores, direct_wrong, opt.q);
    }

    out.diagnostics = classify_regime(res, via, c1, c2, opt.residual_threshold,
                                      !ds.prior.empty());
    return out;
}

std::string diagnostics_table(const std::string& name, long long n,
                              const DiagnoseResult& result) {
    const auto& d = result.diagnostics;
    const auto& v = d.viability;
    std::ostringstream os;
    os << std::left << std::setw(16) << "dataset" << std::setw(7) << "n" << std::setw(11)
       << "alpha_emp" << std::setw(8) << "beta" << std::setw(9) << "n*b^2" << std::setw(7)
       << "n_min" << std::setw(8) << "C_Pi1" << std::setw(8) << "C_Pi2" << "predicted\n";
    os << std::left << std::setw(16) << name << std::setw(7) << n << std::setw(11)
       << fixed(v.alpha_emp);
    if (v.beta > 0.0) {
        os << std::setw(8) << fixed(v.beta) << std::setw(9)
           << fixed(static_cast<double>(n) * v.beta * v.beta, 1) << std::setw(7)
           << (v.n_min ? std::to_string(*v.n_min) : "---");
    } else {
        os << std::setw(8) << "<=0" << std::setw(9) << "---" << std::setw(7) << "---";
    }
    os << std::setw(8) << fixed(d.c_pi1) << std::setw(8)
       << (v.beta > 0.0 ? fixed(d.c_pi2) : "---") << to_string(d.predicted_class) << " ("
       << to_string(d.rationale) << ")";
    if (d.pi3_eligible) os << " [prior channel present: Pi3 eligible]";
    os << "\n";
    return os.str();
}

std::string diagnostics_json(const std::string& name, long long n,
                             const DiagnoseResult& result) {
    json j = diagnostics_to_json(result.diagnostics);
    j["dataset"] = name;
    j["n"] = n;
    j["c_pi2_exact"] = result.c_pi2_exact;
    j["q_star"] = result.q_star;
    j["warnings"] = result.warnings;
    return j.dump(2) + "\n";
}

std::string cv_report_json(const CvReport& report) {
    json j;
    j["outer_folds"] = report.outer_folds;
    j["num_seeds"] = report.num_seeds;
    j["family_order"] = report.family_order;
    json fams = json::object();
    for (const auto& name : report.family_order) {
        const auto& out = report.per_family.at(name);
        fams[name] = {{"class", to_string(out.tag)},
                      {"mean", out.mean},
                      {"seed_sd", out.seed_sd},
                      {"class_best", out.class_best},
                      {"per_seed_mean", out.per_seed_mean}};
    }
    j["per_family"] = fams;
    j["auto_pick"] = {{"mean", report.auto_pick_mean}, {"seed_sd", report.auto_pick_sd}};
    j["pick_counts"] = report.pick_counts;
    j["selection_bound_value"] = report.selection_bound_value;
    if (report.predicted_class_from_diagnostics)
        j["predicted_class_from_diagnostics"] =
            to_string(*report.predicted_class_from_diagnostics);
    j["warnings"] = report.warnings;
    return j.dump(2) + "\n";
}

std::string cv_report_table_from_json(const std::string& json_text) {
    json j = json::parse(json_text);
    CvReport report;
    report.outer_folds = j.at("outer_folds").get<std::size_t>();
    report.num_seeds = j.at("num_seeds").get<std::size_t>();
    report.family_order = j.at("family_order").get<std::vector<std::string>>();
    for (const auto& name : report.family_order) {
        const auto& f = j.at("per_family").at(name);
        FamilyOutcome out;
        out.tag = regime_class_from_string(f.at("class").get<std::string>());
        out.mean = f.at("mean").get<double>();
        out.seed_sd = f.at("seed_sd").get<double>();
        out.class_best = f.at("class_best").get<bool>();
        out.per_seed_mean = f.at("per_seed_mean").get<std::vector<double>>();
        report.per_family[name] = out;
    }
    report.auto_pick_mean = j.at("auto_pick").at("mean").get<double>();
    report.auto_pick_sd = j.at("auto_pick").at("seed_sd").get<double>();
    return per_class_table(report);
}

std::string sweep_csv(const SweepResult& result) {
    // stable value-column order from the first cell
    std::vector<std::string> value_cols;
    if (!result.cells.empty())
        for (const auto& [k, v] : result.cells.front().values) {
            (void)v;
            value_cols.push_back(k);
        }
    std::ostringstream os;
    os << "n,knob";
    for (const auto& c : value_cols) os << "," << c;
    os << ",winner,margin\n";
    for (const auto& cell : result.cells) {
        os << cell.n << "," << format_double(cell.knob);
        for (const auto& c : value_cols) os << "," << format_double(cell.values.at(c));
        os << "," << cell.winner << "," << format_double(cell.margin) << "\n";
    }
    return os.str();
}

std::string sweep_summary_json(const SweepResult& result) {
    json j;
    j["kind"] = result.kind;
    j["cells"] = result.cells.size();
    for (const auto& [k, v] : result.summary) j[k] = v;
    return j.dump(2) + "\n";
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string manifest_json(const std::string& command, const std::string& config_json) {
    json j;
    j["command"] = command;
    j["config"] = json::parse(config_json);
    std::ostringstream hash;
    hash << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(config_json);
    j["config_hash"] = hash.str();
    j["version"] = kVersion;
    return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace regime
