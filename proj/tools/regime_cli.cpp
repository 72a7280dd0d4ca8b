// Command-line entry points: diagnose, cv, synth {bernstein|pi12|pi3}, report.
// Every run writes a manifest (config hash, seeds, version) next to its
// outputs; identical configs produce byte-identical files.

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "regime/dataset.hpp"
#include "regime/pool.hpp"
#include "regime/reports.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct DatasetFlags {
    std::string features, losses, components, prior, name = "dataset";
    std::string weights = "1,1,0.05";
};

void add_dataset_flags(CLI::App* cmd, DatasetFlags& flags) {
    cmd->add_option("--features", flags.features, "feature CSV")->required();
    cmd->add_option("--losses", flags.losses, "loss CSV (loss_<action> columns)");
    cmd->add_option("--components", flags.components,
                    "loss-component CSV (c_/h_/k_<action> columns)");
    cmd->add_option("--prior", flags.prior, "prior-channel CSV (single z column)");
    cmd->add_option("--weights", flags.weights, "w_c,w_h,w_k for --components");
    cmd->add_option("--name", flags.name, "dataset name used in reports");
}

regime::Weights parse_weights(const std::string& s) {
    regime::Weights w;
    std::istringstream is(s);
    char c1 = 0, c2 = 0;
    if (!(is >> w.w_c >> c1 >> w.w_h >> c2 >> w.w_k) || c1 != ',' || c2 != ',')
        throw std::invalid_argument("--weights expects w_c,w_h,w_k");
    w.validate();
    return w;
}

regime::Dataset load_from_flags(const DatasetFlags& flags) {
    regime::DatasetPaths paths;
    paths.features = flags.features;
    paths.losses = flags.losses;
    paths.components = flags.components;
    paths.prior = flags.prior;
    paths.weights = parse_weights(flags.weights);
    paths.name = flags.name;
    return regime::load_dataset(paths);
}

template <typename T>
std::vector<T> parse_list(const std::string& s) {
    std::vector<T> out;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, ',')) {
        if (item.empty()) continue;
        std::istringstream cell(item);
        T v;
        if (!(cell >> v)) throw std::invalid_argument("bad list item '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("empty list '" + s + "'");
    return out;
}

void write_outputs(const std::string& out_dir, const std::string& command,
                   const json& config,
                   const std::vector<std::pair<std::string, std::string>>& files) {
    fs::create_directories(out_dir);
    for (const auto& [name, content] : files)
        regime::write_text_file((fs::path(out_dir) / name).string(), content);
    regime::write_text_file((fs::path(out_dir) / "manifest.json").string(),
                            regime::manifest_json(command, config.dump()));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"regime diagnostics, strict nested CV, and synthetic sweeps"};
    app.require_subcommand(1);

    // diagnose
    auto* diag = app.add_subcommand("diagnose", "compute regime diagnostics for a dataset");
    DatasetFlags diag_data;
    add_dataset_flags(diag, diag_data);
    regime::DiagnoseOptions diag_opt;
    std::string diag_out = "out";
    diag->add_option("--q", diag_opt.q, "operating coverage");
    diag->add_option("--delta", diag_opt.delta, "confidence level");
    diag->add_option("--folds", diag_opt.folds, "alpha_emp CV folds");
    diag->add_option("--seed", diag_opt.seed, "master seed");
    diag->add_option("--residual-threshold", diag_opt.residual_threshold,
                     "P(R) threshold for the residual-bounded call");
    std::string diag_q_grid;
    diag->add_option("--q-robustness", diag_q_grid,
                     "comma-separated q grid; re-runs the classification per q");
    diag->add_option("--out-dir", diag_out, "output directory");

    // cv
    auto* cv = app.add_subcommand("cv", "strict nested cross-validation over the family pool");
    DatasetFlags cv_data;
    add_dataset_flags(cv, cv_data);
    regime::CvConfig cv_cfg;
    std::string cv_out_dir = "out", cv_report_path, cv_pool_path, cv_seeds = "0,1,2,3,4";
    cv->add_option("--pool-config", cv_pool_path, "family pool JSON");
    cv->add_option("--outer-folds", cv_cfg.outer_folds, "outer folds");
    cv->add_option("--inner-folds", cv_cfg.inner_folds, "inner folds");
    cv->add_option("--seeds", cv_seeds, "comma-separated seed list");
    cv->add_option("--out", cv_report_path, "report JSON path");
    cv->add_option("--out-dir", cv_out_dir, "output directory");

    // synth
    auto* synth = app.add_subcommand("synth", "run a synthetic sweep");
    std::string synth_kind, synth_out_dir = "out";
    std::uint64_t synth_seed = 0;
    std::size_t synth_seeds_per_cell = 3, synth_reps = 4000;
    std::string synth_n_grid, synth_knob_grid;
    synth->add_option("kind", synth_kind, "bernstein | pi12 | pi3")->required();
    synth->add_option("--seed", synth_seed, "master seed");
    synth->add_option("--seeds-per-cell", synth_seeds_per_cell, "seeds per cell (pi12/pi3)");
    synth->add_option("--replications", synth_reps, "replications per cell (bernstein)");
    synth->add_option("--n-grid", synth_n_grid, "comma-separated n grid override");
    synth->add_option("--knob-grid", synth_knob_grid,
                      "comma-separated beta/bk/z grid override");
    synth->add_option("--out-dir", synth_out_dir, "output directory");

    // report
    auto* rep = app.add_subcommand("report", "re-render a stored CV report JSON");
    std::string rep_in;
    rep->add_option("--in", rep_in, "report JSON path")->required();

    try {
        app.parse(argc, argv);

        if (*diag) {
            auto ds = load_from_flags(diag_data);
            auto result = regime::run_diagnose(ds, diag_opt);
            auto n = static_cast<long long>(ds.n());
            std::string table = regime::diagnostics_table(ds.name, n, result);
            std::cout << table;
            if (!diag_q_grid.empty()) {
                for (double q : parse_list<double>(diag_q_grid)) {
                    auto opt_q = diag_opt;
                    opt_q.q = q;
                    auto at_q = regime::run_diagnose(ds, opt_q);
                    std::cout << "q = " << q << " -> predicted "
                              << regime::to_string(at_q.diagnostics.predicted_class) << "\n";
                }
            }
            json cfg = {{"dataset", diag_data.name}, {"q", diag_opt.q},
                        {"delta", diag_opt.delta},   {"folds", diag_opt.folds},
                        {"seed", diag_opt.seed},
                        {"residual_threshold", diag_opt.residual_threshold}};
            write_outputs(diag_out, "diagnose", cfg,
                          {{"diagnostics.json", regime::diagnostics_json(ds.name, n, result)},
                           {"diagnostics.txt", table}});
        } else if (*cv) {
            auto ds = load_from_flags(cv_data);
            cv_cfg.seeds = parse_list<std::uint64_t>(cv_seeds);
            if (!cv_pool_path.empty())
                cv_cfg.pool =
                    regime::pool_from_json_text(regime::read_text_file(cv_pool_path));
            auto report = regime::strict_nested_cv(cv_cfg, ds.features.values, ds.losses,
                                                   ds.prior);
            if (!ds.direct_correct.empty()) {
                try {
                    auto diag_result = regime::run_diagnose(ds, regime::DiagnoseOptions{});
                    report.predicted_class_from_diagnostics =
                        diag_result.diagnostics.predicted_class;
                } catch (const std::exception& e) {
                    report.warnings.push_back(std::string("diagnostics unavailable: ") +
                                              e.what());
                }
            }
            std::string table = regime::per_class_table(report);
            std::cout << table;
            std::string report_json = regime::cv_report_json(report);
            json cfg = {{"dataset", cv_data.name},
                        {"outer_folds", cv_cfg.outer_folds},
                        {"inner_folds", cv_cfg.inner_folds},
                        {"seeds", cv_cfg.seeds},
                        {"pool", cv_pool_path.empty() ? "canonical" : cv_pool_path}};
            write_outputs(cv_out_dir, "cv", cfg,
                          {{"cv_report.json", report_json}, {"cv_table.txt", table}});
            if (!cv_report_path.empty())
                regime::write_text_file(cv_report_path, report_json);
        } else if (*synth) {
            regime::SweepResult result;
            json cfg = {{"kind", synth_kind}, {"seed", synth_seed}};
            if (synth_kind == "bernstein") {
                regime::BernsteinSweepSpec spec;
                spec.seed = synth_seed;
                spec.replications = synth_reps;
                if (!synth_n_grid.empty()) spec.n_grid = parse_list<long long>(synth_n_grid);
                if (!synth_knob_grid.empty())
                    spec.beta_grid = parse_list<double>(synth_knob_grid);
                cfg["replications"] = spec.replications;
                result = regime::bernstein_sweep(spec);
            } else if (synth_kind == "pi12") {
                auto n_grid = synth_n_grid.empty() ? regime::default_pi12_n_grid()
                                                   : parse_list<long long>(synth_n_grid);
                auto bk_grid = synth_knob_grid.empty() ? regime::default_pi12_bk_grid()
                                                       : parse_list<double>(synth_knob_grid);
                cfg["seeds_per_cell"] = synth_seeds_per_cell;
                result = regime::pi12_phase_sweep(n_grid, bk_grid, synth_seeds_per_cell,
                                                  synth_seed);
            } else if (synth_kind == "pi3") {
                auto n_grid = synth_n_grid.empty() ? regime::default_pi3_n_grid()
                                                   : parse_list<long long>(synth_n_grid);
                auto z_grid = synth_knob_grid.empty() ? regime::default_pi3_z_grid()
                                                      : parse_list<double>(synth_knob_grid);
                cfg["seeds_per_cell"] = synth_seeds_per_cell;
                result = regime::pi3_sweep(n_grid, z_grid, synth_seeds_per_cell, synth_seed);
            } else {
                throw std::invalid_argument("unknown synth kind '" + synth_kind + "'");
            }
            write_outputs(synth_out_dir, "synth " + synth_kind, cfg,
                          {{"sweep_" + synth_kind + ".csv", regime::sweep_csv(result)},
                           {"summary_" + synth_kind + ".json",
                            regime::sweep_summary_json(result)}});
            std::cout << regime::sweep_summary_json(result);
        } else if (*rep) {
            std::cout << regime::cv_report_table_from_json(regime::read_text_file(rep_in));
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
