#pragma once
// Orchestration and report emission: the diagnose pipeline, JSON rendering
// of diagnostics / CV reports / sweep results, the sweep CSV schema, and the
// per-run reproducibility manifest.

#include <cstdint>
#include <string>
#include <vector>

#include "regime/dataset.hpp"
#include "regime/diagnostics.hpp"
#include "regime/nested_cv.hpp"
#include "regime/synthetics.hpp"

namespace regime {

struct DiagnoseOptions {
    double q = 0.3;
    double delta = 0.05;
    std::size_t folds = 5;
    std::uint64_t seed = 0;
    double residual_threshold = 0.02;
    std::vector<std::size_t> kmeans_ks = {4, 5, 6, 8};  // candidate partition family
    std::vector<double> q_grid;                         // empty -> 0.05 .. 1.00
};

struct DiagnoseResult {
    RegimeDiagnostics diagnostics;
    double c_pi2_exact = 0.0;
    double q_star = 0.0;
    std::vector<std::string> warnings;
};

DiagnoseResult run_diagnose(const Dataset& ds, const DiagnoseOptions& opt);

// text table mirroring the diagnostics columns
// (n, alpha_emp, beta, n beta^2, n_min, C_Pi1, C_Pi2, predicted class)
std::string diagnostics_table(const std::string& name, long long n,
                              const DiagnoseResult& result);

std::string diagnostics_json(const std::string& name, long long n,
                             const DiagnoseResult& result);

std::string cv_report_json(const CvReport& report);
// re-render the text per-class table from a stored report JSON
std::string cv_report_table_from_json(const std::string& json_text);

std::string sweep_csv(const SweepResult& result);
std::string sweep_summary_json(const SweepResult& result);

// reproducibility manifest: command, canonical config, FNV-1a config hash
std::string manifest_json(const std::string& command, const std::string& config_json);

std::uint64_t fnv1a64(const std::string& text);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace regime
