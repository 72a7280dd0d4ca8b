#pragma once
// Dataset ingestion and CSV schemas.
//
// Feature CSV: header row of column names, one numeric row per sample.
// Loss CSV: columns loss_<action> (file order fixes the action order) plus
// an optional direct_correct column.
// Component CSV: columns c_<action>, h_<action>, k_<action> per action;
// direct_correct is derived from c_direct.
// Prior CSV: single column z.

#include <optional>
#include <string>
#include <vector>

#include "regime/loss.hpp"
#include "regime/matrix.hpp"

namespace regime {

struct Dataset {
    std::string name;
    FeatureMatrix features;
    LossMatrix losses;
    std::vector<int> direct_correct;  // empty when unavailable
    std::vector<double> prior;        // empty when absent

    std::size_t n() const { return losses.n(); }
    void validate() const;
};

struct DatasetPaths {
    std::string features;
    std::string losses;      // either losses or components
    std::string components;
    std::string prior;
    Weights weights;         // used with components
    std::string name = "dataset";
};

Dataset load_dataset(const DatasetPaths& paths);

FeatureMatrix load_features_csv(const std::string& path);
// returns the loss matrix and, when the file carries it, direct_correct
std::pair<LossMatrix, std::vector<int>> load_losses_csv(const std::string& path);
std::pair<LossComponents, ActionSet> load_components_csv(const std::string& path);
std::vector<double> load_prior_csv(const std::string& path);

void save_features_csv(const std::string& path, const FeatureMatrix& fm);
void save_losses_csv(const std::string& path, const LossMatrix& L,
                     const std::vector<int>& direct_correct = {});
void save_prior_csv(const std::string& path, const std::vector<double>& z);

// shortest round-trip decimal representation
std::string format_double(double v);

}  // namespace regime
