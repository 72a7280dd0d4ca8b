#pragma once
// Controller family pool: named factories grouped by lattice class.
// Defaults reproduce the canonical pool (always_direct, fair_fixed,
// KMeans K in {4,5,6,8}, HGBC md in {3,4}, Selective C=0.3); the optional
// CART / Mozannar / Narasimhan / prior-gated families are available through
// the config file.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "regime/policies.hpp"

namespace regime {

struct FamilySpec {
    std::string name;
    RegimeClass tag = RegimeClass::Pi0;
    std::function<std::unique_ptr<Policy>()> make;
};

std::vector<FamilySpec> canonical_pool();

// parse a JSON array of {"family": ..., hyperparameters...}
std::vector<FamilySpec> pool_from_json_text(const std::string& text);

// the canonical pool as a JSON config string (for --pool-config round-trips)
std::string canonical_pool_json();

}  // namespace regime
