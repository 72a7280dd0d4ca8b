#include "regime/pool.hpp"

#include <stdexcept>

#include <json.hpp>

namespace regime {

namespace {

using nlohmann::json;

FamilySpec spec_from_json(const json& j) {
    if (!j.contains("family")) throw std::invalid_argument("pool config: missing 'family'");
    const std::string family = j.at("family").get<std::string>();
    FamilySpec s;
    if (family == "always_direct" || family == "fixed") {
        std::string action = j.value("action", std::string("direct"));
        s.name = action == "direct" ? "always_direct" : "always_" + action;
        s.tag = RegimeClass::Pi0;
        s.make = [action] { return std::make_unique<FixedPolicy>(action); };
    } else if (family == "fair_fixed") {
        s.name = "fair_fixed";
        s.tag = RegimeClass::Pi0;
        s.make = [] { return std::make_unique<FairFixedPolicy>(); };
    } else if (family == "kmeans") {
        auto k = j.at("k").get<std::size_t>();
        auto min_cell = j.value("min_cell", std::size_t{3});
        s.name = "kmeans_k" + std::to_string(k);
        s.tag = RegimeClass::Pi1;
        s.make = [k, min_cell] { return std::make_unique<KmeansRouterPolicy>(k, min_cell); };
    } else if (family == "cart") {
        auto d = j.at("max_depth").get<std::size_t>();
        s.name = "cart_d" + std::to_string(d);
        s.tag = RegimeClass::Pi1;
        s.make = [d] { return std::make_unique<CartRouterPolicy>(d); };
    } else if (family == "selective") {
        double c = j.value("c", 0.3);
        s.tag = RegimeClass::Pi2;
        s.make = [c] { return std::make_unique<SelectivePluginPolicy>(c); };
        s.name = s.make()->family_name();
    } else if (family == "hgbc") {
        auto d = j.at("max_depth").get<std::size_t>();
        s.name = "hgbc_md" + std::to_string(d);
        s.tag = RegimeClass::Pi2;
        s.make = [d] { return std::make_unique<HgbcPolicy>(d); };
    } else if (family == "mozannar") {
        double c = j.at("c").get<double>();
        s.tag = RegimeClass::Pi2;
        s.make = [c] { return std::make_unique<MozannarPolicy>(c); };
        s.name = s.make()->family_name();
    } else if (family == "narasimhan") {
        auto d = j.at("max_depth").get<std::size_t>();
        s.name = "narasimhan_md" + std::to_string(d);
        s.tag = RegimeClass::Pi2;
        s.make = [d] { return std::make_unique<NarasimhanPolicy>(d); };
    } else if (family == "prior_gated") {
        ThresholdGate gate;
        gate.tau = j.value("tau", 1.0);
        gate.high_action = j.value("high_action", std::string("direct"));
        gate.low_action = j.value("low_action", std::string("defer"));
        json fb = j.value("fallback", json{{"family", "selective"}});
        FamilySpec fallback = spec_from_json(fb);
        s.tag = RegimeClass::Pi3;
        s.make = [gate, fallback] {
            return std::make_unique<PriorGatedPolicy>(gate, fallback.make());
        };
        s.name = s.make()->family_name();
    } else {
        throw std::invalid_argument("pool config: unknown family '" + family + "'");
    }
    if (j.contains("class_tag")) s.tag = regime_class_from_string(j.at("class_tag"));
    return s;
}

}  // namespace

std::vector<FamilySpec> canonical_pool() {
    return pool_from_json_text(canonical_pool_json());
}

std::vector<FamilySpec> pool_from_json_text(const std::string& text) {
    json j = json::parse(text);
    if (!j.is_array()) throw std::invalid_argument("pool config: expected a JSON array");
    std::vector<FamilySpec> pool;
    for (const auto& item : j) pool.push_back(spec_from_json(item));
    if (pool.empty()) throw std::invalid_argument("pool config: empty pool");
    return pool;
}

std::string canonical_pool_json() {
    return R"([
  {"family": "always_direct"},
  {"family": "fair_fixed"},
  {"family": "kmeans", "k": 4},
  {"family": "kmeans", "k": 5},
  {"family": "kmeans", "k": 6},
  {"family": "kmeans", "k": 8},
  {"family": "hgbc", "max_depth": 3},
  {"family": "hgbc", "max_depth": 4},
  {"family": "selective", "c": 0.3}
])";
}

}  // namespace regime
