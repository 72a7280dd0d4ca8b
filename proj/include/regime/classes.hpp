#pragma once
// Controller-class lattice tags shared by diagnostics, policies, and reports.

#include <stdexcept>
#include <string>

namespace regime {

enum class RegimeClass { Pi0, Pi1, Pi2, Pi3 };

inline std::string to_string(RegimeClass c) {
    switch (c) {
        case RegimeClass::Pi0: return "Pi0";
        case RegimeClass::Pi1: return "Pi1";
        case RegimeClass::Pi2: return "Pi2";
        case RegimeClass::Pi3: return "Pi3";
    }
    return "?";
}

inline RegimeClass regime_class_from_string(const std::string& s) {
    if (s == "Pi0") return RegimeClass::Pi0;
    if (s == "Pi1") return RegimeClass::Pi1;
    if (s == "Pi2") return RegimeClass::Pi2;
    if (s == "Pi3") return RegimeClass::Pi3;
    throw std::invalid_argument("unknown regime class: " + s);
}

// coarser class wins ties
inline bool coarser(RegimeClass a, RegimeClass b) {
    return static_cast<int>(a) < static_cast<int>(b);
}

}  // namespace regime
