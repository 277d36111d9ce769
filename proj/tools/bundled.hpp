#pragma once

#include <string_view>
#include <utility>
#include <vector>

namespace scorelab::bundled {

struct BundledScenario {
    std::string_view name;
    std::string_view json;
};

/// Scenario files compiled into the binary, in name order.
inline const std::vector<BundledScenario>& scenarios() {
    static const std::vector<BundledScenario> all{
#include "bundled_scenarios.inc"
    };
    return all;
}

}  // namespace scorelab::bundled
