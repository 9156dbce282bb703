#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wedgepower/correlation.hpp"
#include "wedgepower/design.hpp"
#include "wedgepower/power.hpp"

namespace wedgepower {

/// A complete worked configuration: design, correlation and analysis choices.
struct Scenario {
  std::string name;
  std::string description;
  DesignSpec design;
  CorrelationParams correlation;
  std::optional<DdfPolicy> ddf_policy;
};

/// example1 ... example7 plus the documented variants
/// (example2-8x6, example2-n51, example3-n124).
const std::vector<Scenario>& presets();
std::optional<Scenario> find_preset(std::string_view name);

/// Copy of `scenario` with every hypothesized mean set equal.
Scenario with_null_means(Scenario scenario);

}  // namespace wedgepower
