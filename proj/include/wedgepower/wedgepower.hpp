#pragma once

#include "wedgepower/correlation.hpp"
#include "wedgepower/design.hpp"
#include "wedgepower/design_effects.hpp"
#include "wedgepower/distributions.hpp"
#include "wedgepower/errors.hpp"
#include "wedgepower/power.hpp"
#include "wedgepower/presets.hpp"
#include "wedgepower/simulation.hpp"
#include "wedgepower/spec_io.hpp"
