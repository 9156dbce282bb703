#pragma once

#include <string>
#include <string_view>

#include "wedgepower/presets.hpp"

namespace wedgepower {

/// Decodes a JSON spec document with sections `design`, `correlation` and
/// `analysis`. Throws ValidationError with field paths on any problem.
Scenario decode_spec_document(std::string_view json_text);
Scenario load_spec_file(const std::string& path);

std::string encode_spec_document(const Scenario& scenario);

}  // namespace wedgepower
