#pragma once

#include <string>

#include "json.hpp"

namespace teamlens {

/// Same layout as dump(2) plus a trailing newline. Floating-point values are
/// written in their shortest round-trip form.
std::string json_text(const nlohmann::ordered_json& doc);

}  // namespace teamlens
