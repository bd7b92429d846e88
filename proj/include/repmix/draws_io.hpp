#pragma once

#include <string>

#include "repmix/state.hpp"

namespace repmix {

// JSON-lines: a header line with run metadata, then one line per retained
// state (z, components, k_total, weights when present).
void save_draws_jsonl(const std::string& path, const Draws& draws);

}  // namespace repmix
