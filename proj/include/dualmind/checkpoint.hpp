#pragma once

#include <string>

#include "dualmind/arbiter.hpp"

namespace dualmind {

/// Versioned JSON checkpoint holding the dims, roster order and every
/// parameter group. Doubles are stored as hexfloat strings, so a round trip
/// is bit-exact. IoError on filesystem failures, ValidationError on a
/// malformed or wrong-version file.
void save_checkpoint(const ModelState& state, const std::string& path);
ModelState load_checkpoint(const std::string& path);

std::string double_to_hex(double v);
double hex_to_double(const std::string& s);

}  // namespace dualmind
