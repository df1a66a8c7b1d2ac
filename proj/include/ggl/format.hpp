#pragma once

#include <string>

namespace ggl {

// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

}  // namespace ggl
