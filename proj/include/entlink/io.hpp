#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace entlink::io {

// Render a double with the given number of significant digits (%g style).
std::string format_sig(double value, int digits = 12);

// Round a double to the given number of significant decimal digits.
double round_sig(double value, int digits = 12);

// FNV-1a over a byte string; used to fingerprint resolved configurations.
std::uint64_t fnv1a64(std::string_view bytes);

std::string hex64(std::uint64_t value);

}  // namespace entlink::io
