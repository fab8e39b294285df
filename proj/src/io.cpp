#include "entlink/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace entlink::io {

std::string format_sig(double value, int digits) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.*g", digits, value);
    return buffer;
}

double round_sig(double value, int digits) {
    if (!std::isfinite(value)) return value;
    const std::string text = format_sig(value, digits);
    return std::strtod(text.c_str(), nullptr);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 0xCBF29CE484222325ULL;
    for (unsigned char byte : bytes) {
        hash ^= byte;
        hash *= 0x00000100000001B3ULL;
    }
    return hash;
}

std::string hex64(std::uint64_t value) {
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx",
                  static_cast<unsigned long long>(value));
    return buffer;
}

}  // namespace entlink::io
