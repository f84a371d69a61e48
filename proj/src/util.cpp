#include "geoneg/util.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace geoneg {

std::string format_number_fixed9(double value) {
    if (value == 0.0) value = 0.0;  // normalize -0
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%#.9g", value);
    std::string out(buf);
    // %#g may leave a bare trailing point ("5.00000000." never happens, but
    // "100000000." can); strip it for cleanliness.
    if (!out.empty() && out.back() == '.') out.pop_back();
    return out;
}

std::string format_number_trim9(double value) {
    if (value == 0.0) value = 0.0;
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    return std::string(buf);
}

double quantize9(double value) {
    return std::strtod(format_number_fixed9(value).c_str(), nullptr);
}

std::uint64_t fnv1a64(const std::string& token) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : token) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace geoneg
