#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace mrfgraft {

// Every real number written to an output file goes through these so that
// reruns produce identical bytes.
inline constexpr int kOutputDigits = 12;

inline std::string format_real(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*g", kOutputDigits, value);
    return buf;
}

// Value rounded to kOutputDigits significant digits, for JSON documents.
inline double round_output(double value) {
    if (!std::isfinite(value)) return value;
    return std::stod(format_real(value));
}

}  // namespace mrfgraft
