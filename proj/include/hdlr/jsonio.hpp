#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include <nlohmann/json.hpp>

namespace hdlr {

// JSON-safe number at 12 significant digits. NaN/Inf are not valid JSON
// literals; they serialize as a string plus an error flag.
inline nlohmann::json json_number(double v) {
    if (std::isfinite(v)) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.12g", v);
        return nlohmann::json(std::strtod(buf, nullptr));
    }
    nlohmann::json j;
    j["value"] = std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    j["error"] = true;
    return j;
}

}  // namespace hdlr
