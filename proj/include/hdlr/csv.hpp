#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hdlr {

// Minimal comma-separated table; fields are taken verbatim (no quoting).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
};

// Throws IoError with a 1-based line number on ragged rows or empty input.
CsvTable read_csv(std::istream& is);

}  // namespace hdlr
