#pragma once

// Numeric CSV samples: rows are observations, columns are coordinates.

#include "otrank/types.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace otrank::csv {

// Parse failure; what() carries "<source>:<line>: <reason>".
class CsvError : public std::invalid_argument {
public:
    CsvError(const std::string& source, int line, const std::string& reason);
    [[nodiscard]] int line() const { return line_; }

private:
    int line_;
};

struct Table {
    std::vector<std::string> header;  // empty when the file has none
    SampleMatrix data;
};

/// A first row with any non-numeric field is taken as a header. Blank lines
/// are skipped; every data row must have the same number of fields and
/// parse completely as finite doubles ('.' decimal separator).
Table parse(std::string_view text, const std::string& source = "<input>");
Table read_file(const std::filesystem::path& path);

// %.17g rows, optional header.
std::string write(const SampleMatrix& data, const std::vector<std::string>& header = {});

}  // namespace otrank::csv
