#include "otrank/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace otrank::csv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

// strtod is locale dependent; reject anything but plain '.' decimals up front.
bool parse_number(std::string_view field, double& value) {
    if (field.empty()) return false;
    for (char c : field) {
        const bool ok = (c >= '0' && c <= '9') || c == '.' || c == '-' || c == '+' || c == 'e' || c == 'E';
        if (!ok) return false;
    }
    const std::string s(field);
    char* end = nullptr;
    errno = 0;
    value = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && errno != ERANGE && std::isfinite(value);
}

}  // namespace

CsvError::CsvError(const std::string& source, int line, const std::string& reason)
    : std::invalid_argument(source + ":" + std::to_string(line) + ": " + reason), line_(line) {}

Table parse(std::string_view text, const std::string& source) {
    Table table;
    std::vector<double> values;
    std::size_t cols = 0;
    Eigen::Index rows = 0;
    bool first = true;
    int line_no = 0;
    std::size_t start = 0;
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") start = 3;
    while (start <= text.size()) {
        const std::size_t nl = text.find('\n', start);
        const std::string_view raw = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
        ++line_no;
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        const std::string_view line = trim(raw);
        if (line.empty()) continue;
        const auto fields = split(line);
        std::vector<double> row(fields.size());
        bool numeric = true;
        std::size_t bad = 0;
        for (std::size_t k = 0; k < fields.size(); ++k) {
            if (!parse_number(fields[k], row[k])) {
                numeric = false;
                bad = k;
                break;
            }
        }
        if (first) {
            first = false;
            if (!numeric) {
                for (auto f : fields) table.header.emplace_back(f);
                cols = fields.size();
                continue;
            }
        }
        if (!numeric) {
            throw CsvError(source, line_no, "field " + std::to_string(bad + 1) + " is not a finite number: '" +
                                                std::string(fields[bad]) + "'");
        }
        if (cols == 0) cols = fields.size();
        if (fields.size() != cols) {
            throw CsvError(source, line_no, "expected " + std::to_string(cols) + " fields, found " +
                                                std::to_string(fields.size()));
        }
        values.insert(values.end(), row.begin(), row.end());
        ++rows;
    }
    if (rows == 0) throw CsvError(source, line_no, "no data rows");
    table.data.resize(rows, static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < rows; ++i)
        for (std::size_t k = 0; k < cols; ++k) table.data(i, static_cast<Eigen::Index>(k)) = values[i * cols + k];
    return table;
}

Table read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError(path.string(), 0, "cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
}

std::string write(const SampleMatrix& data, const std::vector<std::string>& header) {
    std::string out;
    for (std::size_t k = 0; k < header.size(); ++k) {
        if (k > 0) out += ',';
        out += header[k];
    }
    if (!header.empty()) out += '\n';
    char buf[32];
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        for (Eigen::Index k = 0; k < data.cols(); ++k) {
            if (k > 0) out += ',';
            std::snprintf(buf, sizeof buf, "%.17g", data(i, k));
            out += buf;
        }
        out += '\n';
    }
    return out;
}

}  // namespace otrank::csv
