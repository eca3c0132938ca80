#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hurricast {

/// Input data is malformed or fails validation (CLI exit code 2).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Text could not be parsed; carries line (1-based) and column context.
struct ParseError : DataError {
    ParseError(const std::string& msg, std::size_t line, std::size_t column = 0)
        : DataError(format(msg, line, column)), line(line), column(column) {}

    std::size_t line;
    std::size_t column;

  private:
    static std::string format(const std::string& msg, std::size_t line, std::size_t column) {
        std::ostringstream os;
        os << "line " << line;
        if (column > 0) os << ", column " << column;
        os << ": " << msg;
        return os.str();
    }
};

/// Numerical failure such as optimizer divergence or non-finite loss
/// (CLI exit code 3).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

} // namespace detail

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open output file: " + path);
    return out;
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open input file: " + path);
    return in;
}

} // namespace hurricast
