#pragma once

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "packlab/error.hpp"

// Small helpers shared by the plain-text file formats.
namespace packlab::text {

// Shortest-stable round-trip formatting: 17 significant digits.
inline std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Fixed precision for human-facing reports.
inline std::string fixed(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

inline std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::istringstream in{std::string(line)};
    std::string tok;
    while (in >> tok) {
        out.push_back(tok);
    }
    return out;
}

inline double to_double(const std::string& s, const std::string& what) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE) {
        fail(ErrorKind::parse, "expected a number for " + what + ", got '" + s + "'");
    }
    return v;
}

inline long long to_int(const std::string& s, const std::string& what) {
    errno = 0;
    char* end = nullptr;
    const long long v = std::strtoll(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE) {
        fail(ErrorKind::parse, "expected an integer for " + what + ", got '" + s + "'");
    }
    return v;
}

// Next line that is neither empty nor a '#' comment, split into tokens.
inline std::vector<std::string> next_record(std::istream& in, const std::string& what) {
    std::string line;
    while (std::getline(in, line)) {
        const auto pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos || line[pos] == '#') {
            continue;
        }
        return split(line);
    }
    fail(ErrorKind::parse, "unexpected end of input while reading " + what);
}

inline void expect_keyword(const std::vector<std::string>& rec, const std::string& keyword, std::size_t min_tokens) {
    if (rec.empty() || rec[0] != keyword || rec.size() < min_tokens) {
        fail(ErrorKind::parse, "expected '" + keyword + "' record");
    }
}

}  // namespace packlab::text
