#pragma once

#include <cstdio>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmarl::textio {

/// Shortest representation that round-trips a double exactly.
inline std::string fmt(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

inline double parse_double(const std::string& text) {
    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error("not a number: '" + text + "'");
    }
    if (pos != text.size()) throw std::runtime_error("trailing junk in number: '" + text + "'");
    return value;
}

inline long long parse_int(const std::string& text) {
    std::size_t pos = 0;
    long long value = 0;
    try {
        value = std::stoll(text, &pos);
    } catch (const std::exception&) {
        throw std::runtime_error("not an integer: '" + text + "'");
    }
    if (pos != text.size()) throw std::runtime_error("trailing junk in integer: '" + text + "'");
    return value;
}

/// Reads one whitespace-delimited token, failing loudly at end of stream.
inline std::string read_token(std::istream& in, const char* what) {
    std::string token;
    if (!(in >> token))
        throw std::runtime_error(std::string("unexpected end of input, wanted ") + what);
    return token;
}

/// Reads a token and checks it equals the expected keyword.
inline void expect_token(std::istream& in, const std::string& expected) {
    const std::string token = read_token(in, expected.c_str());
    if (token != expected)
        throw std::runtime_error("expected '" + expected + "', found '" + token + "'");
}

/// `<key> <value>` pair where the key is fixed.
inline std::string read_field(std::istream& in, const std::string& key) {
    expect_token(in, key);
    return read_token(in, key.c_str());
}

inline double read_double_field(std::istream& in, const std::string& key) {
    return parse_double(read_field(in, key));
}

inline long long read_int_field(std::istream& in, const std::string& key) {
    return parse_int(read_field(in, key));
}

inline std::vector<double> read_doubles(std::istream& in, std::size_t count, const char* what) {
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i)
        values[i] = parse_double(read_token(in, what));
    return values;
}

inline void write_doubles(std::ostream& out, const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out << ' ';
        out << fmt(values[i]);
    }
}

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> parts;
    std::string part;
    std::istringstream ss(line);
    while (std::getline(ss, part, sep)) parts.push_back(part);
    if (!line.empty() && line.back() == sep) parts.push_back("");
    return parts;
}

}  // namespace qmarl::textio
