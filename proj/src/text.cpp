#include "emgpr/text.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "emgpr/error.hpp"

namespace emgpr::text {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) {
        throw Error(ErrorClass::internal, "failed to format double");
    }
    return std::string(buf, ptr);
}

double parse_double(std::string_view token, std::string_view context) {
    token = trim(token);
    double v = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (!token.empty() && *first == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (token.empty() || ec != std::errc{} || ptr != last) {
        throw ParseError("not a number '" + std::string(token) + "' (" + std::string(context) + ")");
    }
    return v;
}

long long parse_int(std::string_view token, std::string_view context) {
    token = trim(token);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size()) {
        throw ParseError("not an integer '" + std::string(token) + "' (" + std::string(context) +
                         ")");
    }
    return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

void TokenWriter::sep() {
    if (!line_start_) {
        out_ << ' ';
    }
    line_start_ = false;
}

TokenWriter& TokenWriter::word(std::string_view w) {
    sep();
    out_ << w;
    return *this;
}

TokenWriter& TokenWriter::number(double v) {
    sep();
    out_ << format_double(v);
    return *this;
}

TokenWriter& TokenWriter::count(std::size_t v) {
    sep();
    out_ << v;
    return *this;
}

TokenWriter& TokenWriter::integer(long long v) {
    sep();
    out_ << v;
    return *this;
}

TokenWriter& TokenWriter::endl() {
    out_ << '\n';
    line_start_ = true;
    return *this;
}

std::string TokenReader::word() {
    std::string w;
    if (!(in_ >> w)) {
        throw FormatError("unexpected end of model file");
    }
    return w;
}

void TokenReader::expect(std::string_view keyword) {
    const auto w = word();
    if (w != keyword) {
        throw FormatError("expected '" + std::string(keyword) + "' but found '" + w + "'");
    }
}

double TokenReader::number() { return parse_double(word(), "model file"); }

std::size_t TokenReader::count() {
    const auto v = parse_int(word(), "model file");
    if (v < 0) {
        throw FormatError("negative count in model file");
    }
    return static_cast<std::size_t>(v);
}

long long TokenReader::integer() { return parse_int(word(), "model file"); }

} // namespace emgpr::text
