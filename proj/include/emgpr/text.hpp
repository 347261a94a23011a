#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace emgpr::text {

/// Shortest decimal rendering that parses back to the identical double.
std::string format_double(double v);

/// Parses a full token as a double; throws ParseError with `context` on failure.
double parse_double(std::string_view token, std::string_view context);

long long parse_int(std::string_view token, std::string_view context);

std::vector<std::string_view> split(std::string_view line, char sep);

std::string_view trim(std::string_view s);

/// Whitespace-separated token stream used by the model file format.
class TokenWriter {
public:
    explicit TokenWriter(std::ostream& out) : out_(out) {}

    TokenWriter& word(std::string_view w);
    TokenWriter& number(double v);
    TokenWriter& count(std::size_t v);
    TokenWriter& integer(long long v);
    TokenWriter& endl();

private:
    void sep();

    std::ostream& out_;
    bool line_start_ = true;
};

class TokenReader {
public:
    explicit TokenReader(std::istream& in) : in_(in) {}

    std::string word();
    /// Reads a word and throws FormatError unless it equals `keyword`.
    void expect(std::string_view keyword);
    double number();
    std::size_t count();
    long long integer();

private:
    std::istream& in_;
};

} // namespace emgpr::text
