#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace tomolab {

// Shortest decimal string that parses back to the same double.
std::string fmt(double v);
std::string fmt(long long v);

// Strict full-string parse; throws std::invalid_argument naming `what`.
double parse_double(const std::string& s, const std::string& what);
long long parse_int(const std::string& s, const std::string& what);

class CsvWriter {
public:
    // Metadata goes first as "# key=value" lines.
    void meta(const std::string& key, const std::string& value);
    void header(std::vector<std::string> cols);
    void row(const std::vector<std::string>& cells);
    std::string str() const;

private:
    std::vector<std::pair<std::string, std::string>> meta_;
    std::vector<std::string> header_;
    std::vector<std::string> lines_;
};

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

} // namespace tomolab
