#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dmsc/errors.hpp"

namespace dmsc {

/// Full-precision double formatting shared by every text artifact so that
/// save/load round trips are bit-exact.
void write_double(std::ostream& out, double value);

/// Opens `path` for writing, throwing config_error on failure.
std::ofstream open_for_write(const std::filesystem::path& path);

/// Line-oriented reader that carries the file path and current line number
/// into parse errors.
class LineReader {
public:
    explicit LineReader(const std::filesystem::path& path);

    /// Next line; throws parse_error at EOF.
    std::string next();
    /// Next line parsed into a token stream.
    std::istringstream tokens();
    /// Reads a line and checks it equals `literal` exactly.
    void expect(const std::string& literal);
    /// Builds a parse_error pointing at the current line.
    [[nodiscard]] parse_error fail(const std::string& message) const;

    const std::string& path() const { return path_; }
    std::size_t line() const { return line_; }

private:
    std::ifstream in_;
    std::string path_;
    std::size_t line_ = 0;
};

}  // namespace dmsc
