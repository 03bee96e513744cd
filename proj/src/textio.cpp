#include "dmsc/textio.hpp"

#include <cstdio>

namespace dmsc {

void write_double(std::ostream& out, double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    out << buf;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write file: " + path.string());
    return out;
}

LineReader::LineReader(const std::filesystem::path& path) : in_(path), path_(path.string()) {
    if (!in_) throw parse_error(path_, 0, "cannot open file");
}

std::string LineReader::next() {
    std::string line;
    if (!std::getline(in_, line)) throw parse_error(path_, line_ + 1, "unexpected end of file");
    ++line_;
    return line;
}

std::istringstream LineReader::tokens() { return std::istringstream(next()); }

void LineReader::expect(const std::string& literal) {
    if (next() != literal) throw fail("expected '" + literal + "'");
}

parse_error LineReader::fail(const std::string& message) const {
    return parse_error(path_, line_, message);
}

}  // namespace dmsc
