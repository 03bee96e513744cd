#include "dmsc/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>

#include "dmsc/errors.hpp"
#include "dmsc/rng.hpp"

namespace dmsc {

namespace {

// Unordered pair key with i < k.
std::pair<std::size_t, std::size_t> ordered(std::size_t a, std::size_t b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

}  // namespace

ConstraintSet generate_constraints(const std::vector<int>& labels, double proportion,
                                   std::uint64_t seed) {
    const std::size_t n = labels.size();
    if (n < 2) throw config_error("generate_constraints: need at least two labelled samples");
    if (proportion < 0.0 || !std::isfinite(proportion)) {
        throw config_error("generate_constraints: proportion must be finite and >= 0");
    }
    const std::size_t budget = n * (n - 1) / 2;
    const auto requested = static_cast<std::size_t>(std::llround(proportion * static_cast<double>(n)));
    if (requested > budget) {
        throw config_error("generate_constraints: requested " + std::to_string(requested) +
                           " pairs but only " + std::to_string(budget) + " distinct pairs exist");
    }

    Rng rng(seed);
    ConstraintSet out;
    out.sample_count = n;
    out.pairs.reserve(requested);

    std::set<std::pair<std::size_t, std::size_t>> seen;
    if (requested > budget / 2) {
        // Dense request: materialise every pair and take a random prefix.
        std::vector<std::pair<std::size_t, std::size_t>> all;
        all.reserve(budget);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = i + 1; k < n; ++k) all.emplace_back(i, k);
        }
        // Partial Fisher-Yates: only the prefix we keep needs shuffling.
        for (std::size_t j = 0; j < requested; ++j) {
            const std::size_t pick = j + rng.index(all.size() - j);
            std::swap(all[j], all[pick]);
        }
        all.resize(requested);
        for (const auto& [i, k] : all) {
            out.pairs.push_back({i, k, labels[i] == labels[k] ? +1 : -1});
        }
        return out;
    }
    while (out.pairs.size() < requested) {
        std::size_t a = rng.index(n);
        std::size_t b = rng.index(n);
        if (a == b) continue;
        const auto key = ordered(a, b);
        if (!seen.insert(key).second) continue;
        out.pairs.push_back({key.first, key.second, labels[key.first] == labels[key.second] ? +1 : -1});
    }
    return out;
}

void save_constraints(const ConstraintSet& constraints, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot write file: " + path.string());
    for (const ConstraintPair& pair : constraints.pairs) {
        out << pair.i << ' ' << pair.k << ' ' << pair.link << '\n';
    }
    if (!out) throw config_error("failed while writing: " + path.string());
}

ConstraintSet load_constraints(const std::filesystem::path& path, std::size_t sample_count) {
    std::ifstream in(path);
    if (!in) throw parse_error(path.string(), 0, "cannot open file");

    ConstraintSet out;
    out.sample_count = sample_count;
    std::set<std::pair<std::size_t, std::size_t>> seen;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        long long i, k, c;
        if (!(row >> i >> k >> c)) throw parse_error(path.string(), line_no, "expected 'i k c'");
        if (c != +1 && c != -1) throw parse_error(path.string(), line_no, "c must be +1 or -1");
        if (i < 0 || k < 0 || static_cast<std::size_t>(i) >= sample_count ||
            static_cast<std::size_t>(k) >= sample_count) {
            throw parse_error(path.string(), line_no,
                              "sample index out of range for " + std::to_string(sample_count) + " samples");
        }
        if (i == k) throw parse_error(path.string(), line_no, "pair links a sample to itself");
        const auto key = ordered(static_cast<std::size_t>(i), static_cast<std::size_t>(k));
        if (!seen.insert(key).second) throw parse_error(path.string(), line_no, "duplicate pair");
        out.pairs.push_back({key.first, key.second, static_cast<int>(c)});
    }
    return out;
}

}  // namespace dmsc
