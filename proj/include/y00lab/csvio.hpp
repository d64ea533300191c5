#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "y00lab/errors.hpp"

namespace y00lab::io {

constexpr const char* kToolVersion = "0.1.0";

/// FNV-1a over raw bytes; stamped into artifact headers so outputs can be
/// traced back to the exact config that produced them.
inline std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw config_error("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

/// Shortest round-trippable decimal form; locale independent, so artifacts
/// are byte-identical across runs.
inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // prefer the shortest representation that round-trips
    for (int prec = 1; prec <= 17; ++prec) {
        char probe[64];
        std::snprintf(probe, sizeof probe, "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(probe, "%lf", &back);
        if (back == v || (back != back && v != v)) return probe;
    }
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, std::uint64_t config_hash) : out_(path) {
        if (!out_) throw config_error("cannot write '" + path + "'");
        char head[96];
        std::snprintf(head, sizeof head, "# tool=y00lab %s config=%016llx", kToolVersion,
                      static_cast<unsigned long long>(config_hash));
        out_ << head << "\n";
    }

    void comment(const std::string& text) { out_ << "# " << text << "\n"; }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ",";
            out_ << cells[i];
        }
        out_ << "\n";
    }

private:
    std::ofstream out_;
};

} // namespace y00lab::io
